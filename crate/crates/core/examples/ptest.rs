use qhtt_core::checker::check_program;
use qhtt_core::surface::parse;
use qhtt_core::Config;

fn main() {
    let src = std::fs::read_to_string(std::env::args().nth(1).unwrap()).unwrap();
    let prog = parse(&src).expect("parse");
    let out = check_program(&prog, &Config::default());
    for d in &out.decls {
        println!("== {} : {} ({:.1} ms)", d.name, if d.passed { "PASS" } else { "FAIL" }, d.millis);
        if let Some(e) = &d.error {
            println!("   decl error: {e}");
        }
        for c in &d.cases {
            if !c.label.is_empty() {
                println!("  case [{}]: {}", c.label, if c.passed { "pass" } else { "fail" });
            }
            if let Some(e) = &c.error {
                println!("   case error: {e}");
            }
            for o in &c.obligations {
                println!(
                    "   [{}] {} {} : {} => {}",
                    o.rule.as_str(),
                    o.span,
                    if o.verdict.holds { "ok " } else { "FAIL" },
                    o.after,
                    o.verdict.mode.as_str()
                );
                for t in &o.trace {
                    println!("       | {t}");
                }
            }
            for s in &c.steps {
                for l in &s.lines {
                    println!("     {} {}", s.span, l);
                }
            }
        }
    }
    std::process::exit(if out.passed() { 0 } else { 1 });
}
