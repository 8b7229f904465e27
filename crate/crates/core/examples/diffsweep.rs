use qhtt_core::checker::check_program;
use qhtt_core::simulator::{diff::differential_check, gen::random_program};
use qhtt_core::surface::parse;
use qhtt_core::Config;

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed = 0x5148_3737u64;
    let config = Config::default();
    let start = std::time::Instant::now();
    for i in 0..n {
        let src = random_program(seed, i);
        let prog = parse(&src).unwrap_or_else(|e| panic!("gen {i} parse: {e}\n{src}"));
        let out = check_program(&prog, &config);
        let decl = &out.decls[0];
        if !decl.passed {
            panic!("gen {i} failed to check:\n{src}\nerr: {:?}", decl.error);
        }
        let case = &decl.cases[0];
        if let Err(d) = differential_check(&prog, &prog.decls[0].name, case, seed ^ i, 16, 1e-7) {
            panic!("gen {i}: {d}\n{src}");
        }
    }
    println!("{} programs x 16 trajectories OK in {:.2?}", n, start.elapsed());
}
