//! Machine-readable reports and annotated listings.
//!
//! The JSON layout is stable: objects are emitted through `serde_json`'s
//! default map (ordered by key), so serialized reports are byte-stable for
//! identical inputs.

use serde_json::{json, Value};

use crate::checker::{DeclOutcome, ProgramOutcome};
use crate::surface::ast::Program;

fn verdict_str(passed: bool, errored: bool) -> &'static str {
    if errored {
        "error"
    } else if passed {
        "pass"
    } else {
        "fail"
    }
}

pub fn decl_json(d: &DeclOutcome) -> Value {
    let cases: Vec<Value> = d
        .cases
        .iter()
        .map(|c| {
            let obligations: Vec<Value> = c
                .obligations
                .iter()
                .map(|o| {
                    json!({
                        "span": { "line": o.span.line, "col": o.span.col },
                        "rule": o.rule.as_str(),
                        "propositionBefore": o.before,
                        "propositionAfter": o.after,
                        "verdict": if o.verdict.holds { "pass" } else { "fail" },
                        "mode": o.verdict.mode.as_str(),
                        "counterexample": o.verdict.counterexample,
                        "trace": o.trace,
                    })
                })
                .collect();
            json!({
                "label": c.label,
                "verdict": verdict_str(c.passed, c.error.is_some()),
                "vacuous": c.vacuous,
                "error": c.error.as_ref().map(|e| e.to_string()),
                "obligations": obligations,
            })
        })
        .collect();
    json!({
        "name": d.name,
        "verdict": verdict_str(d.passed, d.error.is_some() || d.cases.iter().any(|c| c.error.is_some())),
        "error": d.error.as_ref().map(|e| e.to_string()),
        "timings_ms": (d.millis * 1000.0).round() / 1000.0,
        "cases": cases,
    })
}

pub fn report_json(file: &str, outcome: &ProgramOutcome) -> Value {
    json!({
        "file": file,
        "verdict": verdict_str(outcome.passed(), outcome.has_type_error()),
        "declarations": outcome.decls.iter().map(decl_json).collect::<Vec<_>>(),
    })
}

/// Interleave the source with `-- {...}` proposition lines after each
/// statement, one per checker step, in the style of annotated listings.
/// Declarations with several opaque-input cases prefix each line with the
/// case label.
pub fn annotate_source(src: &str, program: &Program, outcome: &ProgramOutcome) -> String {
    let line_starts: Vec<usize> = std::iter::once(0)
        .chain(src.char_indices().filter(|(_, c)| *c == '\n').map(|(i, _)| i + 1))
        .collect();
    let line_of = |byte: usize| -> usize {
        match line_starts.binary_search(&byte) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    };
    let src_lines: Vec<&str> = src.lines().collect();

    // insertions[line] = annotation lines to print after that 0-based line.
    let mut insertions: Vec<Vec<String>> = vec![Vec::new(); src_lines.len() + 1];

    for decl in &program.decls {
        let Some(d) = outcome.decl(&decl.name) else { continue };
        let multi = d.cases.len() > 1;
        for case in &d.cases {
            for step in &case.steps {
                // The first step records the initial state over the whole
                // declaration span; the precondition already shows it.
                if step.span.start == decl.span.start && step.span.end == decl.span.end {
                    continue;
                }
                let end_line = line_of(step.span.end.min(src.len().saturating_sub(1)));
                let indent: String = src_lines
                    .get(line_of(step.span.start))
                    .map(|l| l.chars().take_while(|c| c.is_whitespace()).collect())
                    .unwrap_or_default();
                for text in &step.lines {
                    let prefix = if multi && !case.label.is_empty() {
                        format!("[{}] ", case.label)
                    } else {
                        String::new()
                    };
                    insertions[end_line].push(format!("{indent}-- {prefix}{text}"));
                }
            }
        }
    }

    let mut out = String::new();
    for (i, line) in src_lines.iter().enumerate() {
        out.push_str(line);
        out.push('\n');
        for ann in &insertions[i] {
            out.push_str(ann);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_program;
    use crate::surface::parse;
    use crate::Config;

    #[test]
    fn report_roundtrips_through_json() {
        let src = "f : QST (x: bit) (requires {⊤}) (ensures {⊤})\n\
                   f = do {\n  q <- init 0;\n  x <- meas q;\n  return x\n}\n";
        let prog = parse(src).unwrap();
        let out = check_program(&prog, &Config::default());
        let v = report_json("f.qh", &out);
        let s = serde_json::to_string_pretty(&v).unwrap();
        let v2: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v, v2);
        assert_eq!(v["verdict"], "pass");
    }

    #[test]
    fn annotation_is_deterministic() {
        let src = "f : QST (u: unit) (requires {⊤}) (ensures {⊤})\n\
                   f = do {\n  q <- init 0;\n  apply H to (q);\n  return ()\n}\n";
        let prog = parse(src).unwrap();
        let config = Config::default();
        let a = annotate_source(src, &prog, &check_program(&prog, &config));
        let b = annotate_source(src, &prog, &check_program(&prog, &config));
        assert_eq!(a, b);
        assert!(a.contains("-- {q =q |0⟩}"));
    }
}
