//! `qhtt` — batch verifier and simulator for `.qh` files.
//!
//! Exit codes: 0 all pass, 1 verification failure, 2 parse/type error,
//! 3 I/O error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qhtt_core::checker::check_program;
use qhtt_core::config::{seed_from_env, Config};
use qhtt_core::props::BitFn;
use qhtt_core::report::{annotate_source, report_json};
use qhtt_core::simulator::{run, run_shots, SimInputs};
use qhtt_core::surface::parse;

#[derive(Parser)]
#[command(name = "qhtt", version, about = "Verifying frontend for the QHTT surface language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CheckOpts {
    /// Comparison tolerance for inclusion and membership decisions.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on simultaneously live registers.
    #[arg(long)]
    max_registers: Option<usize>,
    /// Instantiations per symbolic parameter family.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for the deterministic sample set (QHTT_SEED also works).
    #[arg(long)]
    seed: Option<u64>,
}

impl CheckOpts {
    fn config(&self) -> Config {
        let mut c = Config::default();
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(m) = self.max_registers {
            c.max_registers = m;
        }
        if let Some(s) = self.samples {
            c.samples = s;
        }
        c.seed = self.seed.unwrap_or_else(seed_from_env);
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check every declaration of the given files.
    Check {
        files: Vec<PathBuf>,
        /// Write the machine-readable report (JSON) to this path.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print the source annotated with strongest postconditions.
        #[arg(long)]
        annotate: bool,
        /// Check files in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Run a declaration concretely and histogram the outcomes.
    Simulate {
        file: PathBuf,
        decl: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1024)]
        shots: usize,
        /// Qubit input state, e.g. --in q=0.6,0.8 (amplitudes a0,a1;
        /// each may be complex: re+imi).
        #[arg(long = "in", value_name = "NAME=A0,A1")]
        inputs: Vec<String>,
        /// Bit parameter value, e.g. --bit x=1.
        #[arg(long = "bit", value_name = "NAME=0|1")]
        bits: Vec<String>,
        /// Oracle case for `bit -> bit` parameters.
        #[arg(long, value_name = "const0|const1|id|not")]
        oracle: Option<String>,
        /// Dump the final state of a single trajectory.
        #[arg(long)]
        state: bool,
        /// Print the histogram as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the file with its strongest-postcondition annotations.
    Annotate {
        file: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { files, json, annotate, jobs, opts } => {
            cmd_check(&files, json.as_deref(), annotate, jobs, &opts.config())
        }
        Command::Simulate { file, decl, seed, shots, inputs, bits, oracle, state, json } => {
            cmd_simulate(&file, &decl, seed, shots, &inputs, &bits, oracle.as_deref(), state, json)
        }
        Command::Annotate { file, opts } => cmd_annotate(&file, &opts.config()),
    };
    ExitCode::from(code)
}

/// Per-file result: severity class (0 pass, 1 fail, 2 type, 3 io), the
/// human-readable summary, and the JSON report.
fn check_one(path: &std::path::Path, config: &Config) -> (u8, String, Option<serde_json::Value>) {
    let display = path.display().to_string();
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return (3, format!("{display}: {e}"), None),
    };
    let program = match parse(&src) {
        Ok(p) => p,
        Err(e) => return (2, format!("{display}: parse error: {e}"), None),
    };
    let outcome = check_program(&program, config);
    let mut lines = vec![display.clone()];
    for d in &outcome.decls {
        let mode = if d
            .obligations()
            .any(|o| o.verdict.mode == qhtt_core::props::Mode::Sampled)
        {
            "sampled"
        } else {
            "exact"
        };
        if let Some(e) = &d.error {
            lines.push(format!("  {}: ERROR: {e}", d.name));
            continue;
        }
        lines.push(format!(
            "  {}: {} ({mode}, {:.1} ms)",
            d.name,
            if d.passed { "PASS" } else { "FAIL" },
            d.millis
        ));
        for c in &d.cases {
            if let Some(e) = &c.error {
                lines.push(format!("    [{}] ERROR: {e}", c.label));
            }
            for o in &c.obligations {
                if !o.verdict.holds {
                    let label = if c.label.is_empty() {
                        String::new()
                    } else {
                        format!("[{}] ", c.label)
                    };
                    lines.push(format!(
                        "    {label}{} {} failed: {}",
                        o.span,
                        o.rule.as_str(),
                        o.after
                    ));
                    for t in &o.trace {
                        lines.push(format!("      {t}"));
                    }
                    if let Some(cx) = &o.verdict.counterexample {
                        lines.push(format!("      counterexample: {cx}"));
                    }
                }
            }
        }
    }
    let class = if outcome.has_type_error() {
        2
    } else if !outcome.passed() {
        1
    } else {
        0
    };
    (class, lines.join("\n"), Some(report_json(&display, &outcome)))
}

fn cmd_check(
    files: &[PathBuf],
    json_out: Option<&std::path::Path>,
    annotate: bool,
    jobs: usize,
    config: &Config,
) -> u8 {
    if files.is_empty() {
        eprintln!("qhtt check: no input files");
        return 3;
    }
    let results: Vec<(u8, String, Option<serde_json::Value>)> = if jobs > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = files
                .iter()
                .map(|f| scope.spawn(move || check_one(f, config)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    } else {
        files.iter().map(|f| check_one(f, config)).collect()
    };

    let mut worst = 0u8;
    let mut reports = Vec::new();
    for (class, text, report) in results {
        println!("{text}");
        worst = worst.max(class);
        if let Some(r) = report {
            reports.push(r);
        }
    }
    if let Some(path) = json_out {
        let value = if reports.len() == 1 {
            reports.pop().unwrap()
        } else {
            serde_json::Value::Array(reports)
        };
        if let Err(e) = std::fs::write(path, serde_json::to_string_pretty(&value).unwrap()) {
            eprintln!("qhtt check: cannot write {}: {e}", path.display());
            return 3;
        }
    }
    if annotate && worst < 2 {
        for f in files {
            if let Ok(src) = std::fs::read_to_string(f) {
                if let Ok(program) = parse(&src) {
                    let outcome = check_program(&program, config);
                    println!("{}", annotate_source(&src, &program, &outcome));
                }
            }
        }
    }
    worst
}

fn cmd_annotate(file: &std::path::Path, config: &Config) -> u8 {
    let src = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return 3;
        }
    };
    let program = match parse(&src) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: parse error: {e}", file.display());
            return 2;
        }
    };
    let outcome = check_program(&program, config);
    print!("{}", annotate_source(&src, &program, &outcome));
    if outcome.has_type_error() {
        2
    } else if !outcome.passed() {
        1
    } else {
        0
    }
}

fn parse_complex(s: &str) -> Option<num_complex::Complex64> {
    let s = s.trim();
    if let Ok(re) = s.parse::<f64>() {
        return Some(num_complex::Complex64::new(re, 0.0));
    }
    // Forms like a+bi / a-bi / bi.
    if let Some(body) = s.strip_suffix('i') {
        for (i, c) in body.char_indices().rev() {
            if (c == '+' || c == '-') && i > 0 {
                let re: f64 = body[..i].parse().ok()?;
                let im_str = &body[i..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().ok()?
                };
                return Some(num_complex::Complex64::new(re, im));
            }
        }
        let im: f64 = if body.is_empty() { 1.0 } else { body.parse().ok()? };
        return Some(num_complex::Complex64::new(0.0, im));
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    file: &std::path::Path,
    decl: &str,
    seed: u64,
    shots: usize,
    input_flags: &[String],
    bit_flags: &[String],
    oracle: Option<&str>,
    dump_state: bool,
    json: bool,
) -> u8 {
    let src = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return 3;
        }
    };
    let program = match parse(&src) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: parse error: {e}", file.display());
            return 2;
        }
    };

    let mut inputs = SimInputs::default();
    for flag in input_flags {
        let Some((name, amps)) = flag.split_once('=') else {
            eprintln!("--in expects NAME=A0,A1 (got `{flag}`)");
            return 2;
        };
        let parts: Vec<&str> = amps.split(',').collect();
        if parts.len() != 2 {
            eprintln!("--in {name}: need two amplitudes");
            return 2;
        }
        let (Some(a0), Some(a1)) = (parse_complex(parts[0]), parse_complex(parts[1])) else {
            eprintln!("--in {name}: cannot parse amplitudes");
            return 2;
        };
        inputs.qubits.insert(name.to_string(), [a0, a1]);
    }
    for flag in bit_flags {
        let Some((name, v)) = flag.split_once('=') else {
            eprintln!("--bit expects NAME=0|1");
            return 2;
        };
        match v {
            "0" => inputs.bits.insert(name.to_string(), 0),
            "1" => inputs.bits.insert(name.to_string(), 1),
            _ => {
                eprintln!("--bit {name}: value must be 0 or 1");
                return 2;
            }
        };
    }
    if let Some(o) = oracle {
        match BitFn::from_name(o) {
            Some(f) => inputs.oracle = Some(f),
            None => {
                eprintln!("--oracle must be const0, const1, id, or not");
                return 2;
            }
        }
    }

    match run_shots(&program, decl, &inputs, seed, shots) {
        Ok(hist) => {
            if json {
                let map: BTreeMap<&String, &usize> = hist.iter().collect();
                println!("{}", serde_json::to_string_pretty(&map).unwrap());
            } else {
                println!("outcome histogram over {shots} shot(s):");
                for (k, v) in &hist {
                    let label = if k.is_empty() { "(none)" } else { k };
                    println!("  {label:>8}  {v}");
                }
            }
        }
        Err(e) => {
            eprintln!("simulate: {e}");
            return 2;
        }
    }

    if dump_state {
        match run(&program, decl, &inputs, seed) {
            Ok(t) => {
                println!("final state over ({}):", t.final_state.names.join(", "));
                let n = t.final_state.names.len();
                for (i, amp) in t.final_state.vec.iter().enumerate() {
                    if amp.norm_sqr() > 1e-18 {
                        let bits: String = (0..n)
                            .map(|p| if (i >> (n - 1 - p)) & 1 == 1 { '1' } else { '0' })
                            .collect();
                        println!("  |{bits}⟩  {:+.6}{:+.6}i", amp.re, amp.im);
                    }
                }
            }
            Err(e) => {
                eprintln!("simulate: {e}");
                return 2;
            }
        }
    }
    0
}
