//! Python bindings: parse, check, annotate, and simulate QHTT programs
//! in-process.
//!
//! Usage from Python:
//!
//!     import pyqhtt
//!     result = pyqhtt.check(source)
//!     if not result.passed:
//!         print(result.failures())
//!     hist = pyqhtt.simulate(source, "bell00", shots=1000)

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qhtt_core::checker::check_program;
use qhtt_core::config::Config;
use qhtt_core::props::BitFn;
use qhtt_core::report::{annotate_source, report_json};
use qhtt_core::simulator::{run_shots, SimInputs};
use qhtt_core::surface::{parse, pretty_program};

fn config_from(
    tol: Option<f64>,
    max_registers: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> Config {
    let mut c = Config::default();
    if let Some(t) = tol {
        c.tol = t;
    }
    if let Some(m) = max_registers {
        c.max_registers = m;
    }
    if let Some(s) = samples {
        c.samples = s;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    c
}

/// Result of checking one source file.
#[pyclass]
struct CheckResult {
    #[pyo3(get)]
    passed: bool,
    /// (declaration, verdict) pairs in source order.
    #[pyo3(get)]
    verdicts: Vec<(String, String)>,
    report: serde_json::Value,
    failures: Vec<String>,
}

#[pymethods]
impl CheckResult {
    /// The machine-readable report as a JSON string (stable key order).
    fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).unwrap()
    }

    /// Human-readable descriptions of every failed obligation.
    fn failures(&self) -> Vec<String> {
        self.failures.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "CheckResult(passed={}, decls={})",
            self.passed,
            self.verdicts.len()
        )
    }
}

/// Check every declaration in `source`.
#[pyfunction]
#[pyo3(signature = (source, *, tol=None, max_registers=None, samples=None, seed=None))]
fn check(
    source: &str,
    tol: Option<f64>,
    max_registers: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> PyResult<CheckResult> {
    let program = parse(source).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let config = config_from(tol, max_registers, samples, seed);
    let outcome = check_program(&program, &config);
    let mut failures = Vec::new();
    for d in &outcome.decls {
        if let Some(e) = &d.error {
            failures.push(format!("{}: {e}", d.name));
        }
        for c in &d.cases {
            if let Some(e) = &c.error {
                failures.push(format!("{}[{}]: {e}", d.name, c.label));
            }
            for o in &c.obligations {
                if !o.verdict.holds {
                    let mut msg = format!(
                        "{}: {} {} failed: {}",
                        d.name,
                        o.span,
                        o.rule.as_str(),
                        o.after
                    );
                    for t in &o.trace {
                        msg.push_str(&format!(" ({t})"));
                    }
                    failures.push(msg);
                }
            }
        }
    }
    Ok(CheckResult {
        passed: outcome.passed(),
        verdicts: outcome
            .decls
            .iter()
            .map(|d| {
                let v = if d.error.is_some() {
                    "error"
                } else if d.passed {
                    "pass"
                } else {
                    "fail"
                };
                (d.name.clone(), v.to_string())
            })
            .collect(),
        report: report_json("<python>", &outcome),
        failures,
    })
}

/// The source annotated with strongest-postcondition comment lines.
#[pyfunction]
#[pyo3(signature = (source, *, tol=None, max_registers=None, samples=None, seed=None))]
fn annotate(
    source: &str,
    tol: Option<f64>,
    max_registers: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> PyResult<String> {
    let program = parse(source).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let config = config_from(tol, max_registers, samples, seed);
    let outcome = check_program(&program, &config);
    Ok(annotate_source(source, &program, &outcome))
}

/// Canonical pretty-printed form of the program (parse/pretty round trip).
#[pyfunction]
fn pretty(source: &str) -> PyResult<String> {
    let program = parse(source).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(pretty_program(&program))
}

/// Run a declaration concretely; returns the outcome histogram.
#[pyfunction]
#[pyo3(signature = (source, decl, *, shots=1024, seed=0, inputs=None, bits=None, oracle=None))]
fn simulate(
    source: &str,
    decl: &str,
    shots: usize,
    seed: u64,
    inputs: Option<BTreeMap<String, (Complex64, Complex64)>>,
    bits: Option<BTreeMap<String, u8>>,
    oracle: Option<&str>,
) -> PyResult<BTreeMap<String, usize>> {
    let program = parse(source).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let mut sim_inputs = SimInputs::default();
    if let Some(map) = inputs {
        for (name, (a0, a1)) in map {
            sim_inputs.qubits.insert(name, [a0, a1]);
        }
    }
    if let Some(map) = bits {
        sim_inputs.bits = map;
    }
    if let Some(o) = oracle {
        sim_inputs.oracle = Some(
            BitFn::from_name(o)
                .ok_or_else(|| PyValueError::new_err("oracle must be const0|const1|id|not"))?,
        );
    }
    run_shots(&program, decl, &sim_inputs, seed, shots)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn pyqhtt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CheckResult>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(annotate, m)?)?;
    m.add_function(wrap_pyfunction!(pretty, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
