//! Differential harness: every simulator trajectory, projected onto its
//! measurement outcomes, must match the checker's strongest-postcondition
//! state step by step.

use num_complex::Complex64;

use crate::checker::{BitBinding, CaseReport, SymState};
use crate::linalg::cvec;
use crate::surface::ast::Program;

use super::{run, shot_seed, SimInputs, Trajectory};

#[derive(Debug, Clone)]
pub struct Divergence {
    pub seed: u64,
    pub step: usize,
    pub detail: String,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "divergence at seed {} step {}: {}", self.seed, self.step, self.detail)
    }
}

/// Project the checker's state onto the trajectory's outcomes so far and
/// return the normalized residual state over the live program registers
/// (in layout order) together with their names.
fn branch_state(
    state: &SymState,
    outcomes: &[(String, u8)],
) -> Result<(Vec<Complex64>, Vec<String>), String> {
    let (vec, order) = state.assemble_all();
    let mut amps = vec.instantiate(&[]);
    let mut names: Vec<String> = order
        .iter()
        .map(|&id| state.info(id).name.clone())
        .collect();
    let mut regs: Vec<_> = order;

    for (bit, out) in outcomes {
        let reg = match state.bit_links.get(bit) {
            Some(BitBinding::Ghost(r)) => *r,
            other => return Err(format!("bit `{bit}` has no ghost link ({other:?})")),
        };
        let pos = regs
            .iter()
            .position(|r| *r == reg)
            .ok_or_else(|| format!("ghost register for `{bit}` missing"))?;
        let n = regs.len();
        let shift = n - 1 - pos;
        let mut next = Vec::with_capacity(amps.len() / 2);
        for (i, a) in amps.iter().enumerate() {
            if ((i >> shift) & 1) as u8 == *out {
                next.push(*a);
            }
        }
        amps = next;
        regs.remove(pos);
        names.remove(pos);
    }

    let norm = cvec::norm(&amps);
    if norm < 1e-9 {
        return Err("projected onto a zero-probability branch".into());
    }
    let amps = cvec::scale(&amps, Complex64::new(1.0 / norm, 0.0));
    Ok((amps, names))
}

/// Compare one trajectory against the checker's per-step states.
/// `case.steps[0]` is the initial state; step `k` of the simulator log
/// corresponds to `case.steps[k + 1]`.
pub fn compare_trajectory(
    case: &CaseReport,
    traj: &Trajectory,
    seed: u64,
    tol: f64,
) -> Result<(), Divergence> {
    let mut outcomes: Vec<(String, u8)> = Vec::new();
    for (k, rec) in traj.log.iter().enumerate() {
        if let Some((bit, out)) = &rec.outcome {
            outcomes.push((bit.clone(), *out));
        }
        let step = case.steps.get(k + 1).ok_or_else(|| Divergence {
            seed,
            step: k,
            detail: "checker produced fewer steps than the simulator".into(),
        })?;
        let state = step.state.as_ref().ok_or_else(|| Divergence {
            seed,
            step: k,
            detail: "checker step carries no state".into(),
        })?;
        let (expect, names) = branch_state(state, &outcomes).map_err(|detail| Divergence {
            seed,
            step: k,
            detail,
        })?;
        if names != rec.state.names {
            return Err(Divergence {
                seed,
                step: k,
                detail: format!(
                    "register layouts differ: checker {names:?} vs simulator {:?}",
                    rec.state.names
                ),
            });
        }
        if !cvec::eq_up_to_phase(&expect, &rec.state.vec, tol) {
            return Err(Divergence {
                seed,
                step: k,
                detail: "projected states differ beyond tolerance".into(),
            });
        }
    }
    Ok(())
}

/// Run `n_seeds` trajectories of a concrete (parameter-free) declaration
/// and compare each against the checker's strongest-postcondition states.
pub fn differential_check(
    program: &Program,
    decl_name: &str,
    case: &CaseReport,
    base_seed: u64,
    n_seeds: u64,
    tol: f64,
) -> Result<(), Divergence> {
    for i in 0..n_seeds {
        let seed = shot_seed(base_seed, i);
        let traj = run(program, decl_name, &SimInputs::default(), seed).map_err(|e| {
            Divergence { seed, step: 0, detail: e.to_string() }
        })?;
        compare_trajectory(case, &traj, seed, tol)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_program;
    use crate::surface::parse;
    use crate::Config;

    #[test]
    fn bell_program_agrees_with_checker() {
        let src = "bell : QST (u: unit) (requires {⊤}) (ensures {⊤})\n\
                   bell = do {\n  a <- init 0;\n  b <- init 0;\n  apply H to (a);\n\
                     apply CX to (a, b);\n  x <- meas a;\n  y <- meas b;\n  return ()\n}\n";
        let prog = parse(src).unwrap();
        let out = check_program(&prog, &Config::default());
        assert!(out.passed());
        let case = &out.decls[0].cases[0];
        differential_check(&prog, "bell", case, 0x5148_3737, 16, 1e-7).unwrap();
    }

    #[test]
    fn injected_wrong_gate_diverges_at_the_gate_step() {
        // Check a program whose H was replaced by X, then compare against
        // trajectories of the original program: the fault shows at step 1
        // (0-based: init is step 0).
        let good = "p : QST (u: unit) (requires {⊤}) (ensures {⊤})\n\
                    p = do {\n  a <- init 0;\n  apply H to (a);\n  return ()\n}\n";
        let bad = "p : QST (u: unit) (requires {⊤}) (ensures {⊤})\n\
                   p = do {\n  a <- init 0;\n  apply X to (a);\n  return ()\n}\n";
        let good_prog = parse(good).unwrap();
        let bad_prog = parse(bad).unwrap();
        let wrong = check_program(&bad_prog, &Config::default());
        let case = &wrong.decls[0].cases[0];
        let err = differential_check(&good_prog, "p", case, 1, 4, 1e-7).unwrap_err();
        assert_eq!(err.step, 1);
    }
}
