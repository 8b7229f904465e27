//! Deciding whether the current symbolic state satisfies a proposition:
//! subspace membership per sample for the quantum predicates, density-matrix
//! tests for the operational predicates, exact coefficient matching for
//! `=q` goals, and link lookups for classical bits.

use std::collections::BTreeMap;

use crate::config::COEFF_TOL;
use crate::linalg::cvec;
use crate::props::denote::{denote_subspace, desugar, subspace_expressible};
use crate::props::entail::{basis_projector_index, diag_is_uniform, render_sample};
use crate::props::{eval_bit, eval_state, EvalCtx, Mode, PropsError, SampleSet, Verdict};
use crate::surface::ast::{Name, PropAst};

use super::symstate::{BitBinding, RegId, SymState};
use super::typecheck::Scope;
use crate::props::VarKind;

pub struct SatisfyCtx<'a> {
    pub state: &'a SymState,
    pub ctx: &'a EvalCtx,
    pub samples: &'a SampleSet,
    pub kinds: &'a Scope,
    pub tol: f64,
}

impl<'a> SatisfyCtx<'a> {
    fn mode(&self) -> Mode {
        if self.samples.is_symbolic() {
            Mode::Sampled
        } else {
            Mode::Exact
        }
    }

    fn fail(&self, values: &[num_complex::Complex64]) -> Verdict {
        let cx = if self.samples.is_symbolic() {
            Some(render_sample(&self.ctx.params, values))
        } else {
            None
        };
        Verdict::fail(self.mode(), cx)
    }

    fn resolve(&self, name: &Name) -> Result<RegId, PropsError> {
        self.state
            .resolve(name)
            .ok_or_else(|| PropsError::Unresolved { name: name.clone() })
    }

    fn require_quantum(&self, pred: &str, vars: &[Name]) -> Result<(), PropsError> {
        for v in vars {
            match self.kinds.get(v) {
                Some(VarKind::Bit) | Some(VarKind::Prop) => {
                    return Err(PropsError::TypeError {
                        message: format!(
                            "{pred}: only defined for quantum variables (`{v}` is classical)"
                        ),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

pub fn satisfies(sc: &SatisfyCtx, p: &PropAst) -> Result<Verdict, PropsError> {
    match p {
        PropAst::Top(_) => Ok(Verdict::pass(sc.mode())),
        PropAst::Bottom(_) => Ok(Verdict::fail(sc.mode(), None)),
        PropAst::And(a, b, _) => {
            let va = satisfies(sc, a)?;
            if !va.holds {
                return Ok(va);
            }
            satisfies(sc, b)
        }
        PropAst::Or(a, b, _) => {
            // Subspace disjunction is the span of the union, which is weaker
            // than membership in either side; use the denotation when both
            // sides denote subspaces.
            if subspace_expressible(p) {
                return subspace_membership(sc, p);
            }
            let va = satisfies(sc, a)?;
            if va.holds {
                return Ok(va);
            }
            satisfies(sc, b)
        }
        PropAst::Implies(a, b, _) => {
            let va = satisfies(sc, a)?;
            if !va.holds {
                return Ok(Verdict::pass(sc.mode()));
            }
            satisfies(sc, b)
        }
        PropAst::EqQ { vars, state, .. } => {
            sc.require_quantum("=q", vars)?;
            // Exact coefficient matching: the joint state must factor as
            // (rest) ⊗ target on the named registers, up to global phase.
            let regs: Vec<RegId> = vars
                .iter()
                .map(|v| sc.resolve(v))
                .collect::<Result<_, _>>()?;
            let target = eval_state(state, sc.ctx)?;
            if target.dim() != 1 << vars.len() {
                return Err(PropsError::Eval {
                    message: format!(
                        "state over {} qubit(s) used for {} variable(s)",
                        target.n_qubits(),
                        vars.len()
                    ),
                });
            }
            let (vec, order) = sc.state.assemble_covering(&regs);
            let positions: Vec<usize> = regs
                .iter()
                .map(|r| order.iter().position(|o| o == r).unwrap())
                .collect();
            let exact = vec.factors_through(&positions, &target, COEFF_TOL);
            // Sampled cross-check through the subspace path.
            let sampled = subspace_membership(sc, p)?;
            if exact && sampled.holds {
                Ok(Verdict::pass(sc.mode()))
            } else if !sampled.holds {
                Ok(sampled)
            } else {
                Ok(Verdict::fail(sc.mode(), None))
            }
        }
        PropAst::InQ { vars, .. } => {
            sc.require_quantum("∈q", vars)?;
            subspace_membership(sc, p)
        }
        PropAst::EquivQ { left, right, .. } => {
            sc.require_quantum("≡q", left)?;
            sc.require_quantum("≡q", right)?;
            subspace_membership(sc, p)
        }
        PropAst::EquivCl { left, right, .. } => {
            sc.require_quantum("≡cl", left)?;
            sc.require_quantum("≡cl", right)?;
            subspace_membership(sc, p)
        }
        PropAst::UnitaryOn { .. } => subspace_membership(sc, p),
        PropAst::Class { vars, .. } => {
            sc.require_quantum("class", vars)?;
            for v in vars {
                if sc.state.consumed.contains(v) {
                    continue;
                }
                let reg = sc.resolve(v)?;
                let vd = marginal_projector(sc, reg)?;
                if !vd.holds {
                    return Ok(vd);
                }
            }
            Ok(Verdict::pass(sc.mode()))
        }
        PropAst::Separable { vars, .. } => {
            sc.require_quantum("separable", vars)?;
            let regs: Vec<RegId> = vars
                .iter()
                .map(|v| sc.resolve(v))
                .collect::<Result<_, _>>()?;
            if sc.state.block_aligned(&regs) {
                return Ok(Verdict::pass(sc.mode()));
            }
            let (vec, order) = sc.state.assemble_covering(&regs);
            let positions: Vec<usize> = regs
                .iter()
                .map(|r| order.iter().position(|o| o == r).unwrap())
                .collect();
            for values in &sc.samples.values {
                let conc = vec.instantiate(values);
                let rho = cvec::reduced_density(&conc, order.len(), &positions);
                if cvec::purity(&rho) < 1.0 - COEFF_TOL {
                    return Ok(sc.fail(values));
                }
            }
            Ok(Verdict::pass(sc.mode()))
        }
        PropAst::Uniform { vars, .. } => {
            sc.require_quantum("uniform", vars)?;
            let regs: Vec<RegId> = vars
                .iter()
                .map(|v| sc.resolve(v))
                .collect::<Result<_, _>>()?;
            let (vec, order) = sc.state.assemble_covering(&regs);
            let positions: Vec<usize> = regs
                .iter()
                .map(|r| order.iter().position(|o| o == r).unwrap())
                .collect();
            for values in &sc.samples.values {
                let conc = vec.instantiate(values);
                let rho = cvec::reduced_density(&conc, order.len(), &positions);
                if !diag_is_uniform(&rho, COEFF_TOL) {
                    return Ok(sc.fail(values));
                }
            }
            Ok(Verdict::pass(sc.mode()))
        }
        PropAst::EqC { bit, value, .. } => {
            let want = eval_bit(value, sc.ctx)?;
            let binding = sc
                .ctx
                .bits
                .get(bit)
                .map(|&b| BitBinding::Literal(b))
                .or_else(|| sc.state.bit_links.get(bit).copied())
                .ok_or_else(|| PropsError::Unresolved { name: bit.clone() })?;
            match binding {
                BitBinding::Literal(b) => {
                    if b == want {
                        Ok(Verdict::pass(sc.mode()))
                    } else {
                        Ok(Verdict::fail(sc.mode(), None))
                    }
                }
                BitBinding::Ghost(reg) => {
                    // Deterministic outcome: the ghost's marginal must be
                    // the projector onto |want⟩.
                    let (vec, order) = sc.state.assemble_covering(&[reg]);
                    let pos = order.iter().position(|o| *o == reg).unwrap();
                    for values in &sc.samples.values {
                        let conc = vec.instantiate(values);
                        let rho = cvec::reduced_density(&conc, order.len(), &[pos]);
                        match basis_projector_index(&rho, COEFF_TOL) {
                            Some(i) if i == want as usize => {}
                            _ => return Ok(sc.fail(values)),
                        }
                    }
                    Ok(Verdict::pass(sc.mode()))
                }
            }
        }
    }
}

/// Is the single register's marginal a computational-basis projector?
fn marginal_projector(sc: &SatisfyCtx, reg: RegId) -> Result<Verdict, PropsError> {
    let (vec, order) = sc.state.assemble_covering(&[reg]);
    let pos = order.iter().position(|o| *o == reg).unwrap();
    for values in &sc.samples.values {
        let conc = vec.instantiate(values);
        let rho = cvec::reduced_density(&conc, order.len(), &[pos]);
        if basis_projector_index(&rho, COEFF_TOL).is_none() {
            return Ok(sc.fail(values));
        }
    }
    Ok(Verdict::pass(sc.mode()))
}

/// Per-sample membership of the assembled state in the denotation of `p`.
fn subspace_membership(sc: &SatisfyCtx, p: &PropAst) -> Result<Verdict, PropsError> {
    let vars = quantum_vars(p);
    let mut regmap: BTreeMap<Name, RegId> = BTreeMap::new();
    for v in &vars {
        regmap.insert(v.clone(), sc.resolve(v)?);
    }
    let regs: Vec<RegId> = regmap.values().copied().collect();
    let (vec, order) = sc.state.assemble_covering(&regs);
    let lay = sc.state.prop_layout(&regmap, &order, sc.kinds);
    let desugared = desugar(p);
    for values in &sc.samples.values {
        let conc = vec.instantiate(values);
        let d = denote_subspace(&desugared, &lay, sc.ctx, values)?;
        if !d.contains(&conc, sc.tol) {
            return Ok(sc.fail(values));
        }
    }
    Ok(Verdict::pass(sc.mode()))
}

/// Quantum variable names a subspace-expressible proposition mentions.
fn quantum_vars(p: &PropAst) -> Vec<Name> {
    fn walk(p: &PropAst, out: &mut Vec<Name>) {
        match p {
            PropAst::Top(_) | PropAst::Bottom(_) | PropAst::EqC { .. } => {}
            PropAst::And(a, b, _) | PropAst::Or(a, b, _) | PropAst::Implies(a, b, _) => {
                walk(a, out);
                walk(b, out);
            }
            PropAst::InQ { vars, .. }
            | PropAst::EqQ { vars, .. }
            | PropAst::Uniform { vars, .. }
            | PropAst::Separable { vars, .. }
            | PropAst::Class { vars, .. } => out.extend(vars.iter().cloned()),
            PropAst::EquivQ { left, right, .. } | PropAst::EquivCl { left, right, .. } => {
                out.extend(left.iter().cloned());
                out.extend(right.iter().cloned());
            }
            PropAst::UnitaryOn { vars, inner, .. } => {
                out.extend(vars.iter().cloned());
                walk(inner, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(p, &mut out);
    out.sort();
    out.dedup();
    out
}
