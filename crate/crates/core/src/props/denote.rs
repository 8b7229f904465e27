//! Subspace denotations of propositions over a register layout.

use num_complex::Complex64;

use crate::linalg::subspace::{fixed_space_of_permutation, Subspace};
use crate::linalg::SymVector;
use crate::surface::ast::{Name, PropAst, SubspaceExpr};

use super::eval::{eval_bit, eval_state, EvalCtx};
use super::layout::{PropLayout, VarKind};
use super::PropsError;

/// Expand syntactic sugar: `X =q ψ` becomes `X ∈q span{ψ}`. The ghost-based
/// predicates `uniform`, `separable`, and `class` stay as state-predicate
/// markers; they are decided operationally on the current state rather than
/// denoted as subspaces (unentangledness is not a closed subspace).
pub fn desugar(p: &PropAst) -> PropAst {
    match p {
        PropAst::EqQ { vars, state, span } => PropAst::InQ {
            vars: vars.clone(),
            space: SubspaceExpr::Span {
                vectors: vec![state.clone()],
                span: *span,
            },
            span: *span,
        },
        PropAst::And(a, b, s) => {
            PropAst::And(Box::new(desugar(a)), Box::new(desugar(b)), *s)
        }
        PropAst::Or(a, b, s) => PropAst::Or(Box::new(desugar(a)), Box::new(desugar(b)), *s),
        PropAst::Implies(a, b, s) => {
            PropAst::Implies(Box::new(desugar(a)), Box::new(desugar(b)), *s)
        }
        PropAst::UnitaryOn { gate, vars, inner, span } => PropAst::UnitaryOn {
            gate: gate.clone(),
            vars: vars.clone(),
            inner: Box::new(desugar(inner)),
            span: *span,
        },
        other => other.clone(),
    }
}

/// Quantum predicates only apply to qubit-typed variables; this is the
/// rejection used for `uniform(b)` on a classical bit.
pub fn require_qubits(
    pred: &str,
    vars: &[Name],
    lay: &PropLayout,
) -> Result<Vec<usize>, PropsError> {
    for v in vars {
        match lay.kind(v) {
            Some(VarKind::Qubit) | None => {}
            Some(_) => {
                return Err(PropsError::TypeError {
                    message: format!("{pred}: only defined for quantum variables (`{v}` is classical)"),
                })
            }
        }
    }
    lay.positions_of(vars).ok_or_else(|| PropsError::Unresolved {
        name: vars
            .iter()
            .find(|v| lay.position(v).is_none())
            .cloned()
            .unwrap_or_default(),
    })
}

/// Denote a subspace-expressible proposition as a concrete subspace of the
/// `2^lay.n`-dimensional space, with symbolic parameters instantiated at
/// `sample`.
pub fn denote_subspace(
    p: &PropAst,
    lay: &PropLayout,
    ctx: &EvalCtx,
    sample: &[Complex64],
) -> Result<Subspace, PropsError> {
    let dim = 1usize << lay.n;
    match p {
        PropAst::Top(_) => Ok(Subspace::full(dim)),
        PropAst::Bottom(_) => Ok(Subspace::zero(dim)),
        PropAst::And(a, b, _) => {
            let da = denote_subspace(a, lay, ctx, sample)?;
            let db = denote_subspace(b, lay, ctx, sample)?;
            da.intersect(&db).map_err(PropsError::from)
        }
        PropAst::Or(a, b, _) => {
            let da = denote_subspace(a, lay, ctx, sample)?;
            let db = denote_subspace(b, lay, ctx, sample)?;
            da.sum(&db).map_err(PropsError::from)
        }
        PropAst::EqQ { .. } => denote_subspace(&desugar(p), lay, ctx, sample),
        PropAst::InQ { vars, space, .. } => {
            let positions = require_qubits("∈q", vars, lay)?;
            let SubspaceExpr::Span { vectors, .. } = space;
            let want_dim = 1usize << vars.len();
            let mut cols = Vec::with_capacity(vectors.len());
            for v in vectors {
                let sv: SymVector = eval_state(v, ctx)?;
                if sv.dim() != want_dim {
                    return Err(PropsError::Eval {
                        message: format!(
                            "state over {} qubit(s) used for {} variable(s)",
                            sv.n_qubits(),
                            vars.len()
                        ),
                    });
                }
                cols.push(sv.instantiate(sample));
            }
            let small = Subspace::span(&cols).map_err(PropsError::from)?;
            small.embed(&positions, lay.n).map_err(PropsError::from)
        }
        PropAst::EquivQ { left, right, .. } => {
            let lp = require_qubits("≡q", left, lay)?;
            let rp = require_qubits("≡q", right, lay)?;
            // Fixed space of the swap permutation on the full index set.
            let perm: Vec<usize> = (0..dim)
                .map(|i| {
                    let mut j = i;
                    for (&a, &b) in lp.iter().zip(&rp) {
                        let sa = lay.n - 1 - a;
                        let sb = lay.n - 1 - b;
                        let ba = (i >> sa) & 1;
                        let bb = (i >> sb) & 1;
                        j &= !(1 << sa);
                        j &= !(1 << sb);
                        j |= bb << sa;
                        j |= ba << sb;
                    }
                    j
                })
                .collect();
            Ok(fixed_space_of_permutation(&perm))
        }
        PropAst::EquivCl { left, right, .. } => {
            let lp = require_qubits("≡cl", left, lay)?;
            let rp = require_qubits("≡cl", right, lay)?;
            let mut cols = Vec::new();
            for i in 0..dim {
                let agree = lp.iter().zip(&rp).all(|(&a, &b)| {
                    ((i >> (lay.n - 1 - a)) & 1) == ((i >> (lay.n - 1 - b)) & 1)
                });
                if agree {
                    let mut v = vec![Complex64::new(0.0, 0.0); dim];
                    v[i] = Complex64::new(1.0, 0.0);
                    cols.push(v);
                }
            }
            Subspace::span(&cols).map_err(PropsError::from)
        }
        PropAst::UnitaryOn { gate, vars, inner, .. } => {
            let positions = require_qubits("unitary image", vars, lay)?;
            let sub = denote_subspace(inner, lay, ctx, sample)?;
            let on = match &gate.exponent {
                Some(e) => eval_bit(e, ctx)? == 1,
                None => true,
            };
            if !on {
                return Ok(sub);
            }
            let g = gate.gate;
            sub.map_columns(|col| {
                SymVector::from_concrete(col)
                    .apply_gate(g, &positions)
                    .map(|v| v.instantiate(&[]))
            })
            .map_err(PropsError::from)
        }
        PropAst::Implies(..) => Err(PropsError::NotSubspaceExpressible {
            what: "implication inside a state proposition (use it at the top level)".into(),
        }),
        PropAst::EqC { .. } => Err(PropsError::NotSubspaceExpressible {
            what: "classical bit equality".into(),
        }),
        PropAst::Uniform { vars, .. } => {
            require_qubits("uniform", vars, lay)?;
            Err(PropsError::NotSubspaceExpressible { what: "uniform".into() })
        }
        PropAst::Separable { vars, .. } => {
            require_qubits("separable", vars, lay)?;
            Err(PropsError::NotSubspaceExpressible { what: "separable".into() })
        }
        PropAst::Class { vars, .. } => {
            require_qubits("class", vars, lay)?;
            Err(PropsError::NotSubspaceExpressible { what: "class".into() })
        }
    }
}

/// Is the proposition expressible as a closed subspace (after desugaring)?
pub fn subspace_expressible(p: &PropAst) -> bool {
    match p {
        PropAst::Top(_) | PropAst::Bottom(_) => true,
        PropAst::And(a, b, _) | PropAst::Or(a, b, _) => {
            subspace_expressible(a) && subspace_expressible(b)
        }
        PropAst::Implies(..) => false,
        PropAst::EqQ { .. } | PropAst::InQ { .. } | PropAst::EquivQ { .. }
        | PropAst::EquivCl { .. } => true,
        PropAst::UnitaryOn { inner, .. } => subspace_expressible(inner),
        PropAst::EqC { .. }
        | PropAst::Uniform { .. }
        | PropAst::Separable { .. }
        | PropAst::Class { .. } => false,
    }
}
