//! Entailment between subspace-expressible propositions, and the density
//! matrix tests behind the operational state predicates.

use num_complex::Complex64;

use crate::surface::ast::PropAst;

use super::denote::{denote_subspace, desugar};
use super::eval::EvalCtx;
use super::layout::{ParamTable, PropLayout};
use super::samples::SampleSet;
use super::PropsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub holds: bool,
    pub mode: Mode,
    /// For failed sampled verdicts: the instantiation that falsified it.
    pub counterexample: Option<String>,
}

impl Verdict {
    pub fn pass(mode: Mode) -> Self {
        Verdict { holds: true, mode, counterexample: None }
    }

    pub fn fail(mode: Mode, counterexample: Option<String>) -> Self {
        Verdict { holds: false, mode, counterexample }
    }
}

/// Render one sample's family assignments for counterexample reports.
pub fn render_sample(params: &ParamTable, values: &[Complex64]) -> String {
    let mut parts = Vec::new();
    for f in params.families() {
        let comps: Vec<String> = f
            .atoms
            .iter()
            .map(|&a| {
                let v = values[a as usize];
                format!("{:.4}{:+.4}i", v.re, v.im)
            })
            .collect();
        parts.push(format!("{} = ({})", f.name, comps.join(", ")));
    }
    parts.join("; ")
}

/// Semantic consequence `P ⊨ Q`: inclusion of denotations, checked at every
/// sample point when symbolic parameters are present.
pub fn entails(
    p: &PropAst,
    q: &PropAst,
    lay: &PropLayout,
    ctx: &EvalCtx,
    samples: &SampleSet,
    tol: f64,
) -> Result<Verdict, PropsError> {
    let (p, q) = (desugar(p), desugar(q));
    let mode = if samples.is_symbolic() { Mode::Sampled } else { Mode::Exact };
    for values in &samples.values {
        let dp = denote_subspace(&p, lay, ctx, values)?;
        let dq = denote_subspace(&q, lay, ctx, values)?;
        if !dp.included_in(&dq, tol) {
            let cx = if samples.is_symbolic() {
                Some(render_sample(&ctx.params, values))
            } else {
                None
            };
            return Ok(Verdict::fail(mode, cx));
        }
    }
    Ok(Verdict::pass(mode))
}

/// Membership of a concrete unit vector in the denotation of `p`.
pub fn vector_satisfies(
    vec: &[Complex64],
    p: &PropAst,
    lay: &PropLayout,
    ctx: &EvalCtx,
    sample: &[Complex64],
    tol: f64,
) -> Result<bool, PropsError> {
    let d = denote_subspace(&desugar(p), lay, ctx, sample)?;
    Ok(d.contains(vec, tol))
}

// ----- Density-matrix predicates -----

/// If ρ is (within `tol`) the projector onto one computational basis state,
/// return that basis index.
pub fn basis_projector_index(rho: &[Vec<Complex64>], tol: f64) -> Option<usize> {
    let d = rho.len();
    let mut which = None;
    for i in 0..d {
        for j in 0..d {
            let v = rho[i][j];
            if i == j {
                if (v.re - 1.0).abs() <= tol && v.im.abs() <= tol {
                    if which.is_some() {
                        return None;
                    }
                    which = Some(i);
                } else if v.norm() > tol {
                    return None;
                }
            } else if v.norm() > tol {
                return None;
            }
        }
    }
    which
}

/// All computational-basis outcome probabilities equal `1/d` within `tol`.
pub fn diag_is_uniform(rho: &[Vec<Complex64>], tol: f64) -> bool {
    let d = rho.len();
    let want = 1.0 / d as f64;
    (0..d).all(|i| (rho[i][i].re - want).abs() <= tol && rho[i][i].im.abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cvec;
    use crate::props::layout::VarKind;
    use crate::props::samples::build_samples;
    use crate::surface::parser::parse_prop;

    fn layout2() -> PropLayout {
        let mut lay = PropLayout { n: 2, ..Default::default() };
        lay.positions.insert("a".into(), 0);
        lay.positions.insert("b".into(), 1);
        lay.kinds.insert("a".into(), VarKind::Qubit);
        lay.kinds.insert("b".into(), VarKind::Qubit);
        lay
    }

    fn check_entails(p: &str, q: &str) -> bool {
        let lay = layout2();
        let ctx = EvalCtx::default();
        let samples = SampleSet::concrete();
        entails(
            &parse_prop(p).unwrap(),
            &parse_prop(q).unwrap(),
            &lay,
            &ctx,
            &samples,
            1e-7,
        )
        .unwrap()
        .holds
    }

    #[test]
    fn bottom_entails_everything_and_top_is_entailed() {
        assert!(check_entails("⊥", "(a, b) =q |01⟩"));
        assert!(check_entails("a ≡q b", "⊤"));
    }

    #[test]
    fn bell_state_lies_in_bell_code() {
        assert!(check_entails(
            "(a, b) =q (|00⟩ + |11⟩)/sqrt(2)",
            "(a, b) ∈q span{|00⟩, |11⟩}"
        ));
        assert!(!check_entails(
            "(a, b) ∈q span{|00⟩, |11⟩}",
            "(a, b) =q (|00⟩ + |11⟩)/sqrt(2)"
        ));
    }

    #[test]
    fn distinct_one_dim_spans_do_not_entail() {
        assert!(!check_entails("a =q (|0⟩ + |1⟩)/sqrt(2)", "a =q |0⟩"));
    }

    #[test]
    fn classical_equality_denotes_agreeing_basis_vectors() {
        let lay = layout2();
        let ctx = EvalCtx::default();
        let p = parse_prop("a ≡cl b").unwrap();
        let d = denote_subspace(&p, &lay, &ctx, &[]).unwrap();
        assert_eq!(d.rank(), 2);
        let c = |re: f64| Complex64::new(re, 0.0);
        assert!(d.contains(&[c(1.0), c(0.0), c(0.0), c(0.0)], 1e-9));
        assert!(d.contains(&[c(0.0), c(0.0), c(0.0), c(1.0)], 1e-9));
        assert!(!d.contains(&[c(0.0), c(1.0), c(0.0), c(0.0)], 1e-9));
    }

    #[test]
    fn quantum_equality_is_swap_fixed_space() {
        // Every vector in the denotation is SWAP-invariant; frozen expected
        // basis from the symmetric subspace.
        let lay = layout2();
        let ctx = EvalCtx::default();
        let p = parse_prop("a ≡q b").unwrap();
        let d = denote_subspace(&p, &lay, &ctx, &[]).unwrap();
        assert_eq!(d.rank(), 3);
        for col in d.basis() {
            // swap qubits 0,1 of a 2-qubit space: index 1 <-> 2
            let swapped = vec![col[0], col[2], col[1], col[3]];
            assert!(cvec::eq_up_to_phase(col, &swapped, 1e-9));
        }
    }

    #[test]
    fn unitary_image_moves_the_span() {
        // (X on (a)) · (a =q |0⟩)  ⊨  a =q |1⟩
        assert!(check_entails("(X on (a)) · (a =q |0⟩)", "a =q |1⟩"));
        assert!(!check_entails("(X on (a)) · (a =q |0⟩)", "a =q |0⟩"));
    }

    #[test]
    fn quantum_predicate_on_bit_is_type_error() {
        let mut lay = layout2();
        lay.kinds.insert("x".into(), VarKind::Bit);
        let ctx = EvalCtx::default();
        let p = parse_prop("uniform(x)").unwrap();
        let err = denote_subspace(&p, &lay, &ctx, &[]).unwrap_err();
        match err {
            PropsError::TypeError { message } => {
                assert!(message.contains("only defined for quantum variables"));
            }
            other => panic!("expected TypeError, got {other:?}"),
        }
    }

    #[test]
    fn symbolic_entailment_samples_all_points() {
        // a =q psi entails (a) ∈q span{psi} trivially, at all 16 samples.
        let mut ctx = EvalCtx::default();
        ctx.params.fresh_family("psi", 1);
        let mut lay = PropLayout { n: 1, ..Default::default() };
        lay.positions.insert("a".into(), 0);
        lay.kinds.insert("a".into(), VarKind::Qubit);
        let samples = build_samples(&ctx.params, 16, 0x5148_3737);
        let v = entails(
            &parse_prop("a =q psi").unwrap(),
            &parse_prop("a ∈q span{psi}").unwrap(),
            &lay,
            &ctx,
            &samples,
            1e-7,
        )
        .unwrap();
        assert!(v.holds);
        assert_eq!(v.mode, Mode::Sampled);
        // and a =q psi does not entail a =q |0⟩ (fails at some sample)
        let v2 = entails(
            &parse_prop("a =q psi").unwrap(),
            &parse_prop("a =q |0⟩").unwrap(),
            &lay,
            &ctx,
            &samples,
            1e-7,
        )
        .unwrap();
        assert!(!v2.holds);
        assert!(v2.counterexample.is_some());
    }
}
