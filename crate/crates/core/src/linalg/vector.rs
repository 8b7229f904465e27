//! Dense state vectors with amplitudes polynomial in symbolic parameters,
//! plus the padding/tensor machinery for applying gates to chosen registers.
//!
//! Qubit positions are big-endian: position 0 is the most significant bit of
//! a basis index, so `|0⟩ ⊗ |1⟩ = |01⟩` has index 1.

use num_complex::Complex64;

use super::amp::Amp;
use super::gate::Gate;
use crate::error::LinalgError;

#[derive(Debug, Clone, PartialEq)]
pub struct SymVector {
    entries: Vec<Amp>,
}

impl SymVector {
    /// The 0-qubit unit: a single entry 1, identity for `tensor`.
    pub fn scalar_one() -> Self {
        SymVector { entries: vec![Amp::one()] }
    }

    pub fn from_entries(entries: Vec<Amp>) -> Self {
        debug_assert!(entries.len().is_power_of_two());
        SymVector { entries }
    }

    pub fn from_concrete(v: &[Complex64]) -> Self {
        SymVector {
            entries: v.iter().map(|c| Amp::constant(*c)).collect(),
        }
    }

    /// Computational basis vector `|index⟩` over `n` qubits.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut entries = vec![Amp::zero(); 1 << n];
        entries[index] = Amp::one();
        SymVector { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.entries.len().trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[Amp] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &Amp {
        &self.entries[i]
    }

    pub fn is_symbolic(&self) -> bool {
        self.entries.iter().any(|a| a.is_symbolic())
    }

    pub fn scale(&self, s: Complex64) -> SymVector {
        SymVector {
            entries: self.entries.iter().map(|a| a.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &SymVector) -> Result<SymVector, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(SymVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn approx_eq(&self, other: &SymVector, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Kronecker product; `self` supplies the high bits of the result index.
    pub fn tensor(&self, other: &SymVector) -> SymVector {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a.mul(b));
            }
        }
        SymVector { entries }
    }

    /// Reorder qubits: `perm[new_pos] = old_pos`.
    pub fn permute(&self, perm: &[usize]) -> SymVector {
        let n = self.n_qubits();
        assert_eq!(perm.len(), n);
        let dim = self.dim();
        let mut entries = vec![Amp::zero(); dim];
        for new_idx in 0..dim {
            let mut old_idx = 0usize;
            for (new_pos, &old_pos) in perm.iter().enumerate() {
                let bit = (new_idx >> (n - 1 - new_pos)) & 1;
                old_idx |= bit << (n - 1 - old_pos);
            }
            entries[new_idx] = self.entries[old_idx].clone();
        }
        SymVector { entries }
    }

    /// Apply a `2^k x 2^k` matrix to the qubits at `positions` (order
    /// significant: `positions[0]` is the matrix's high bit), identity
    /// elsewhere. Rows whose `controls` bits do not match are left unchanged.
    pub fn apply_matrix(
        &self,
        m: &[Vec<Complex64>],
        positions: &[usize],
        controls: &[(usize, bool)],
    ) -> Result<SymVector, LinalgError> {
        let n = self.n_qubits();
        let k = positions.len();
        if m.len() != (1 << k) {
            return Err(LinalgError::DimMismatch { left: m.len(), right: 1 << k });
        }
        let mut seen = vec![false; n];
        for &p in positions.iter().chain(controls.iter().map(|(p, _)| p)) {
            if p >= n {
                return Err(LinalgError::TargetOutOfRange { target: p, registers: n });
            }
            if seen[p] {
                return Err(LinalgError::DuplicateTarget { target: p });
            }
            seen[p] = true;
        }

        let shifts: Vec<usize> = positions.iter().map(|&p| n - 1 - p).collect();
        let group_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
        let mut entries = self.entries.clone();
        let sub = 1usize << k;

        for base in 0..self.dim() {
            if base & group_mask != 0 {
                continue;
            }
            let ctrl_ok = controls.iter().all(|&(p, want)| {
                ((base >> (n - 1 - p)) & 1) == usize::from(want)
            });
            if !ctrl_ok {
                continue;
            }
            let idx_of = |g: usize| -> usize {
                let mut idx = base;
                for (bit_pos, &s) in shifts.iter().enumerate() {
                    if (g >> (k - 1 - bit_pos)) & 1 == 1 {
                        idx |= 1 << s;
                    }
                }
                idx
            };
            let old: Vec<Amp> = (0..sub).map(|g| self.entries[idx_of(g)].clone()).collect();
            for (g, row) in m.iter().enumerate() {
                let mut acc = Amp::zero();
                for (h, coeff) in row.iter().enumerate() {
                    if coeff.norm_sqr() > 0.0 {
                        acc = acc.add(&old[h].scale(*coeff));
                    }
                }
                entries[idx_of(g)] = acc;
            }
        }
        Ok(SymVector { entries })
    }

    pub fn apply_gate(&self, g: Gate, positions: &[usize]) -> Result<SymVector, LinalgError> {
        if positions.len() != g.arity() {
            return Err(LinalgError::ArityMismatch {
                gate: g.name(),
                expected: g.arity(),
                got: positions.len(),
            });
        }
        self.apply_matrix(&g.matrix(), positions, &[])
    }

    pub fn apply_gate_controlled(
        &self,
        g: Gate,
        positions: &[usize],
        controls: &[(usize, bool)],
    ) -> Result<SymVector, LinalgError> {
        if positions.len() != g.arity() {
            return Err(LinalgError::ArityMismatch {
                gate: g.name(),
                expected: g.arity(),
                got: positions.len(),
            });
        }
        self.apply_matrix(&g.matrix(), positions, controls)
    }

    pub fn instantiate(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.entries.iter().map(|a| a.eval(values)).collect()
    }

    pub fn norm_at(&self, values: &[Complex64]) -> f64 {
        self.instantiate(values)
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// View the vector as a matrix `M[c][x]` where `x` ranges over the basis
    /// of the qubits at `x_positions` (in the given order) and `c` over the
    /// remaining qubits in increasing position order.
    pub fn group_matrix(&self, x_positions: &[usize]) -> Vec<Vec<Amp>> {
        let n = self.n_qubits();
        let k = x_positions.len();
        let comp: Vec<usize> = (0..n).filter(|p| !x_positions.contains(p)).collect();
        let rows = 1usize << comp.len();
        let cols = 1usize << k;
        let mut m = vec![vec![Amp::zero(); cols]; rows];
        for idx in 0..self.dim() {
            let mut x = 0usize;
            for (j, &p) in x_positions.iter().enumerate() {
                x |= ((idx >> (n - 1 - p)) & 1) << (k - 1 - j);
            }
            let mut c = 0usize;
            for (j, &p) in comp.iter().enumerate() {
                c |= ((idx >> (n - 1 - p)) & 1) << (comp.len() - 1 - j);
            }
            m[c][x] = self.entries[idx].clone();
        }
        m
    }

    /// Does the state factor as `(anything) ⊗ target` on the qubits at
    /// `x_positions`? Scalar freedom absorbs normalization and global phase.
    /// Decided by polynomial cross products, so it is exact for symbolic
    /// amplitudes up to the coefficient tolerance.
    pub fn factors_through(&self, x_positions: &[usize], target: &SymVector, tol: f64) -> bool {
        if target.dim() != 1 << x_positions.len() {
            return false;
        }
        let m = self.group_matrix(x_positions);
        let cols = target.dim();
        let mut any_nonzero = false;
        for row in &m {
            let mut nonzero = false;
            for j in 0..cols {
                if row[j].weight() > tol {
                    nonzero = true;
                }
                for k in (j + 1)..cols {
                    let cross = row[j].mul(&target.entries[k]).sub(&row[k].mul(&target.entries[j]));
                    if cross.weight() > tol {
                        return false;
                    }
                }
            }
            any_nonzero |= nonzero;
        }
        any_nonzero
    }

    /// Try to split the state as `complement ⊗ x` across the bipartition at
    /// `x_positions`. Succeeds when the state has an exact rank-1 split with
    /// at least one side free of symbolic parameters; the concrete side is
    /// returned unit-norm with its first significant entry phase-normalized.
    pub fn try_split(&self, x_positions: &[usize], tol: f64) -> Option<(SymVector, SymVector)> {
        let n = self.n_qubits();
        if x_positions.is_empty() || x_positions.len() == n {
            return None;
        }
        let m = self.group_matrix(x_positions);
        let rows = m.len();
        let cols = m[0].len();

        // Pivot: entry of greatest coefficient weight.
        let (mut pi, mut pj, mut best) = (0usize, 0usize, 0.0f64);
        for (i, row) in m.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                let w = a.weight();
                if w > best {
                    best = w;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= tol {
            return None;
        }

        // First attempt: concrete complement factor (u_i scalar ratios).
        let ratios: Option<Vec<Complex64>> = (0..rows)
            .map(|i| {
                if m[i].iter().all(|a| a.weight() <= tol) {
                    Some(Complex64::new(0.0, 0.0))
                } else {
                    m[i][pj].try_ratio(&m[pi][pj], tol)
                }
            })
            .collect();
        if let Some(u) = ratios {
            let v: Vec<Amp> = m[pi].clone();
            let consistent = (0..rows).all(|i| {
                (0..cols).all(|j| m[i][j].approx_eq(&v[j].scale(u[i]), tol))
            });
            if consistent {
                let (u_norm, v_adj) = normalize_concrete_factor(&u, &v, tol);
                return Some((
                    SymVector::from_concrete(&u_norm),
                    SymVector { entries: v_adj },
                ));
            }
        }

        // Second attempt: concrete x factor (v_j scalar ratios).
        let ratios: Option<Vec<Complex64>> = (0..cols)
            .map(|j| {
                let col_zero = (0..rows).all(|i| m[i][j].weight() <= tol);
                if col_zero {
                    Some(Complex64::new(0.0, 0.0))
                } else {
                    m[pi][j].try_ratio(&m[pi][pj], tol)
                }
            })
            .collect();
        if let Some(v) = ratios {
            let u: Vec<Amp> = (0..rows).map(|i| m[i][pj].clone()).collect();
            let consistent = (0..rows).all(|i| {
                (0..cols).all(|j| m[i][j].approx_eq(&u[i].scale(v[j]), tol))
            });
            if consistent {
                let (v_norm, u_adj) = normalize_concrete_factor(&v, &u, tol);
                return Some((
                    SymVector { entries: u_adj },
                    SymVector::from_concrete(&v_norm),
                ));
            }
        }
        None
    }
}

/// Normalize the concrete factor to a unit vector with real-positive leading
/// entry, pushing the absorbed scalar into the symbolic cofactor.
fn normalize_concrete_factor(
    concrete: &[Complex64],
    cofactor: &[Amp],
    tol: f64,
) -> (Vec<Complex64>, Vec<Amp>) {
    let norm = concrete.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let lead = concrete
        .iter()
        .find(|c| c.norm() > tol.max(1e-12))
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead / lead.norm();
    let scale = phase * norm;
    let unit: Vec<Complex64> = concrete.iter().map(|c| c / scale).collect();
    let adjusted: Vec<Amp> = cofactor.iter().map(|a| a.scale(scale)).collect();
    (unit, adjusted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn tensor_of_basis_states_matches_by_hand() {
        // |0> tensor |1> = (0,1,0,0)^T
        let t = SymVector::basis(1, 0).tensor(&SymVector::basis(1, 1));
        let got = t.instantiate(&[]);
        assert_eq!(t.dim(), 4);
        for (i, want) in [0.0, 1.0, 0.0, 0.0].iter().enumerate() {
            assert!((got[i] - c(*want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn tensor_with_scalar_one_is_identity() {
        let v = SymVector::from_concrete(&[c(S, 0.0), c(0.0, S)]);
        assert!(v.tensor(&SymVector::scalar_one()).approx_eq(&v, 1e-12));
        assert!(SymVector::scalar_one().tensor(&v).approx_eq(&v, 1e-12));
    }

    #[test]
    fn tensor_is_bilinear_in_symbolic_amps() {
        // (a|0> + b|1>) tensor |0> = a|00> + b|10>
        let sym = SymVector::from_entries(vec![Amp::atom(0), Amp::atom(1)]);
        let t = sym.tensor(&SymVector::basis(1, 0));
        assert!(t.entry(0).approx_eq(&Amp::atom(0), 0.0));
        assert!(t.entry(2).approx_eq(&Amp::atom(1), 0.0));
        assert!(t.entry(1).is_zero() && t.entry(3).is_zero());
    }

    #[test]
    fn x_flips_and_h_makes_plus() {
        let zero = SymVector::basis(1, 0);
        let one = zero.apply_gate(Gate::X, &[0]).unwrap();
        assert!(one.approx_eq(&SymVector::basis(1, 1), 1e-12));
        let plus = zero.apply_gate(Gate::H, &[0]).unwrap();
        let got = plus.instantiate(&[]);
        assert!((got[0] - c(S, 0.0)).norm() < 1e-12);
        assert!((got[1] - c(S, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cx_entangles_superposed_control() {
        // CX on (|00>+|10>)/sqrt2 with control position 0 -> (|00>+|11>)/sqrt2
        let v = SymVector::from_concrete(&[c(S, 0.0), c(0.0, 0.0), c(S, 0.0), c(0.0, 0.0)]);
        let out = v.apply_gate(Gate::CX, &[0, 1]).unwrap();
        let got = out.instantiate(&[]);
        assert!((got[0] - c(S, 0.0)).norm() < 1e-12);
        assert!((got[3] - c(S, 0.0)).norm() < 1e-12);
        assert!(got[1].norm() < 1e-12 && got[2].norm() < 1e-12);
    }

    #[test]
    fn duplicate_targets_rejected() {
        let v = SymVector::basis(2, 0);
        assert!(v.apply_gate(Gate::CX, &[1, 1]).is_err());
    }

    #[test]
    fn controlled_apply_acts_only_on_matching_branch() {
        // Control qubit 0 in |+>, target |0>: controlled-X gives Bell state.
        let v = SymVector::from_concrete(&[c(S, 0.0), c(0.0, 0.0), c(S, 0.0), c(0.0, 0.0)]);
        let out = v.apply_gate_controlled(Gate::X, &[1], &[(0, true)]).unwrap();
        let got = out.instantiate(&[]);
        assert!((got[0] - c(S, 0.0)).norm() < 1e-12);
        assert!((got[3] - c(S, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn split_recovers_product_factors() {
        let bell = SymVector::from_concrete(&[c(S, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(S, 0.0)]);
        let spare = SymVector::from_concrete(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let joint = bell.tensor(&spare); // qubits 0,1 = bell, qubit 2 = spare
        let (rest, x) = joint.try_split(&[2], 1e-9).unwrap();
        assert!(rest.approx_eq(&bell, 1e-9));
        // spare phase-normalized: first entry real positive already
        assert!(x.approx_eq(&spare, 1e-9));
        // entangled cut refuses to split
        assert!(joint.try_split(&[1], 1e-9).is_none());
    }

    #[test]
    fn split_keeps_symbolic_cofactor() {
        let psi = SymVector::from_entries(vec![Amp::atom(0), Amp::atom(1)]);
        let anc = SymVector::from_concrete(&[c(0.0, 1.0), c(0.0, 0.0)]);
        let joint = psi.tensor(&anc);
        let (rest, x) = joint.try_split(&[1], 1e-9).unwrap();
        // concrete side is phase-fixed to |0>
        assert!(x.approx_eq(&SymVector::basis(1, 0), 1e-9));
        // cofactor absorbed the i phase
        assert!(rest.entry(0).approx_eq(&Amp::atom(0).scale(c(0.0, 1.0)), 1e-9));
        assert!(joint.factors_through(&[1], &SymVector::basis(1, 0), 1e-9));
    }

    #[test]
    fn factors_through_matches_symbolic_target() {
        let psi = SymVector::from_entries(vec![Amp::atom(0), Amp::atom(1)]);
        let uniform = SymVector::from_concrete(&[c(0.5, 0.0); 4]);
        let joint = uniform.tensor(&psi);
        assert!(joint.factors_through(&[2], &psi, 1e-9));
        let wrong = SymVector::from_entries(vec![Amp::atom(1), Amp::atom(0)]);
        assert!(!joint.factors_through(&[2], &wrong, 1e-9));
    }

    #[test]
    fn permute_moves_qubits() {
        let v = SymVector::basis(1, 0).tensor(&SymVector::basis(1, 1)); // |01>
        let w = v.permute(&[1, 0]); // swap -> |10>
        assert!(w.approx_eq(&SymVector::basis(2, 2), 1e-12));
    }
}
