//! Closed subspaces of `C^(2^n)` as orthonormal column sets, with the
//! lattice operations that interpret propositions: span, sum (join),
//! intersection (meet), inclusion, and unitary image.

use num_complex::Complex64;

use super::cvec;
use crate::config::{CMP_TOL, RANK_TOL};
use crate::error::LinalgError;

#[derive(Debug, Clone)]
pub struct Subspace {
    dim: usize,
    basis: Vec<Vec<Complex64>>,
}

/// Modified Gram-Schmidt with a second re-orthogonalization pass.
/// Vectors whose residual falls below `tol` (relative to their own norm)
/// are treated as dependent and dropped.
pub fn orthonormalize(vectors: &[Vec<Complex64>], tol: f64) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let scale = cvec::norm(v).max(1.0);
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = cvec::inner(b, &w);
                w = cvec::sub(&w, &cvec::scale(b, c));
            }
        }
        let n = cvec::norm(&w);
        if n > tol * scale {
            basis.push(cvec::scale(&w, Complex64::new(1.0 / n, 0.0)));
        }
    }
    basis
}

impl Subspace {
    pub fn new(dim: usize, vectors: &[Vec<Complex64>]) -> Result<Subspace, LinalgError> {
        for v in vectors {
            if v.len() != dim {
                return Err(LinalgError::DimMismatch { left: v.len(), right: dim });
            }
        }
        Ok(Subspace {
            dim,
            basis: orthonormalize(vectors, RANK_TOL),
        })
    }

    pub fn span(vectors: &[Vec<Complex64>]) -> Result<Subspace, LinalgError> {
        let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
        Subspace::new(dim, vectors)
    }

    pub fn zero(dim: usize) -> Subspace {
        Subspace { dim, basis: Vec::new() }
    }

    pub fn full(dim: usize) -> Subspace {
        let mut basis = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[i] = Complex64::new(1.0, 0.0);
            basis.push(e);
        }
        Subspace { dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.dim
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    /// Residual of `v` after projecting onto the subspace.
    pub fn residual(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut w = v.to_vec();
        for b in &self.basis {
            let c = cvec::inner(b, &w);
            w = cvec::sub(&w, &cvec::scale(b, c));
        }
        w
    }

    /// Membership of a (near-)unit vector, at comparison tolerance.
    pub fn contains(&self, v: &[Complex64], tol: f64) -> bool {
        cvec::norm(&self.residual(v)) <= tol
    }

    /// `self ⊆ other`: every basis column's residual against `other` is
    /// below the comparison tolerance.
    pub fn included_in(&self, other: &Subspace, tol: f64) -> bool {
        self.dim == other.dim && self.basis.iter().all(|b| other.contains(b, tol))
    }

    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> bool {
        self.included_in(other, tol) && other.included_in(self, tol)
    }

    /// Join: span of the union.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimMismatch { left: self.dim, right: other.dim });
        }
        let mut cols = self.basis.clone();
        cols.extend(other.basis.iter().cloned());
        Ok(Subspace {
            dim: self.dim,
            basis: orthonormalize(&cols, RANK_TOL),
        })
    }

    /// Meet: solved through the null space of the stacked system
    /// `A x = B y`, i.e. `[A | -B] z = 0`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimMismatch { left: self.dim, right: other.dim });
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.dim));
        }
        if self.is_full() {
            return Ok(other.clone());
        }
        if other.is_full() {
            return Ok(self.clone());
        }
        let p = self.basis.len();
        let q = other.basis.len();
        // Rows of M^H viewed as vectors in C^(p+q): conj of each coordinate row.
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(self.dim);
        for r in 0..self.dim {
            let mut row = Vec::with_capacity(p + q);
            for b in &self.basis {
                row.push(b[r].conj());
            }
            for b in &other.basis {
                row.push(-b[r].conj());
            }
            rows.push(row);
        }
        let row_space = orthonormalize(&rows, RANK_TOL);
        // Null space = orthogonal complement of the row space.
        let mut null_basis: Vec<Vec<Complex64>> = Vec::new();
        for k in 0..(p + q) {
            let mut e = vec![Complex64::new(0.0, 0.0); p + q];
            e[k] = Complex64::new(1.0, 0.0);
            let mut w = e;
            for _ in 0..2 {
                for b in row_space.iter().chain(null_basis.iter()) {
                    let c = cvec::inner(b, &w);
                    w = cvec::sub(&w, &cvec::scale(b, c));
                }
            }
            let n = cvec::norm(&w);
            if n > RANK_TOL {
                null_basis.push(cvec::scale(&w, Complex64::new(1.0 / n, 0.0)));
            }
        }
        // Map x-parts back through A.
        let mut vectors = Vec::with_capacity(null_basis.len());
        for z in &null_basis {
            let mut v = vec![Complex64::new(0.0, 0.0); self.dim];
            for (j, b) in self.basis.iter().enumerate() {
                for r in 0..self.dim {
                    v[r] += b[r] * z[j];
                }
            }
            vectors.push(v);
        }
        Ok(Subspace {
            dim: self.dim,
            basis: orthonormalize(&vectors, RANK_TOL),
        })
    }

    /// Image under a padded operator: each basis column mapped through `f`.
    pub fn map_columns<F>(&self, f: F) -> Result<Subspace, LinalgError>
    where
        F: Fn(&[Complex64]) -> Result<Vec<Complex64>, LinalgError>,
    {
        let mut cols = Vec::with_capacity(self.basis.len());
        for b in &self.basis {
            cols.push(f(b)?);
        }
        Ok(Subspace {
            dim: self.dim,
            basis: orthonormalize(&cols, RANK_TOL),
        })
    }

    /// Embed a subspace living on the qubits at `positions` (order
    /// significant) into an `n`-qubit ambient space, with full freedom on
    /// the remaining qubits: `P ⊗ H[rest]` up to register permutation.
    pub fn embed(&self, positions: &[usize], n: usize) -> Result<Subspace, LinalgError> {
        let k = positions.len();
        if self.dim != 1 << k {
            return Err(LinalgError::DimMismatch { left: self.dim, right: 1 << k });
        }
        let comp: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
        let big = 1usize << n;
        let mut basis = Vec::with_capacity(self.basis.len() << comp.len());
        for col in &self.basis {
            for c in 0..(1usize << comp.len()) {
                let mut v = vec![Complex64::new(0.0, 0.0); big];
                for (x, amp) in col.iter().enumerate() {
                    if amp.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut idx = 0usize;
                    for (j, &p) in positions.iter().enumerate() {
                        idx |= ((x >> (k - 1 - j)) & 1) << (n - 1 - p);
                    }
                    for (j, &p) in comp.iter().enumerate() {
                        idx |= ((c >> (comp.len() - 1 - j)) & 1) << (n - 1 - p);
                    }
                    v[idx] = *amp;
                }
                basis.push(v);
            }
        }
        // Tensor of orthonormal sets against disjoint index blocks stays
        // orthonormal; no re-orthogonalization needed.
        Ok(Subspace { dim: big, basis })
    }
}

/// Fixed space (eigenvalue-1 eigenspace) of a basis permutation, given as
/// `perm[i] = image of basis index i`. For an involution the orbits have
/// size one or two, yielding an orthonormal basis directly.
pub fn fixed_space_of_permutation(perm: &[usize]) -> Subspace {
    let dim = perm.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut basis = Vec::new();
    let mut seen = vec![false; dim];
    for i in 0..dim {
        if seen[i] {
            continue;
        }
        // Collect the orbit of i.
        let mut orbit = vec![i];
        seen[i] = true;
        let mut j = perm[i];
        while j != i {
            orbit.push(j);
            seen[j] = true;
            j = perm[j];
        }
        let w = Complex64::new(1.0 / (orbit.len() as f64).sqrt(), 0.0);
        let mut v = vec![zero; dim];
        for &o in &orbit {
            v[o] = w;
        }
        basis.push(v);
    }
    Subspace { dim, basis }
}

/// Convenience wrapper using the comparison tolerance from the config.
pub fn includes(p: &Subspace, q: &Subspace) -> bool {
    q.included_in(p, CMP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn basis_vec(dim: usize, i: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); dim];
        v[i] = c(1.0, 0.0);
        v
    }

    /// Brute-force intersection oracle: sample the joint solution set by
    /// solving A x = B y over a fine grid of random right-hand sides is
    /// impractical; instead enumerate an explicit known answer.
    #[test]
    fn intersect_of_overlapping_spans() {
        // span{|00>,|11>} meet span{|00>,|01>} = span{|00>}
        let p = Subspace::span(&[basis_vec(4, 0), basis_vec(4, 3)]).unwrap();
        let q = Subspace::span(&[basis_vec(4, 0), basis_vec(4, 1)]).unwrap();
        let m = p.intersect(&q).unwrap();
        assert_eq!(m.rank(), 1);
        assert!(m.contains(&basis_vec(4, 0), 1e-9));
    }

    #[test]
    fn lattice_identities_with_top_and_bottom() {
        let p = Subspace::span(&[vec![c(S, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(S, 0.0)]]).unwrap();
        let bot = Subspace::zero(4);
        let top = Subspace::full(4);
        assert!(p.sum(&bot).unwrap().approx_eq(&p, 1e-9));
        assert!(p.intersect(&top).unwrap().approx_eq(&p, 1e-9));
    }

    #[test]
    fn bell_vector_lies_in_code_span() {
        let bell = vec![c(S, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(S, 0.0)];
        let code = Subspace::span(&[basis_vec(4, 0), basis_vec(4, 3)]).unwrap();
        let span_bell = Subspace::span(&[bell]).unwrap();
        assert!(includes(&code, &span_bell));
        assert!(!includes(&span_bell, &code));
    }

    #[test]
    fn swap_fixed_space_is_symmetric_subspace() {
        // SWAP on 2 qubits permutes indices 1 and 2.
        let sub = fixed_space_of_permutation(&[0, 2, 1, 3]);
        assert_eq!(sub.rank(), 3);
        // Expected basis, written out by hand: |00>, |11>, (|01>+|10>)/sqrt2.
        let expected = Subspace::span(&[
            basis_vec(4, 0),
            basis_vec(4, 3),
            vec![c(0.0, 0.0), c(S, 0.0), c(S, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(sub.approx_eq(&expected, 1e-9));
    }

    #[test]
    fn embed_pads_with_identity() {
        // span{|1>} on qubit 1 of a 2-qubit space: vectors with qubit1 = 1.
        let one = Subspace::span(&[basis_vec(2, 1)]).unwrap();
        let emb = one.embed(&[1], 2).unwrap();
        assert_eq!(emb.rank(), 2);
        assert!(emb.contains(&basis_vec(4, 1), 1e-9)); // |01>
        assert!(emb.contains(&basis_vec(4, 3), 1e-9)); // |11>
        assert!(!emb.contains(&basis_vec(4, 0), 1e-9));
    }

    #[test]
    fn dimension_formula_on_orthogonal_construction() {
        // Build P, Q from a shared orthonormal set so the meet is known:
        // P = span{e0, e1}, Q = span{e1, e2} -> meet rank 1, join rank 3.
        let p = Subspace::span(&[basis_vec(8, 0), basis_vec(8, 1)]).unwrap();
        let q = Subspace::span(&[basis_vec(8, 1), basis_vec(8, 2)]).unwrap();
        let meet = p.intersect(&q).unwrap();
        let join = p.sum(&q).unwrap();
        assert_eq!(meet.rank() + join.rank(), p.rank() + q.rank());
    }
}
