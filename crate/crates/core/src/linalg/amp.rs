//! Amplitudes that are formal polynomials in symbolic parameters.
//!
//! An [`Amp`] is a complex linear combination of monomials over atoms, where
//! an atom is one component of a symbolic state family (for example `psi0`,
//! `psi1` for a single-qubit ghost vector `psi`). Gate application is linear,
//! so amplitudes stay degree-one in each family; products of atoms only arise
//! when two independently symbolic states are tensored together.

use num_complex::Complex64;
use std::collections::BTreeMap;

/// Identifier of a symbolic parameter. Display names live in the checker's
/// parameter table; linear algebra only needs the id.
pub type AtomId = u32;

/// A sorted product of atoms. The empty monomial is the constant term.
pub type Monomial = Vec<AtomId>;

/// Coefficients below this are dropped during normalization.
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Amp {
    terms: BTreeMap<Monomial, Complex64>,
}

impl Amp {
    pub fn zero() -> Self {
        Amp { terms: BTreeMap::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c.norm_sqr() > DROP_TOL * DROP_TOL {
            terms.insert(Vec::new(), c);
        }
        Amp { terms }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn atom(id: AtomId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![id], Complex64::new(1.0, 0.0));
        Amp { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant part, when the amplitude has no symbolic terms.
    pub fn as_constant(&self) -> Option<Complex64> {
        if self.terms.is_empty() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Vec::new()) {
                return Some(*c);
            }
        }
        None
    }

    pub fn is_symbolic(&self) -> bool {
        self.terms.keys().any(|m| !m.is_empty())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    fn insert_term(&mut self, m: Monomial, c: Complex64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                if c.norm_sqr() > DROP_TOL * DROP_TOL {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v.norm_sqr() > DROP_TOL * DROP_TOL {
                    *e.get_mut() = v;
                } else {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Amp) -> Amp {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Amp) -> Amp {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), -*c);
        }
        out
    }

    pub fn neg(&self) -> Amp {
        Amp {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -*c)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Amp {
        let mut out = Amp::zero();
        for (m, c) in &self.terms {
            out.insert_term(m.clone(), *c * s);
        }
        out
    }

    pub fn mul(&self, other: &Amp) -> Amp {
        let mut out = Amp::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = Vec::with_capacity(ma.len() + mb.len());
                m.extend_from_slice(ma);
                m.extend_from_slice(mb);
                m.sort_unstable();
                out.insert_term(m, ca * cb);
            }
        }
        out
    }

    /// Largest coefficient magnitude, used to pick pivots.
    pub fn weight(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// All coefficients match within `tol`.
    pub fn approx_eq(&self, other: &Amp, tol: f64) -> bool {
        self.sub(other).weight() <= tol
    }

    /// Evaluate at concrete atom values (indexed by [`AtomId`]).
    pub fn eval(&self, values: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = *c;
            for &a in m {
                t *= values[a as usize];
            }
            acc += t;
        }
        acc
    }

    /// If `self == r * other` for a scalar `r` (with `other` nonzero),
    /// return `r`. Returns `None` when no scalar ratio exists.
    pub fn try_ratio(&self, other: &Amp, tol: f64) -> Option<Complex64> {
        if other.is_zero() {
            return None;
        }
        let (m0, c0) = other
            .terms
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
        let r = self.terms.get(m0).copied().unwrap_or_default() / c0;
        if self.approx_eq(&other.scale(r), tol) {
            Some(r)
        } else {
            None
        }
    }
}

impl From<Complex64> for Amp {
    fn from(c: Complex64) -> Self {
        Amp::constant(c)
    }
}

impl From<f64> for Amp {
    fn from(x: f64) -> Self {
        Amp::constant(Complex64::new(x, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn arithmetic_keeps_terms_merged() {
        let a = Amp::atom(0).scale(c(2.0, 0.0)).add(&Amp::one());
        let b = Amp::atom(0).scale(c(-2.0, 0.0));
        let s = a.add(&b);
        assert_eq!(s.as_constant(), Some(c(1.0, 0.0)));
    }

    #[test]
    fn product_of_atoms_sorts_monomial() {
        let p = Amp::atom(3).mul(&Amp::atom(1));
        let q = Amp::atom(1).mul(&Amp::atom(3));
        assert!(p.approx_eq(&q, 0.0));
    }

    #[test]
    fn eval_substitutes_atoms() {
        // 2*x0*x1 + 3
        let a = Amp::atom(0)
            .mul(&Amp::atom(1))
            .scale(c(2.0, 0.0))
            .add(&Amp::constant(c(3.0, 0.0)));
        let v = a.eval(&[c(0.0, 1.0), c(0.0, 1.0)]);
        assert!((v - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ratio_detects_proportionality() {
        let base = Amp::atom(0).add(&Amp::atom(1).scale(c(0.0, 1.0)));
        let scaled = base.scale(c(0.0, -2.0));
        let r = scaled.try_ratio(&base, 1e-12).unwrap();
        assert!((r - c(0.0, -2.0)).norm() < 1e-12);
        let unrelated = Amp::atom(0);
        assert!(unrelated.try_ratio(&base, 1e-12).is_none());
    }
}
