//! Deterministic instantiation points for symbolic parameter families.
//!
//! Single-qubit families get five fixed states (the computational basis,
//! both real Hadamard states, and one complex phase state) followed by
//! seeded pseudo-random unit vectors; larger families get basis states, the
//! uniform state, and random fill. Verdicts computed over these points are
//! reported as `mode: sampled`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layout::ParamTable;

/// Concrete atom values per sample point: `values[sample][atom]`.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub values: Vec<Vec<Complex64>>,
    symbolic: bool,
}

impl SampleSet {
    /// One empty sample so evaluation loops run exactly once.
    pub fn concrete() -> Self {
        SampleSet { values: vec![Vec::new()], symbolic: false }
    }

    pub fn is_symbolic(&self) -> bool {
        self.symbolic
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn fixed_single_qubit() -> Vec<Vec<Complex64>> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    vec![
        vec![r(1.0), r(0.0)],
        vec![r(0.0), r(1.0)],
        vec![r(SQRT_HALF), r(SQRT_HALF)],
        vec![r(SQRT_HALF), r(-SQRT_HALF)],
        vec![r(SQRT_HALF), im(SQRT_HALF)],
    ]
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    // Box-Muller normals give a rotation-invariant direction.
    let mut v = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut gauss = || {
            let u1: f64 = rng.random_range(1e-12..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        v.push(Complex64::new(gauss(), gauss()));
    }
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

/// Instantiations for one family of dimension `dim`.
fn family_samples(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(count);
    if dim == 2 {
        out.extend(fixed_single_qubit());
    } else {
        // Basis states, then the uniform superposition.
        for i in 0..dim.min(4) {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[i] = Complex64::new(1.0, 0.0);
            out.push(v);
        }
        out.push(vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim]);
    }
    out.truncate(count);
    while out.len() < count {
        out.push(random_unit(rng, dim));
    }
    out
}

/// Build the deterministic sample set for every family in the table.
pub fn build_samples(params: &ParamTable, count: usize, seed: u64) -> SampleSet {
    if params.is_empty() {
        return SampleSet::concrete();
    }
    let count = count.max(1);
    let n_atoms = params.atom_count();
    let mut values = vec![vec![Complex64::new(0.0, 0.0); n_atoms]; count];
    for (fi, family) in params.families().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ (fi as u64)));
        let dim = family.atoms.len();
        let s = family_samples(dim, count, &mut rng);
        for (si, sample) in s.into_iter().enumerate() {
            for (ai, &atom) in family.atoms.iter().enumerate() {
                values[si][atom as usize] = sample[ai];
            }
        }
    }
    SampleSet { values, symbolic: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut params = ParamTable::new();
        params.fresh_family("psi", 1);
        params.fresh_family("phi", 2);
        let a = build_samples(&params, 16, 0x5148_3737);
        let b = build_samples(&params, 16, 0x5148_3737);
        assert_eq!(a.len(), 16);
        for (x, y) in a.values.iter().zip(&b.values) {
            for (u, v) in x.iter().zip(y) {
                assert_eq!(u, v);
            }
        }
    }

    #[test]
    fn samples_are_unit_norm_per_family() {
        let mut params = ParamTable::new();
        let f = params.fresh_family("psi", 1).clone();
        let s = build_samples(&params, 16, 7);
        for v in &s.values {
            let n: f64 = f.atoms.iter().map(|&a| v[a as usize].norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fixed_prefix_matches_documented_set() {
        let mut params = ParamTable::new();
        params.fresh_family("psi", 1);
        let s = build_samples(&params, 16, 99);
        assert_eq!(s.values[0][0], Complex64::new(1.0, 0.0));
        assert_eq!(s.values[1][1], Complex64::new(1.0, 0.0));
        assert!((s.values[4][1] - Complex64::new(0.0, SQRT_HALF)).norm() < 1e-12);
    }
}
