//! Helpers for fully concrete complex vectors and small density matrices.

use num_complex::Complex64;

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|c| c * s).collect()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Equality as physical states: `a = λ b` for a unit scalar λ.
/// Both inputs are assumed unit-norm.
pub fn eq_up_to_phase(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let ip = inner(b, a);
    if ip.norm() <= tol {
        return norm(a) <= tol && norm(b) <= tol;
    }
    let phase = ip / ip.norm();
    sub(a, &scale(b, phase)).iter().all(|c| c.norm() <= tol)
}

/// Multiply the first significant entry's phase away (made real positive).
pub fn phase_normalize(v: &[Complex64], tol: f64) -> Vec<Complex64> {
    match v.iter().find(|c| c.norm() > tol) {
        Some(lead) => {
            let phase = lead / lead.norm();
            v.iter().map(|c| c / phase).collect()
        }
        None => v.to_vec(),
    }
}

/// Partial trace onto the qubits at `keep` (order significant), tracing out
/// the rest. Input must be unit-norm for the result to have trace one.
pub fn reduced_density(
    state: &[Complex64],
    n: usize,
    keep: &[usize],
) -> Vec<Vec<Complex64>> {
    let k = keep.len();
    let comp: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
    let d = 1usize << k;
    let zero = Complex64::new(0.0, 0.0);
    let mut rho = vec![vec![zero; d]; d];
    let idx_of = |x: usize, c: usize| -> usize {
        let mut idx = 0usize;
        for (j, &p) in keep.iter().enumerate() {
            idx |= ((x >> (k - 1 - j)) & 1) << (n - 1 - p);
        }
        for (j, &p) in comp.iter().enumerate() {
            idx |= ((c >> (comp.len() - 1 - j)) & 1) << (n - 1 - p);
        }
        idx
    };
    for i in 0..d {
        for j in 0..d {
            let mut acc = zero;
            for c in 0..(1usize << comp.len()) {
                acc += state[idx_of(i, c)] * state[idx_of(j, c)].conj();
            }
            rho[i][j] = acc;
        }
    }
    rho
}

pub fn trace(rho: &[Vec<Complex64>]) -> Complex64 {
    (0..rho.len()).map(|i| rho[i][i]).sum()
}

/// Tr(ρ²), equal to one exactly when ρ is pure.
pub fn purity(rho: &[Vec<Complex64>]) -> f64 {
    let d = rho.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho[i][j] * rho[j][i];
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// Brute-force oracle: form the full outer product, then sum the
    /// traced-out diagonal blocks directly.
    fn reduced_density_bruteforce(
        state: &[Complex64],
        n: usize,
        keep: &[usize],
    ) -> Vec<Vec<Complex64>> {
        let dim = state.len();
        let mut outer = vec![vec![c(0.0, 0.0); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                outer[i][j] = state[i] * state[j].conj();
            }
        }
        let k = keep.len();
        let d = 1usize << k;
        let mut rho = vec![vec![c(0.0, 0.0); d]; d];
        let bits_at = |idx: usize, positions: &[usize]| -> usize {
            positions.iter().enumerate().fold(0usize, |acc, (j, &p)| {
                acc | (((idx >> (n - 1 - p)) & 1) << (positions.len() - 1 - j))
            })
        };
        let comp: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
        for i in 0..dim {
            for j in 0..dim {
                if bits_at(i, &comp) == bits_at(j, &comp) {
                    rho[bits_at(i, keep)][bits_at(j, keep)] += outer[i][j];
                }
            }
        }
        rho
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let bell = [c(S, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(S, 0.0)];
        let rho = reduced_density(&bell, 2, &[0]);
        let oracle = reduced_density_bruteforce(&bell, 2, &[0]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho[i][j] - oracle[i][j]).norm() < 1e-12);
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((rho[i][j] - c(want, 0.0)).norm() < 1e-9);
            }
        }
        // purity of the Bell marginal, frozen from the oracle: 0.5
        assert!((purity(&rho) - 0.5).abs() < 1e-9);
        assert!((trace(&rho) - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn product_state_marginal_is_projector() {
        // |+> tensor |1>, marginal of qubit 0 is |+><+|
        let plus_one = [c(0.0, 0.0), c(S, 0.0), c(0.0, 0.0), c(S, 0.0)];
        let rho = reduced_density(&plus_one, 2, &[0]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho[i][j] - c(0.5, 0.0)).norm() < 1e-9);
            }
        }
        assert!((purity(&rho) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phase_equality_ignores_global_phase() {
        let a = [c(S, 0.0), c(0.0, S)];
        let b = [c(0.0, S), c(-S, 0.0)]; // i * a
        assert!(eq_up_to_phase(&a, &b, 1e-12));
        let d = [c(S, 0.0), c(0.0, -S)];
        assert!(!eq_up_to_phase(&a, &d, 1e-9));
    }
}
