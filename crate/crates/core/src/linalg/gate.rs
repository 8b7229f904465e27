//! The fixed gate set: matrices for I, X, Y, Z, H, CX, CZ.

use num_complex::Complex64;
use std::fmt;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    CX,
    CZ,
}

impl Gate {
    pub const ALL: [Gate; 7] = [Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::CX, Gate::CZ];

    pub fn arity(self) -> usize {
        match self {
            Gate::I | Gate::X | Gate::Y | Gate::Z | Gate::H => 1,
            Gate::CX | Gate::CZ => 2,
        }
    }

    pub fn from_name(name: &str) -> Option<Gate> {
        Some(match name {
            "I" => Gate::I,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "CX" => Gate::CX,
            "CZ" => Gate::CZ,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::CX => "CX",
            Gate::CZ => "CZ",
        }
    }

    /// Row-major matrix, dimension `2^arity`. The first qubit of a two-qubit
    /// gate is the high bit of the row/column index (the control for CX).
    pub fn matrix(self) -> Vec<Vec<Complex64>> {
        let r = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        match self {
            Gate::I => vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]],
            Gate::X => vec![vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]],
            Gate::Y => vec![vec![r(0.0), im(-1.0)], vec![im(1.0), r(0.0)]],
            Gate::Z => vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(-1.0)]],
            Gate::H => vec![
                vec![r(SQRT_HALF), r(SQRT_HALF)],
                vec![r(SQRT_HALF), r(-SQRT_HALF)],
            ],
            Gate::CX => vec![
                vec![r(1.0), r(0.0), r(0.0), r(0.0)],
                vec![r(0.0), r(1.0), r(0.0), r(0.0)],
                vec![r(0.0), r(0.0), r(0.0), r(1.0)],
                vec![r(0.0), r(0.0), r(1.0), r(0.0)],
            ],
            Gate::CZ => vec![
                vec![r(1.0), r(0.0), r(0.0), r(0.0)],
                vec![r(0.0), r(1.0), r(0.0), r(0.0)],
                vec![r(0.0), r(0.0), r(1.0), r(0.0)],
                vec![r(0.0), r(0.0), r(0.0), r(-1.0)],
            ],
        }
    }

    /// Max-norm deviation of `U†U` from the identity.
    pub fn unitarity_defect(self) -> f64 {
        let m = self.matrix();
        let n = m.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += m[k][i].conj() * m[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - Complex64::new(expect, 0.0)).norm());
            }
        }
        worst
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::STRICT_TOL;

    #[test]
    fn all_gates_unitary() {
        for g in Gate::ALL {
            assert!(
                g.unitarity_defect() <= STRICT_TOL,
                "{g} defect {}",
                g.unitarity_defect()
            );
        }
    }

    #[test]
    fn all_gates_self_inverse() {
        // U^2 = I holds for the whole Table: I, X, Y, Z, H, CX, CZ.
        for g in Gate::ALL {
            let m = g.matrix();
            let n = m.len();
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += m[i][k] * m[k][j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (acc - Complex64::new(expect, 0.0)).norm() <= STRICT_TOL,
                        "{g}^2 != I at ({i},{j})"
                    );
                }
            }
        }
    }
}
