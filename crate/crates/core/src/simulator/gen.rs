//! Seeded generator of straight-line programs for differential testing:
//! up to 4 qubits, up to 12 gates, up to 2 measurements, no calls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GATES_1Q: [&str; 5] = ["I", "X", "Y", "Z", "H"];
const GATES_2Q: [&str; 2] = ["CX", "CZ"];

/// Source text of the `index`-th random program for `seed`.
pub fn random_program(seed: u64, index: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(super::shot_seed(seed, index ^ 0xdead_beef));
    let n_qubits: usize = rng.random_range(1..=4);
    let n_gates: usize = rng.random_range(0..=12);
    let n_meas: usize = rng.random_range(0..=2.min(n_qubits));

    let mut body: Vec<String> = Vec::new();
    let mut live: Vec<String> = Vec::new();
    for i in 0..n_qubits {
        let b = rng.random_range(0..2u8);
        body.push(format!("q{i} <- init {b};"));
        live.push(format!("q{i}"));
    }

    // Interleave gates and measurements.
    let mut meas_left = n_meas;
    let mut ops: Vec<bool> = Vec::new(); // true = measurement
    for _ in 0..n_gates {
        ops.push(false);
    }
    for _ in 0..n_meas {
        ops.push(true);
    }
    // Fisher-Yates with the seeded rng keeps programs reproducible.
    for i in (1..ops.len()).rev() {
        let j = rng.random_range(0..=i);
        ops.swap(i, j);
    }

    let mut meas_count = 0usize;
    for is_meas in ops {
        if live.is_empty() {
            break;
        }
        if is_meas && meas_left > 0 {
            let i = rng.random_range(0..live.len());
            let q = live.remove(i);
            body.push(format!("m{meas_count} <- meas {q};"));
            meas_count += 1;
            meas_left -= 1;
        } else if live.len() >= 2 && rng.random_range(0..3) == 0 {
            let g = GATES_2Q[rng.random_range(0..GATES_2Q.len())];
            let i = rng.random_range(0..live.len());
            let mut j = rng.random_range(0..live.len());
            while j == i {
                j = rng.random_range(0..live.len());
            }
            body.push(format!("apply {g} to ({}, {});", live[i], live[j]));
        } else {
            let g = GATES_1Q[rng.random_range(0..GATES_1Q.len())];
            let i = rng.random_range(0..live.len());
            body.push(format!("apply {g} to ({});", live[i]));
        }
    }
    body.push("return ()".into());

    let stmts = body.join("\n  ");
    format!(
        "gen{index} : QST (u: unit) (requires {{top}}) (ensures {{top}})\ngen{index} = do {{\n  {stmts}\n}}\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    #[test]
    fn generated_programs_parse_and_are_deterministic() {
        for i in 0..32 {
            let a = random_program(0x5148_3737, i);
            let b = random_program(0x5148_3737, i);
            assert_eq!(a, b);
            parse(&a).unwrap_or_else(|e| panic!("program {i} failed to parse: {e}\n{a}"));
        }
    }
}
