//! Checker-wide tunables.

/// Seed used for the deterministic symbolic sample set and the random-program
/// generator. The bytes spell "QH77". Override with the `QHTT_SEED`
/// environment variable or the corresponding CLI flag.
pub const DEFAULT_SEED: u64 = 0x5148_3737;

/// Rank decisions during subspace construction.
pub const RANK_TOL: f64 = 1e-9;

/// Inclusion / membership comparisons between subspaces and states.
pub const CMP_TOL: f64 = 1e-7;

/// Exact coefficient matching and state-predicate checks.
pub const COEFF_TOL: f64 = 1e-9;

/// Gate unitarity and simulator norm checks.
pub const STRICT_TOL: f64 = 1e-12;

/// Default cap on simultaneously live registers (program qubits + ghosts).
pub const DEFAULT_MAX_REGISTERS: usize = 12;

/// Default number of instantiations per symbolic parameter family:
/// 5 fixed single-qubit states plus 11 seeded pseudo-random unit vectors.
pub const DEFAULT_SAMPLES: usize = 16;

#[derive(Debug, Clone)]
pub struct Config {
    /// Comparison tolerance (inclusion, membership, frame separability).
    pub tol: f64,
    /// Maximum number of live registers.
    pub max_registers: usize,
    /// Number of sample instantiations per symbolic family.
    pub samples: usize,
    /// Seed for sample generation.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: CMP_TOL,
            max_registers: DEFAULT_MAX_REGISTERS,
            samples: DEFAULT_SAMPLES,
            seed: seed_from_env(),
        }
    }
}

/// Resolve the sample seed, honoring `QHTT_SEED` when set.
pub fn seed_from_env() -> u64 {
    match std::env::var("QHTT_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .or_else(|_| u64::from_str_radix(s.trim().trim_start_matches("0x"), 16))
            .unwrap_or(DEFAULT_SEED),
        Err(_) => DEFAULT_SEED,
    }
}
