//! Independent dense state-vector simulator. Runs programs concretely,
//! ignoring all specifications: measurements sample outcomes from the Born
//! rule, project, and free the measured register. Used as the oracle for
//! differential testing and by the `simulate` CLI command.
//!
//! The gate matrices here are written out independently of the checker's
//! tables; a fault in either shows up as a divergence.

pub mod diff;
pub mod gen;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::props::BitFn;
use crate::surface::ast::*;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;
const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown declaration `{0}`")]
    UnknownDecl(String),
    #[error("qubit parameter `{0}` needs an input state (use --in {0}=a,b)")]
    MissingInput(String),
    #[error("bit parameter `{0}` needs a value (use --bit {0}=0|1)")]
    MissingBit(String),
    #[error("opaque function parameter `{0}` needs --oracle const0|const1|id|not")]
    MissingOracle(String),
    #[error("gate on a freed (measured) register `{0}`")]
    FreedRegister(String),
    #[error("simulator limitation: {0}")]
    Unsupported(String),
    #[error("norm drifted to {0} (internal error)")]
    NormDrift(f64),
}

/// Concrete state over the live registers; register `i` is the `i`-th most
/// significant bit of the basis index.
#[derive(Debug, Clone)]
pub struct ConcreteState {
    pub vec: Vec<Complex64>,
    pub names: Vec<String>,
}

impl ConcreteState {
    fn n(&self) -> usize {
        self.names.len()
    }

    fn norm(&self) -> f64 {
        self.vec.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Per-step record: the state after executing one top-level statement.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub stmt: usize,
    pub state: ConcreteState,
    /// Measurement performed at this step, if any (bit name, outcome).
    pub outcome: Option<(String, u8)>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Outcome bits in measurement order (innermost calls included).
    pub outcomes: Vec<u8>,
    pub final_state: ConcreteState,
    pub log: Vec<StepRecord>,
    /// Values of the returned components, when they are bits.
    pub returned_bits: Vec<u8>,
    /// Registers (by position in `final_state`) returned as qubits.
    pub returned_qubits: Vec<usize>,
}

/// Inputs for a run: per-qubit-parameter amplitudes, bit parameter values,
/// and the oracle case for `bit -> bit` parameters.
#[derive(Debug, Clone, Default)]
pub struct SimInputs {
    pub qubits: BTreeMap<String, [Complex64; 2]>,
    pub bits: BTreeMap<String, u8>,
    pub oracle: Option<BitFn>,
}

// ----- Independent gate table -----

fn gate_matrix(name: &str) -> Option<Vec<Vec<Complex64>>> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let z = r(0.0);
    Some(match name {
        "I" => vec![vec![r(1.0), z], vec![z, r(1.0)]],
        "X" => vec![vec![z, r(1.0)], vec![r(1.0), z]],
        "Y" => vec![vec![z, im(-1.0)], vec![im(1.0), z]],
        "Z" => vec![vec![r(1.0), z], vec![z, r(-1.0)]],
        "H" => vec![
            vec![r(SQRT_HALF), r(SQRT_HALF)],
            vec![r(SQRT_HALF), r(-SQRT_HALF)],
        ],
        "CX" => vec![
            vec![r(1.0), z, z, z],
            vec![z, r(1.0), z, z],
            vec![z, z, z, r(1.0)],
            vec![z, z, r(1.0), z],
        ],
        "CZ" => vec![
            vec![r(1.0), z, z, z],
            vec![z, r(1.0), z, z],
            vec![z, z, r(1.0), z],
            vec![z, z, z, r(-1.0)],
        ],
        _ => return None,
    })
}

struct Sim<'a> {
    program: &'a Program,
    state: ConcreteState,
    rng: ChaCha8Rng,
    outcomes: Vec<u8>,
    log: Vec<StepRecord>,
    oracle: Option<BitFn>,
}

/// A frame maps source names to runtime values.
#[derive(Debug, Clone)]
enum Value {
    Qubit(String), // register name
    Bit(u8),
    Unit,
    Fn(BitFn),
    /// A suspended opaque computation (only the built-in xor oracle).
    Oracle,
    Tuple(Vec<Value>),
}

type Frame = BTreeMap<String, Value>;

impl<'a> Sim<'a> {
    fn reg_pos(&self, name: &str) -> Option<usize> {
        self.state.names.iter().position(|n| n == name)
    }

    fn fresh_reg_name(&self, base: &str) -> String {
        if self.reg_pos(base).is_none() {
            return base.to_string();
        }
        for i in 2.. {
            let cand = format!("{base}.{i}");
            if self.reg_pos(&cand).is_none() {
                return cand;
            }
        }
        unreachable!()
    }

    fn append_register(&mut self, base: &str, amps: [Complex64; 2]) -> String {
        let name = self.fresh_reg_name(base);
        let mut vec = Vec::with_capacity(self.state.vec.len() * 2);
        for c in &self.state.vec {
            vec.push(c * amps[0]);
            vec.push(c * amps[1]);
        }
        self.state.vec = vec;
        self.state.names.push(name.clone());
        name
    }

    fn apply_padded(&mut self, m: &[Vec<Complex64>], positions: &[usize]) {
        let n = self.state.n();
        let k = positions.len();
        let shifts: Vec<usize> = positions.iter().map(|&p| n - 1 - p).collect();
        let mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
        let sub = 1usize << k;
        let idx_of = |base: usize, g: usize| -> usize {
            let mut idx = base;
            for (j, &s) in shifts.iter().enumerate() {
                if (g >> (k - 1 - j)) & 1 == 1 {
                    idx |= 1 << s;
                }
            }
            idx
        };
        for base in 0..self.state.vec.len() {
            if base & mask != 0 {
                continue;
            }
            let old: Vec<Complex64> = (0..sub).map(|g| self.state.vec[idx_of(base, g)]).collect();
            for (g, row) in m.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (h, c) in row.iter().enumerate() {
                    acc += c * old[h];
                }
                self.state.vec[idx_of(base, g)] = acc;
            }
        }
    }

    /// Born-rule measurement: sample, project, renormalize, free the
    /// register.
    fn measure(&mut self, reg: &str) -> Result<u8, SimError> {
        let pos = self
            .reg_pos(reg)
            .ok_or_else(|| SimError::FreedRegister(reg.to_string()))?;
        let n = self.state.n();
        let shift = n - 1 - pos;
        let p1: f64 = self
            .state
            .vec
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> shift) & 1 == 1)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        let p0: f64 = self
            .state
            .vec
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> shift) & 1 == 0)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        if (p0 + p1 - 1.0).abs() > 1e-9 {
            return Err(SimError::NormDrift(p0 + p1));
        }
        let u: f64 = self.rng.random_range(0.0..1.0);
        let outcome = u8::from(u < p1);
        let keep = outcome as usize;
        let norm = if outcome == 1 { p1.sqrt() } else { p0.sqrt() };

        // Project onto the outcome and drop the register.
        let mut vec = Vec::with_capacity(self.state.vec.len() / 2);
        for i in 0..self.state.vec.len() {
            if (i >> shift) & 1 == keep {
                vec.push(self.state.vec[i] / norm);
            }
        }
        self.state.vec = vec;
        self.state.names.remove(pos);
        self.outcomes.push(outcome);

        let drift = (self.state.norm() - 1.0).abs();
        if drift > NORM_TOL * 1e3 {
            return Err(SimError::NormDrift(self.state.norm()));
        }
        Ok(outcome)
    }

    fn qubit_of(&self, frame: &Frame, t: &Term) -> Result<String, SimError> {
        match t {
            Term::Var(n, _) => match frame.get(n) {
                Some(Value::Qubit(reg)) => Ok(reg.clone()),
                _ => Err(SimError::Unsupported(format!("`{n}` is not a qubit here"))),
            },
            _ => Err(SimError::Unsupported("expected a qubit variable".into())),
        }
    }

    fn bit_of(&self, frame: &Frame, t: &Term) -> Result<u8, SimError> {
        match t {
            Term::BitLit(b, _) => Ok(*b),
            Term::Var(n, _) => match frame.get(n) {
                Some(Value::Bit(b)) => Ok(*b),
                _ => Err(SimError::Unsupported(format!("`{n}` is not a bit here"))),
            },
            _ => Err(SimError::Unsupported("expected a bit".into())),
        }
    }

    fn value_of(&self, frame: &Frame, t: &Term) -> Result<Value, SimError> {
        match t {
            Term::Var(n, _) => frame
                .get(n)
                .cloned()
                .ok_or_else(|| SimError::Unsupported(format!("unbound `{n}`"))),
            Term::BitLit(b, _) => Ok(Value::Bit(*b)),
            Term::UnitLit(_) => Ok(Value::Unit),
            Term::Pair(parts, _) => Ok(Value::Tuple(
                parts
                    .iter()
                    .map(|p| self.value_of(frame, p))
                    .collect::<Result<_, _>>()?,
            )),
            Term::Fst(inner, _) => match self.value_of(frame, inner)? {
                Value::Tuple(vs) => Ok(vs[0].clone()),
                _ => Err(SimError::Unsupported("fst of a non-pair".into())),
            },
            Term::Snd(inner, _) => match self.value_of(frame, inner)? {
                Value::Tuple(mut vs) => Ok(vs.remove(1)),
                _ => Err(SimError::Unsupported("snd of a non-pair".into())),
            },
            _ => Err(SimError::Unsupported("unsupported term in simulation".into())),
        }
    }

    /// Execute a computation; `top` marks the outermost frame, which records
    /// the per-statement log.
    fn exec(&mut self, frame: &mut Frame, comp: &Comp, top: bool, stmt: &mut usize) -> Result<Value, SimError> {
        let mut cur = comp;
        loop {
            let mut outcome_rec: Option<(String, u8)> = None;
            match cur {
                Comp::Return(t, _) => {
                    return self.value_of(frame, t);
                }
                Comp::BindCmd { pat, cmd, rest, .. } => {
                    match cmd {
                        Cmd::Init(b, _) => {
                            let amps = if *b == 0 {
                                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
                            } else {
                                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
                            };
                            let reg = self.append_register(&pat.names[0], amps);
                            frame.insert(pat.names[0].clone(), Value::Qubit(reg));
                        }
                        Cmd::Meas(q, _) => {
                            let reg = self.qubit_of(frame, q)?;
                            let out = self.measure(&reg)?;
                            frame.insert(pat.names[0].clone(), Value::Bit(out));
                            outcome_rec = Some((pat.names[0].clone(), out));
                        }
                        Cmd::Apply { gate, targets, .. } => {
                            self.exec_apply(frame, gate, targets)?;
                        }
                    }
                    if top {
                        self.log_step(*stmt, outcome_rec);
                        *stmt += 1;
                    }
                    cur = rest;
                }
                Comp::Assert { rest, .. } => {
                    // Specifications are ignored.
                    if top {
                        self.log_step(*stmt, None);
                        *stmt += 1;
                    }
                    cur = rest;
                }
                Comp::IfThenElse { cond, then_branch, else_branch, rest, .. } => {
                    let b = self.bit_of(frame, cond)?;
                    let branch = if b == 1 { then_branch } else { else_branch };
                    let mut inner = frame.clone();
                    let mut sub = 0usize;
                    self.exec(&mut inner, branch, false, &mut sub)?;
                    if top {
                        self.log_step(*stmt, None);
                        *stmt += 1;
                    }
                    cur = rest;
                }
                Comp::BindCall { pat, func, args, rest, .. } => {
                    let result = self.exec_call(frame, func, args)?;
                    bind_pattern(frame, pat, result)?;
                    if top {
                        let last_outcome = None;
                        self.log_step(*stmt, last_outcome);
                        *stmt += 1;
                    }
                    cur = rest;
                }
            }
        }
    }

    fn log_step(&mut self, stmt: usize, outcome: Option<(String, u8)>) {
        self.log.push(StepRecord {
            stmt,
            state: self.state.clone(),
            outcome,
        });
    }

    fn exec_apply(&mut self, frame: &Frame, gate: &Term, targets: &[Term]) -> Result<(), SimError> {
        let gname = match gate {
            Term::GateConst(g, _) => g.name().to_string(),
            Term::Var(n, _) => n.clone(),
            _ => return Err(SimError::Unsupported("dynamic gate".into())),
        };
        let m = gate_matrix(&gname)
            .ok_or_else(|| SimError::Unsupported(format!("unknown gate `{gname}`")))?;
        let mut positions = Vec::new();
        for t in targets {
            let reg = self.qubit_of(frame, t)?;
            let pos = self
                .reg_pos(&reg)
                .ok_or_else(|| SimError::FreedRegister(reg.clone()))?;
            positions.push(pos);
        }
        self.apply_padded(&m, &positions);
        Ok(())
    }

    fn exec_call(&mut self, frame: &Frame, func: &Term, args: &[Term]) -> Result<Value, SimError> {
        let fname = match func {
            Term::Var(n, _) => n.clone(),
            _ => return Err(SimError::Unsupported("dynamic call target".into())),
        };
        // An opaque oracle parameter: the standard xor oracle
        // |x,y> -> |x, y xor f(x)>.
        if let Some(Value::Oracle) = frame.get(&fname) {
            // The oracle computes with whichever bit function is in scope.
            let f = frame
                .values()
                .find_map(|v| match v {
                    Value::Fn(f) => Some(*f),
                    _ => None,
                })
                .or(self.oracle)
                .ok_or_else(|| SimError::MissingOracle(fname.clone()))?;
            if args.len() != 2 {
                return Err(SimError::Unsupported(
                    "the built-in oracle takes two qubits".into(),
                ));
            }
            let rx = self.qubit_of(frame, &args[0])?;
            let ry = self.qubit_of(frame, &args[1])?;
            let px = self.reg_pos(&rx).ok_or(SimError::FreedRegister(rx.clone()))?;
            let py = self.reg_pos(&ry).ok_or(SimError::FreedRegister(ry.clone()))?;
            // Permutation |x,y> -> |x, y xor f(x)| as a 4x4 matrix.
            let z = Complex64::new(0.0, 0.0);
            let o = Complex64::new(1.0, 0.0);
            let mut m = vec![vec![z; 4]; 4];
            for x in 0..2usize {
                for y in 0..2usize {
                    let outy = y ^ (f.apply(x as u8) as usize);
                    m[(x << 1) | outy][(x << 1) | y] = o;
                }
            }
            self.apply_padded(&m, &[px, py]);
            return Ok(Value::Unit);
        }

        let decl = self
            .program
            .decl(&fname)
            .ok_or_else(|| SimError::UnknownDecl(fname.clone()))?;
        let mut callee_frame: Frame = BTreeMap::new();
        if decl.params.len() != args.len() {
            return Err(SimError::Unsupported(format!(
                "`{fname}` expects {} argument(s)",
                decl.params.len()
            )));
        }
        for (p, a) in decl.params.iter().zip(args) {
            callee_frame.insert(p.clone(), self.value_of(frame, a)?);
        }
        let mut sub = 0usize;
        self.exec(&mut callee_frame, &decl.body, false, &mut sub)
    }
}

fn bind_pattern(frame: &mut Frame, pat: &Pattern, value: Value) -> Result<(), SimError> {
    if pat.names.len() == 1 {
        frame.insert(pat.names[0].clone(), value);
        return Ok(());
    }
    match value {
        Value::Tuple(vs) if vs.len() == pat.names.len() => {
            for (n, v) in pat.names.iter().zip(vs) {
                frame.insert(n.clone(), v);
            }
            Ok(())
        }
        _ => Err(SimError::Unsupported("pattern arity mismatch".into())),
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the per-shot RNG seed (documented: ChaCha8 keyed with
/// splitmix64(seed ^ shot)).
pub fn shot_seed(seed: u64, shot: u64) -> u64 {
    splitmix64(seed ^ shot.wrapping_mul(0x2545_f491_4f6c_dd1d))
}

/// Run one trajectory of `decl` with the given inputs and seed.
pub fn run(
    program: &Program,
    decl_name: &str,
    inputs: &SimInputs,
    seed: u64,
) -> Result<Trajectory, SimError> {
    let decl = program
        .decl(decl_name)
        .ok_or_else(|| SimError::UnknownDecl(decl_name.to_string()))?;

    let mut sim = Sim {
        program,
        state: ConcreteState { vec: vec![Complex64::new(1.0, 0.0)], names: Vec::new() },
        rng: ChaCha8Rng::seed_from_u64(seed),
        outcomes: Vec::new(),
        log: Vec::new(),
        oracle: inputs.oracle,
    };

    // Bind parameters from the declared signature shape.
    let mut frame: Frame = BTreeMap::new();
    let mut cur = &decl.signature;
    for pname in &decl.params {
        let (dom, cod) = match cur {
            QType::Pi { dom, cod, .. } => (dom.as_ref(), cod.as_ref()),
            _ => return Err(SimError::Unsupported("signature/parameter mismatch".into())),
        };
        match dom {
            QType::Qbit => {
                let amps = inputs
                    .qubits
                    .get(pname)
                    .copied()
                    .ok_or_else(|| SimError::MissingInput(pname.clone()))?;
                let norm = (amps[0].norm_sqr() + amps[1].norm_sqr()).sqrt();
                if norm < 1e-9 {
                    return Err(SimError::Unsupported(format!("zero input state for `{pname}`")));
                }
                let reg = sim.append_register(pname, [amps[0] / norm, amps[1] / norm]);
                frame.insert(pname.clone(), Value::Qubit(reg));
            }
            QType::Bit => {
                let b = inputs
                    .bits
                    .get(pname)
                    .copied()
                    .ok_or_else(|| SimError::MissingBit(pname.clone()))?;
                frame.insert(pname.clone(), Value::Bit(b));
            }
            QType::Pi { dom: d2, cod: c2, .. }
                if **d2 == QType::Bit && **c2 == QType::Bit =>
            {
                let f = inputs
                    .oracle
                    .ok_or_else(|| SimError::MissingOracle(pname.clone()))?;
                frame.insert(pname.clone(), Value::Fn(f));
            }
            QType::Pi { .. } => {
                // An opaque Hoare-typed circuit parameter: only the built-in
                // xor oracle is supported.
                frame.insert(pname.clone(), Value::Oracle);
            }
            other => {
                return Err(SimError::Unsupported(format!(
                    "cannot supply a runtime value of type {}",
                    crate::surface::pretty_type(other)
                )))
            }
        }
        cur = cod;
    }

    let mut stmt = 0usize;
    let result = sim.exec(&mut frame, &decl.body, true, &mut stmt)?;

    // Collect returned bits and qubit register positions.
    let mut returned_bits = Vec::new();
    let mut returned_qubits = Vec::new();
    let mut stack = vec![result];
    while let Some(v) = stack.pop() {
        match v {
            Value::Bit(b) => returned_bits.push(b),
            Value::Qubit(reg) => {
                if let Some(p) = sim.reg_pos(&reg) {
                    returned_qubits.push(p);
                }
            }
            Value::Tuple(vs) => stack.extend(vs.into_iter().rev()),
            _ => {}
        }
    }
    returned_bits.reverse();
    returned_qubits.reverse();

    Ok(Trajectory {
        outcomes: sim.outcomes,
        final_state: sim.state,
        log: sim.log,
        returned_bits,
        returned_qubits,
    })
}

/// Run many shots, histogramming the measurement outcome strings.
pub fn run_shots(
    program: &Program,
    decl_name: &str,
    inputs: &SimInputs,
    seed: u64,
    shots: usize,
) -> Result<BTreeMap<String, usize>, SimError> {
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for shot in 0..shots {
        let t = run(program, decl_name, inputs, shot_seed(seed, shot as u64))?;
        let key: String = t.outcomes.iter().map(|b| char::from(b'0' + b)).collect();
        *hist.entry(key).or_insert(0) += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    fn bell_src() -> &'static str {
        "bell : QST ((x, y): bit ⊗ bit) (requires {⊤}) (ensures {⊤})\n\
         bell = do {\n  a <- init 0;\n  b <- init 0;\n  apply H to (a);\n  apply CX to (a, b);\n\
           x <- meas a;\n  y <- meas b;\n  return (x, y)\n}\n"
    }

    #[test]
    fn x_then_meas_is_deterministic() {
        let src = "f : QST (x: bit) (requires {⊤}) (ensures {⊤})\n\
                   f = do {\n  q <- init 0;\n  apply X to (q);\n  x <- meas q;\n  return x\n}\n";
        let prog = parse(src).unwrap();
        for seed in 0..16 {
            let t = run(&prog, "f", &SimInputs::default(), seed).unwrap();
            assert_eq!(t.outcomes, vec![1]);
        }
    }

    #[test]
    fn bell_outcomes_agree_and_are_roughly_fair() {
        let prog = parse(bell_src()).unwrap();
        let hist = run_shots(&prog, "bell", &SimInputs::default(), 7, 2000).unwrap();
        assert_eq!(hist.get("01").copied().unwrap_or(0), 0);
        assert_eq!(hist.get("10").copied().unwrap_or(0), 0);
        let p00 = *hist.get("00").unwrap() as f64 / 2000.0;
        assert!(p00 > 0.4 && p00 < 0.6, "p00 = {p00}");
    }

    #[test]
    fn trajectories_are_deterministic_in_the_seed() {
        let prog = parse(bell_src()).unwrap();
        let a = run(&prog, "bell", &SimInputs::default(), 12345).unwrap();
        let b = run(&prog, "bell", &SimInputs::default(), 12345).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        for (x, y) in a.final_state.vec.iter().zip(&b.final_state.vec) {
            assert_eq!(x, y);
        }
    }
}
