//! Evaluation of state expressions, scalars, and bit expressions into
//! symbolic vectors and concrete values.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::linalg::SymVector;
use crate::surface::ast::{BitExpr, Name, Scalar, StateExpr};

use super::layout::ParamTable;
use super::PropsError;

/// The four concrete cases of an opaque `bit -> bit` parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitFn {
    Const0,
    Const1,
    Id,
    Not,
}

impl BitFn {
    pub const ALL: [BitFn; 4] = [BitFn::Const0, BitFn::Const1, BitFn::Id, BitFn::Not];

    pub fn apply(self, b: u8) -> u8 {
        match self {
            BitFn::Const0 => 0,
            BitFn::Const1 => 1,
            BitFn::Id => b,
            BitFn::Not => 1 - b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BitFn::Const0 => "const0",
            BitFn::Const1 => "const1",
            BitFn::Id => "id",
            BitFn::Not => "not",
        }
    }

    pub fn from_name(s: &str) -> Option<BitFn> {
        Some(match s {
            "const0" => BitFn::Const0,
            "const1" => BitFn::Const1,
            "id" => BitFn::Id,
            "not" => BitFn::Not,
            _ => return None,
        })
    }
}

/// Context for evaluating specification expressions.
#[derive(Debug, Clone, Default)]
pub struct EvalCtx {
    /// Symbolic vector families (ghost vectors left symbolic).
    pub params: ParamTable,
    /// Ghost vectors bound to concrete or symbolic states (call sites).
    pub vectors: BTreeMap<Name, SymVector>,
    /// Known bit values (case-enumerated parameters and ghosts).
    pub bits: BTreeMap<Name, u8>,
    /// Case-enumerated opaque bit functions.
    pub fns: BTreeMap<Name, BitFn>,
}

impl EvalCtx {
    pub fn resolve_vector(&self, name: &str) -> Option<SymVector> {
        if let Some(v) = self.vectors.get(name) {
            return Some(v.clone());
        }
        self.params.family(name).map(|f| f.vector())
    }
}

pub fn eval_bit(e: &BitExpr, ctx: &EvalCtx) -> Result<u8, PropsError> {
    match e {
        BitExpr::Lit(b) => Ok(*b),
        BitExpr::Var(n) => ctx.bits.get(n).copied().ok_or_else(|| PropsError::Eval {
            message: format!("bit `{n}` has no known value here"),
        }),
        BitExpr::App(f, arg) => {
            let func = ctx.fns.get(f).copied().ok_or_else(|| PropsError::Eval {
                message: format!("`{f}` is not an enumerated bit function"),
            })?;
            Ok(func.apply(eval_bit(arg, ctx)?))
        }
        BitExpr::Xor(a, b) => Ok(eval_bit(a, ctx)? ^ eval_bit(b, ctx)?),
    }
}

pub fn eval_scalar(s: &Scalar, ctx: &EvalCtx) -> Result<Complex64, PropsError> {
    match s {
        Scalar::Int(n) => Ok(Complex64::new(*n as f64, 0.0)),
        Scalar::Sqrt(n) => Ok(Complex64::new((*n as f64).sqrt(), 0.0)),
        Scalar::I => Ok(Complex64::new(0.0, 1.0)),
        Scalar::Neg(inner) => Ok(-eval_scalar(inner, ctx)?),
        Scalar::Mul(a, b) => Ok(eval_scalar(a, ctx)? * eval_scalar(b, ctx)?),
        Scalar::Div(a, b) => {
            let d = eval_scalar(b, ctx)?;
            if d.norm() < 1e-300 {
                return Err(PropsError::Eval { message: "division by zero scalar".into() });
            }
            Ok(eval_scalar(a, ctx)? / d)
        }
        Scalar::Pow(base, e) => {
            let b = eval_scalar(base, ctx)?;
            Ok(if eval_bit(e, ctx)? == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                b
            })
        }
    }
}

pub fn eval_state(e: &StateExpr, ctx: &EvalCtx) -> Result<SymVector, PropsError> {
    match e {
        StateExpr::Ket(bits, _) => {
            let n = bits.len();
            let mut index = 0usize;
            for b in bits {
                index = (index << 1) | eval_bit(b, ctx)? as usize;
            }
            Ok(SymVector::basis(n, index))
        }
        StateExpr::SymName(name, _) => {
            ctx.resolve_vector(name).ok_or_else(|| PropsError::Unresolved {
                name: name.clone(),
            })
        }
        StateExpr::Scaled(s, inner, _) => {
            let c = eval_scalar(s, ctx)?;
            Ok(eval_state(inner, ctx)?.scale(c))
        }
        StateExpr::Div(inner, s, _) => {
            let c = eval_scalar(s, ctx)?;
            if c.norm() < 1e-300 {
                return Err(PropsError::Eval { message: "division by zero scalar".into() });
            }
            Ok(eval_state(inner, ctx)?.scale(Complex64::new(1.0, 0.0) / c))
        }
        StateExpr::Sum(items, _) => {
            let mut acc: Option<SymVector> = None;
            for item in items {
                let v = eval_state(item, ctx)?;
                acc = Some(match acc {
                    None => v,
                    Some(a) => a.add(&v).map_err(PropsError::from)?,
                });
            }
            acc.ok_or_else(|| PropsError::Eval { message: "empty sum".into() })
        }
        StateExpr::Tensor(items, _) => {
            let mut acc = SymVector::scalar_one();
            for item in items {
                acc = acc.tensor(&eval_state(item, ctx)?);
            }
            Ok(acc)
        }
        StateExpr::GateApp { gate, arg, .. } => {
            let v = eval_state(arg, ctx)?;
            let on = match &gate.exponent {
                Some(e) => eval_bit(e, ctx)? == 1,
                None => true,
            };
            if !on {
                return Ok(v);
            }
            let k = gate.gate.arity();
            if v.n_qubits() < k {
                return Err(PropsError::Eval {
                    message: format!(
                        "gate {} needs {k} qubit(s), state has {}",
                        gate.gate,
                        v.n_qubits()
                    ),
                });
            }
            // Gates in state expressions act on the leading qubits.
            let positions: Vec<usize> = (0..k).collect();
            v.apply_gate(gate.gate, &positions).map_err(PropsError::from)
        }
    }
}

/// Number of qubits a state expression describes, when that is syntactically
/// determined (symbolic names resolve through the context).
pub fn state_qubits(e: &StateExpr, ctx: &EvalCtx) -> Result<usize, PropsError> {
    match e {
        StateExpr::Ket(bits, _) => Ok(bits.len()),
        StateExpr::SymName(name, _) => ctx
            .resolve_vector(name)
            .map(|v| v.n_qubits())
            .ok_or_else(|| PropsError::Unresolved { name: name.clone() }),
        StateExpr::Scaled(_, inner, _) | StateExpr::Div(inner, _, _) => state_qubits(inner, ctx),
        StateExpr::Sum(items, _) => state_qubits(&items[0], ctx),
        StateExpr::Tensor(items, _) => {
            let mut n = 0;
            for item in items {
                n += state_qubits(item, ctx)?;
            }
            Ok(n)
        }
        StateExpr::GateApp { arg, .. } => state_qubits(arg, ctx),
    }
}
