//! Semantics of the proposition language: desugaring, subspace denotations
//! over a register layout, state predicates, and entailment.

pub mod denote;
pub mod entail;
pub mod eval;
pub mod layout;
pub mod samples;

pub use denote::{denote_subspace, desugar, subspace_expressible};
pub use entail::{entails, Mode, Verdict};
pub use eval::{eval_bit, eval_scalar, eval_state, BitFn, EvalCtx};
pub use layout::{ParamTable, PropLayout, RegTag, VarKind};
pub use samples::{build_samples, SampleSet};

use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum PropsError {
    #[error("not subspace-expressible: {what}")]
    NotSubspaceExpressible { what: String },
    #[error("{message}")]
    TypeError { message: String },
    #[error("{message}")]
    Eval { message: String },
    #[error("cannot resolve `{name}` here")]
    Unresolved { name: String },
    #[error(transparent)]
    Linalg(#[from] crate::error::LinalgError),
}
