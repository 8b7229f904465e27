//! The two-phase verifier: type checking, symbolic execution with strongest
//! postconditions, and obligation discharge.

pub mod exec;
pub mod obligation;
pub mod render;
pub mod satisfy;
pub mod symstate;
pub mod typecheck;

pub use exec::{check_decl, check_program, split_signature};
pub use obligation::{CaseReport, DeclOutcome, Obligation, ProgramOutcome, Rule, StepLog};
pub use render::{render_state_facts, render_vec};
pub use symstate::{BitBinding, Block, RegId, StateMode, SymState};
pub use typecheck::{infer_term, wf_type, TypeCtx, TypePos};
