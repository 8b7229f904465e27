//! Error types shared across the crate.

use crate::span::Span;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("duplicate target register {target}")]
    DuplicateTarget { target: usize },
    #[error("target register {target} out of range (have {registers})")]
    TargetOutOfRange { target: usize, registers: usize },
    #[error("gate {gate} expects {expected} target(s), got {got}")]
    ArityMismatch {
        gate: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("register cap exceeded: {requested} registers, cap {cap}")]
    Capacity { requested: usize, cap: usize },
}

#[derive(Debug, Error, Clone)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    /// Token kinds the parser would have accepted here.
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>, expected: Vec<String>) -> Self {
        ParseError {
            line: span.line,
            col: span.col,
            message: message.into(),
            expected,
        }
    }
}

/// Errors surfaced while checking a declaration. Parse and type errors map
/// to exit code 2; failed verification obligations are not errors but
/// recorded verdicts (exit code 1).
#[derive(Debug, Error, Clone)]
pub enum CheckError {
    #[error("{span}: unbound variable `{name}`")]
    Unbound { span: Span, name: String },
    #[error("{span}: ghost variable `{name}` can only be used in logical propositions")]
    GhostInTerm { span: Span, name: String },
    #[error("{span}: {message}")]
    Type { span: Span, message: String },
    #[error("{span}: use after measure: qubit `{name}` was returned to the pool")]
    UseAfterMeasure { span: Span, name: String },
    #[error("{span}: register cap exceeded ({cap})")]
    Capacity { span: Span, cap: usize },
    #[error("{span}: branch may only contain unitary applications: {message}")]
    UnsupportedBranchEffect { span: Span, message: String },
    #[error("{span}: condition bit `{name}` has no known origin")]
    UnknownBitOrigin { span: Span, name: String },
    #[error("{span}: ambiguous ghost binding for `{name}`; use an explicit `with {{ {name} := ... }}`")]
    AmbiguousGhostBinding { span: Span, name: String },
    #[error("{span}: cannot bind ghost `{name}` from the calling context")]
    UnboundGhost { span: Span, name: String },
    #[error("{span}: unsupported: {message}")]
    Unsupported { span: Span, message: String },
    #[error("{span}: {source}")]
    Linalg {
        span: Span,
        #[source]
        source: LinalgError,
    },
}

impl CheckError {
    pub fn linalg(span: Span, source: LinalgError) -> Self {
        CheckError::Linalg { span, source }
    }
}
