//! Verification obligations and per-declaration outcomes.

use crate::error::CheckError;
use crate::props::{Mode, Verdict};
use crate::span::Span;

use super::symstate::SymState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Rule of consequence (asserts and prop-mode weakening).
    Consq,
    /// Callee precondition at a call site.
    CallPre,
    /// Declared postcondition at return.
    PostCheck,
    /// Footprint/frame separability at a call site.
    FrameSep,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Consq => "Consq",
            Rule::CallPre => "CallPre",
            Rule::PostCheck => "PostCheck",
            Rule::FrameSep => "FrameSep",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Obligation {
    pub span: Span,
    pub rule: Rule,
    /// Rendered state or proposition the obligation starts from.
    pub before: String,
    /// Rendered proposition being established.
    pub after: String,
    pub verdict: Verdict,
    pub trace: Vec<String>,
}

impl Obligation {
    pub fn mode(&self) -> Mode {
        self.verdict.mode
    }
}

/// Everything recorded while executing one statement, for annotations and
/// the differential harness.
#[derive(Debug, Clone)]
pub struct StepLog {
    pub span: Span,
    pub lines: Vec<String>,
    pub state: Option<SymState>,
}

/// One enumerated case of a declaration (opaque bits and bit functions).
#[derive(Debug, Clone)]
pub struct CaseReport {
    pub label: String,
    pub passed: bool,
    /// Case excluded by its own precondition (vacuously true).
    pub vacuous: bool,
    pub obligations: Vec<Obligation>,
    pub steps: Vec<StepLog>,
    pub final_state: Option<SymState>,
    pub error: Option<CheckError>,
}

#[derive(Debug, Clone)]
pub struct DeclOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: Vec<CaseReport>,
    pub millis: f64,
    /// Declaration-level type error (exit code 2 class).
    pub error: Option<CheckError>,
}

impl DeclOutcome {
    pub fn obligations(&self) -> impl Iterator<Item = &Obligation> {
        self.cases.iter().flat_map(|c| c.obligations.iter())
    }

    pub fn has_failed_obligation(&self) -> bool {
        self.obligations().any(|o| !o.verdict.holds)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProgramOutcome {
    pub decls: Vec<DeclOutcome>,
}

impl ProgramOutcome {
    pub fn passed(&self) -> bool {
        self.decls.iter().all(|d| d.passed)
    }

    pub fn decl(&self, name: &str) -> Option<&DeclOutcome> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// True when some declaration failed with a hard (parse/type) error
    /// rather than a falsified obligation.
    pub fn has_type_error(&self) -> bool {
        self.decls
            .iter()
            .any(|d| d.error.is_some() || d.cases.iter().any(|c| c.error.is_some()))
    }
}
