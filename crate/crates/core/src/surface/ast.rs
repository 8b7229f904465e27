//! Abstract syntax for the QHTT surface language: types, terms, commands,
//! computations, and the proposition language of pre/postconditions.

use crate::linalg::Gate;
use crate::span::Span;

pub type Name = String;

// ----- Types -----

#[derive(Debug, Clone, PartialEq)]
pub enum QType {
    Unit,
    Bit,
    Qbit,
    /// Specification-only: symbolic state vectors. Never a program type.
    Vector,
    /// Specification-only: scalar amplitudes. Never a program type.
    Complex,
    Unitary,
    Prop,
    Pair(Box<QType>, Box<QType>),
    Pi {
        binder: Option<Name>,
        dom: Box<QType>,
        cod: Box<QType>,
    },
    Hoare(Box<HoareType>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoareType {
    /// Result binder: a single name or a tuple of names, scoping over `post`.
    pub result: Pattern,
    pub result_ty: QType,
    /// Ghost variables, scoping over `pre` and `post` only.
    pub ghosts: GhostCtx,
    pub pre: PropAst,
    pub post: PropAst,
}

pub type GhostCtx = Vec<GhostGroup>;

#[derive(Debug, Clone, PartialEq)]
pub struct GhostGroup {
    pub names: Vec<Name>,
    pub ty: QType,
    pub span: Span,
}

/// Flat tuple binder: `x`, `_`, or `(a, b, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub names: Vec<Name>,
    pub span: Span,
}

impl Pattern {
    pub fn single(name: impl Into<Name>, span: Span) -> Self {
        Pattern { names: vec![name.into()], span }
    }

    pub fn is_wildcard(&self) -> bool {
        self.names.len() == 1 && self.names[0] == "_"
    }
}

// ----- Terms -----

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(Name, Span),
    BitLit(u8, Span),
    UnitLit(Span),
    Pair(Vec<Term>, Span),
    Fst(Box<Term>, Span),
    Snd(Box<Term>, Span),
    Lambda {
        param: Name,
        ty: QType,
        body: Box<Term>,
        span: Span,
    },
    App {
        func: Box<Term>,
        arg: Box<Term>,
        span: Span,
    },
    /// A suspended computation; introduction form of the Hoare type.
    Do(Box<Comp>, Span),
    GateConst(Gate, Span),
}

impl Term {
    pub fn span(&self) -> Span {
        match self {
            Term::Var(_, s)
            | Term::BitLit(_, s)
            | Term::UnitLit(s)
            | Term::Pair(_, s)
            | Term::Fst(_, s)
            | Term::Snd(_, s)
            | Term::Lambda { span: s, .. }
            | Term::App { span: s, .. }
            | Term::Do(_, s)
            | Term::GateConst(_, s) => *s,
        }
    }
}

// ----- Commands and computations -----

#[derive(Debug, Clone, PartialEq)]
pub enum Cmd {
    Init(u8, Span),
    Meas(Term, Span),
    Apply {
        gate: Term,
        targets: Vec<Term>,
        span: Span,
    },
}

impl Cmd {
    pub fn span(&self) -> Span {
        match self {
            Cmd::Init(_, s) | Cmd::Meas(_, s) | Cmd::Apply { span: s, .. } => *s,
        }
    }
}

/// Right-hand side of a ghost binding at a call site: either a program term
/// (a qubit name) or a state expression (a symbolic vector).
#[derive(Debug, Clone, PartialEq)]
pub enum GhostArg {
    Term(Term),
    State(StateExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Comp {
    Return(Term, Span),
    BindCmd {
        pat: Pattern,
        cmd: Cmd,
        rest: Box<Comp>,
        span: Span,
    },
    BindCall {
        pat: Pattern,
        func: Term,
        args: Vec<Term>,
        ghost_bindings: Vec<(Name, GhostArg)>,
        rest: Box<Comp>,
        span: Span,
    },
    IfThenElse {
        cond: Term,
        then_branch: Box<Comp>,
        else_branch: Box<Comp>,
        rest: Box<Comp>,
        span: Span,
    },
    /// Intermediate fact, discharged as a consequence obligation.
    Assert {
        prop: PropAst,
        rest: Box<Comp>,
        span: Span,
    },
}

impl Comp {
    pub fn span(&self) -> Span {
        match self {
            Comp::Return(_, s)
            | Comp::BindCmd { span: s, .. }
            | Comp::BindCall { span: s, .. }
            | Comp::IfThenElse { span: s, .. }
            | Comp::Assert { span: s, .. } => *s,
        }
    }
}

// ----- Propositions -----

#[derive(Debug, Clone, PartialEq)]
pub enum PropAst {
    Top(Span),
    Bottom(Span),
    And(Box<PropAst>, Box<PropAst>, Span),
    Or(Box<PropAst>, Box<PropAst>, Span),
    Implies(Box<PropAst>, Box<PropAst>, Span),
    /// `X ∈q span{...}`: the qubits X lie in the given subspace.
    InQ {
        vars: Vec<Name>,
        space: SubspaceExpr,
        span: Span,
    },
    /// `X =q ψ`: sugar for `X ∈q span{ψ}`.
    EqQ {
        vars: Vec<Name>,
        state: StateExpr,
        span: Span,
    },
    /// Quantum equality: swapping X and Y leaves the state unchanged.
    EquivQ {
        left: Vec<Name>,
        right: Vec<Name>,
        span: Span,
    },
    /// Classical equality: measuring X and Y always agrees.
    EquivCl {
        left: Vec<Name>,
        right: Vec<Name>,
        span: Span,
    },
    /// `x =c e`: a classical bit equals a bit expression.
    EqC {
        bit: Name,
        value: BitExpr,
        span: Span,
    },
    Uniform { vars: Vec<Name>, span: Span },
    Separable { vars: Vec<Name>, span: Span },
    Class { vars: Vec<Name>, span: Span },
    /// `(G on (X)) · P`: image of P under the padded unitary.
    UnitaryOn {
        gate: GateExpr,
        vars: Vec<Name>,
        inner: Box<PropAst>,
        span: Span,
    },
}

impl PropAst {
    pub fn span(&self) -> Span {
        match self {
            PropAst::Top(s) | PropAst::Bottom(s) => *s,
            PropAst::And(_, _, s) | PropAst::Or(_, _, s) | PropAst::Implies(_, _, s) => *s,
            PropAst::InQ { span: s, .. }
            | PropAst::EqQ { span: s, .. }
            | PropAst::EquivQ { span: s, .. }
            | PropAst::EquivCl { span: s, .. }
            | PropAst::EqC { span: s, .. }
            | PropAst::Uniform { span: s, .. }
            | PropAst::Separable { span: s, .. }
            | PropAst::Class { span: s, .. }
            | PropAst::UnitaryOn { span: s, .. } => *s,
        }
    }

    /// Conjuncts of a right-nested conjunction.
    pub fn conjuncts(&self) -> Vec<&PropAst> {
        match self {
            PropAst::And(a, b, _) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            p => vec![p],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubspaceExpr {
    Span {
        vectors: Vec<StateExpr>,
        span: Span,
    },
}

/// A gate, optionally raised to a bit exponent (`Z^x`).
#[derive(Debug, Clone, PartialEq)]
pub struct GateExpr {
    pub gate: Gate,
    pub exponent: Option<BitExpr>,
    pub span: Span,
}

// ----- State expressions -----

#[derive(Debug, Clone, PartialEq)]
pub enum StateExpr {
    /// `|b1 b2 ... bk⟩` with bit-expression components.
    Ket(Vec<BitExpr>, Span),
    /// A symbolic vector name (a ghost of vector type).
    SymName(Name, Span),
    Scaled(Scalar, Box<StateExpr>, Span),
    Div(Box<StateExpr>, Scalar, Span),
    Sum(Vec<StateExpr>, Span),
    Tensor(Vec<StateExpr>, Span),
    GateApp {
        gate: GateExpr,
        arg: Box<StateExpr>,
        span: Span,
    },
}

impl StateExpr {
    pub fn span(&self) -> Span {
        match self {
            StateExpr::Ket(_, s)
            | StateExpr::SymName(_, s)
            | StateExpr::Scaled(_, _, s)
            | StateExpr::Div(_, _, s)
            | StateExpr::Sum(_, s)
            | StateExpr::Tensor(_, s)
            | StateExpr::GateApp { span: s, .. } => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Int(i64),
    /// `sqrt(n)`
    Sqrt(u64),
    /// The imaginary unit.
    I,
    Neg(Box<Scalar>),
    Mul(Box<Scalar>, Box<Scalar>),
    Div(Box<Scalar>, Box<Scalar>),
    /// `s ^ e` with a bit exponent, e.g. `(-1)^f(x)`.
    Pow(Box<Scalar>, BitExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BitExpr {
    Lit(u8),
    Var(Name),
    /// Application of an opaque bit function: `f(e)`.
    App(Name, Box<BitExpr>),
    Xor(Box<BitExpr>, Box<BitExpr>),
}

impl BitExpr {
    /// Free variable and function names.
    pub fn names(&self, out: &mut Vec<Name>) {
        match self {
            BitExpr::Lit(_) => {}
            BitExpr::Var(n) => out.push(n.clone()),
            BitExpr::App(f, e) => {
                out.push(f.clone());
                e.names(out);
            }
            BitExpr::Xor(a, b) => {
                a.names(out);
                b.names(out);
            }
        }
    }
}

// ----- Declarations -----

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub name: Name,
    pub signature: QType,
    pub params: Vec<Name>,
    pub body: Comp,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }
}
