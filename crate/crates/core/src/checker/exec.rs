//! The two-phase verifier: symbolic execution accumulates strongest
//! postconditions (phase one), and every obligation is discharged against
//! the subspace semantics as it arises (phase two).
//!
//! Opaque classical inputs (bit parameters, bit ghosts, and `bit -> bit`
//! parameters) are handled by exhaustive case analysis; each case runs the
//! body once with the inputs fixed.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::config::Config;
use crate::error::{CheckError, LinalgError};
use crate::linalg::SymVector;
use crate::props::{
    build_samples, BitFn, EvalCtx, Mode, PropsError, RegTag, SampleSet, VarKind, Verdict,
};
use crate::span::Span;
use crate::surface::ast::*;
use crate::surface::pretty::{pretty_prop, pretty_term};

use super::obligation::{CaseReport, DeclOutcome, Obligation, ProgramOutcome, Rule, StepLog};
use super::render::render_state_facts;
use super::satisfy::{satisfies, SatisfyCtx};
use super::symstate::{BitBinding, RegId, StateMode, SymState};
use super::typecheck::*;

pub fn check_program(program: &Program, config: &Config) -> ProgramOutcome {
    let mut out = ProgramOutcome::default();
    for decl in &program.decls {
        out.decls.push(check_decl(program, decl, config));
    }
    out
}

/// A signature split into its parameter chain and computation type, with the
/// signature binders renamed to the definition's parameter names.
pub struct SplitSig {
    pub params: Vec<(Name, QType)>,
    pub hoare: HoareType,
}

pub fn split_signature(decl: &Decl) -> Result<SplitSig, CheckError> {
    let mut params = Vec::new();
    let mut cur = decl.signature.clone();
    let mut rename: BTreeMap<Name, SubstVal> = BTreeMap::new();
    for pname in &decl.params {
        match cur {
            QType::Pi { binder, dom, cod } => {
                if let Some(b) = binder {
                    if &b != pname {
                        rename.insert(b, SubstVal::Var(pname.clone()));
                    }
                }
                params.push((pname.clone(), (*dom).clone()));
                cur = *cod;
            }
            _ => {
                return Err(CheckError::Type {
                    span: decl.span,
                    message: format!(
                        "definition of `{}` has more parameters than its signature",
                        decl.name
                    ),
                })
            }
        }
    }
    let cur = subst_type_map(&cur, &rename);
    let params = params
        .into_iter()
        .map(|(n, t)| (n, subst_type_map(&t, &rename)))
        .collect();
    match cur {
        QType::Hoare(h) => Ok(SplitSig { params, hoare: *h }),
        other => Err(CheckError::Type {
            span: decl.span,
            message: format!(
                "the body of `{}` is a computation, but the signature ends in {}",
                decl.name,
                crate::surface::pretty_type(&other)
            ),
        }),
    }
}

/// Is this the type of an opaque single-bit classical function?
fn is_bit_fn(t: &QType) -> bool {
    matches!(t, QType::Pi { dom, cod, .. } if **dom == QType::Bit && **cod == QType::Bit)
}

/// A function type over bits that is too wide to enumerate.
fn is_wide_bit_fn(t: &QType) -> bool {
    match t {
        QType::Pi { dom, cod, .. } => {
            let dom_bits = matches!(**dom, QType::Bit | QType::Pair(..));
            let cod_fn = matches!(**cod, QType::Pi { .. });
            (dom_bits && cod_fn) || matches!(**dom, QType::Pair(..)) && **cod == QType::Bit
        }
        _ => false,
    }
}

#[derive(Debug, Clone, Default)]
struct Case {
    bits: BTreeMap<Name, u8>,
    fns: BTreeMap<Name, BitFn>,
    label: String,
}

fn enumerate_cases(sig: &SplitSig, span: Span) -> Result<Vec<Case>, CheckError> {
    #[derive(Clone)]
    enum Axis {
        Bit(Name),
        Fn(Name),
    }
    let mut axes = Vec::new();
    for (name, ty) in &sig.params {
        if *ty == QType::Bit {
            axes.push(Axis::Bit(name.clone()));
        } else if is_bit_fn(ty) {
            axes.push(Axis::Fn(name.clone()));
        } else if is_wide_bit_fn(ty) {
            return Err(CheckError::Unsupported {
                span,
                message: format!(
                    "opaque classical function `{name}` takes more than one bit; \
                     only `bit -> bit` parameters are enumerable"
                ),
            });
        }
    }
    for group in &sig.hoare.ghosts {
        if group.ty == QType::Bit {
            for n in &group.names {
                axes.push(Axis::Bit(n.clone()));
            }
        }
    }
    let total: usize = axes
        .iter()
        .map(|a| match a {
            Axis::Bit(_) => 2usize,
            Axis::Fn(_) => 4usize,
        })
        .product();
    if total > 64 {
        return Err(CheckError::Unsupported {
            span,
            message: format!("{total} opaque-input cases exceed the enumeration limit (64)"),
        });
    }
    let mut cases = vec![Case::default()];
    for axis in &axes {
        let mut next = Vec::new();
        for case in &cases {
            match axis {
                Axis::Bit(n) => {
                    for b in 0..2u8 {
                        let mut c = case.clone();
                        c.bits.insert(n.clone(), b);
                        push_label(&mut c.label, &format!("{n}={b}"));
                        next.push(c);
                    }
                }
                Axis::Fn(n) => {
                    for f in BitFn::ALL {
                        let mut c = case.clone();
                        c.fns.insert(n.clone(), f);
                        push_label(&mut c.label, &format!("{n}={}", f.name()));
                        next.push(c);
                    }
                }
            }
        }
        cases = next;
    }
    Ok(cases)
}

fn push_label(label: &mut String, piece: &str) {
    if !label.is_empty() {
        label.push_str(", ");
    }
    label.push_str(piece);
}

pub fn check_decl(program: &Program, decl: &Decl, config: &Config) -> DeclOutcome {
    let start = Instant::now();
    let mut outcome = DeclOutcome {
        name: decl.name.clone(),
        passed: false,
        cases: Vec::new(),
        millis: 0.0,
        error: None,
    };

    let result = (|| -> Result<Vec<CaseReport>, CheckError> {
        let sig = split_signature(decl)?;

        // Well-formedness of the signature under the parameter scope.
        let mut scope: Scope = Scope::new();
        for (n, t) in &sig.params {
            wf_type(t, TypePos::Program, &scope, decl.span)?;
            if let Some(k) = kind_of_type(t) {
                scope.insert(n.clone(), k);
            } else {
                // Function-typed parameters are usable in bit expressions
                // (oracle case analysis) when they are bit functions.
                scope.insert(n.clone(), VarKind::Prop);
            }
        }
        wf_type(
            &QType::Hoare(Box::new(sig.hoare.clone())),
            TypePos::Program,
            &scope,
            decl.span,
        )?;

        let cases = enumerate_cases(&sig, decl.span)?;
        let mut reports = Vec::with_capacity(cases.len());
        for case in &cases {
            reports.push(run_case(program, decl, &sig, case, config));
        }
        Ok(reports)
    })();

    match result {
        Ok(cases) => {
            outcome.passed = cases.iter().all(|c| c.passed || c.vacuous);
            outcome.cases = cases;
        }
        Err(e) => {
            outcome.error = Some(e);
            outcome.passed = false;
        }
    }
    outcome.millis = start.elapsed().as_secs_f64() * 1e3;
    outcome
}

// ----- Per-case execution environment -----

pub(crate) struct Env<'a> {
    config: &'a Config,
    program: &'a Program,
    tctx: TypeCtx,
    kinds: Scope,
    state: SymState,
    ctx: EvalCtx,
    samples: SampleSet,
    obligations: Vec<Obligation>,
    steps: Vec<StepLog>,
    failed: bool,
    fresh: u32,
}

impl<'a> Env<'a> {
    fn mode(&self) -> Mode {
        if self.samples.is_symbolic() {
            Mode::Sampled
        } else {
            Mode::Exact
        }
    }

    fn facts_line(&self) -> String {
        render_state_facts(&self.state, &self.ctx)
    }

    fn log(&mut self, span: Span, lines: Vec<String>) {
        self.steps.push(StepLog {
            span,
            lines,
            state: Some(self.state.clone()),
        });
    }

    fn push_obligation(
        &mut self,
        span: Span,
        rule: Rule,
        before: String,
        after: String,
        verdict: Verdict,
        trace: Vec<String>,
    ) -> bool {
        let holds = verdict.holds;
        if !holds {
            self.failed = true;
        }
        self.obligations.push(Obligation {
            span,
            rule,
            before,
            after,
            verdict,
            trace,
        });
        holds
    }

    fn satisfies_now(&self, p: &PropAst) -> Result<Verdict, PropsError> {
        let sc = SatisfyCtx {
            state: &self.state,
            ctx: &self.ctx,
            samples: &self.samples,
            kinds: &self.kinds,
            tol: self.config.tol,
        };
        satisfies(&sc, p)
    }

    /// An error from the proposition engine surfaces as a failed verdict
    /// with the diagnostic in the trace (verification failure, not a type
    /// error of the checker itself).
    fn verdict_of(&self, r: Result<Verdict, PropsError>, trace: &mut Vec<String>) -> Verdict {
        match r {
            Ok(v) => v,
            Err(e) => {
                trace.push(e.to_string());
                Verdict::fail(self.mode(), None)
            }
        }
    }

    fn fresh_name(&mut self, base: &str) -> Name {
        if !self.name_taken(base) {
            return base.to_string();
        }
        loop {
            self.fresh += 1;
            let cand = format!("{base}'{}", self.fresh);
            if !self.name_taken(&cand) {
                return cand;
            }
        }
    }

    fn name_taken(&self, n: &str) -> bool {
        self.tctx.vars.contains_key(n)
            || self.tctx.ghosts.contains_key(n)
            || self.kinds.contains_key(n)
            || self.state.resolve(n).is_some()
            || self.ctx.params.family(n).is_some()
            || self.ctx.vectors.contains_key(n)
    }

    fn bind_fresh(&mut self, name: &Name, ty: QType, span: Span) -> Result<(), CheckError> {
        if name == "_" {
            return Ok(());
        }
        if self.name_taken(name) {
            return Err(CheckError::Type {
                span,
                message: format!("`{name}` shadows an existing binding"),
            });
        }
        if let Some(k) = kind_of_type(&ty) {
            self.kinds.insert(name.clone(), k);
        }
        self.tctx.vars.insert(name.clone(), ty);
        Ok(())
    }

    /// Resolve a term that must denote a live, unconsumed program qubit.
    fn qubit_reg(&self, t: &Term) -> Result<RegId, CheckError> {
        let span = t.span();
        let name = match t {
            Term::Var(n, _) => n,
            _ => {
                return Err(CheckError::Type {
                    span,
                    message: "expected a qubit variable".into(),
                })
            }
        };
        match infer_term(&self.tctx, t)? {
            QType::Qbit => {}
            other => {
                return Err(CheckError::Type {
                    span,
                    message: format!(
                        "`{name}` has type {}, expected qbit",
                        crate::surface::pretty_type(&other)
                    ),
                })
            }
        }
        if self.state.consumed.contains(name) {
            return Err(CheckError::UseAfterMeasure { span, name: name.clone() });
        }
        self.state.resolve(name).ok_or_else(|| CheckError::Unbound {
            span,
            name: name.clone(),
        })
    }

    /// The value of a bit-typed term, when statically known.
    fn bit_value(&self, t: &Term) -> Result<BitBinding, CheckError> {
        match t {
            Term::BitLit(b, _) => Ok(BitBinding::Literal(*b)),
            Term::Var(n, span) => {
                if let Some(&b) = self.ctx.bits.get(n) {
                    return Ok(BitBinding::Literal(b));
                }
                if let Some(&l) = self.state.bit_links.get(n) {
                    return Ok(l);
                }
                Err(CheckError::UnknownBitOrigin { span: *span, name: n.clone() })
            }
            _ => Err(CheckError::Type {
                span: t.span(),
                message: "expected a bit literal or variable".into(),
            }),
        }
    }
}

// ----- Initial state from the precondition -----

enum InitOutcome {
    Ready,
    Vacuous(String),
}

fn init_state_from_pre(env: &mut Env, sig: &SplitSig, span: Span) -> Result<InitOutcome, CheckError> {
    let param_qubits: Vec<Name> = sig
        .params
        .iter()
        .filter(|(_, t)| *t == QType::Qbit)
        .map(|(n, _)| n.clone())
        .collect();
    let ghost_types: BTreeMap<Name, QType> = sig
        .hoare
        .ghosts
        .iter()
        .flat_map(|g| g.names.iter().map(|n| (n.clone(), g.ty.clone())))
        .collect();

    let conjuncts: Vec<PropAst> = sig.hoare.pre.conjuncts().into_iter().cloned().collect();
    let mut covered: Vec<Name> = Vec::new();
    let mut determining = true;
    let mut blocks: Vec<(Vec<(Name, RegTag)>, StateExpr)> = Vec::new();

    for c in &conjuncts {
        match c {
            PropAst::Top(_) => {}
            PropAst::EqC { bit, value, .. } => {
                // A literal constraint on an enumerated bit: cases violating
                // it hold vacuously.
                let lhs = env.ctx.bits.get(bit).copied();
                let rhs = crate::props::eval_bit(value, &env.ctx).ok();
                match (lhs, rhs) {
                    (Some(l), Some(r)) if l != r => {
                        return Ok(InitOutcome::Vacuous(format!(
                            "precondition {bit} =c {r} excludes this case"
                        )))
                    }
                    (Some(_), Some(_)) => {}
                    _ => determining = false,
                }
            }
            PropAst::EqQ { vars, state, .. } => {
                let ok = vars.iter().all(|v| {
                    !covered.contains(v)
                        && (param_qubits.contains(v)
                            || ghost_types.get(v) == Some(&QType::Qbit))
                });
                if !ok {
                    determining = false;
                    continue;
                }
                covered.extend(vars.iter().cloned());
                let names: Vec<(Name, RegTag)> = vars
                    .iter()
                    .map(|v| {
                        let tag = if param_qubits.contains(v) {
                            RegTag::ProgramQubit
                        } else {
                            RegTag::EntangledGhost
                        };
                        (v.clone(), tag)
                    })
                    .collect();
                blocks.push((names, state.clone()));
            }
            PropAst::InQ { vars, space, span } => {
                let SubspaceExpr::Span { vectors, .. } = space;
                if vectors.len() == 1 {
                    let eq = PropAst::EqQ {
                        vars: vars.clone(),
                        state: vectors[0].clone(),
                        span: *span,
                    };
                    // Re-run the EqQ logic by appending a rewritten conjunct.
                    let ok = vars.iter().all(|v| {
                        !covered.contains(v)
                            && (param_qubits.contains(v)
                                || ghost_types.get(v) == Some(&QType::Qbit))
                    });
                    if !ok {
                        determining = false;
                        continue;
                    }
                    covered.extend(vars.iter().cloned());
                    let names: Vec<(Name, RegTag)> = vars
                        .iter()
                        .map(|v| {
                            let tag = if param_qubits.contains(v) {
                                RegTag::ProgramQubit
                            } else {
                                RegTag::EntangledGhost
                            };
                            (v.clone(), tag)
                        })
                        .collect();
                    if let PropAst::EqQ { state, .. } = eq {
                        blocks.push((names, state));
                    }
                } else {
                    determining = false;
                }
            }
            _ => determining = false,
        }
    }

    if !determining {
        // Prop mode: carry the precondition as the proposition store.
        env.state.mode = StateMode::Prop;
        for name in &param_qubits {
            env.state
                .add_block(
                    &[(name.clone(), RegTag::ProgramQubit)],
                    SymVector::basis(1, 0),
                    env.config.max_registers,
                )
                .map_err(|e| CheckError::linalg(span, e))?;
        }
        env.state.facts = conjuncts
            .into_iter()
            .filter(|c| !matches!(c, PropAst::Top(_)))
            .collect();
        env.samples = build_samples(&env.ctx.params, env.config.samples, env.config.seed);
        return Ok(InitOutcome::Ready);
    }

    // Create families for state expressions that are bare unbound names.
    for (names, expr) in &blocks {
        if let StateExpr::SymName(n, _) = expr {
            if env.ctx.resolve_vector(n).is_none() {
                if ghost_types.get(n) == Some(&QType::Vector) {
                    env.ctx.params.fresh_family(n.clone(), names.len());
                } else {
                    return Err(CheckError::Unbound { span: expr.span(), name: n.clone() });
                }
            }
        }
    }

    for (names, expr) in &blocks {
        let vec = crate::props::eval_state(expr, &env.ctx).map_err(|e| CheckError::Type {
            span: expr.span(),
            message: e.to_string(),
        })?;
        if vec.dim() != 1 << names.len() {
            return Err(CheckError::Type {
                span: expr.span(),
                message: format!(
                    "precondition state has {} qubit(s) for {} variable(s)",
                    vec.n_qubits(),
                    names.len()
                ),
            });
        }
        env.state
            .add_block(names, vec, env.config.max_registers)
            .map_err(|e| CheckError::linalg(span, e))?;
        for (n, tag) in names {
            if *tag == RegTag::EntangledGhost {
                env.kinds.insert(n.clone(), VarKind::Qubit);
            }
        }
    }

    // Uncovered parameter qubits share one fresh joint symbolic vector
    // (the most general pure state over them).
    let uncovered: Vec<Name> = param_qubits
        .iter()
        .filter(|q| !covered.contains(q))
        .cloned()
        .collect();
    if !uncovered.is_empty() {
        let fam_name = env.fresh_name("psi");
        let fam = env.ctx.params.fresh_family(fam_name, uncovered.len()).clone();
        let names: Vec<(Name, RegTag)> = uncovered
            .iter()
            .map(|n| (n.clone(), RegTag::ProgramQubit))
            .collect();
        env.state
            .add_block(&names, fam.vector(), env.config.max_registers)
            .map_err(|e| CheckError::linalg(span, e))?;
    }

    env.samples = build_samples(&env.ctx.params, env.config.samples, env.config.seed);

    // Initial states must be normalized at every instantiation.
    for b in env.state.blocks() {
        for values in &env.samples.values {
            let n = b.vec.norm_at(values);
            if (n - 1.0).abs() > 1e-6 {
                return Err(CheckError::Type {
                    span,
                    message: "precondition state is not normalized".into(),
                });
            }
        }
    }
    Ok(InitOutcome::Ready)
}

// ----- Case runner -----

fn run_case(
    program: &Program,
    decl: &Decl,
    sig: &SplitSig,
    case: &Case,
    config: &Config,
) -> CaseReport {
    let mut env = Env {
        config,
        program,
        tctx: TypeCtx::default(),
        kinds: Scope::new(),
        state: SymState::new(),
        ctx: EvalCtx::default(),
        samples: SampleSet::concrete(),
        obligations: Vec::new(),
        steps: Vec::new(),
        failed: false,
        fresh: 0,
    };
    env.ctx.bits = case.bits.clone();
    env.ctx.fns = case.fns.clone();

    for (n, t) in &sig.params {
        env.tctx.vars.insert(n.clone(), t.clone());
        if let Some(k) = kind_of_type(t) {
            env.kinds.insert(n.clone(), k);
        }
    }
    for g in &sig.hoare.ghosts {
        for n in &g.names {
            env.tctx.ghosts.insert(n.clone(), kind_of_type(&g.ty).unwrap());
            env.kinds.insert(n.clone(), kind_of_type(&g.ty).unwrap());
        }
    }

    let mut report = CaseReport {
        label: case.label.clone(),
        passed: false,
        vacuous: false,
        obligations: Vec::new(),
        steps: Vec::new(),
        final_state: None,
        error: None,
    };

    match init_state_from_pre(&mut env, sig, decl.span) {
        Ok(InitOutcome::Vacuous(why)) => {
            report.vacuous = true;
            report.passed = true;
            report.steps.push(StepLog {
                span: decl.span,
                lines: vec![format!("-- {why}")],
                state: None,
            });
            return report;
        }
        Ok(InitOutcome::Ready) => {}
        Err(e) => {
            report.error = Some(e);
            return report;
        }
    }

    env.log(decl.span, vec![format!("{{{}}}", env.facts_line())]);

    let finale = Finale {
        result: sig.hoare.result.clone(),
        result_ty: sig.hoare.result_ty.clone(),
        post: sig.hoare.post.clone(),
        ghosts: sig.hoare.ghosts.clone(),
    };
    match exec_comp(&mut env, &decl.body, &finale) {
        Ok(()) => {
            report.passed = !env.failed;
        }
        Err(e) => {
            report.error = Some(e);
            report.passed = false;
        }
    }
    report.obligations = env.obligations;
    report.steps = env.steps;
    report.final_state = Some(env.state);
    report
}

struct Finale {
    result: Pattern,
    result_ty: QType,
    post: PropAst,
    ghosts: GhostCtx,
}

// ----- The executor -----

fn exec_comp(env: &mut Env, comp: &Comp, finale: &Finale) -> Result<(), CheckError> {
    let mut cur = comp;
    loop {
        if env.state.mode == StateMode::Prop {
            return exec_comp_prop_mode(env, cur, finale);
        }
        match cur {
            Comp::Return(term, span) => {
                return discharge_post(env, finale, term, *span);
            }
            Comp::BindCmd { pat, cmd, rest, span } => {
                match cmd {
                    Cmd::Init(b, _) => exec_init(env, pat, *b, *span)?,
                    Cmd::Meas(q, _) => exec_meas(env, pat, q, *span)?,
                    Cmd::Apply { gate, targets, .. } => {
                        exec_apply(env, gate, targets, &[], *span)?
                    }
                }
                cur = rest;
            }
            Comp::Assert { prop, rest, span } => {
                exec_assert(env, prop, *span)?;
                cur = rest;
            }
            Comp::IfThenElse { cond, then_branch, else_branch, rest, span } => {
                exec_if(env, cond, then_branch, else_branch, *span)?;
                cur = rest;
            }
            Comp::BindCall { pat, func, args, ghost_bindings, rest, span } => {
                exec_call(env, pat, func, args, ghost_bindings, *span)?;
                if env.failed {
                    // Call obligations failed: the post-state is unknown, so
                    // stop executing this case.
                    return Ok(());
                }
                cur = rest;
            }
        }
    }
}

fn exec_init(env: &mut Env, pat: &Pattern, b: u8, span: Span) -> Result<(), CheckError> {
    if pat.names.len() != 1 {
        return Err(CheckError::Type { span, message: "init binds one qubit".into() });
    }
    let name = if pat.is_wildcard() {
        env.fresh_name("q")
    } else {
        pat.names[0].clone()
    };
    env.bind_fresh(&name, QType::Qbit, span)?;
    env.state
        .add_block(
            &[(name, RegTag::ProgramQubit)],
            SymVector::basis(1, b as usize),
            env.config.max_registers,
        )
        .map_err(|e| match e {
            LinalgError::Capacity { cap, .. } => CheckError::Capacity { span, cap },
            other => CheckError::linalg(span, other),
        })?;
    let line = format!("{{{}}}", env.facts_line());
    env.log(span, vec![line]);
    Ok(())
}

fn exec_meas(env: &mut Env, pat: &Pattern, q: &Term, span: Span) -> Result<(), CheckError> {
    if pat.names.len() != 1 {
        return Err(CheckError::Type { span, message: "meas binds one bit".into() });
    }
    let reg = env.qubit_reg(q)?;
    let qname = match q {
        Term::Var(n, _) => n.clone(),
        _ => unreachable!(),
    };
    let bit = pat.names[0].clone();
    env.bind_fresh(&bit, QType::Bit, span)?;
    // The measurement ghost takes the conventional name `e_<bit>`; a ghost
    // of that name declared in the Hoare type refers to this register.
    let base = format!("e_{bit}");
    let declared_ghost = env.tctx.ghosts.get(&base) == Some(&crate::props::VarKind::Qubit);
    let ghost = if env.state.resolve(&base).is_none()
        && (declared_ghost || !env.name_taken(&base))
    {
        base
    } else {
        env.fresh_name(&base)
    };
    env.state.retag_as_ghost(reg, ghost.clone());
    env.state.consumed.insert(qname);
    if bit != "_" {
        env.state.bit_links.insert(bit, BitBinding::Ghost(reg));
    }
    env.kinds.insert(ghost, VarKind::Qubit);
    let line = format!("{{{}}}", env.facts_line());
    env.log(span, vec![line]);
    Ok(())
}

fn exec_apply(
    env: &mut Env,
    gate: &Term,
    targets: &[Term],
    controls: &[(RegId, bool)],
    span: Span,
) -> Result<(), CheckError> {
    let g = match gate {
        Term::GateConst(g, _) => *g,
        other => {
            return Err(CheckError::Unsupported {
                span: other.span(),
                message: "only gate constants can be applied".into(),
            })
        }
    };
    if targets.len() != g.arity() {
        return Err(CheckError::Type {
            span,
            message: format!("gate {g} expects {} target(s)", g.arity()),
        });
    }
    let regs: Vec<RegId> = targets
        .iter()
        .map(|t| env.qubit_reg(t))
        .collect::<Result<_, _>>()?;
    let before = env.facts_line();
    env.state
        .apply_gate(g, &regs, controls)
        .map_err(|e| CheckError::linalg(span, e))?;
    let tnames: Vec<String> = targets.iter().map(pretty_term).collect();
    let mut lines = vec![format!(
        "{{({} on ({})) · ({before})}}",
        g.name(),
        tnames.join(", ")
    )];
    lines.push(format!("⇔ {{{}}}", env.facts_line()));
    env.log(span, lines);
    Ok(())
}

fn exec_assert(env: &mut Env, prop: &PropAst, span: Span) -> Result<(), CheckError> {
    let mut trace = Vec::new();
    let before = env.facts_line();
    let verdict = env.verdict_of(env.satisfies_now(prop), &mut trace);
    let holds = verdict.holds;
    env.push_obligation(
        span,
        Rule::Consq,
        before,
        pretty_prop(prop),
        verdict,
        trace,
    );
    env.log(
        span,
        vec![format!(
            "⊨ {{{}}}{}",
            pretty_prop(prop),
            if holds { "" } else { "  -- FAILED" }
        )],
    );
    Ok(())
}

/// Collect the unitary applications of a branch body, rejecting any other
/// effect.
fn branch_applies(comp: &Comp) -> Result<Vec<(&Term, &Vec<Term>, Span)>, CheckError> {
    let mut out = Vec::new();
    let mut cur = comp;
    loop {
        match cur {
            Comp::Return(Term::UnitLit(_), _) => return Ok(out),
            Comp::Return(_, s) => {
                return Err(CheckError::UnsupportedBranchEffect {
                    span: *s,
                    message: "branches return unit".into(),
                })
            }
            Comp::BindCmd { cmd: Cmd::Apply { gate, targets, span }, rest, .. } => {
                out.push((gate, targets, *span));
                cur = rest;
            }
            Comp::BindCmd { cmd, .. } => {
                return Err(CheckError::UnsupportedBranchEffect {
                    span: cmd.span(),
                    message: "init/meas are not allowed under a classical conditional".into(),
                })
            }
            Comp::BindCall { span, .. } => {
                return Err(CheckError::UnsupportedBranchEffect {
                    span: *span,
                    message: "calls are not allowed under a classical conditional".into(),
                })
            }
            Comp::IfThenElse { span, .. } => {
                return Err(CheckError::UnsupportedBranchEffect {
                    span: *span,
                    message: "nested conditionals are not supported".into(),
                })
            }
            Comp::Assert { span, .. } => {
                return Err(CheckError::UnsupportedBranchEffect {
                    span: *span,
                    message: "asserts are not allowed under a classical conditional".into(),
                })
            }
        }
    }
}

fn exec_if(
    env: &mut Env,
    cond: &Term,
    then_branch: &Comp,
    else_branch: &Comp,
    span: Span,
) -> Result<(), CheckError> {
    match infer_term(&env.tctx, cond)? {
        QType::Bit => {}
        other => {
            return Err(CheckError::Type {
                span: cond.span(),
                message: format!(
                    "condition has type {}, expected bit",
                    crate::surface::pretty_type(&other)
                ),
            })
        }
    }
    let then_apps = branch_applies(then_branch)?;
    let else_apps = branch_applies(else_branch)?;
    match env.bit_value(cond)? {
        BitBinding::Literal(b) => {
            let chosen = if b == 1 { then_apps } else { else_apps };
            for (gate, targets, aspan) in chosen {
                exec_apply(env, gate, targets, &[], aspan)?;
            }
        }
        BitBinding::Ghost(ereg) => {
            // Deferred measurement: run both branches as gates controlled on
            // the measurement ghost.
            let before = env.facts_line();
            for (gate, targets, aspan) in then_apps {
                exec_apply_quiet(env, gate, targets, &[(ereg, true)], aspan)?;
            }
            for (gate, targets, aspan) in else_apps {
                exec_apply_quiet(env, gate, targets, &[(ereg, false)], aspan)?;
            }
            let ghost_name = env.state.info(ereg).name.clone();
            env.log(
                span,
                vec![
                    format!(
                        "{{(controlled on {ghost_name}) branch unitaries · ({before})}}"
                    ),
                    format!("⇔ {{{}}}", env.facts_line()),
                ],
            );
        }
    }
    Ok(())
}

/// Gate application without a step log (used inside conditionals; the `if`
/// emits one combined entry).
fn exec_apply_quiet(
    env: &mut Env,
    gate: &Term,
    targets: &[Term],
    controls: &[(RegId, bool)],
    span: Span,
) -> Result<(), CheckError> {
    let g = match gate {
        Term::GateConst(g, _) => *g,
        other => {
            return Err(CheckError::Unsupported {
                span: other.span(),
                message: "only gate constants can be applied".into(),
            })
        }
    };
    let regs: Vec<RegId> = targets
        .iter()
        .map(|t| env.qubit_reg(t))
        .collect::<Result<_, _>>()?;
    env.state
        .apply_gate(g, &regs, controls)
        .map_err(|e| CheckError::linalg(span, e))
}

// ----- Prop mode -----

fn exec_comp_prop_mode(env: &mut Env, comp: &Comp, finale: &Finale) -> Result<(), CheckError> {
    let mut cur = comp;
    loop {
        match cur {
            Comp::Return(term, span) => {
                return discharge_post_prop_mode(env, finale, term, *span);
            }
            Comp::BindCmd { cmd: Cmd::Apply { gate, targets, .. }, rest, span, .. } => {
                let g = match gate {
                    Term::GateConst(g, s) => GateExpr { gate: *g, exponent: None, span: *s },
                    other => {
                        return Err(CheckError::Unsupported {
                            span: other.span(),
                            message: "only gate constants can be applied".into(),
                        })
                    }
                };
                let mut vars = Vec::new();
                for t in targets {
                    match t {
                        Term::Var(n, _) => vars.push(n.clone()),
                        _ => {
                            return Err(CheckError::Type {
                                span: t.span(),
                                message: "expected a qubit variable".into(),
                            })
                        }
                    }
                }
                let before = env.facts_line();
                env.state.facts = env
                    .state
                    .facts
                    .iter()
                    .map(|f| PropAst::UnitaryOn {
                        gate: g.clone(),
                        vars: vars.clone(),
                        inner: Box::new(f.clone()),
                        span: *span,
                    })
                    .collect();
                env.log(
                    *span,
                    vec![
                        format!("{{({} on ({})) · ({before})}}", g.gate.name(), vars.join(", ")),
                        format!("⇔ {{{}}}", env.facts_line()),
                    ],
                );
                cur = rest;
            }
            Comp::Assert { prop, rest, span } => {
                let before = env.facts_line();
                let mut trace = Vec::new();
                let verdict = env.verdict_of(env.entails_facts(prop), &mut trace);
                env.push_obligation(*span, Rule::Consq, before, pretty_prop(prop), verdict, trace);
                cur = rest;
            }
            other => {
                return Err(CheckError::Unsupported {
                    span: other.span(),
                    message:
                        "only unitary applications and consequence steps are supported when the \
                         precondition does not determine a state"
                            .into(),
                })
            }
        }
    }
}

impl<'a> Env<'a> {
    /// Prop-mode entailment: conjunction of stored facts ⊨ goal.
    fn entails_facts(&self, goal: &PropAst) -> Result<Verdict, PropsError> {
        let span = goal.span();
        let conj = self
            .state
            .facts
            .iter()
            .cloned()
            .reduce(|a, b| PropAst::And(Box::new(a), Box::new(b), span))
            .unwrap_or(PropAst::Top(span));
        let mut regmap = BTreeMap::new();
        let order: Vec<RegId> = self.state.registers().iter().map(|r| r.id).collect();
        for r in self.state.registers() {
            regmap.insert(r.name.clone(), r.id);
        }
        let lay = self.state.prop_layout(&regmap, &order, &self.kinds);
        crate::props::entails(&conj, goal, &lay, &self.ctx, &self.samples, self.config.tol)
    }
}

fn discharge_post_prop_mode(
    env: &mut Env,
    finale: &Finale,
    term: &Term,
    span: Span,
) -> Result<(), CheckError> {
    let map = result_subst(env, finale, term, span)?;
    let post = subst_prop(&finale.post, &map);
    let before = env.facts_line();
    let mut trace = Vec::new();
    let verdict = env.verdict_of(env.entails_facts(&post), &mut trace);
    let holds = verdict.holds;
    env.push_obligation(span, Rule::PostCheck, before, pretty_prop(&post), verdict, trace);
    env.log(
        span,
        vec![format!(
            "⊨ {{{}}}{}",
            pretty_prop(&post),
            if holds { "" } else { "  -- FAILED" }
        )],
    );
    Ok(())
}

// ----- Postcondition discharge -----

/// Substitution mapping result binder names to the returned components, plus
/// ghost-register renames.
fn result_subst(
    env: &mut Env,
    finale: &Finale,
    term: &Term,
    span: Span,
) -> Result<BTreeMap<Name, SubstVal>, CheckError> {
    let components: Vec<&Term> = match term {
        Term::Pair(parts, _) => parts.iter().collect(),
        t => vec![t],
    };
    let mut map: BTreeMap<Name, SubstVal> = BTreeMap::new();
    if !finale.result.is_wildcard() {
        if components.len() != finale.result.names.len() {
            return Err(CheckError::Type {
                span,
                message: format!(
                    "returned {} component(s), result binder has {}",
                    components.len(),
                    finale.result.names.len()
                ),
            });
        }
        // Type-check each component against the declared result type.
        let tys = flatten_pair(&finale.result_ty, finale.result.names.len());
        for (c, ty) in components.iter().zip(&tys) {
            let actual = infer_term(&env.tctx, c)?;
            if &actual != *ty {
                return Err(CheckError::Type {
                    span: c.span(),
                    message: format!(
                        "returned component has type {}, expected {}",
                        crate::surface::pretty_type(&actual),
                        crate::surface::pretty_type(ty)
                    ),
                });
            }
        }
        for (rname, c) in finale.result.names.iter().zip(&components) {
            match subst_val_of(c) {
                Some(v) => {
                    map.insert(rname.clone(), v);
                }
                None => {
                    if !matches!(c, Term::UnitLit(_)) {
                        return Err(CheckError::Unsupported {
                            span: c.span(),
                            message: "return components must be variables or literals".into(),
                        });
                    }
                }
            }
        }
    } else {
        let _ = infer_term(&env.tctx, term)?;
    }

    // Resolve postcondition ghosts by the measurement-link convention:
    // a ghost qubit named `e_<bit>` refers to the register that replaced
    // the qubit whose measurement bound `<bit>`.
    for g in &finale.ghosts {
        if g.ty != QType::Qbit {
            continue;
        }
        for n in &g.names {
            if env.state.resolve(n).is_some() {
                continue; // bound in the precondition or named directly
            }
            if let Some(bit) = n.strip_prefix("e_") {
                if let Some(BitBinding::Ghost(reg)) = env.state.bit_links.get(bit) {
                    let actual = env.state.info(*reg).name.clone();
                    if &actual != n {
                        map.insert(n.clone(), SubstVal::Var(actual));
                    }
                }
            }
        }
    }
    Ok(map)
}

fn discharge_post(
    env: &mut Env,
    finale: &Finale,
    term: &Term,
    span: Span,
) -> Result<(), CheckError> {
    let map = result_subst(env, finale, term, span)?;
    let post = subst_prop(&finale.post, &map);
    let before = env.facts_line();
    let mut all_hold = true;
    for conjunct in post.conjuncts() {
        if matches!(conjunct, PropAst::Top(_)) {
            continue;
        }
        let mut trace = Vec::new();
        let verdict = env.verdict_of(env.satisfies_now(conjunct), &mut trace);
        all_hold &= verdict.holds;
        env.push_obligation(
            span,
            Rule::PostCheck,
            before.clone(),
            pretty_prop(conjunct),
            verdict,
            trace,
        );
    }
    if post.conjuncts().iter().all(|c| matches!(c, PropAst::Top(_))) {
        env.push_obligation(
            span,
            Rule::PostCheck,
            before.clone(),
            "⊤".into(),
            Verdict::pass(env.mode()),
            Vec::new(),
        );
    }
    env.log(
        span,
        vec![format!(
            "⊨ {{{}}}{}",
            pretty_prop(&post),
            if all_hold { "" } else { "  -- FAILED" }
        )],
    );
    Ok(())
}

mod call;
pub(crate) use call::exec_call;
