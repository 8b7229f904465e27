//! Call-site semantics: ghost binding against the calling environment,
//! footprint/frame separation, and the environment merge that installs the
//! callee's postcondition.
//!
//! Three instantiation strategies cover the specification shapes:
//!
//! * basis specs — the callee's pre/post are computational-basis kets
//!   parameterized by bit ghosts (oracles): the spec induces a linear map,
//!   applied to the argument registers after a unitarity check;
//! * transformers — bit-typed arguments are measurement-linked, and the
//!   postcondition applies bit-exponent gates to a ghost vector: the gates
//!   are applied controlled on the measurement ghosts (deferred
//!   measurement);
//! * state replacement — the general case: the footprint factor is replaced
//!   by the state the instantiated postcondition determines, with fresh
//!   post ghosts re-using the registers of consumed arguments.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::config::COEFF_TOL;
use crate::error::CheckError;
use crate::linalg::SymVector;
use crate::props::{eval_state, Mode, RegTag, VarKind, Verdict};
use crate::span::Span;
use crate::surface::ast::*;
use crate::surface::pretty::pretty_prop;

use super::super::obligation::Rule;
use super::super::symstate::{BitBinding, Block, RegId, StateMode};
use super::super::typecheck::*;
use super::Env;

pub(crate) fn exec_call(
    env: &mut Env,
    pat: &Pattern,
    func: &Term,
    args: &[Term],
    ghost_bindings: &[(Name, GhostArg)],
    span: Span,
) -> Result<(), CheckError> {
    let fname = match func {
        Term::Var(n, _) => n.clone(),
        other => {
            return Err(CheckError::Unsupported {
                span: other.span(),
                message: "call targets must be named functions".into(),
            })
        }
    };

    // Callee type: local binding shadows top-level declarations.
    let callee_ty: QType = if let Some(t) = env.tctx.vars.get(&fname) {
        t.clone()
    } else if let Some(decl) = env.program.decl(&fname) {
        let sig = super::split_signature(decl)?;
        let mut ty = QType::Hoare(Box::new(sig.hoare));
        for (n, t) in sig.params.into_iter().rev() {
            ty = QType::Pi { binder: Some(n), dom: Box::new(t), cod: Box::new(ty) };
        }
        ty
    } else {
        return Err(CheckError::Unbound { span, name: fname });
    };

    // Peel the parameter chain, collecting the substitution and argument
    // classification.
    let mut cur = callee_ty;
    let mut subst: BTreeMap<Name, SubstVal> = BTreeMap::new();
    let mut qubit_args: Vec<(Name, RegId)> = Vec::new(); // actual name, register
    let mut linked_bits: Vec<RegId> = Vec::new();
    for arg in args {
        let (binder, dom, cod) = match cur {
            QType::Pi { binder, dom, cod } => (binder, *dom, *cod),
            other => {
                return Err(CheckError::Type {
                    span,
                    message: format!(
                        "too many arguments: `{}` is not a function",
                        crate::surface::pretty_type(&other)
                    ),
                })
            }
        };
        let actual_ty = infer_term(&env.tctx, arg)?;
        let dom_s = subst_type_map(&dom, &subst);
        if actual_ty != dom_s {
            return Err(CheckError::Type {
                span: arg.span(),
                message: format!(
                    "argument has type {}, expected {}",
                    crate::surface::pretty_type(&actual_ty),
                    crate::surface::pretty_type(&dom_s)
                ),
            });
        }
        match dom_s {
            QType::Qbit => {
                let reg = env.qubit_reg(arg)?;
                let name = match arg {
                    Term::Var(n, _) => n.clone(),
                    _ => unreachable!(),
                };
                if qubit_args.iter().any(|(_, r)| *r == reg) {
                    return Err(CheckError::Type {
                        span: arg.span(),
                        message: format!("qubit `{name}` passed twice"),
                    });
                }
                qubit_args.push((name, reg));
            }
            QType::Bit => {
                if let BitBinding::Ghost(reg) = env.bit_value(arg)? {
                    if !linked_bits.contains(&reg) {
                        linked_bits.push(reg);
                    }
                }
            }
            _ => {}
        }
        if let Some(b) = binder {
            if let Some(v) = subst_val_of(arg) {
                subst.insert(b, v);
            }
        }
        cur = cod;
    }
    let hoare = match cur {
        QType::Hoare(h) => *h,
        other => {
            return Err(CheckError::Type {
                span,
                message: format!(
                    "`{}` still expects arguments (has type {})",
                    pat_head(pat),
                    crate::surface::pretty_type(&other)
                ),
            })
        }
    };

    // Freshen ghost names against the caller scope, then instantiate the
    // pre/post with the argument substitution.
    let mut ghosts: Vec<(Name, QType)> = Vec::new();
    let mut ghost_rename: BTreeMap<Name, Name> = BTreeMap::new();
    for g in &hoare.ghosts {
        for n in &g.names {
            let fresh = env.fresh_name(n);
            if &fresh != n {
                ghost_rename.insert(n.clone(), fresh.clone());
                subst.insert(n.clone(), SubstVal::Var(fresh.clone()));
            }
            ghosts.push((fresh, g.ty.clone()));
        }
    }
    // Result binder names map to the caller's pattern names.
    let result_names: Vec<Name> = hoare.result.names.clone();
    let result_tys: Vec<QType> = flatten_pair(&hoare.result_ty, result_names.len())
        .into_iter()
        .cloned()
        .collect();
    if result_tys.len() != result_names.len()
        || (!pat.is_wildcard() && pat.names.len() != result_names.len())
    {
        return Err(CheckError::Type {
            span,
            message: "call pattern does not match the callee's result shape".into(),
        });
    }
    let caller_names: Vec<Name> = if pat.is_wildcard() {
        result_names
            .iter()
            .enumerate()
            .map(|(i, _)| format!("_r{i}"))
            .collect()
    } else {
        pat.names.clone()
    };
    for (rn, cn) in result_names.iter().zip(&caller_names) {
        if rn != cn {
            subst.insert(rn.clone(), SubstVal::Var(cn.clone()));
        }
    }
    if !pat.is_wildcard() {
        for cn in &caller_names {
            if cn != "_" && env.name_taken(cn) {
                return Err(CheckError::Type {
                    span,
                    message: format!("`{cn}` shadows an existing binding"),
                });
            }
        }
    }

    let pre = subst_prop(&hoare.pre, &subst);
    let post = subst_prop(&hoare.post, &subst);

    let has_bit_ghosts = ghosts.iter().any(|(_, t)| *t == QType::Bit);
    let flavor = if has_bit_ghosts {
        Flavor::Basis
    } else if !linked_bits.is_empty() {
        Flavor::Transformer
    } else {
        Flavor::Replace
    };

    let mut call = CallSite {
        span,
        pre,
        post,
        ghosts,
        qubit_args,
        linked_bits,
        caller_names,
        result_tys,
        vec_ghosts: BTreeMap::new(),
        ghost_regs: BTreeMap::new(),
    };

    // Explicit `with { g := v }` bindings.
    for (orig, value) in ghost_bindings {
        let name = ghost_rename.get(orig).cloned().unwrap_or_else(|| orig.clone());
        let ty = call
            .ghosts
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| CheckError::Type {
                span,
                message: format!("`{orig}` is not a ghost of the callee"),
            })?;
        match (ty, value) {
            (QType::Qbit, GhostArg::Term(t)) => {
                let reg = env.qubit_reg(t)?;
                call.ghost_regs.insert(name, reg);
            }
            (QType::Vector, GhostArg::State(expr)) => {
                let v = eval_state(expr, &env.ctx).map_err(|e| CheckError::Type {
                    span: expr.span(),
                    message: e.to_string(),
                })?;
                call.vec_ghosts.insert(name, v);
            }
            (QType::Vector, GhostArg::Term(Term::Var(n, vspan))) => {
                let v = env.ctx.resolve_vector(n).ok_or_else(|| CheckError::Unbound {
                    span: *vspan,
                    name: n.clone(),
                })?;
                call.vec_ghosts.insert(name, v);
            }
            _ => {
                return Err(CheckError::Type {
                    span,
                    message: format!("binding for ghost `{orig}` has the wrong shape"),
                })
            }
        }
    }

    match flavor {
        Flavor::Basis => exec_basis_call(env, pat, &mut call),
        Flavor::Transformer => exec_transformer_call(env, pat, &mut call),
        Flavor::Replace => exec_replace_call(env, pat, &mut call),
    }
}

enum Flavor {
    Basis,
    Transformer,
    Replace,
}

struct CallSite {
    span: Span,
    pre: PropAst,
    post: PropAst,
    ghosts: Vec<(Name, QType)>,
    qubit_args: Vec<(Name, RegId)>,
    linked_bits: Vec<RegId>,
    caller_names: Vec<Name>,
    result_tys: Vec<QType>,
    vec_ghosts: BTreeMap<Name, SymVector>,
    ghost_regs: BTreeMap<Name, RegId>,
}

fn pat_head(pat: &Pattern) -> String {
    pat.names.join(", ")
}

impl CallSite {
    fn resolve_var(&self, env: &Env, v: &Name) -> Option<RegId> {
        self.ghost_regs.get(v).copied().or_else(|| env.state.resolve(v))
    }

    /// Ghost-register substitution applied to a proposition: bound qubit
    /// ghosts become the primary names of their registers.
    fn ghost_subst(&self, env: &Env, p: &PropAst) -> PropAst {
        let mut map = BTreeMap::new();
        for (g, reg) in &self.ghost_regs {
            let name = env.state.info(*reg).name.clone();
            if &name != g {
                map.insert(g.clone(), SubstVal::Var(name));
            }
        }
        subst_prop(p, &map)
    }
}

// ----- Ghost unification and the frame check -----

/// Bind unbound vector and qubit ghosts by matching the callee's
/// precondition facts against the caller's blocks.
fn unify_ghosts(env: &mut Env, call: &mut CallSite) -> Result<(), CheckError> {
    let span = call.span;
    let unbound_qbit = |call: &CallSite, n: &Name| {
        call.ghosts.iter().any(|(g, t)| g == n && *t == QType::Qbit)
            && !call.ghost_regs.contains_key(n)
            && env_resolves(n).is_none()
    };
    // Ghosts never collide with caller registers after freshening.
    fn env_resolves(_n: &Name) -> Option<()> {
        None
    }

    let conjuncts: Vec<PropAst> = call.pre.conjuncts().into_iter().cloned().collect();
    for c in &conjuncts {
        let PropAst::EqQ { vars, state, .. } = c else { continue };
        let ghost_vars: Vec<Name> = vars
            .iter()
            .filter(|v| unbound_qbit(call, v))
            .cloned()
            .collect();

        if ghost_vars.is_empty() {
            // Bare unbound vector ghost: bind it to the pure factor held by
            // the named registers.
            if let StateExpr::SymName(n, _) = state {
                let is_unbound_vec = call
                    .ghosts
                    .iter()
                    .any(|(g, t)| g == n && *t == QType::Vector)
                    && !call.vec_ghosts.contains_key(n)
                    && env.ctx.resolve_vector(n).is_none();
                if is_unbound_vec {
                    let regs: Vec<RegId> = vars
                        .iter()
                        .map(|v| {
                            call.resolve_var(env, v).ok_or_else(|| CheckError::Unbound {
                                span,
                                name: v.clone(),
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    let (vec, order) = env.state.assemble_covering(&regs);
                    if order.len() != regs.len() {
                        let verdict = Verdict::fail(env.mode(), None);
                        env.push_obligation(
                            span,
                            Rule::FrameSep,
                            env.facts_line(),
                            pretty_prop(c),
                            verdict,
                            vec![format!(
                                "cannot bind ghost vector `{n}`: the footprint is entangled \
                                 with the frame"
                            )],
                        );
                        return Ok(());
                    }
                    let perm: Vec<usize> = regs
                        .iter()
                        .map(|r| order.iter().position(|o| o == r).unwrap())
                        .collect();
                    call.vec_ghosts.insert(n.clone(), vec.permute(&perm));
                }
            }
            continue;
        }

        // Qubit ghosts: locate the block(s) holding the known variables and
        // try assignments of the unmatched registers.
        let known: Vec<RegId> = vars
            .iter()
            .filter(|v| !ghost_vars.contains(v))
            .map(|v| {
                call.resolve_var(env, v)
                    .ok_or_else(|| CheckError::Unbound { span, name: (*v).clone() })
            })
            .collect::<Result<_, _>>()?;
        if known.is_empty() {
            return Err(CheckError::UnboundGhost {
                span,
                name: ghost_vars[0].clone(),
            });
        }
        let (vec, order) = env.state.assemble_covering(&known);
        let candidates: Vec<RegId> = order
            .iter()
            .filter(|r| !known.contains(r))
            .copied()
            .collect();
        if candidates.len() < ghost_vars.len() {
            return Err(CheckError::UnboundGhost { span, name: ghost_vars[0].clone() });
        }

        let mut valid: Vec<BTreeMap<Name, RegId>> = Vec::new();
        let mut ctx = env.ctx.clone();
        for (g, v) in &call.vec_ghosts {
            ctx.vectors.insert(g.clone(), v.clone());
        }
        let target = match eval_state(state, &ctx) {
            Ok(t) => t,
            Err(_) => {
                return Err(CheckError::UnboundGhost { span, name: ghost_vars[0].clone() })
            }
        };
        for assignment in injections(&ghost_vars, &candidates) {
            let mut regs: Vec<RegId> = Vec::with_capacity(vars.len());
            for v in vars {
                if let Some(r) = assignment.get(v) {
                    regs.push(*r);
                } else {
                    regs.push(call.resolve_var(env, v).unwrap());
                }
            }
            let positions: Vec<usize> = regs
                .iter()
                .map(|r| order.iter().position(|o| o == r).unwrap())
                .collect();
            if vec.factors_through(&positions, &target, COEFF_TOL) {
                if !valid.contains(&assignment) {
                    valid.push(assignment);
                }
            }
        }
        match valid.len() {
            0 => {
                let verdict = Verdict::fail(env.mode(), None);
                env.push_obligation(
                    span,
                    Rule::CallPre,
                    env.facts_line(),
                    pretty_prop(c),
                    verdict,
                    vec!["no ghost binding satisfies this precondition".into()],
                );
                return Ok(());
            }
            1 => {
                for (g, r) in valid.pop().unwrap() {
                    call.ghost_regs.insert(g, r);
                }
            }
            _ => {
                return Err(CheckError::AmbiguousGhostBinding {
                    span,
                    name: ghost_vars[0].clone(),
                })
            }
        }
    }
    Ok(())
}

/// All injective assignments of `names` into `candidates`.
fn injections(names: &[Name], candidates: &[RegId]) -> Vec<BTreeMap<Name, RegId>> {
    fn go(
        names: &[Name],
        candidates: &[RegId],
        used: &mut Vec<RegId>,
        acc: &mut BTreeMap<Name, RegId>,
        out: &mut Vec<BTreeMap<Name, RegId>>,
    ) {
        match names.split_first() {
            None => out.push(acc.clone()),
            Some((first, rest)) => {
                for &c in candidates {
                    if used.contains(&c) {
                        continue;
                    }
                    used.push(c);
                    acc.insert(first.clone(), c);
                    go(rest, candidates, used, acc, out);
                    acc.remove(first);
                    used.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(names, candidates, &mut Vec::new(), &mut BTreeMap::new(), &mut out);
    out
}

/// Footprint/frame separation: aligned blocks pass structurally; otherwise
/// a per-sample Schmidt rank test decides.
fn frame_separation(env: &mut Env, call: &CallSite, footprint: &[RegId]) -> (bool, bool) {
    if footprint.is_empty() {
        return (true, true);
    }
    let aligned = env.state.block_aligned(footprint);
    if aligned {
        env.push_obligation(
            call.span,
            Rule::FrameSep,
            env.facts_line(),
            "footprint ⊗ frame".into(),
            Verdict::pass(Mode::Exact),
            vec!["footprint aligns with separable blocks".into()],
        );
        return (true, true);
    }
    let (vec, order) = env.state.assemble_covering(footprint);
    let positions: Vec<usize> = footprint
        .iter()
        .map(|r| order.iter().position(|o| o == r).unwrap())
        .collect();
    for values in &env.samples.values {
        let conc = vec.instantiate(values);
        if !concrete_rank1(&conc, order.len(), &positions, env.config.tol) {
            let cx = if env.samples.is_symbolic() {
                Some(crate::props::entail::render_sample(&env.ctx.params, values))
            } else {
                None
            };
            env.push_obligation(
                call.span,
                Rule::FrameSep,
                env.facts_line(),
                "footprint ⊗ frame".into(),
                Verdict::fail(env.mode(), cx),
                vec!["the call footprint is entangled with the frame".into()],
            );
            return (false, false);
        }
    }
    env.push_obligation(
        call.span,
        Rule::FrameSep,
        env.facts_line(),
        "footprint ⊗ frame".into(),
        Verdict::pass(Mode::Sampled),
        vec!["separable at every sampled instantiation".into()],
    );
    (true, false)
}

/// Schmidt-rank-1 test for a concrete vector across the given positions.
fn concrete_rank1(state: &[Complex64], n: usize, x_positions: &[usize], tol: f64) -> bool {
    let k = x_positions.len();
    let comp: Vec<usize> = (0..n).filter(|p| !x_positions.contains(p)).collect();
    let rows = 1usize << comp.len();
    let cols = 1usize << k;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); cols]; rows];
    for (idx, &amp) in state.iter().enumerate() {
        let mut x = 0usize;
        for (j, &p) in x_positions.iter().enumerate() {
            x |= ((idx >> (n - 1 - p)) & 1) << (k - 1 - j);
        }
        let mut c = 0usize;
        for (j, &p) in comp.iter().enumerate() {
            c |= ((idx >> (n - 1 - p)) & 1) << (comp.len() - 1 - j);
        }
        m[c][x] = amp;
    }
    let (mut pi, mut pj, mut best) = (0, 0, 0.0f64);
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.norm() > best {
                best = v.norm();
                pi = i;
                pj = j;
            }
        }
    }
    if best <= tol {
        return true;
    }
    for i in 0..rows {
        for j in 0..cols {
            let minor = m[i][j] * m[pi][pj] - m[i][pj] * m[pi][j];
            if minor.norm() > tol {
                return false;
            }
        }
    }
    true
}

// ----- Basis-parameterized calls (oracles) -----

fn exec_basis_call(env: &mut Env, pat: &Pattern, call: &mut CallSite) -> Result<(), CheckError> {
    let span = call.span;
    if call.result_tys.iter().any(|t| *t != QType::Unit) {
        return Err(CheckError::Unsupported {
            span,
            message: "basis-parameterized callees must return unit".into(),
        });
    }
    let regs: Vec<RegId> = call.qubit_args.iter().map(|(_, r)| *r).collect();
    let k = regs.len();
    if k == 0 {
        return Err(CheckError::Unsupported {
            span,
            message: "basis-parameterized callee takes no qubits".into(),
        });
    }

    // Input patterns: each argument pinned to a ket over one bit ghost.
    let mut patterns: BTreeMap<Name, BitExpr> = BTreeMap::new();
    for c in call.pre.conjuncts() {
        let PropAst::EqQ { vars, state, .. } = c else {
            return Err(CheckError::Unsupported {
                span,
                message: "oracle preconditions must be `arg =q |ghost⟩` facts".into(),
            });
        };
        let StateExpr::Ket(bits, _) = state else {
            return Err(CheckError::Unsupported {
                span,
                message: "oracle preconditions must pin arguments to kets".into(),
            });
        };
        if vars.len() != bits.len() {
            return Err(CheckError::Type {
                span,
                message: "ket arity mismatch in oracle precondition".into(),
            });
        }
        for (v, b) in vars.iter().zip(bits) {
            patterns.insert(v.clone(), b.clone());
        }
    }
    for (name, _) in &call.qubit_args {
        if !patterns.contains_key(name) {
            return Err(CheckError::Unsupported {
                span,
                message: format!("oracle precondition does not pin argument `{name}`"),
            });
        }
    }

    // Column per input basis state.
    let post_conjuncts: Vec<&PropAst> = call.post.conjuncts();
    let dim = 1usize << k;
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for input in 0..dim {
        let mut ctx = env.ctx.clone();
        for (g, v) in &call.vec_ghosts {
            ctx.vectors.insert(g.clone(), v.clone());
        }
        for (i, (name, _)) in call.qubit_args.iter().enumerate() {
            let bit = ((input >> (k - 1 - i)) & 1) as u8;
            match &patterns[name] {
                BitExpr::Var(g) => {
                    ctx.bits.insert(g.clone(), bit);
                }
                BitExpr::Lit(l) => {
                    if *l != bit {
                        return Err(CheckError::Unsupported {
                            span,
                            message: "oracle precondition excludes some basis inputs".into(),
                        });
                    }
                }
                _ => {
                    return Err(CheckError::Unsupported {
                        span,
                        message: "oracle ket patterns must be ghost bits or literals".into(),
                    })
                }
            }
        }
        // Evaluate the postcondition facts and lay them out in argument
        // order.
        let mut fact_vars: Vec<Name> = Vec::new();
        let mut out_vec = SymVector::scalar_one();
        for c in &post_conjuncts {
            let PropAst::EqQ { vars, state, .. } = c else {
                return Err(CheckError::Unsupported {
                    span,
                    message: "oracle postconditions must be `arg =q ket` facts".into(),
                });
            };
            let v = eval_state(state, &ctx).map_err(|e| CheckError::Type {
                span,
                message: e.to_string(),
            })?;
            fact_vars.extend(vars.iter().cloned());
            out_vec = out_vec.tensor(&v);
        }
        let want: Vec<Name> = call.qubit_args.iter().map(|(n, _)| n.clone()).collect();
        if fact_vars.len() != want.len() {
            return Err(CheckError::Unsupported {
                span,
                message: "oracle postcondition must determine every argument".into(),
            });
        }
        // Permute fact order to argument order.
        let perm: Vec<usize> = want
            .iter()
            .map(|n| {
                fact_vars.iter().position(|f| f == n).ok_or_else(|| CheckError::Unsupported {
                    span,
                    message: format!("oracle postcondition missing `{n}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        let out_vec = out_vec.permute(&perm);
        columns.push(out_vec.instantiate(&[]));
    }

    // Assemble the induced matrix and require unitarity.
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (c, col) in columns.iter().enumerate() {
        for r in 0..dim {
            m[r][c] = col[r];
        }
    }
    let mut defect = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..dim {
                acc += m[r][i].conj() * m[r][j];
            }
            let want = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((acc - Complex64::new(want, 0.0)).norm());
        }
    }
    if defect > 1e-12 {
        return Err(CheckError::Unsupported {
            span,
            message: "the oracle specification does not induce a unitary map".into(),
        });
    }

    env.push_obligation(
        span,
        Rule::CallPre,
        env.facts_line(),
        pretty_prop(&call.pre),
        Verdict::pass(env.mode()),
        vec!["discharged by case analysis over computational-basis inputs".into()],
    );

    let before = env.facts_line();
    env.state
        .apply_matrix(&m, &regs)
        .map_err(|e| CheckError::linalg(span, e))?;

    bind_results(env, pat, call, &BTreeMap::new(), span)?;
    env.log(
        span,
        vec![
            format!("{{{}}}", pretty_prop(&call.post)),
            format!("⇔ {{{}}} (from ({before}))", env.facts_line()),
        ],
    );
    Ok(())
}

// ----- Transformer calls (measurement-linked corrections) -----

fn exec_transformer_call(
    env: &mut Env,
    pat: &Pattern,
    call: &mut CallSite,
) -> Result<(), CheckError> {
    let span = call.span;
    let mut footprint: Vec<RegId> = call.qubit_args.iter().map(|(_, r)| *r).collect();
    footprint.extend(call.linked_bits.iter().copied());
    let (sep_ok, _aligned) = frame_separation(env, call, &footprint);
    if !sep_ok {
        return Ok(());
    }

    env.push_obligation(
        span,
        Rule::CallPre,
        env.facts_line(),
        pretty_prop(&call.pre),
        Verdict::pass(env.mode()),
        vec!["universally quantified over the callee's input state".into()],
    );

    // Consumed arguments (class facts in the post).
    let consumed = consumed_args(call);
    // Result registers: unconsumed qubit args in order.
    let mut result_map: BTreeMap<Name, RegId> = BTreeMap::new();
    let pool: Vec<RegId> = call
        .qubit_args
        .iter()
        .filter(|(n, _)| !consumed.contains(n))
        .map(|(_, r)| *r)
        .collect();
    let mut pool_iter = pool.iter();
    for (cname, ty) in call.caller_names.clone().iter().zip(&call.result_tys) {
        if *ty == QType::Qbit {
            let reg = pool_iter.next().ok_or_else(|| CheckError::Unsupported {
                span,
                message: "transformer callees cannot create qubits".into(),
            })?;
            result_map.insert(cname.clone(), *reg);
        }
    }

    // The single gate-chain fact.
    let mut chain: Option<(&Vec<Name>, &StateExpr)> = None;
    for c in call.post.conjuncts() {
        match c {
            PropAst::EqQ { vars, state, .. } => {
                if chain.is_some() {
                    return Err(CheckError::Unsupported {
                        span,
                        message: "transformer callees support one state fact".into(),
                    });
                }
                chain = Some((vars, state));
            }
            PropAst::Class { .. } | PropAst::Top(_) => {}
            other => {
                env.state.facts.push((*other).clone());
            }
        }
    }
    let (vars, expr) = chain.ok_or_else(|| CheckError::Unsupported {
        span,
        message: "transformer callee has no state fact".into(),
    })?;
    let targets: Vec<RegId> = vars
        .iter()
        .map(|v| {
            result_map
                .get(v)
                .copied()
                .or_else(|| call.resolve_var(env, v))
                .ok_or_else(|| CheckError::Unbound { span, name: v.clone() })
        })
        .collect::<Result<_, _>>()?;

    // Peel the gate chain down to the ghost vector.
    let mut gates: Vec<&GateExpr> = Vec::new();
    let mut cur = expr;
    loop {
        match cur {
            StateExpr::GateApp { gate, arg, .. } => {
                gates.push(gate);
                cur = arg;
            }
            StateExpr::SymName(_, _) => break,
            other => {
                return Err(CheckError::Unsupported {
                    span: other.span(),
                    message: "transformer postconditions apply gates to the input ghost".into(),
                })
            }
        }
    }

    let before = env.facts_line();
    // Innermost gate first.
    for gexpr in gates.iter().rev() {
        let controls: Vec<(RegId, bool)> = match &gexpr.exponent {
            None | Some(BitExpr::Lit(1)) => Vec::new(),
            Some(BitExpr::Lit(0)) => continue,
            Some(BitExpr::Var(x)) => {
                if let Some(&b) = env.ctx.bits.get(x) {
                    if b == 0 {
                        continue;
                    }
                    Vec::new()
                } else {
                    match env.state.bit_links.get(x) {
                        Some(BitBinding::Literal(0)) => continue,
                        Some(BitBinding::Literal(_)) => Vec::new(),
                        Some(BitBinding::Ghost(reg)) => vec![(*reg, true)],
                        None => {
                            return Err(CheckError::UnknownBitOrigin {
                                span,
                                name: x.clone(),
                            })
                        }
                    }
                }
            }
            Some(other) => {
                return Err(CheckError::Unsupported {
                    span,
                    message: format!(
                        "unsupported gate exponent `{}`",
                        crate::surface::pretty::pretty_bit_expr(other)
                    ),
                })
            }
        };
        let arity = gexpr.gate.arity();
        if targets.len() < arity {
            return Err(CheckError::Type {
                span,
                message: format!("gate {} needs {arity} target(s)", gexpr.gate),
            });
        }
        env.state
            .apply_gate(gexpr.gate, &targets[..arity], &controls)
            .map_err(|e| CheckError::linalg(span, e))?;
    }

    for name in &consumed {
        env.state.consumed.insert(name.clone());
    }
    bind_results(env, pat, call, &result_map, span)?;
    env.log(
        span,
        vec![
            format!("{{{}}}", pretty_prop(&call.post)),
            format!("⇔ {{{}}} (from ({before}))", env.facts_line()),
        ],
    );
    Ok(())
}

// ----- General replacement calls -----

fn exec_replace_call(env: &mut Env, pat: &Pattern, call: &mut CallSite) -> Result<(), CheckError> {
    let span = call.span;
    unify_ghosts(env, call)?;
    if env.failed {
        return Ok(());
    }

    let mut footprint: Vec<RegId> = call.qubit_args.iter().map(|(_, r)| *r).collect();
    footprint.extend(call.ghost_regs.values().copied());
    let (sep_ok, aligned) = frame_separation(env, call, &footprint);
    if !sep_ok {
        return Ok(());
    }
    if !aligned && !footprint.is_empty() {
        return Err(CheckError::Unsupported {
            span,
            message:
                "the footprint is separable at every sample but has no exact factorization; \
                 cannot install the callee postcondition"
                    .into(),
        });
    }

    // Evaluation context with bound vector ghosts.
    let mut ctx = env.ctx.clone();
    for (g, v) in &call.vec_ghosts {
        ctx.vectors.insert(g.clone(), v.clone());
    }

    // Remaining unbound vector ghosts that the postcondition needs are an
    // error: an explicit `with` binding is required.
    for (g, t) in &call.ghosts {
        if *t == QType::Vector && ctx.resolve_vector(g).is_none() {
            return Err(CheckError::UnboundGhost { span, name: g.clone() });
        }
        if *t == QType::Prop {
            return Err(CheckError::Unsupported {
                span,
                message: "prop-typed ghosts are not supported at call sites".into(),
            });
        }
    }

    // Precondition obligations (ghost-substituted).
    let pre = call.ghost_subst(env, &call.pre.clone());
    let mut pre_ok = true;
    for c in pre.conjuncts() {
        if matches!(c, PropAst::Top(_)) {
            continue;
        }
        let mut trace = Vec::new();
        let sc_result = {
            let sc = super::super::satisfy::SatisfyCtx {
                state: &env.state,
                ctx: &ctx,
                samples: &env.samples,
                kinds: &env.kinds,
                tol: env.config.tol,
            };
            super::super::satisfy::satisfies(&sc, c)
        };
        let verdict = env.verdict_of(sc_result, &mut trace);
        pre_ok &= verdict.holds;
        env.push_obligation(span, Rule::CallPre, env.facts_line(), pretty_prop(c), verdict, trace);
    }
    if pre.conjuncts().iter().all(|c| matches!(c, PropAst::Top(_))) {
        env.push_obligation(
            span,
            Rule::CallPre,
            env.facts_line(),
            "⊤".into(),
            Verdict::pass(env.mode()),
            Vec::new(),
        );
    }
    if !pre_ok {
        return Ok(());
    }

    let post = call.ghost_subst(env, &call.post.clone());

    // Consumed arguments.
    let consumed = consumed_args_of(&post, &call.qubit_args);

    // Register mapping for postcondition variables.
    let mut reg_map: BTreeMap<Name, RegId> = BTreeMap::new();
    for (g, r) in &call.ghost_regs {
        reg_map.insert(g.clone(), *r);
        reg_map.insert(env.state.info(*r).name.clone(), *r);
    }
    for (n, r) in &call.qubit_args {
        reg_map.insert(n.clone(), *r);
    }

    // Qubit results alias the unconsumed argument registers in order;
    // leftovers become fresh registers.
    let pool: Vec<RegId> = call
        .qubit_args
        .iter()
        .filter(|(n, _)| !consumed.contains(n))
        .map(|(_, r)| *r)
        .collect();
    let mut pool_iter = pool.into_iter();
    let mut fresh_results: Vec<(Name, RegId)> = Vec::new();
    for (cname, ty) in call.caller_names.clone().iter().zip(&call.result_tys) {
        if *ty != QType::Qbit {
            continue;
        }
        match pool_iter.next() {
            Some(reg) => {
                reg_map.insert(cname.clone(), reg);
            }
            None => {
                let reg = env
                    .state
                    .add_register_detached(cname.clone(), RegTag::ProgramQubit, env.config.max_registers)
                    .map_err(|e| CheckError::linalg(span, e))?;
                reg_map.insert(cname.clone(), reg);
                fresh_results.push((cname.clone(), reg));
            }
        }
    }

    // Fresh post ghosts take over consumed argument registers (in ghost
    // declaration order), then fresh registers.
    let mut consumed_regs: Vec<RegId> = call
        .qubit_args
        .iter()
        .filter(|(n, _)| consumed.contains(n))
        .map(|(_, r)| *r)
        .collect();
    let mut ghost_retags: Vec<(RegId, Name)> = Vec::new();
    for (g, t) in &call.ghosts {
        if *t != QType::Qbit || reg_map.contains_key(g) {
            continue;
        }
        if !post_mentions(&post, g) {
            continue;
        }
        let reg = if consumed_regs.is_empty() {
            env.state
                .add_register_detached(g.clone(), RegTag::EntangledGhost, env.config.max_registers)
                .map_err(|e| CheckError::linalg(span, e))?
        } else {
            consumed_regs.remove(0)
        };
        ghost_retags.push((reg, g.clone()));
        reg_map.insert(g.clone(), reg);
    }

    // Build the new footprint blocks from the =q facts.
    let mut new_blocks: Vec<Block> = Vec::new();
    let mut covered: BTreeSet<RegId> = BTreeSet::new();
    for c in post.conjuncts() {
        match c {
            PropAst::EqQ { vars, state, .. } => {
                let regs: Vec<RegId> = vars
                    .iter()
                    .map(|v| {
                        reg_map
                            .get(v)
                            .copied()
                            .or_else(|| env.state.resolve(v))
                            .ok_or_else(|| CheckError::Unbound { span, name: v.clone() })
                    })
                    .collect::<Result<_, _>>()?;
                let vec = eval_state(state, &ctx).map_err(|e| CheckError::Type {
                    span,
                    message: e.to_string(),
                })?;
                if vec.dim() != 1 << regs.len() {
                    return Err(CheckError::Type {
                        span,
                        message: "postcondition state arity mismatch".into(),
                    });
                }
                for values in &env.samples.values {
                    if (vec.norm_at(values) - 1.0).abs() > 1e-6 {
                        return Err(CheckError::Type {
                            span,
                            message: "callee postcondition state is not normalized".into(),
                        });
                    }
                }
                for &r in &regs {
                    covered.insert(r);
                }
                new_blocks.push(Block { regs, vec });
            }
            PropAst::Class { .. } | PropAst::Top(_) => {}
            PropAst::EqC { bit, value, .. } => {
                // A pinned result bit.
                if let Ok(v) = crate::props::eval_bit(value, &ctx) {
                    if call.caller_names.contains(bit) {
                        env.state.bit_links.insert(bit.clone(), BitBinding::Literal(v));
                        continue;
                    }
                }
                env.state.facts.push(c.clone());
            }
            other => env.state.facts.push(other.clone()),
        }
    }

    // Accounting: every live footprint register and every freshly created
    // register must be covered by a state fact; consumed arguments without
    // facts are dropped (their distribution is internal to the callee and
    // separable from the pinned facts). Anything else left unpinned means
    // the postcondition does not determine the state.
    let mut dropped: Vec<RegId> = Vec::new();
    let mut underdetermined = false;
    let mut accountable: Vec<RegId> = footprint.clone();
    accountable.extend(fresh_results.iter().map(|(_, r)| *r));
    for &reg in &accountable {
        if covered.contains(&reg) {
            continue;
        }
        let was_consumed = call
            .qubit_args
            .iter()
            .any(|(n, r)| *r == reg && consumed.contains(n));
        if was_consumed {
            dropped.push(reg);
        } else {
            underdetermined = true;
        }
    }

    if underdetermined {
        // Fall back to proposition mode: keep only the callee's declared
        // facts. Further commands are restricted to unitaries.
        env.state.mode = StateMode::Prop;
        env.state.facts = post
            .conjuncts()
            .into_iter()
            .filter(|c| !matches!(c, PropAst::Top(_)))
            .cloned()
            .collect();
        for name in &consumed {
            env.state.consumed.insert(name.clone());
        }
        bind_results(env, pat, call, &reg_map, span)?;
        env.log(
            span,
            vec![format!(
                "{{{}}} (postcondition does not determine the state; continuing in \
                 proposition mode)",
                pretty_prop(&post)
            )],
        );
        return Ok(());
    }

    // Install: retag ghosts, replace blocks, drop unpinned consumed regs.
    for (reg, g) in &ghost_retags {
        env.state.retag_as_ghost(*reg, g.clone());
        env.kinds.insert(g.clone(), VarKind::Qubit);
    }
    let before = env.facts_line();
    env.state.replace_blocks(&footprint, new_blocks);
    env.state.drop_registers(&dropped);
    for name in &consumed {
        env.state.consumed.insert(name.clone());
    }

    // Measurement links for result bits via the `e_<bit>` convention.
    for (cname, ty) in call.caller_names.clone().iter().zip(&call.result_tys) {
        if *ty != QType::Bit || env.state.bit_links.contains_key(cname) {
            continue;
        }
        let ghost_name = format!("e_{cname}");
        if let Some(reg) = reg_map.get(&ghost_name).copied() {
            env.state
                .bit_links
                .insert(cname.clone(), BitBinding::Ghost(reg));
        }
    }

    bind_results(env, pat, call, &reg_map, span)?;
    env.log(
        span,
        vec![
            format!("{{{}}}", pretty_prop(&post)),
            format!("⇔ {{{}}} (merged with ({before}))", env.facts_line()),
        ],
    );
    Ok(())
}

/// Qubit arguments asserted classical (consumed) by the callee post.
fn consumed_args(call: &CallSite) -> Vec<Name> {
    consumed_args_of(&call.post, &call.qubit_args)
}

fn consumed_args_of(post: &PropAst, qubit_args: &[(Name, RegId)]) -> Vec<Name> {
    let mut out = Vec::new();
    for c in post.conjuncts() {
        if let PropAst::Class { vars, .. } = c {
            for v in vars {
                if qubit_args.iter().any(|(n, _)| n == v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
    }
    out
}

fn post_mentions(p: &PropAst, name: &Name) -> bool {
    match p {
        PropAst::Top(_) | PropAst::Bottom(_) => false,
        PropAst::And(a, b, _) | PropAst::Or(a, b, _) | PropAst::Implies(a, b, _) => {
            post_mentions(a, name) || post_mentions(b, name)
        }
        PropAst::InQ { vars, .. }
        | PropAst::EqQ { vars, .. }
        | PropAst::Uniform { vars, .. }
        | PropAst::Separable { vars, .. }
        | PropAst::Class { vars, .. } => vars.contains(name),
        PropAst::EquivQ { left, right, .. } | PropAst::EquivCl { left, right, .. } => {
            left.contains(name) || right.contains(name)
        }
        PropAst::EqC { bit, .. } => bit == name,
        PropAst::UnitaryOn { vars, inner, .. } => {
            vars.contains(name) || post_mentions(inner, name)
        }
    }
}

/// Bind the caller's pattern names: aliases for qubit results, types and
/// kinds for everything.
fn bind_results(
    env: &mut Env,
    pat: &Pattern,
    call: &CallSite,
    reg_map: &BTreeMap<Name, RegId>,
    span: Span,
) -> Result<(), CheckError> {
    for (cname, ty) in call.caller_names.iter().zip(&call.result_tys) {
        if cname.starts_with("_r") && pat.is_wildcard() {
            continue;
        }
        // Freshness was checked before any result registers were created.
        match ty {
            QType::Qbit => {
                let reg = reg_map.get(cname).copied().ok_or_else(|| CheckError::Type {
                    span,
                    message: format!("no register for result `{cname}`"),
                })?;
                env.tctx.vars.insert(cname.clone(), QType::Qbit);
                env.kinds.insert(cname.clone(), VarKind::Qubit);
                env.state.alias(reg, cname.clone());
            }
            other => {
                env.tctx.vars.insert(cname.clone(), other.clone());
                if let Some(k) = kind_of_type(other) {
                    env.kinds.insert(cname.clone(), k);
                }
            }
        }
    }
    let _ = span;
    Ok(())
}
