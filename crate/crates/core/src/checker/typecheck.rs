//! Type formation and term typing.

use std::collections::BTreeMap;

use crate::error::CheckError;
use crate::props::VarKind;
use crate::span::Span;
use crate::surface::ast::*;

/// Where a type occurs. `vector` and `complex` are specification-only: they
/// may appear in ghost contexts and propositions, never as a program
/// parameter or result type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypePos {
    Program,
    Spec,
}

/// Scope used during well-formedness checks: names to their kinds.
pub type Scope = BTreeMap<Name, VarKind>;

pub fn kind_of_type(t: &QType) -> Option<VarKind> {
    match t {
        QType::Qbit => Some(VarKind::Qubit),
        QType::Bit => Some(VarKind::Bit),
        QType::Vector => Some(VarKind::Vector),
        QType::Prop => Some(VarKind::Prop),
        _ => None,
    }
}

pub fn wf_type(t: &QType, pos: TypePos, scope: &Scope, span: Span) -> Result<(), CheckError> {
    match t {
        QType::Unit | QType::Bit | QType::Qbit | QType::Unitary | QType::Prop => Ok(()),
        QType::Vector | QType::Complex => {
            if pos == TypePos::Spec {
                Ok(())
            } else {
                Err(CheckError::Type {
                    span,
                    message: "`vector`/`complex` are specification-only types".into(),
                })
            }
        }
        QType::Pair(a, b) => {
            wf_type(a, pos, scope, span)?;
            wf_type(b, pos, scope, span)
        }
        QType::Pi { binder, dom, cod } => {
            wf_type(dom, TypePos::Program, scope, span)?;
            let mut inner = scope.clone();
            if let (Some(b), Some(k)) = (binder, kind_of_type(dom)) {
                inner.insert(b.clone(), k);
            }
            wf_type(cod, TypePos::Program, &inner, span)
        }
        QType::Hoare(h) => wf_hoare(h, scope, span),
    }
}

fn wf_hoare(h: &HoareType, scope: &Scope, span: Span) -> Result<(), CheckError> {
    wf_type(&h.result_ty, TypePos::Program, scope, span)?;

    let mut ghost_scope = scope.clone();
    let mut seen = Vec::new();
    for group in &h.ghosts {
        match group.ty {
            QType::Qbit | QType::Vector | QType::Prop | QType::Bit => {}
            _ => {
                return Err(CheckError::Type {
                    span: group.span,
                    message: "ghosts must have type qbit, vector, prop, or bit".into(),
                })
            }
        }
        for n in &group.names {
            if seen.contains(n) {
                return Err(CheckError::Type {
                    span: group.span,
                    message: format!("duplicate ghost name `{n}`"),
                });
            }
            seen.push(n.clone());
            ghost_scope.insert(n.clone(), kind_of_type(&group.ty).unwrap());
        }
    }

    wf_prop(&h.pre, &ghost_scope, span)?;

    let mut post_scope = ghost_scope;
    let result_kinds = pattern_kinds(&h.result, &h.result_ty, span)?;
    for (n, k) in result_kinds {
        if n != "_" {
            post_scope.insert(n, k);
        }
    }
    wf_prop(&h.post, &post_scope, span)
}

/// Kinds of the names a pattern binds against a (possibly pair) type.
pub fn pattern_kinds(
    pat: &Pattern,
    ty: &QType,
    span: Span,
) -> Result<Vec<(Name, VarKind)>, CheckError> {
    let parts = flatten_pair(ty, pat.names.len());
    if parts.len() != pat.names.len() {
        return Err(CheckError::Type {
            span,
            message: format!(
                "pattern binds {} name(s) but the type has {} component(s)",
                pat.names.len(),
                parts.len()
            ),
        });
    }
    let mut out = Vec::new();
    for (n, t) in pat.names.iter().zip(parts) {
        let k = kind_of_type(t).unwrap_or(VarKind::Prop);
        match t {
            QType::Qbit | QType::Bit | QType::Unit => {}
            _ => {
                return Err(CheckError::Type {
                    span,
                    message: format!("cannot bind `{n}` at type {}", crate::surface::pretty_type(t)),
                })
            }
        }
        out.push((n.clone(), if matches!(t, QType::Unit) { VarKind::Prop } else { k }));
    }
    Ok(out)
}

/// Split a right-nested pair type into `want` components when possible.
pub fn flatten_pair(ty: &QType, want: usize) -> Vec<&QType> {
    let mut parts = Vec::new();
    let mut cur = ty;
    while parts.len() + 1 < want {
        match cur {
            QType::Pair(a, b) => {
                parts.push(a.as_ref());
                cur = b.as_ref();
            }
            _ => break,
        }
    }
    parts.push(cur);
    parts
}

/// Well-formedness of a proposition: every variable resolvable in scope, and
/// the structural invariants the parser cannot see. Kind errors (quantum
/// predicates on classical bits) are deferred to verification time so they
/// surface as failed obligations with the proper diagnostic.
pub fn wf_prop(p: &PropAst, scope: &Scope, span: Span) -> Result<(), CheckError> {
    let vars: Vec<&Name> = match p {
        PropAst::Top(_) | PropAst::Bottom(_) => Vec::new(),
        PropAst::And(a, b, _) | PropAst::Or(a, b, _) | PropAst::Implies(a, b, _) => {
            wf_prop(a, scope, span)?;
            return wf_prop(b, scope, span);
        }
        PropAst::UnitaryOn { vars, inner, .. } => {
            wf_prop(inner, scope, span)?;
            vars.iter().collect()
        }
        PropAst::InQ { vars, space, .. } => {
            let SubspaceExpr::Span { vectors, .. } = space;
            for v in vectors {
                wf_state_expr(v, scope, span)?;
            }
            vars.iter().collect()
        }
        PropAst::EqQ { vars, state, .. } => {
            wf_state_expr(state, scope, span)?;
            vars.iter().collect()
        }
        PropAst::EquivQ { left, right, .. } | PropAst::EquivCl { left, right, .. } => {
            left.iter().chain(right.iter()).collect()
        }
        PropAst::EqC { bit, value, .. } => {
            wf_bit_expr(value, scope, span)?;
            vec![bit]
        }
        PropAst::Uniform { vars, .. }
        | PropAst::Separable { vars, .. }
        | PropAst::Class { vars, .. } => vars.iter().collect(),
    };
    for v in vars {
        if !scope.contains_key(v) {
            return Err(CheckError::Unbound { span: p.span(), name: v.clone() });
        }
    }
    Ok(())
}

fn wf_state_expr(e: &StateExpr, scope: &Scope, span: Span) -> Result<(), CheckError> {
    match e {
        StateExpr::Ket(bits, _) => {
            for b in bits {
                wf_bit_expr(b, scope, span)?;
            }
            Ok(())
        }
        StateExpr::SymName(n, s) => match scope.get(n) {
            Some(VarKind::Vector) => Ok(()),
            Some(_) => Err(CheckError::Type {
                span: *s,
                message: format!("`{n}` is not a vector ghost"),
            }),
            None => Err(CheckError::Unbound { span: *s, name: n.clone() }),
        },
        StateExpr::Scaled(_, inner, _) | StateExpr::Div(inner, _, _) => {
            wf_state_expr(inner, scope, span)
        }
        StateExpr::Sum(items, _) | StateExpr::Tensor(items, _) => {
            for i in items {
                wf_state_expr(i, scope, span)?;
            }
            Ok(())
        }
        StateExpr::GateApp { gate, arg, .. } => {
            if let Some(e) = &gate.exponent {
                wf_bit_expr(e, scope, span)?;
            }
            wf_state_expr(arg, scope, span)
        }
    }
}

fn wf_bit_expr(e: &BitExpr, scope: &Scope, span: Span) -> Result<(), CheckError> {
    match e {
        BitExpr::Lit(_) => Ok(()),
        BitExpr::Var(n) => {
            if scope.contains_key(n) {
                Ok(())
            } else {
                Err(CheckError::Unbound { span, name: n.clone() })
            }
        }
        BitExpr::App(f, arg) => {
            if !scope.contains_key(f) {
                return Err(CheckError::Unbound { span, name: f.clone() });
            }
            wf_bit_expr(arg, scope, span)
        }
        BitExpr::Xor(a, b) => {
            wf_bit_expr(a, scope, span)?;
            wf_bit_expr(b, scope, span)
        }
    }
}

// ----- Term typing -----

/// Program-variable typing context.
#[derive(Debug, Clone, Default)]
pub struct TypeCtx {
    pub vars: BTreeMap<Name, QType>,
    /// Ghosts in scope: usable in propositions, never in terms.
    pub ghosts: BTreeMap<Name, VarKind>,
}

pub fn infer_term(ctx: &TypeCtx, t: &Term) -> Result<QType, CheckError> {
    match t {
        Term::Var(n, span) => {
            if let Some(ty) = ctx.vars.get(n) {
                Ok(ty.clone())
            } else if ctx.ghosts.contains_key(n) {
                Err(CheckError::GhostInTerm { span: *span, name: n.clone() })
            } else {
                Err(CheckError::Unbound { span: *span, name: n.clone() })
            }
        }
        Term::BitLit(_, _) => Ok(QType::Bit),
        Term::UnitLit(_) => Ok(QType::Unit),
        Term::GateConst(_, _) => Ok(QType::Unitary),
        Term::Pair(parts, span) => {
            if parts.len() < 2 {
                return Err(CheckError::Type {
                    span: *span,
                    message: "pair needs at least two components".into(),
                });
            }
            let mut ty = infer_term(ctx, parts.last().unwrap())?;
            for part in parts[..parts.len() - 1].iter().rev() {
                ty = QType::Pair(Box::new(infer_term(ctx, part)?), Box::new(ty));
            }
            Ok(ty)
        }
        Term::Fst(inner, span) => match infer_term(ctx, inner)? {
            QType::Pair(a, _) => Ok(*a),
            other => Err(CheckError::Type {
                span: *span,
                message: format!("fst needs a pair, got {}", crate::surface::pretty_type(&other)),
            }),
        },
        Term::Snd(inner, span) => match infer_term(ctx, inner)? {
            QType::Pair(_, b) => Ok(*b),
            other => Err(CheckError::Type {
                span: *span,
                message: format!("snd needs a pair, got {}", crate::surface::pretty_type(&other)),
            }),
        },
        Term::Lambda { param, ty, body, .. } => {
            let mut inner = ctx.clone();
            inner.vars.insert(param.clone(), ty.clone());
            let cod = infer_term(&inner, body)?;
            Ok(QType::Pi {
                binder: Some(param.clone()),
                dom: Box::new(ty.clone()),
                cod: Box::new(cod),
            })
        }
        Term::App { func, arg, span } => {
            let fty = infer_term(ctx, func)?;
            match fty {
                QType::Pi { binder, dom, cod } => {
                    let aty = infer_term(ctx, arg)?;
                    if aty != *dom {
                        return Err(CheckError::Type {
                            span: *span,
                            message: format!(
                                "argument has type {}, expected {}",
                                crate::surface::pretty_type(&aty),
                                crate::surface::pretty_type(&dom)
                            ),
                        });
                    }
                    match binder {
                        Some(b) => Ok(subst_type(&cod, &b, arg)),
                        None => Ok(*cod),
                    }
                }
                other => Err(CheckError::Type {
                    span: *span,
                    message: format!(
                        "cannot apply a value of type {}",
                        crate::surface::pretty_type(&other)
                    ),
                }),
            }
        }
        Term::Do(_, span) => Err(CheckError::Unsupported {
            span: *span,
            message: "suspended computations are typed against a declared Hoare signature".into(),
        }),
    }
}

// ----- Substitution of terms for names inside types and propositions -----

#[derive(Debug, Clone)]
pub enum SubstVal {
    Var(Name),
    Bit(u8),
}

pub fn subst_val_of(term: &Term) -> Option<SubstVal> {
    match term {
        Term::Var(n, _) => Some(SubstVal::Var(n.clone())),
        Term::BitLit(b, _) => Some(SubstVal::Bit(*b)),
        _ => None,
    }
}

pub fn subst_type(t: &QType, name: &Name, arg: &Term) -> QType {
    let Some(val) = subst_val_of(arg) else {
        return t.clone();
    };
    let map = BTreeMap::from([(name.clone(), val)]);
    subst_type_map(t, &map)
}

pub fn subst_type_map(t: &QType, map: &BTreeMap<Name, SubstVal>) -> QType {
    match t {
        QType::Pair(a, b) => QType::Pair(
            Box::new(subst_type_map(a, map)),
            Box::new(subst_type_map(b, map)),
        ),
        QType::Pi { binder, dom, cod } => {
            let mut inner = map.clone();
            if let Some(b) = binder {
                inner.remove(b);
            }
            QType::Pi {
                binder: binder.clone(),
                dom: Box::new(subst_type_map(dom, map)),
                cod: Box::new(subst_type_map(cod, &inner)),
            }
        }
        QType::Hoare(h) => {
            let mut inner = map.clone();
            for g in &h.ghosts {
                for n in &g.names {
                    inner.remove(n);
                }
            }
            let mut post_map = inner.clone();
            for n in &h.result.names {
                post_map.remove(n);
            }
            QType::Hoare(Box::new(HoareType {
                result: h.result.clone(),
                result_ty: subst_type_map(&h.result_ty, map),
                ghosts: h.ghosts.clone(),
                pre: subst_prop(&h.pre, &inner),
                post: subst_prop(&h.post, &post_map),
            }))
        }
        other => other.clone(),
    }
}

fn subst_name(n: &Name, map: &BTreeMap<Name, SubstVal>) -> Name {
    match map.get(n) {
        Some(SubstVal::Var(v)) => v.clone(),
        // A literal slipped into a variable-only position; the caller
        // handles bit positions separately, so keep the name.
        _ => n.clone(),
    }
}

pub fn subst_prop(p: &PropAst, map: &BTreeMap<Name, SubstVal>) -> PropAst {
    let names = |vs: &Vec<Name>| -> Vec<Name> { vs.iter().map(|n| subst_name(n, map)).collect() };
    match p {
        PropAst::Top(_) | PropAst::Bottom(_) => p.clone(),
        PropAst::And(a, b, s) => PropAst::And(
            Box::new(subst_prop(a, map)),
            Box::new(subst_prop(b, map)),
            *s,
        ),
        PropAst::Or(a, b, s) => PropAst::Or(
            Box::new(subst_prop(a, map)),
            Box::new(subst_prop(b, map)),
            *s,
        ),
        PropAst::Implies(a, b, s) => PropAst::Implies(
            Box::new(subst_prop(a, map)),
            Box::new(subst_prop(b, map)),
            *s,
        ),
        PropAst::InQ { vars, space, span } => PropAst::InQ {
            vars: names(vars),
            space: {
                let SubspaceExpr::Span { vectors, span } = space;
                SubspaceExpr::Span {
                    vectors: vectors.iter().map(|v| subst_state(v, map)).collect(),
                    span: *span,
                }
            },
            span: *span,
        },
        PropAst::EqQ { vars, state, span } => PropAst::EqQ {
            vars: names(vars),
            state: subst_state(state, map),
            span: *span,
        },
        PropAst::EquivQ { left, right, span } => PropAst::EquivQ {
            left: names(left),
            right: names(right),
            span: *span,
        },
        PropAst::EquivCl { left, right, span } => PropAst::EquivCl {
            left: names(left),
            right: names(right),
            span: *span,
        },
        PropAst::EqC { bit, value, span } => PropAst::EqC {
            bit: subst_name(bit, map),
            value: subst_bit(value, map),
            span: *span,
        },
        PropAst::Uniform { vars, span } => PropAst::Uniform { vars: names(vars), span: *span },
        PropAst::Separable { vars, span } => {
            PropAst::Separable { vars: names(vars), span: *span }
        }
        PropAst::Class { vars, span } => PropAst::Class { vars: names(vars), span: *span },
        PropAst::UnitaryOn { gate, vars, inner, span } => PropAst::UnitaryOn {
            gate: GateExpr {
                gate: gate.gate,
                exponent: gate.exponent.as_ref().map(|e| subst_bit(e, map)),
                span: gate.span,
            },
            vars: names(vars),
            inner: Box::new(subst_prop(inner, map)),
            span: *span,
        },
    }
}

pub fn subst_state(e: &StateExpr, map: &BTreeMap<Name, SubstVal>) -> StateExpr {
    match e {
        StateExpr::Ket(bits, s) => {
            StateExpr::Ket(bits.iter().map(|b| subst_bit(b, map)).collect(), *s)
        }
        StateExpr::SymName(n, s) => StateExpr::SymName(subst_name(n, map), *s),
        StateExpr::Scaled(sc, inner, s) => StateExpr::Scaled(
            subst_scalar(sc, map),
            Box::new(subst_state(inner, map)),
            *s,
        ),
        StateExpr::Div(inner, sc, s) => StateExpr::Div(
            Box::new(subst_state(inner, map)),
            subst_scalar(sc, map),
            *s,
        ),
        StateExpr::Sum(items, s) => {
            StateExpr::Sum(items.iter().map(|i| subst_state(i, map)).collect(), *s)
        }
        StateExpr::Tensor(items, s) => {
            StateExpr::Tensor(items.iter().map(|i| subst_state(i, map)).collect(), *s)
        }
        StateExpr::GateApp { gate, arg, span } => StateExpr::GateApp {
            gate: GateExpr {
                gate: gate.gate,
                exponent: gate.exponent.as_ref().map(|e| subst_bit(e, map)),
                span: gate.span,
            },
            arg: Box::new(subst_state(arg, map)),
            span: *span,
        },
    }
}

fn subst_scalar(s: &Scalar, map: &BTreeMap<Name, SubstVal>) -> Scalar {
    match s {
        Scalar::Neg(inner) => Scalar::Neg(Box::new(subst_scalar(inner, map))),
        Scalar::Mul(a, b) => Scalar::Mul(
            Box::new(subst_scalar(a, map)),
            Box::new(subst_scalar(b, map)),
        ),
        Scalar::Div(a, b) => Scalar::Div(
            Box::new(subst_scalar(a, map)),
            Box::new(subst_scalar(b, map)),
        ),
        Scalar::Pow(base, e) => {
            Scalar::Pow(Box::new(subst_scalar(base, map)), subst_bit(e, map))
        }
        other => other.clone(),
    }
}

pub fn subst_bit(e: &BitExpr, map: &BTreeMap<Name, SubstVal>) -> BitExpr {
    match e {
        BitExpr::Lit(_) => e.clone(),
        BitExpr::Var(n) => match map.get(n) {
            Some(SubstVal::Var(v)) => BitExpr::Var(v.clone()),
            Some(SubstVal::Bit(b)) => BitExpr::Lit(*b),
            None => e.clone(),
        },
        BitExpr::App(f, arg) => BitExpr::App(subst_name(f, map), Box::new(subst_bit(arg, map))),
        BitExpr::Xor(a, b) => {
            BitExpr::Xor(Box::new(subst_bit(a, map)), Box::new(subst_bit(b, map)))
        }
    }
}
