//! Canonical rendering of AST nodes. `parse(pretty(t))` is structurally
//! identical to `t`; the checker and annotator also use these renderers for
//! obligation traces.

use super::ast::*;

pub fn pretty_program(p: &Program) -> String {
    p.decls
        .iter()
        .map(pretty_decl)
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn pretty_decl(d: &Decl) -> String {
    let mut out = format!("{} : {}\n{}", d.name, pretty_type(&d.signature), d.name);
    for p in &d.params {
        out.push(' ');
        out.push_str(p);
    }
    out.push_str(" = do ");
    out.push_str(&pretty_comp_block(&d.body, 1));
    out
}

// ----- Types -----

pub fn pretty_type(t: &QType) -> String {
    match t {
        QType::Pi { binder, dom, cod } => {
            let dom_s = match binder {
                Some(b) => format!("({b}: {})", pretty_type(dom)),
                None => match dom.as_ref() {
                    QType::Pi { .. } => format!("({})", pretty_type(dom)),
                    _ => pretty_type(dom),
                },
            };
            format!("{dom_s} -> {}", pretty_type(cod))
        }
        _ => pretty_pair_type(t),
    }
}

fn pretty_pair_type(t: &QType) -> String {
    match t {
        QType::Pair(a, b) => {
            format!("{} ⊗ {}", pretty_atom_type(a), pretty_pair_type(b))
        }
        _ => pretty_atom_type(t),
    }
}

fn pretty_atom_type(t: &QType) -> String {
    match t {
        QType::Unit => "unit".into(),
        QType::Bit => "bit".into(),
        QType::Qbit => "qbit".into(),
        QType::Vector => "vector".into(),
        QType::Complex => "complex".into(),
        QType::Unitary => "unitary".into(),
        QType::Prop => "prop".into(),
        QType::Pair(..) | QType::Pi { .. } => format!("({})", pretty_type(t)),
        QType::Hoare(h) => pretty_hoare(h),
    }
}

fn pretty_hoare(h: &HoareType) -> String {
    let mut out = format!(
        "QST ({}: {})",
        pretty_pattern(&h.result),
        pretty_type(&h.result_ty)
    );
    if !h.ghosts.is_empty() {
        let groups: Vec<String> = h
            .ghosts
            .iter()
            .map(|g| format!("{}: {}", g.names.join(" "), pretty_type(&g.ty)))
            .collect();
        out.push_str(&format!(" {{{}}}", groups.join(", ")));
    }
    out.push_str(&format!(
        " (requires {{{}}}) (ensures {{{}}})",
        pretty_prop(&h.pre),
        pretty_prop(&h.post)
    ));
    out
}

pub fn pretty_pattern(p: &Pattern) -> String {
    if p.names.len() == 1 {
        p.names[0].clone()
    } else {
        format!("({})", p.names.join(", "))
    }
}

// ----- Terms -----

pub fn pretty_term(t: &Term) -> String {
    match t {
        Term::App { func, arg, .. } => {
            format!("{} {}", pretty_term_app_head(func), pretty_term_atom(arg))
        }
        Term::Lambda { param, ty, body, .. } => {
            format!("fun ({param}: {}) => {}", pretty_type(ty), pretty_term(body))
        }
        _ => pretty_term_atom(t),
    }
}

fn pretty_term_app_head(t: &Term) -> String {
    match t {
        Term::App { .. } => pretty_term(t),
        _ => pretty_term_atom(t),
    }
}

fn pretty_term_atom(t: &Term) -> String {
    match t {
        Term::Var(n, _) => n.clone(),
        Term::BitLit(b, _) => b.to_string(),
        Term::UnitLit(_) => "()".into(),
        Term::Pair(parts, _) => format!(
            "({})",
            parts.iter().map(pretty_term).collect::<Vec<_>>().join(", ")
        ),
        Term::Fst(inner, _) => format!("fst {}", pretty_term_atom(inner)),
        Term::Snd(inner, _) => format!("snd {}", pretty_term_atom(inner)),
        Term::GateConst(g, _) => g.name().into(),
        Term::Do(body, _) => format!("do {}", pretty_comp_block(body, 1)),
        Term::Lambda { .. } | Term::App { .. } => format!("({})", pretty_term(t)),
    }
}

// ----- Computations -----

fn pretty_comp_block(c: &Comp, indent: usize) -> String {
    let pad = "  ".repeat(indent);
    let mut lines = Vec::new();
    let mut cur = c;
    loop {
        match cur {
            Comp::Return(t, _) => {
                lines.push(format!("{pad}return {}", pretty_term(t)));
                break;
            }
            Comp::BindCmd { pat, cmd, rest, .. } => {
                lines.push(format!("{pad}{}", pretty_stmt_cmd(pat, cmd)));
                cur = rest;
            }
            Comp::BindCall { pat, func, args, ghost_bindings, rest, .. } => {
                let mut s = format!("{pad}{} <- {}", pretty_pattern(pat), pretty_term(func));
                for a in args {
                    s.push(' ');
                    s.push_str(&pretty_term_atom(a));
                }
                if !ghost_bindings.is_empty() {
                    let binds: Vec<String> = ghost_bindings
                        .iter()
                        .map(|(g, v)| format!("{g} := {}", pretty_ghost_arg(v)))
                        .collect();
                    s.push_str(&format!(" with {{{}}}", binds.join(", ")));
                }
                s.push(';');
                lines.push(s);
                cur = rest;
            }
            Comp::IfThenElse { cond, then_branch, else_branch, rest, .. } => {
                lines.push(format!(
                    "{pad}if {} then {} else {};",
                    pretty_term_atom(cond),
                    pretty_branch(then_branch),
                    pretty_branch(else_branch)
                ));
                cur = rest;
            }
            Comp::Assert { prop, rest, .. } => {
                lines.push(format!("{pad}assert {{{}}};", pretty_prop(prop)));
                cur = rest;
            }
        }
    }
    let close = "  ".repeat(indent.saturating_sub(1));
    format!("{{\n{}\n{close}}}", lines.join("\n"))
}

fn pretty_stmt_cmd(pat: &Pattern, cmd: &Cmd) -> String {
    match cmd {
        Cmd::Init(b, _) => format!("{} <- init {b};", pretty_pattern(pat)),
        Cmd::Meas(q, _) => format!("{} <- meas {};", pretty_pattern(pat), pretty_term_atom(q)),
        Cmd::Apply { gate, targets, .. } => {
            let ts: Vec<String> = targets.iter().map(pretty_term_atom).collect();
            format!("apply {} to ({});", pretty_term_atom(gate), ts.join(", "))
        }
    }
}

/// Branches are unitary-only; render them inline, dropping the implicit
/// trailing `return ()`.
fn pretty_branch(c: &Comp) -> String {
    let mut stmts = Vec::new();
    let mut cur = c;
    loop {
        match cur {
            Comp::Return(Term::UnitLit(_), _) => break,
            Comp::Return(t, _) => {
                stmts.push(format!("return {}", pretty_term(t)));
                break;
            }
            Comp::BindCmd { pat, cmd, rest, .. } => {
                let s = pretty_stmt_cmd(pat, cmd);
                stmts.push(s.trim_end_matches(';').to_string());
                cur = rest;
            }
            Comp::Assert { prop, rest, .. } => {
                stmts.push(format!("assert {{{}}}", pretty_prop(prop)));
                cur = rest;
            }
            Comp::IfThenElse { cond, then_branch, else_branch, rest, .. } => {
                stmts.push(format!(
                    "if {} then {} else {}",
                    pretty_term_atom(cond),
                    pretty_branch(then_branch),
                    pretty_branch(else_branch)
                ));
                cur = rest;
            }
            Comp::BindCall { pat, func, args, rest, .. } => {
                let mut s = format!("{} <- {}", pretty_pattern(pat), pretty_term(func));
                for a in args {
                    s.push(' ');
                    s.push_str(&pretty_term_atom(a));
                }
                stmts.push(s);
                cur = rest;
            }
        }
    }
    if stmts.is_empty() {
        "{ }".into()
    } else {
        format!("{{ {} }}", stmts.join("; "))
    }
}

fn pretty_ghost_arg(g: &GhostArg) -> String {
    match g {
        GhostArg::Term(t) => pretty_term(t),
        GhostArg::State(s) => pretty_state(s),
    }
}

// ----- Propositions -----

pub fn pretty_prop(p: &PropAst) -> String {
    pretty_prop_prec(p, 0)
}

fn pretty_prop_prec(p: &PropAst, prec: u8) -> String {
    let (s, my_prec) = match p {
        PropAst::Implies(a, b, _) => (
            format!(
                "{} ⇒ {}",
                pretty_prop_prec(a, 2),
                pretty_prop_prec(b, 1)
            ),
            1u8,
        ),
        PropAst::Or(a, b, _) => (
            format!("{} ∨ {}", pretty_prop_prec(a, 2), pretty_prop_prec(b, 3)),
            2,
        ),
        PropAst::And(a, b, _) => (
            format!("{} ∧ {}", pretty_prop_prec(a, 3), pretty_prop_prec(b, 4)),
            3,
        ),
        _ => (pretty_atom_prop(p), 9),
    };
    if my_prec < prec {
        format!("({s})")
    } else {
        s
    }
}

fn pretty_vars(vars: &[Name]) -> String {
    if vars.len() == 1 {
        vars[0].clone()
    } else {
        format!("({})", vars.join(", "))
    }
}

fn pretty_atom_prop(p: &PropAst) -> String {
    match p {
        PropAst::Top(_) => "⊤".into(),
        PropAst::Bottom(_) => "⊥".into(),
        PropAst::EqQ { vars, state, .. } => {
            format!("{} =q {}", pretty_vars(vars), pretty_state(state))
        }
        PropAst::InQ { vars, space, .. } => {
            let SubspaceExpr::Span { vectors, .. } = space;
            let vs: Vec<String> = vectors.iter().map(pretty_state).collect();
            format!("{} ∈q span{{{}}}", pretty_vars(vars), vs.join(", "))
        }
        PropAst::EquivQ { left, right, .. } => {
            format!("{} ≡q {}", pretty_vars(left), pretty_vars(right))
        }
        PropAst::EquivCl { left, right, .. } => {
            format!("{} ≡cl {}", pretty_vars(left), pretty_vars(right))
        }
        PropAst::EqC { bit, value, .. } => format!("{bit} =c {}", pretty_bit_expr(value)),
        PropAst::Uniform { vars, .. } => format!("uniform({})", vars.join(", ")),
        PropAst::Separable { vars, .. } => format!("separable({})", vars.join(", ")),
        PropAst::Class { vars, .. } => format!("class({})", vars.join(", ")),
        PropAst::UnitaryOn { gate, vars, inner, .. } => {
            format!(
                "({} on ({})) · {}",
                pretty_gate_expr(gate),
                vars.join(", "),
                pretty_prop_prec(inner, 4)
            )
        }
        _ => format!("({})", pretty_prop(p)),
    }
}

fn pretty_gate_expr(g: &GateExpr) -> String {
    match &g.exponent {
        // Exponent atoms are literals, variables, or parenthesized.
        Some(e @ (BitExpr::Lit(_) | BitExpr::Var(_))) => {
            format!("{}^{}", g.gate.name(), pretty_bit_atom(e))
        }
        Some(e) => format!("{}^({})", g.gate.name(), pretty_bit_expr(e)),
        None => g.gate.name().into(),
    }
}

// ----- State expressions -----

pub fn pretty_state(e: &StateExpr) -> String {
    pretty_state_prec(e, 0)
}

fn pretty_state_prec(e: &StateExpr, prec: u8) -> String {
    let (s, my_prec) = match e {
        StateExpr::Sum(items, _) => {
            let mut out = pretty_state_prec(&items[0], 2);
            for item in &items[1..] {
                if let StateExpr::Scaled(Scalar::Int(-1), inner, _) = item {
                    out.push_str(" - ");
                    out.push_str(&pretty_state_prec(inner, 2));
                } else {
                    out.push_str(" + ");
                    out.push_str(&pretty_state_prec(item, 2));
                }
            }
            (out, 1u8)
        }
        StateExpr::Tensor(items, _) => (
            items
                .iter()
                .map(|i| pretty_state_prec(i, 3))
                .collect::<Vec<_>>()
                .join(" ⊗ "),
            2,
        ),
        StateExpr::Scaled(s, inner, _) => (
            // Composite scalars are parenthesized so the prefix reparses
            // atomically; the argument prints at atom level so a nested
            // scaling is not re-associated into one scalar product.
            format!("{} * {}", pretty_scalar_atom(s), pretty_state_prec(inner, 4)),
            3,
        ),
        StateExpr::Div(inner, s, _) => (
            format!(
                "{}/{}",
                pretty_state_prec(inner, 4),
                pretty_scalar_atom(s)
            ),
            3,
        ),
        StateExpr::GateApp { gate, arg, .. } => (
            format!("{} {}", pretty_gate_expr(gate), pretty_state_prec(arg, 4)),
            3,
        ),
        StateExpr::Ket(bits, _) => (pretty_ket(bits), 9),
        StateExpr::SymName(n, _) => (n.clone(), 9),
    };
    if my_prec < prec {
        format!("({s})")
    } else {
        s
    }
}

pub fn pretty_ket(bits: &[BitExpr]) -> String {
    let all_lits = bits.iter().all(|b| matches!(b, BitExpr::Lit(_)));
    let inner = if all_lits {
        bits.iter()
            .map(|b| match b {
                BitExpr::Lit(v) => v.to_string(),
                _ => unreachable!(),
            })
            .collect::<String>()
    } else {
        bits.iter()
            .map(pretty_bit_expr)
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!("|{inner}⟩")
}

fn pretty_scalar(s: &Scalar) -> String {
    match s {
        Scalar::Mul(a, b) => format!("{} * {}", pretty_scalar_atom(a), pretty_scalar_atom(b)),
        Scalar::Div(a, b) => format!("{}/{}", pretty_scalar_atom(a), pretty_scalar_atom(b)),
        _ => pretty_scalar_atom(s),
    }
}

fn pretty_scalar_atom(s: &Scalar) -> String {
    match s {
        Scalar::Int(n) => n.to_string(),
        Scalar::Sqrt(n) => format!("sqrt({n})"),
        Scalar::I => "i".into(),
        Scalar::Neg(inner) => format!("-{}", pretty_scalar_atom(inner)),
        Scalar::Pow(base, e) => {
            // `^` binds tighter than unary minus, so negative and composite
            // bases need parentheses.
            let base_s = match base.as_ref() {
                Scalar::Int(n) if *n < 0 => format!("({n})"),
                Scalar::Neg(..) | Scalar::Mul(..) | Scalar::Div(..) | Scalar::Pow(..) => {
                    format!("({})", pretty_scalar(base))
                }
                _ => pretty_scalar_atom(base),
            };
            format!("{base_s}^{}", pretty_bit_atom(e))
        }
        Scalar::Mul(..) | Scalar::Div(..) => format!("({})", pretty_scalar(s)),
    }
}

// ----- Bit expressions -----

pub fn pretty_bit_expr(e: &BitExpr) -> String {
    match e {
        BitExpr::Xor(a, b) => format!("{} ⊕ {}", pretty_bit_expr(a), pretty_bit_atom(b)),
        _ => pretty_bit_atom(e),
    }
}

fn pretty_bit_atom(e: &BitExpr) -> String {
    match e {
        BitExpr::Lit(b) => b.to_string(),
        BitExpr::Var(n) => n.clone(),
        BitExpr::App(f, arg) => format!("{f}({})", pretty_bit_expr(arg)),
        BitExpr::Xor(..) => format!("({})", pretty_bit_expr(e)),
    }
}
