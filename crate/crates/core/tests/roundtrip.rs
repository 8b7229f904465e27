//! parse ∘ pretty is the identity on generated ASTs.

use proptest::prelude::*;

use qhtt_core::linalg::Gate;
use qhtt_core::span::Span;
use qhtt_core::surface::ast::*;
use qhtt_core::surface::{parse, pretty_program};

fn sp() -> Span {
    Span::default()
}

/// Identifier pool: free of keywords, gate names, and the `ket...` alias
/// space, so every name round-trips as a plain identifier.
const NAMES: [&str; 10] = ["a", "b", "c", "q", "r", "s", "w", "alpha", "beta", "gam"];

fn name() -> impl Strategy<Value = Name> {
    (0..NAMES.len()).prop_map(|i| NAMES[i].to_string())
}

fn distinct_names(n: usize) -> impl Strategy<Value = Vec<Name>> {
    proptest::sample::subsequence(NAMES.to_vec(), n)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn gate1() -> impl Strategy<Value = Gate> {
    proptest::sample::select(vec![Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H])
}

fn any_gate() -> impl Strategy<Value = Gate> {
    proptest::sample::select(Gate::ALL.to_vec())
}

fn bit_expr() -> impl Strategy<Value = BitExpr> {
    let leaf = prop_oneof![
        (0u8..2).prop_map(BitExpr::Lit),
        name().prop_map(BitExpr::Var),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (name(), inner.clone())
                .prop_map(|(f, e)| BitExpr::App(f, Box::new(e))),
            (inner.clone(), inner)
                .prop_map(|(a, b)| BitExpr::Xor(Box::new(a), Box::new(b))),
        ]
    })
}

fn scalar() -> impl Strategy<Value = Scalar> {
    let leaf = prop_oneof![
        // The parser folds unary minus into the literal, so any i64 range
        // round-trips as Int.
        (-9i64..=9).prop_map(Scalar::Int),
        (0u64..=9).prop_map(Scalar::Sqrt),
        Just(Scalar::I),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Scalar::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Scalar::Div(Box::new(a), Box::new(b))),
            // Negation of a non-integer atom (integers fold).
            inner.clone().prop_filter_map("non-int", |s| match s {
                Scalar::Int(_) | Scalar::Neg(_) => None,
                other => Some(Scalar::Neg(Box::new(other))),
            }),
            (inner, bit_expr()).prop_map(|(b, e)| Scalar::Pow(Box::new(b), e)),
        ]
    })
}

fn ket() -> impl Strategy<Value = StateExpr> {
    prop_oneof![
        // Literal kets |0101⟩.
        proptest::collection::vec((0u8..2).prop_map(BitExpr::Lit), 1..4)
            .prop_map(|bits| StateExpr::Ket(bits, sp())),
        // Expression kets |a b ⊕ f(c)⟩.
        proptest::collection::vec(bit_expr(), 1..3)
            .prop_map(|bits| StateExpr::Ket(bits, sp())),
    ]
}

fn state_expr() -> impl Strategy<Value = StateExpr> {
    let leaf = prop_oneof![ket(), name().prop_map(|n| StateExpr::SymName(n, sp()))];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (scalar(), inner.clone())
                .prop_map(|(s, e)| StateExpr::Scaled(s, Box::new(e), sp())),
            (inner.clone(), scalar())
                .prop_map(|(e, s)| StateExpr::Div(Box::new(e), s, sp())),
            proptest::collection::vec(inner.clone(), 2..4)
                .prop_map(|items| StateExpr::Sum(items, sp())),
            proptest::collection::vec(inner.clone(), 2..4)
                .prop_map(|items| StateExpr::Tensor(items, sp())),
            (any_gate(), proptest::option::of(bit_expr()), inner).prop_map(|(g, e, arg)| {
                // Exponent atoms are literals, variables, or parenthesized.
                StateExpr::GateApp {
                    gate: GateExpr { gate: g, exponent: e, span: sp() },
                    arg: Box::new(arg),
                    span: sp(),
                }
            }),
        ]
    })
}

fn prop_ast() -> impl Strategy<Value = PropAst> {
    let leaf = prop_oneof![
        Just(PropAst::Top(sp())),
        Just(PropAst::Bottom(sp())),
        (distinct_names(2), state_expr()).prop_map(|(vars, state)| PropAst::EqQ {
            vars,
            state,
            span: sp()
        }),
        (name(), state_expr()).prop_map(|(v, state)| PropAst::EqQ {
            vars: vec![v],
            state,
            span: sp()
        }),
        (
            distinct_names(2),
            proptest::collection::vec(state_expr(), 1..3)
        )
            .prop_map(|(vars, vectors)| PropAst::InQ {
                vars,
                space: SubspaceExpr::Span { vectors, span: sp() },
                span: sp(),
            }),
        distinct_names(4).prop_map(|ns| PropAst::EquivQ {
            left: ns[..2].to_vec(),
            right: ns[2..].to_vec(),
            span: sp()
        }),
        distinct_names(2).prop_map(|ns| PropAst::EquivCl {
            left: vec![ns[0].clone()],
            right: vec![ns[1].clone()],
            span: sp()
        }),
        (name(), bit_expr()).prop_map(|(bit, value)| PropAst::EqC { bit, value, span: sp() }),
        distinct_names(2).prop_map(|vars| PropAst::Uniform { vars, span: sp() }),
        name().prop_map(|v| PropAst::Separable { vars: vec![v], span: sp() }),
        name().prop_map(|v| PropAst::Class { vars: vec![v], span: sp() }),
    ];
    leaf.prop_recursive(3, 20, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| PropAst::And(Box::new(a), Box::new(b), sp())),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| PropAst::Or(Box::new(a), Box::new(b), sp())),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| PropAst::Implies(Box::new(a), Box::new(b), sp())),
            (
                any_gate(),
                proptest::option::of(prop_oneof![
                    (0u8..2).prop_map(BitExpr::Lit),
                    name().prop_map(BitExpr::Var)
                ]),
                distinct_names(2),
                inner
            )
                .prop_map(|(g, e, vars, p)| PropAst::UnitaryOn {
                    gate: GateExpr { gate: g, exponent: e, span: sp() },
                    vars,
                    inner: Box::new(p),
                    span: sp(),
                }),
        ]
    })
}

fn qtype() -> impl Strategy<Value = QType> {
    let leaf = prop_oneof![
        Just(QType::Unit),
        Just(QType::Bit),
        Just(QType::Qbit),
        Just(QType::Unitary),
        Just(QType::Prop),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| QType::Pair(Box::new(a), Box::new(b))),
            (proptest::option::of(name()), inner.clone(), inner.clone()).prop_map(
                |(binder, dom, cod)| QType::Pi {
                    binder,
                    dom: Box::new(dom),
                    cod: Box::new(cod),
                }
            ),
            (name(), inner.clone(), prop_ast(), prop_ast()).prop_map(
                |(rname, rty, pre, post)| QType::Hoare(Box::new(HoareType {
                    result: Pattern { names: vec![rname], span: sp() },
                    result_ty: rty,
                    ghosts: vec![GhostGroup {
                        names: vec!["psivec".into()],
                        ty: QType::Vector,
                        span: sp(),
                    }],
                    pre,
                    post,
                }))
            ),
        ]
    })
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        name().prop_map(|n| Term::Var(n, sp())),
        (0u8..2).prop_map(|b| Term::BitLit(b, sp())),
        Just(Term::UnitLit(sp())),
        any_gate().prop_map(|g| Term::GateConst(g, sp())),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4)
                .prop_map(|parts| Term::Pair(parts, sp())),
            inner.clone().prop_map(|t| Term::Fst(Box::new(t), sp())),
            inner.clone().prop_map(|t| Term::Snd(Box::new(t), sp())),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::App {
                func: Box::new(f),
                arg: Box::new(a),
                span: sp()
            }),
            (name(), qtype(), inner).prop_map(|(param, ty, body)| Term::Lambda {
                param,
                ty,
                body: Box::new(body),
                span: sp()
            }),
        ]
    })
}

/// Branch bodies: unitary applications only, ending in the implicit unit.
fn branch() -> impl Strategy<Value = Comp> {
    proptest::collection::vec((gate1(), name()), 0..3).prop_map(|apps| {
        let mut comp = Comp::Return(Term::UnitLit(sp()), sp());
        for (g, target) in apps.into_iter().rev() {
            comp = Comp::BindCmd {
                pat: Pattern::single("_", sp()),
                cmd: Cmd::Apply {
                    gate: Term::GateConst(g, sp()),
                    targets: vec![Term::Var(target, sp())],
                    span: sp(),
                },
                rest: Box::new(comp),
                span: sp(),
            };
        }
        comp
    })
}

fn stmt_chain() -> impl Strategy<Value = Comp> {
    #[derive(Debug, Clone)]
    enum Stmt {
        Init(Name, u8),
        Meas(Name, Name),
        Apply1(Gate, Name),
        Apply2(Gate, Name, Name),
        Assert(PropAst),
        If(Name, Comp, Comp),
        Call(Vec<Name>, Name, Vec<Term>, Vec<(Name, GhostArg)>),
    }
    let stmt = prop_oneof![
        (name(), 0u8..2).prop_map(|(n, b)| Stmt::Init(n, b)),
        (name(), name()).prop_map(|(x, q)| Stmt::Meas(x, q)),
        (gate1(), name()).prop_map(|(g, q)| Stmt::Apply1(g, q)),
        (
            proptest::sample::select(vec![Gate::CX, Gate::CZ]),
            distinct_names(2)
        )
            .prop_map(|(g, ns)| Stmt::Apply2(g, ns[0].clone(), ns[1].clone())),
        prop_ast().prop_map(Stmt::Assert),
        (name(), branch(), branch()).prop_map(|(c, t, e)| Stmt::If(c, t, e)),
        (
            distinct_names(2),
            name(),
            proptest::collection::vec(term(), 0..3),
            proptest::collection::vec(
                (name(), prop_oneof![
                    name().prop_map(|n| GhostArg::Term(Term::Var(n, sp()))),
                    state_expr().prop_map(GhostArg::State),
                ]),
                0..2
            )
        )
            .prop_map(|(pat, f, args, ghosts)| Stmt::Call(pat, f, args, ghosts)),
    ];
    (proptest::collection::vec(stmt, 0..6), term()).prop_map(|(stmts, ret)| {
        let mut comp = Comp::Return(ret, sp());
        for s in stmts.into_iter().rev() {
            comp = match s {
                Stmt::Init(n, b) => Comp::BindCmd {
                    pat: Pattern::single(n, sp()),
                    cmd: Cmd::Init(b, sp()),
                    rest: Box::new(comp),
                    span: sp(),
                },
                Stmt::Meas(x, q) => Comp::BindCmd {
                    pat: Pattern::single(x, sp()),
                    cmd: Cmd::Meas(Term::Var(q, sp()), sp()),
                    rest: Box::new(comp),
                    span: sp(),
                },
                Stmt::Apply1(g, q) => Comp::BindCmd {
                    pat: Pattern::single("_", sp()),
                    cmd: Cmd::Apply {
                        gate: Term::GateConst(g, sp()),
                        targets: vec![Term::Var(q, sp())],
                        span: sp(),
                    },
                    rest: Box::new(comp),
                    span: sp(),
                },
                Stmt::Apply2(g, q1, q2) => Comp::BindCmd {
                    pat: Pattern::single("_", sp()),
                    cmd: Cmd::Apply {
                        gate: Term::GateConst(g, sp()),
                        targets: vec![Term::Var(q1, sp()), Term::Var(q2, sp())],
                        span: sp(),
                    },
                    rest: Box::new(comp),
                    span: sp(),
                },
                Stmt::Assert(p) => Comp::Assert {
                    prop: p,
                    rest: Box::new(comp),
                    span: sp(),
                },
                Stmt::If(c, t, e) => Comp::IfThenElse {
                    cond: Term::Var(c, sp()),
                    then_branch: Box::new(t),
                    else_branch: Box::new(e),
                    rest: Box::new(comp),
                    span: sp(),
                },
                Stmt::Call(pat, f, args, ghost_bindings) => Comp::BindCall {
                    pat: Pattern { names: pat, span: sp() },
                    func: Term::Var(f, sp()),
                    args,
                    ghost_bindings,
                    rest: Box::new(comp),
                    span: sp(),
                },
            };
        }
        comp
    })
}

fn decl() -> impl Strategy<Value = Decl> {
    (
        name(),
        qtype(),
        prop_ast(),
        prop_ast(),
        proptest::collection::vec(name(), 0..3),
        stmt_chain(),
    )
        .prop_map(|(dname, rty, pre, post, params, body)| {
            // Wrap the computation type in the parameter chain.
            let mut sig = QType::Hoare(Box::new(HoareType {
                result: Pattern::single("res", sp()),
                result_ty: rty,
                ghosts: vec![GhostGroup {
                    names: vec!["psivec".into(), "phivec".into()],
                    ty: QType::Vector,
                    span: sp(),
                }],
                pre,
                post,
            }));
            for p in params.iter().rev() {
                sig = QType::Pi {
                    binder: Some(format!("{p}0")),
                    dom: Box::new(QType::Qbit),
                    cod: Box::new(sig),
                };
            }
            Decl {
                name: format!("{dname}fn"),
                signature: sig,
                params: params.iter().map(|p| format!("{p}0")).collect(),
                body,
                span: sp(),
            }
        })
}

fn program() -> impl Strategy<Value = Program> {
    proptest::collection::vec(decl(), 1..3).prop_map(|decls| Program { decls })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn parse_pretty_roundtrip(p in program()) {
        let printed = pretty_program(&p);
        let reparsed = parse(&printed)
            .unwrap_or_else(|e| panic!("reparse failed: {e}\n---\n{printed}"));
        prop_assert_eq!(&p, &reparsed, "pretty form:\n{}", printed);
        // And the printed form is a fixpoint.
        let printed2 = pretty_program(&reparsed);
        prop_assert_eq!(printed, printed2);
    }

    #[test]
    fn prop_roundtrip_through_unicode_and_ascii(p in prop_ast()) {
        use qhtt_core::surface::{parse_prop, pretty_prop};
        let printed = pretty_prop(&p);
        let reparsed = parse_prop(&printed)
            .unwrap_or_else(|e| panic!("reparse failed: {e}\n---\n{printed}"));
        prop_assert_eq!(&p, &reparsed, "printed: {}", printed);
    }
}

/// The spec's alias table: Unicode tokens and ASCII spellings parse alike.
#[test]
fn unicode_ascii_alias_pairs() {
    use qhtt_core::surface::parse_prop;
    let pairs = [
        ("⊤", "top"),
        ("⊥", "bottom"),
        ("a ≡q b", "a ==q b"),
        ("a ≡cl b", "a ==cl b"),
        ("q ∈q span{|0⟩}", "q inq span{ket0}"),
        ("q =q |01⟩", "q =q ket01"),
        ("q =q |0⟩ ∧ r =q |1⟩", "q =q ket0 /\\ r =q ket1"),
        ("q =q |0⟩ ∨ r =q |1⟩", "q =q ket0 \\/ r =q ket1"),
        ("⊤ ⇒ ⊥", "top => bottom"),
        ("(a, b) =q (|00⟩ + |11⟩)/√2", "(a, b) =q (ket00 + ket11)/sqrt(2)"),
    ];
    for (uni, ascii) in pairs {
        let a = parse_prop(uni).unwrap_or_else(|e| panic!("{uni}: {e}"));
        let b = parse_prop(ascii).unwrap_or_else(|e| panic!("{ascii}: {e}"));
        assert_eq!(a, b, "{uni} vs {ascii}");
    }
}

#[test]
fn empty_input_is_a_parse_error() {
    let err = parse("").unwrap_err();
    assert!(err.message.contains("declaration"), "{err}");
}

#[test]
fn crlf_sources_parse() {
    let src = "f : QST (x: bit) (requires {top}) (ensures {top})\r\nf = do {\r\n  q <- init 0;\r\n  x <- meas q;\r\n  return x\r\n}\r\n";
    parse(src).unwrap();
}
