//! Recursive-descent parser for `.qh` files.
//!
//! Declarations come in signature/definition pairs:
//!
//! ```text
//! bell00 : QST ((a, b): qbit ⊗ qbit) (requires {⊤}) (ensures {(a, b) =q (|00⟩+|11⟩)/sqrt(2)})
//! bell00 = do {
//!   a <- init 0;
//!   b <- init 0;
//!   apply H to (a);
//!   apply CX to (a, b);
//!   return (a, b)
//! }
//! ```

use crate::error::ParseError;
use crate::linalg::Gate;
use crate::span::Span;

use super::ast::*;
use super::lexer::{lex, Tok, Token};

pub fn parse(src: &str) -> Result<Program, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    p.program()
}

/// Parse a single proposition (used by tests and the Python bindings).
pub fn parse_prop(src: &str) -> Result<PropAst, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let prop = p.prop()?;
    p.expect_eof()?;
    Ok(prop)
}

/// Parse a single state expression.
pub fn parse_state_expr(src: &str) -> Result<StateExpr, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.state_expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        &self.tokens[(self.pos + off).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos.min(self.tokens.len() - 1)].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.peek() == &tok {
            Ok(self.bump())
        } else {
            Err(self.err_expected(&[tok.describe()]))
        }
    }

    fn err_expected(&self, expected: &[String]) -> ParseError {
        ParseError::new(
            self.span(),
            format!(
                "unexpected {}, expected {}",
                self.peek().describe(),
                expected.join(" or ")
            ),
            expected.to_vec(),
        )
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.err_expected(&["end of input".into()]))
        }
    }

    fn ident(&mut self) -> Result<(Name, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let sp = self.span();
                self.bump();
                Ok((name, sp))
            }
            _ => Err(self.err_expected(&["identifier".into()])),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    // ----- Declarations -----

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut decls = Vec::new();
        if self.peek() == &Tok::Eof {
            return Err(ParseError::new(
                self.span(),
                "empty input, expected a declaration",
                vec!["declaration".into()],
            ));
        }
        while self.peek() != &Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(Program { decls })
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let (name, start) = self.ident()?;
        self.expect(Tok::Colon)?;
        let signature = self.qtype()?;

        let (def_name, _) = self.ident().map_err(|_| {
            ParseError::new(
                self.span(),
                format!("expected the definition of `{name}` after its signature"),
                vec![format!("`{name}`")],
            )
        })?;
        if def_name != name {
            return Err(ParseError::new(
                self.prev_span(),
                format!("definition `{def_name}` does not match signature `{name}`"),
                vec![format!("`{name}`")],
            ));
        }
        let mut params = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            params.push(self.ident()?.0);
        }
        self.expect(Tok::Eq)?;
        if !self.eat_keyword("do") {
            return Err(self.err_expected(&["`do`".into()]));
        }
        let body = self.do_block(true)?;
        let span = start.merge(self.prev_span());
        Ok(Decl { name, signature, params, body, span })
    }

    // ----- Types -----

    fn qtype(&mut self) -> Result<QType, ParseError> {
        // Pi with named binder: `(x: A) -> B`
        if self.peek() == &Tok::LParen {
            if let (Tok::Ident(_), Tok::Colon) = (self.peek_at(1), self.peek_at(2)) {
                let save = self.pos;
                self.bump(); // (
                let (binder, _) = self.ident()?;
                self.bump(); // :
                let dom = self.qtype()?;
                if self.eat(&Tok::RParen) && self.eat(&Tok::Arrow) {
                    let cod = self.qtype()?;
                    return Ok(QType::Pi {
                        binder: Some(binder),
                        dom: Box::new(dom),
                        cod: Box::new(cod),
                    });
                }
                self.pos = save;
            }
        }
        let lhs = self.pair_type()?;
        if self.eat(&Tok::Arrow) {
            let cod = self.qtype()?;
            return Ok(QType::Pi {
                binder: None,
                dom: Box::new(lhs),
                cod: Box::new(cod),
            });
        }
        Ok(lhs)
    }

    fn pair_type(&mut self) -> Result<QType, ParseError> {
        let mut parts = vec![self.atom_type()?];
        while self.eat(&Tok::TensorOp) {
            parts.push(self.atom_type()?);
        }
        let mut ty = parts.pop().unwrap();
        while let Some(prev) = parts.pop() {
            ty = QType::Pair(Box::new(prev), Box::new(ty));
        }
        Ok(ty)
    }

    fn atom_type(&mut self) -> Result<QType, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => match name.as_str() {
                "unit" => {
                    self.bump();
                    Ok(QType::Unit)
                }
                "bit" => {
                    self.bump();
                    Ok(QType::Bit)
                }
                "qbit" => {
                    self.bump();
                    Ok(QType::Qbit)
                }
                "vector" => {
                    self.bump();
                    Ok(QType::Vector)
                }
                "complex" => {
                    self.bump();
                    Ok(QType::Complex)
                }
                "unitary" => {
                    self.bump();
                    Ok(QType::Unitary)
                }
                "prop" => {
                    self.bump();
                    Ok(QType::Prop)
                }
                "QST" => {
                    self.bump();
                    self.hoare_type()
                }
                _ => Err(self.err_expected(&["type".into()])),
            },
            Tok::LParen => {
                self.bump();
                let ty = self.qtype()?;
                self.expect(Tok::RParen)?;
                Ok(ty)
            }
            _ => Err(self.err_expected(&["type".into()])),
        }
    }

    fn hoare_type(&mut self) -> Result<QType, ParseError> {
        self.expect(Tok::LParen)?;
        let result = self.pattern()?;
        self.expect(Tok::Colon)?;
        let result_ty = self.qtype()?;
        self.expect(Tok::RParen)?;

        let mut ghosts = Vec::new();
        if self.peek() == &Tok::LBrace {
            self.bump();
            loop {
                let start = self.span();
                let mut names = vec![self.ident()?.0];
                while let Tok::Ident(_) = self.peek() {
                    names.push(self.ident()?.0);
                }
                self.expect(Tok::Colon)?;
                let ty = self.atom_type()?;
                ghosts.push(GhostGroup {
                    names,
                    ty,
                    span: start.merge(self.prev_span()),
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }

        self.expect(Tok::LParen)?;
        if !self.eat_keyword("requires") {
            return Err(self.err_expected(&["`requires`".into()]));
        }
        self.expect(Tok::LBrace)?;
        let pre = self.prop()?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::RParen)?;

        self.expect(Tok::LParen)?;
        if !self.eat_keyword("ensures") {
            return Err(self.err_expected(&["`ensures`".into()]));
        }
        self.expect(Tok::LBrace)?;
        let post = self.prop()?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::RParen)?;

        Ok(QType::Hoare(Box::new(HoareType {
            result,
            result_ty,
            ghosts,
            pre,
            post,
        })))
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let start = self.span();
        if self.eat(&Tok::LParen) {
            let mut names = vec![self.ident()?.0];
            while self.eat(&Tok::Comma) {
                names.push(self.ident()?.0);
            }
            self.expect(Tok::RParen)?;
            Ok(Pattern { names, span: start.merge(self.prev_span()) })
        } else {
            let (name, span) = self.ident()?;
            Ok(Pattern { names: vec![name], span })
        }
    }

    // ----- Computations -----

    /// Parse `{ stmt; ...; return e }`. When `require_return` is false (branch
    /// blocks), a missing return becomes `return ()`.
    fn do_block(&mut self, require_return: bool) -> Result<Comp, ParseError> {
        self.expect(Tok::LBrace)?;
        let comp = self.stmts(require_return)?;
        self.expect(Tok::RBrace)?;
        Ok(comp)
    }

    fn stmts(&mut self, require_return: bool) -> Result<Comp, ParseError> {
        if self.peek() == &Tok::RBrace {
            if require_return {
                return Err(self.err_expected(&["`return`".into()]));
            }
            return Ok(Comp::Return(Term::UnitLit(self.span()), self.span()));
        }

        let start = self.span();

        if self.eat_keyword("return") {
            let t = self.term()?;
            let span = start.merge(self.prev_span());
            self.eat(&Tok::Semi);
            if self.peek() != &Tok::RBrace {
                return Err(ParseError::new(
                    self.span(),
                    "statements after `return`",
                    vec!["`}`".into()],
                ));
            }
            return Ok(Comp::Return(t, span));
        }

        if self.eat_keyword("apply") {
            let gate = self.term_atom()?;
            if !self.eat_keyword("to") {
                return Err(self.err_expected(&["`to`".into()]));
            }
            self.expect(Tok::LParen)?;
            let mut targets = vec![self.term_atom()?];
            while self.eat(&Tok::Comma) {
                targets.push(self.term_atom()?);
            }
            self.expect(Tok::RParen)?;
            let span = start.merge(self.prev_span());
            self.check_apply_invariants(&gate, &targets, span)?;
            let rest = self.next_stmt(require_return)?;
            return Ok(Comp::BindCmd {
                pat: Pattern::single("_", span),
                cmd: Cmd::Apply { gate, targets, span },
                rest: Box::new(rest),
                span,
            });
        }

        if self.eat_keyword("if") {
            let cond = self.term_atom()?;
            if !self.eat_keyword("then") {
                return Err(self.err_expected(&["`then`".into()]));
            }
            let then_branch = self.do_block(false)?;
            let else_branch = if self.eat_keyword("else") {
                self.do_block(false)?
            } else {
                Comp::Return(Term::UnitLit(self.prev_span()), self.prev_span())
            };
            let span = start.merge(self.prev_span());
            let rest = self.next_stmt(require_return)?;
            return Ok(Comp::IfThenElse {
                cond,
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
                rest: Box::new(rest),
                span,
            });
        }

        if self.eat_keyword("assert") {
            self.expect(Tok::LBrace)?;
            let prop = self.prop()?;
            self.expect(Tok::RBrace)?;
            let span = start.merge(self.prev_span());
            let rest = self.next_stmt(require_return)?;
            return Ok(Comp::Assert { prop, rest: Box::new(rest), span });
        }

        // Otherwise: `pattern <- rhs`
        let pat = self.pattern()?;
        self.expect(Tok::BindArrow)?;

        if self.eat_keyword("init") {
            let b = match self.peek() {
                Tok::Int(0) => 0u8,
                Tok::Int(1) => 1u8,
                _ => return Err(self.err_expected(&["`0`".into(), "`1`".into()])),
            };
            self.bump();
            let span = start.merge(self.prev_span());
            if pat.names.len() != 1 {
                return Err(ParseError::new(pat.span, "init binds a single qubit", vec![]));
            }
            let rest = self.next_stmt(require_return)?;
            return Ok(Comp::BindCmd {
                pat,
                cmd: Cmd::Init(b, span),
                rest: Box::new(rest),
                span,
            });
        }

        if self.eat_keyword("meas") {
            let q = self.term_atom()?;
            let span = start.merge(self.prev_span());
            if pat.names.len() != 1 {
                return Err(ParseError::new(pat.span, "meas binds a single bit", vec![]));
            }
            let rest = self.next_stmt(require_return)?;
            return Ok(Comp::BindCmd {
                pat,
                cmd: Cmd::Meas(q, span),
                rest: Box::new(rest),
                span,
            });
        }

        // Function call: `f a b` with optional `with { g := v, ... }`.
        let (fname, fspan) = self.ident()?;
        let func = Term::Var(fname, fspan);
        let mut args = Vec::new();
        while self.at_term_atom() {
            args.push(self.term_atom()?);
        }
        let mut ghost_bindings = Vec::new();
        if self.eat_keyword("with") {
            self.expect(Tok::LBrace)?;
            loop {
                let (g, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let arg = self.ghost_arg()?;
                ghost_bindings.push((g, arg));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }
        let span = start.merge(self.prev_span());
        let rest = self.next_stmt(require_return)?;
        Ok(Comp::BindCall {
            pat,
            func,
            args,
            ghost_bindings,
            rest: Box::new(rest),
            span,
        })
    }

    fn next_stmt(&mut self, require_return: bool) -> Result<Comp, ParseError> {
        if self.eat(&Tok::Semi) {
            self.stmts(require_return)
        } else if self.peek() == &Tok::RBrace {
            if require_return {
                Err(self.err_expected(&["`;`".into(), "`return`".into()]))
            } else {
                Ok(Comp::Return(Term::UnitLit(self.span()), self.span()))
            }
        } else {
            Err(self.err_expected(&["`;`".into(), "`}`".into()]))
        }
    }

    fn check_apply_invariants(
        &self,
        gate: &Term,
        targets: &[Term],
        span: Span,
    ) -> Result<(), ParseError> {
        if let Term::GateConst(g, _) = gate {
            if targets.len() != g.arity() {
                return Err(ParseError::new(
                    span,
                    format!("gate {g} expects {} target(s), got {}", g.arity(), targets.len()),
                    vec![],
                ));
            }
        }
        let mut names: Vec<&Name> = Vec::new();
        for t in targets {
            if let Term::Var(n, _) = t {
                if names.contains(&n) {
                    return Err(ParseError::new(
                        span,
                        format!("duplicate target `{n}`: two-qubit targets must be distinct"),
                        vec![],
                    ));
                }
                names.push(n);
            }
        }
        Ok(())
    }

    // ----- Terms -----

    fn at_term_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Int(0) | Tok::Int(1) | Tok::LParen
        ) && !self.at_keyword("with")
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let start = self.span();
        if self.eat_keyword("fun") {
            self.expect(Tok::LParen)?;
            let (param, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.qtype()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::DArrow)?;
            let body = self.term()?;
            return Ok(Term::Lambda {
                param,
                ty,
                body: Box::new(body),
                span: start.merge(self.prev_span()),
            });
        }
        let mut t = self.term_atom()?;
        while self.at_term_atom() {
            let arg = self.term_atom()?;
            let span = t.span().merge(arg.span());
            t = Term::App {
                func: Box::new(t),
                arg: Box::new(arg),
                span,
            };
        }
        Ok(t)
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Term::BitLit(0, start))
            }
            Tok::Int(1) => {
                self.bump();
                Ok(Term::BitLit(1, start))
            }
            Tok::Ident(name) => match name.as_str() {
                "fst" => {
                    self.bump();
                    let inner = self.term_atom()?;
                    Ok(Term::Fst(Box::new(inner), start.merge(self.prev_span())))
                }
                "snd" => {
                    self.bump();
                    let inner = self.term_atom()?;
                    Ok(Term::Snd(Box::new(inner), start.merge(self.prev_span())))
                }
                "do" => {
                    self.bump();
                    let body = self.do_block(true)?;
                    Ok(Term::Do(Box::new(body), start.merge(self.prev_span())))
                }
                _ => {
                    self.bump();
                    match Gate::from_name(&name) {
                        Some(g) => Ok(Term::GateConst(g, start)),
                        None => Ok(Term::Var(name, start)),
                    }
                }
            },
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Term::UnitLit(start.merge(self.prev_span())));
                }
                let first = self.term()?;
                if self.eat(&Tok::Comma) {
                    let mut parts = vec![first, self.term()?];
                    while self.eat(&Tok::Comma) {
                        parts.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::Pair(parts, start.merge(self.prev_span())))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            _ => Err(self.err_expected(&["term".into()])),
        }
    }

    // ----- Propositions -----

    pub(crate) fn prop(&mut self) -> Result<PropAst, ParseError> {
        let lhs = self.or_prop()?;
        if self.eat(&Tok::DArrow) {
            let rhs = self.prop()?;
            let span = lhs.span().merge(rhs.span());
            return Ok(PropAst::Implies(Box::new(lhs), Box::new(rhs), span));
        }
        Ok(lhs)
    }

    fn or_prop(&mut self) -> Result<PropAst, ParseError> {
        let mut lhs = self.and_prop()?;
        while self.eat(&Tok::Vee) {
            let rhs = self.and_prop()?;
            let span = lhs.span().merge(rhs.span());
            lhs = PropAst::Or(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn and_prop(&mut self) -> Result<PropAst, ParseError> {
        let mut lhs = self.atom_prop()?;
        while self.eat(&Tok::Wedge) || self.eat(&Tok::Comma) {
            let rhs = self.atom_prop()?;
            let span = lhs.span().merge(rhs.span());
            lhs = PropAst::And(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn atom_prop(&mut self) -> Result<PropAst, ParseError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(PropAst::Top(start))
            }
            Tok::Bottom => {
                self.bump();
                Ok(PropAst::Bottom(start))
            }
            Tok::Ident(name) if name == "uniform" || name == "separable" || name == "class" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let vars = self.name_list_inner()?;
                self.expect(Tok::RParen)?;
                let span = start.merge(self.prev_span());
                Ok(match name.as_str() {
                    "uniform" => PropAst::Uniform { vars, span },
                    "separable" => PropAst::Separable { vars, span },
                    _ => PropAst::Class { vars, span },
                })
            }
            Tok::Ident(_) => {
                let (name, nspan) = self.ident()?;
                self.rel_prop(vec![name], nspan)
            }
            Tok::LParen => {
                // Could be: UnitaryOn `(G on (X)) · P`, a tuple relation
                // `(a, b) =q ...`, or a parenthesized proposition.
                if let Tok::Ident(g) = self.peek_at(1) {
                    if Gate::from_name(g).is_some()
                        && (self.peek_at(2) == &Tok::Caret
                            || matches!(self.peek_at(2), Tok::Ident(s) if s == "on"))
                    {
                        return self.unitary_on_prop();
                    }
                }
                let save = self.pos;
                self.bump();
                if let Ok(vars) = self.name_list_inner() {
                    if vars.len() >= 1 && self.eat(&Tok::RParen) && self.at_rel_token() {
                        return self.rel_prop(vars, start.merge(self.prev_span()));
                    }
                }
                self.pos = save;
                self.bump();
                let inner = self.prop()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.err_expected(&["proposition".into()])),
        }
    }

    fn at_rel_token(&self) -> bool {
        matches!(
            self.peek(),
            Tok::EqQ | Tok::EqC | Tok::EquivQ | Tok::EquivCl | Tok::InQ
        )
    }

    fn name_list_inner(&mut self) -> Result<Vec<Name>, ParseError> {
        let mut names = vec![self.ident()?.0];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?.0);
        }
        Ok(names)
    }

    fn rel_prop(&mut self, vars: Vec<Name>, vspan: Span) -> Result<PropAst, ParseError> {
        match self.peek().clone() {
            Tok::EqQ => {
                self.bump();
                let state = self.state_expr()?;
                let span = vspan.merge(self.prev_span());
                Ok(PropAst::EqQ { vars, state, span })
            }
            Tok::InQ => {
                self.bump();
                let space = self.subspace_expr()?;
                let span = vspan.merge(self.prev_span());
                Ok(PropAst::InQ { vars, space, span })
            }
            Tok::EquivQ | Tok::EquivCl => {
                let quantum = self.peek() == &Tok::EquivQ;
                self.bump();
                let right = if self.eat(&Tok::LParen) {
                    let names = self.name_list_inner()?;
                    self.expect(Tok::RParen)?;
                    names
                } else {
                    vec![self.ident()?.0]
                };
                let span = vspan.merge(self.prev_span());
                if right.len() != vars.len() {
                    return Err(ParseError::new(
                        span,
                        "quantum/classical equality needs lists of equal length",
                        vec![],
                    ));
                }
                if vars.iter().any(|v| right.contains(v)) {
                    return Err(ParseError::new(
                        span,
                        "quantum/classical equality needs disjoint variable lists",
                        vec![],
                    ));
                }
                Ok(if quantum {
                    PropAst::EquivQ { left: vars, right, span }
                } else {
                    PropAst::EquivCl { left: vars, right, span }
                })
            }
            Tok::EqC => {
                self.bump();
                if vars.len() != 1 {
                    return Err(ParseError::new(
                        vspan,
                        "`=c` relates a single classical bit",
                        vec![],
                    ));
                }
                let value = self.bit_expr()?;
                let span = vspan.merge(self.prev_span());
                Ok(PropAst::EqC { bit: vars.into_iter().next().unwrap(), value, span })
            }
            _ => Err(self.err_expected(&[
                "`=q`".into(),
                "`∈q`".into(),
                "`≡q`".into(),
                "`≡cl`".into(),
                "`=c`".into(),
            ])),
        }
    }

    fn unitary_on_prop(&mut self) -> Result<PropAst, ParseError> {
        let start = self.span();
        self.expect(Tok::LParen)?;
        let gate = self.gate_expr()?;
        if !self.eat_keyword("on") {
            return Err(self.err_expected(&["`on`".into()]));
        }
        self.expect(Tok::LParen)?;
        let vars = self.name_list_inner()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Dot)?;
        let inner = self.atom_prop()?;
        let span = start.merge(self.prev_span());
        Ok(PropAst::UnitaryOn { gate, vars, inner: Box::new(inner), span })
    }

    fn gate_expr(&mut self) -> Result<GateExpr, ParseError> {
        let start = self.span();
        let (name, _) = self.ident()?;
        let gate = Gate::from_name(&name).ok_or_else(|| {
            ParseError::new(start, format!("unknown gate `{name}`"), vec![])
        })?;
        let exponent = if self.eat(&Tok::Caret) {
            Some(self.exponent_atom()?)
        } else {
            None
        };
        Ok(GateExpr { gate, exponent, span: start.merge(self.prev_span()) })
    }

    fn subspace_expr(&mut self) -> Result<SubspaceExpr, ParseError> {
        let start = self.span();
        if !self.eat_keyword("span") {
            return Err(self.err_expected(&["`span`".into()]));
        }
        self.expect(Tok::LBrace)?;
        let mut vectors = vec![self.state_expr()?];
        while self.eat(&Tok::Comma) {
            vectors.push(self.state_expr()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(SubspaceExpr::Span { vectors, span: start.merge(self.prev_span()) })
    }

    // ----- State expressions -----

    pub(crate) fn state_expr(&mut self) -> Result<StateExpr, ParseError> {
        let start = self.span();
        let mut terms = vec![self.tensor_term()?];
        let mut negated = vec![false];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.tensor_term()?);
                negated.push(false);
            } else if self.eat(&Tok::Minus) {
                terms.push(self.tensor_term()?);
                negated.push(true);
            } else {
                break;
            }
        }
        let span = start.merge(self.prev_span());
        let mut items: Vec<StateExpr> = Vec::with_capacity(terms.len());
        for (t, neg) in terms.into_iter().zip(negated) {
            if neg {
                let s = t.span();
                items.push(StateExpr::Scaled(Scalar::Int(-1), Box::new(t), s));
            } else {
                items.push(t);
            }
        }
        if items.len() == 1 {
            Ok(items.pop().unwrap())
        } else {
            Ok(StateExpr::Sum(items, span))
        }
    }

    fn tensor_term(&mut self) -> Result<StateExpr, ParseError> {
        let start = self.span();
        let mut parts = vec![self.state_factor()?];
        while self.eat(&Tok::TensorOp) {
            parts.push(self.state_factor()?);
        }
        if parts.len() == 1 {
            Ok(parts.pop().unwrap())
        } else {
            Ok(StateExpr::Tensor(parts, start.merge(self.prev_span())))
        }
    }

    fn state_factor(&mut self) -> Result<StateExpr, ParseError> {
        let start = self.span();

        // Gate application: `X psi`, `Z^x (...)`, `H |0⟩`.
        if let Tok::Ident(name) = self.peek() {
            if Gate::from_name(name).is_some() {
                let gate = self.gate_expr()?;
                let arg = self.state_factor()?;
                let span = start.merge(self.prev_span());
                return Ok(StateExpr::GateApp { gate, arg: Box::new(arg), span });
            }
        }

        // Scalar prefix: `s * expr`.
        if self.at_scalar_start() {
            let save = self.pos;
            if let Ok(s) = self.scalar(false) {
                if self.eat(&Tok::Star) {
                    let arg = self.state_factor()?;
                    let span = start.merge(self.prev_span());
                    return Ok(StateExpr::Scaled(s, Box::new(arg), span));
                }
            }
            self.pos = save;
        }

        let mut e = self.state_atom()?;
        while self.peek() == &Tok::Slash {
            self.bump();
            let s = self.scalar_atom()?;
            let span = e.span().merge(self.prev_span());
            e = StateExpr::Div(Box::new(e), s, span);
        }
        Ok(e)
    }

    fn at_scalar_start(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Minus => true,
            Tok::Ident(s) if s == "sqrt" || s == "√" || s == "i" => true,
            // A parenthesized group may hold a scalar; the caller backtracks
            // when it turns out to be a state expression.
            Tok::LParen => true,
            _ => false,
        }
    }

    fn state_atom(&mut self) -> Result<StateExpr, ParseError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ket(inner) => {
                self.bump();
                let bits = parse_ket_inner(&inner, start)?;
                Ok(StateExpr::Ket(bits, start))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(StateExpr::SymName(name, start))
            }
            Tok::LParen => {
                self.bump();
                let e = self.state_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.err_expected(&["state expression".into()])),
        }
    }

    // ----- Scalars -----

    /// `greedy` is set inside parentheses, where the context is known to be
    /// a scalar and `*` always continues it. At the top of a state factor,
    /// a `*` followed by a ket, paren group, or identifier separates the
    /// scalar prefix from the state expression instead.
    fn scalar(&mut self, greedy: bool) -> Result<Scalar, ParseError> {
        let mut s = self.scalar_atom()?;
        loop {
            let star_continues = self.peek() == &Tok::Star
                && (greedy
                    || !matches!(self.peek_at(1), Tok::Ket(_) | Tok::LParen | Tok::Ident(_)));
            if star_continues {
                self.bump();
                let rhs = self.scalar_atom()?;
                s = Scalar::Mul(Box::new(s), Box::new(rhs));
            } else if self.peek() == &Tok::Slash {
                self.bump();
                let rhs = self.scalar_atom()?;
                s = Scalar::Div(Box::new(s), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn scalar_atom(&mut self) -> Result<Scalar, ParseError> {
        let start = self.span();
        let mut base = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Scalar::Int(n)
            }
            Tok::Minus => {
                self.bump();
                let inner = self.scalar_atom()?;
                match inner {
                    Scalar::Int(n) => Scalar::Int(-n),
                    other => Scalar::Neg(Box::new(other)),
                }
            }
            Tok::Ident(name) if name == "sqrt" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let n = match self.peek() {
                    Tok::Int(n) if *n >= 0 => *n as u64,
                    _ => return Err(self.err_expected(&["integer".into()])),
                };
                self.bump();
                self.expect(Tok::RParen)?;
                Scalar::Sqrt(n)
            }
            Tok::Ident(name) if name == "√" => {
                self.bump();
                let n = match self.peek() {
                    Tok::Int(n) if *n >= 0 => *n as u64,
                    _ => return Err(self.err_expected(&["integer".into()])),
                };
                self.bump();
                Scalar::Sqrt(n)
            }
            Tok::Ident(name) if name == "i" => {
                self.bump();
                Scalar::I
            }
            Tok::LParen => {
                self.bump();
                let s = self.scalar(true)?;
                self.expect(Tok::RParen)?;
                s
            }
            _ => return Err(self.err_expected(&["scalar".into()])),
        };
        if self.eat(&Tok::Caret) {
            let e = self.bit_atom()?;
            base = Scalar::Pow(Box::new(base), e);
        }
        let _ = start;
        Ok(base)
    }

    // ----- Bit expressions -----

    /// Exponent atoms never treat a following `(` as function application,
    /// so `Z^x (X^y psi)` keeps the parenthesized group as the gate's
    /// argument. Write `G^(f(x))` to use an application as an exponent.
    fn exponent_atom(&mut self) -> Result<BitExpr, ParseError> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(BitExpr::Lit(0))
            }
            Tok::Int(1) => {
                self.bump();
                Ok(BitExpr::Lit(1))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(BitExpr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.bit_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.err_expected(&["bit expression".into()])),
        }
    }

    fn bit_expr(&mut self) -> Result<BitExpr, ParseError> {
        let mut lhs = self.bit_atom()?;
        while self.eat(&Tok::Oplus) {
            let rhs = self.bit_atom()?;
            lhs = BitExpr::Xor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bit_atom(&mut self) -> Result<BitExpr, ParseError> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(BitExpr::Lit(0))
            }
            Tok::Int(1) => {
                self.bump();
                Ok(BitExpr::Lit(1))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let arg = self.bit_expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(BitExpr::App(name, Box::new(arg)))
                } else {
                    Ok(BitExpr::Var(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.bit_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.err_expected(&["bit expression".into()])),
        }
    }

    // ----- Ghost arguments -----

    fn ghost_arg(&mut self) -> Result<GhostArg, ParseError> {
        // A bare identifier is a term (qubit or vector name); anything that
        // can only be a state expression parses as one.
        match self.peek() {
            Tok::Ident(name) if Gate::from_name(name).is_none() => {
                // Lookahead: ident followed by state-expression structure
                // means a state expression (e.g. `psi / sqrt(2)`).
                if matches!(
                    self.peek_at(1),
                    Tok::Slash | Tok::Plus | Tok::Minus | Tok::TensorOp
                ) {
                    Ok(GhostArg::State(self.state_expr()?))
                } else {
                    let (n, sp) = self.ident()?;
                    Ok(GhostArg::Term(Term::Var(n, sp)))
                }
            }
            _ => Ok(GhostArg::State(self.state_expr()?)),
        }
    }
}

/// Parse the inner text of a ket into its per-qubit bit expressions.
/// Adjacent digits are separate qubits (`|01⟩`); identifiers, `⊕`, and
/// function applications form larger expressions; whitespace or commas
/// separate components.
fn parse_ket_inner(inner: &str, span: Span) -> Result<Vec<BitExpr>, ParseError> {
    #[derive(Debug, PartialEq)]
    enum T {
        Bit(u8),
        Ident(String),
        Xor,
        LP,
        RP,
        Sep,
    }
    let mut toks = Vec::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '0' => toks.push(T::Bit(0)),
            '1' => toks.push(T::Bit(1)),
            '⊕' => toks.push(T::Xor),
            '(' => toks.push(T::LP),
            ')' => toks.push(T::RP),
            ',' => toks.push(T::Sep),
            c if c.is_whitespace() => {
                if toks.last() != Some(&T::Sep) {
                    toks.push(T::Sep);
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_alphanumeric() && !n.is_ascii_digit() || n == '_' {
                        name.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if name == "xor" {
                    toks.push(T::Xor);
                } else {
                    toks.push(T::Ident(name));
                }
            }
            other => {
                return Err(ParseError::new(
                    span,
                    format!("unexpected `{other}` inside ket"),
                    vec![],
                ))
            }
        }
    }

    // Strip separators adjacent to operators so `|b ⊕ f(a)⟩` is one component.
    let mut clean: Vec<T> = Vec::new();
    for t in toks {
        match t {
            T::Sep => {
                if matches!(clean.last(), Some(T::Xor) | Some(T::LP) | None) {
                    continue;
                }
                clean.push(T::Sep);
            }
            T::Xor | T::RP => {
                if matches!(clean.last(), Some(T::Sep)) {
                    clean.pop();
                }
                clean.push(t);
            }
            other => clean.push(other),
        }
    }
    // A separator directly before an opening paren that follows an ident is
    // function application; other separators split components.
    let mut components: Vec<BitExpr> = Vec::new();
    let mut pos = 0usize;

    fn parse_atom(
        toks: &[T],
        pos: &mut usize,
        span: Span,
    ) -> Result<BitExpr, ParseError> {
        match toks.get(*pos) {
            Some(T::Bit(b)) => {
                *pos += 1;
                Ok(BitExpr::Lit(*b))
            }
            Some(T::Ident(name)) => {
                *pos += 1;
                if toks.get(*pos) == Some(&T::LP) {
                    *pos += 1;
                    let inner = parse_expr(toks, pos, span)?;
                    if toks.get(*pos) != Some(&T::RP) {
                        return Err(ParseError::new(span, "unbalanced parens in ket", vec![]));
                    }
                    *pos += 1;
                    Ok(BitExpr::App(name.clone(), Box::new(inner)))
                } else {
                    Ok(BitExpr::Var(name.clone()))
                }
            }
            Some(T::LP) => {
                *pos += 1;
                let inner = parse_expr(toks, pos, span)?;
                if toks.get(*pos) != Some(&T::RP) {
                    return Err(ParseError::new(span, "unbalanced parens in ket", vec![]));
                }
                *pos += 1;
                Ok(inner)
            }
            _ => Err(ParseError::new(span, "malformed ket component", vec![])),
        }
    }

    fn parse_expr(toks: &[T], pos: &mut usize, span: Span) -> Result<BitExpr, ParseError> {
        let mut lhs = parse_atom(toks, pos, span)?;
        loop {
            // Allow a separator in front of an xor sign.
            let mut look = *pos;
            if toks.get(look) == Some(&T::Sep) {
                look += 1;
            }
            if toks.get(look) == Some(&T::Xor) {
                *pos = look + 1;
                let rhs = parse_atom(toks, pos, span)?;
                lhs = BitExpr::Xor(Box::new(lhs), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    while pos < clean.len() {
        if clean[pos] == T::Sep {
            pos += 1;
            continue;
        }
        components.push(parse_expr(&clean, &mut pos, span)?);
    }
    if components.is_empty() {
        return Err(ParseError::new(span, "empty ket", vec![]));
    }
    Ok(components)
}
