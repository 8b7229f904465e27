//! Lexer for `.qh` source. Unicode connectives and their ASCII aliases
//! produce the same tokens; `--` starts a line comment, so annotated
//! listings re-parse unchanged.

use crate::error::ParseError;
use crate::span::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Raw inner text of a ket: `|...⟩`, `|...>`, or the `ket01` alias.
    Ket(String),
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Arrow,     // ->
    BindArrow, // <-
    Assign,    // :=
    Eq,        // =
    EqQ,       // =q
    EqC,       // =c
    EquivQ,    // ≡q / ==q
    EquivCl,   // ≡cl / ==cl
    InQ,       // ∈q
    TensorOp,  // ⊗ / (*)
    Top,       // ⊤
    Bottom,    // ⊥
    Wedge,     // ∧ / /\
    Vee,       // ∨ / \/
    DArrow,    // ⇒ / =>
    Dot,       // · / .
    Oplus,     // ⊕
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Ket(_) => "ket".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::BindArrow => "`<-`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::EqQ => "`=q`".into(),
            Tok::EqC => "`=c`".into(),
            Tok::EquivQ => "`≡q`".into(),
            Tok::EquivCl => "`≡cl`".into(),
            Tok::InQ => "`∈q`".into(),
            Tok::TensorOp => "`⊗`".into(),
            Tok::Top => "`⊤`".into(),
            Tok::Bottom => "`⊥`".into(),
            Tok::Wedge => "`∧`".into(),
            Tok::Vee => "`∨`".into(),
            Tok::DArrow => "`⇒`".into(),
            Tok::Dot => "`·`".into(),
            Tok::Oplus => "`⊕`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Scanner<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src,
            chars: src.char_indices().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).map(|&(_, c)| c)
    }

    fn byte_offset(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(b, _)| b)
            .unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (usize, u32, u32) {
        (self.byte_offset(), self.line, self.col)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == 'ψ' || c == 'α' || c == 'β'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == 'ψ' || c == 'α' || c == 'β'
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut s = Scanner::new(src);
    let mut out = Vec::new();

    loop {
        // Skip whitespace and comments.
        loop {
            match s.peek() {
                Some(c) if c.is_whitespace() => {
                    s.bump();
                }
                Some('-') if s.peek_at(1) == Some('-') => {
                    while let Some(c) = s.peek() {
                        if c == '\n' {
                            break;
                        }
                        s.bump();
                    }
                }
                _ => break,
            }
        }

        let (start, line, col) = s.here();
        let span_to = |s: &Scanner, start: usize, line: u32, col: u32| {
            Span::new(start, s.byte_offset(), line, col)
        };

        let c = match s.peek() {
            None => {
                out.push(Token {
                    tok: Tok::Eof,
                    span: Span::new(start, start, line, col),
                });
                return Ok(out);
            }
            Some(c) => c,
        };

        let tok = match c {
            ':' => {
                s.bump();
                if s.peek() == Some('=') {
                    s.bump();
                    Tok::Assign
                } else {
                    Tok::Colon
                }
            }
            ';' => {
                s.bump();
                Tok::Semi
            }
            ',' => {
                s.bump();
                Tok::Comma
            }
            '(' => {
                if s.peek_at(1) == Some('*') && s.peek_at(2) == Some(')') {
                    s.bump();
                    s.bump();
                    s.bump();
                    Tok::TensorOp
                } else {
                    s.bump();
                    Tok::LParen
                }
            }
            ')' => {
                s.bump();
                Tok::RParen
            }
            '{' => {
                s.bump();
                Tok::LBrace
            }
            '}' => {
                s.bump();
                Tok::RBrace
            }
            '-' => {
                s.bump();
                if s.peek() == Some('>') {
                    s.bump();
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '<' => {
                s.bump();
                if s.peek() == Some('-') {
                    s.bump();
                    Tok::BindArrow
                } else {
                    return Err(ParseError::new(
                        Span::new(start, start + 1, line, col),
                        "unexpected `<`",
                        vec!["`<-`".into()],
                    ));
                }
            }
            '=' => {
                s.bump();
                match s.peek() {
                    Some('q') if !s.peek_at(1).is_some_and(is_ident_continue) => {
                        s.bump();
                        Tok::EqQ
                    }
                    Some('c') if !s.peek_at(1).is_some_and(is_ident_continue) => {
                        s.bump();
                        Tok::EqC
                    }
                    Some('>') => {
                        s.bump();
                        Tok::DArrow
                    }
                    Some('=') => {
                        s.bump();
                        match (s.peek(), s.peek_at(1)) {
                            (Some('c'), Some('l'))
                                if !s.peek_at(2).is_some_and(is_ident_continue) =>
                            {
                                s.bump();
                                s.bump();
                                Tok::EquivCl
                            }
                            (Some('q'), next)
                                if !next.is_some_and(is_ident_continue) =>
                            {
                                s.bump();
                                Tok::EquivQ
                            }
                            _ => {
                                return Err(ParseError::new(
                                    span_to(&s, start, line, col),
                                    "unexpected `==`",
                                    vec!["`==q`".into(), "`==cl`".into()],
                                ))
                            }
                        }
                    }
                    _ => Tok::Eq,
                }
            }
            '≡' => {
                s.bump();
                match (s.peek(), s.peek_at(1)) {
                    (Some('c'), Some('l')) if !s.peek_at(2).is_some_and(is_ident_continue) => {
                        s.bump();
                        s.bump();
                        Tok::EquivCl
                    }
                    (Some('q'), next) if !next.is_some_and(is_ident_continue) => {
                        s.bump();
                        Tok::EquivQ
                    }
                    _ => {
                        return Err(ParseError::new(
                            span_to(&s, start, line, col),
                            "`≡` must be followed by `q` or `cl`",
                            vec!["`≡q`".into(), "`≡cl`".into()],
                        ))
                    }
                }
            }
            '∈' => {
                s.bump();
                if s.peek() == Some('q') && !s.peek_at(1).is_some_and(is_ident_continue) {
                    s.bump();
                    Tok::InQ
                } else {
                    return Err(ParseError::new(
                        span_to(&s, start, line, col),
                        "`∈` must be followed by `q`",
                        vec!["`∈q`".into()],
                    ));
                }
            }
            '⊗' => {
                s.bump();
                Tok::TensorOp
            }
            '⊤' => {
                s.bump();
                Tok::Top
            }
            '⊥' => {
                s.bump();
                Tok::Bottom
            }
            '∧' => {
                s.bump();
                Tok::Wedge
            }
            '∨' => {
                s.bump();
                Tok::Vee
            }
            '⇒' => {
                s.bump();
                Tok::DArrow
            }
            '·' => {
                s.bump();
                Tok::Dot
            }
            '.' => {
                s.bump();
                Tok::Dot
            }
            '⊕' => {
                s.bump();
                Tok::Oplus
            }
            '+' => {
                s.bump();
                Tok::Plus
            }
            '*' => {
                s.bump();
                Tok::Star
            }
            '/' => {
                s.bump();
                match s.peek() {
                    Some('\\') => {
                        s.bump();
                        Tok::Wedge
                    }
                    _ => Tok::Slash,
                }
            }
            '\\' => {
                s.bump();
                if s.peek() == Some('/') {
                    s.bump();
                    Tok::Vee
                } else {
                    return Err(ParseError::new(
                        span_to(&s, start, line, col),
                        "unexpected `\\`",
                        vec!["`\\/`".into()],
                    ));
                }
            }
            '^' => {
                s.bump();
                Tok::Caret
            }
            '√' => {
                // `√n` is sugar for `sqrt(n)`: emit the ident and let the
                // scalar parser handle the following integer.
                s.bump();
                Tok::Ident("√".into())
            }
            '|' => {
                s.bump();
                let mut inner = String::new();
                loop {
                    match s.peek() {
                        Some('⟩') => {
                            s.bump();
                            break;
                        }
                        Some('>') => {
                            s.bump();
                            break;
                        }
                        Some('\n') | None => {
                            return Err(ParseError::new(
                                span_to(&s, start, line, col),
                                "unterminated ket",
                                vec!["`⟩`".into()],
                            ))
                        }
                        Some(c) => {
                            inner.push(c);
                            s.bump();
                        }
                    }
                }
                Tok::Ket(inner)
            }
            c if c.is_ascii_digit() => {
                let mut n: i64 = 0;
                while let Some(d) = s.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(v as i64))
                            .ok_or_else(|| {
                                ParseError::new(
                                    span_to(&s, start, line, col),
                                    "integer literal too large",
                                    vec![],
                                )
                            })?;
                        s.bump();
                    } else {
                        break;
                    }
                }
                Tok::Int(n)
            }
            c if is_ident_start(c) => {
                let mut name = String::new();
                while let Some(c) = s.peek() {
                    if is_ident_continue(c) {
                        name.push(c);
                        s.bump();
                    } else {
                        break;
                    }
                }
                // ASCII ket alias: ket0, ket01, ...
                if let Some(bits) = name.strip_prefix("ket") {
                    if !bits.is_empty() && bits.chars().all(|c| c == '0' || c == '1') {
                        out.push(Token {
                            tok: Tok::Ket(bits.to_string()),
                            span: span_to(&s, start, line, col),
                        });
                        continue;
                    }
                }
                match name.as_str() {
                    "top" => Tok::Top,
                    "bottom" => Tok::Bottom,
                    "inq" => Tok::InQ,
                    "xor" => Tok::Oplus,
                    _ => Tok::Ident(name),
                }
            }
            other => {
                return Err(ParseError::new(
                    Span::new(start, start + other.len_utf8(), line, col),
                    format!("unexpected character `{other}`"),
                    vec![],
                ))
            }
        };

        out.push(Token {
            tok,
            span: span_to(&s, start, line, col),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn unicode_and_ascii_aliases_agree() {
        assert_eq!(kinds("⊤ ∧ ⊥"), kinds("top /\\ bottom"));
        assert_eq!(kinds("a ≡q b"), kinds("a ==q b"));
        assert_eq!(kinds("a ≡cl b"), kinds("a ==cl b"));
        assert_eq!(kinds("q ⊗ r"), kinds("q (*) r"));
        assert_eq!(kinds("|0⟩"), kinds("ket0"));
        assert_eq!(kinds("x ∈q P"), kinds("x inq P"));
    }

    #[test]
    fn eq_variants_disambiguate() {
        assert_eq!(
            kinds("a =q b =c c = d"),
            vec![
                Tok::Ident("a".into()),
                Tok::EqQ,
                Tok::Ident("b".into()),
                Tok::EqC,
                Tok::Ident("c".into()),
                Tok::Eq,
                Tok::Ident("d".into()),
                Tok::Eof
            ]
        );
        // `=quux` is a plain `=` then an identifier.
        assert_eq!(
            kinds("a =quux"),
            vec![
                Tok::Ident("a".into()),
                Tok::Eq,
                Tok::Ident("quux".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_crlf_skipped() {
        assert_eq!(kinds("x -- a comment\r\n y"), kinds("x y"));
    }

    #[test]
    fn kets_capture_inner_text() {
        let toks = kinds("|b ⊕ f(a)⟩");
        assert_eq!(toks[0], Tok::Ket("b ⊕ f(a)".into()));
    }

    #[test]
    fn arrows() {
        assert_eq!(
            kinds("x <- f -> g"),
            vec![
                Tok::Ident("x".into()),
                Tok::BindArrow,
                Tok::Ident("f".into()),
                Tok::Arrow,
                Tok::Ident("g".into()),
                Tok::Eof
            ]
        );
    }
}
