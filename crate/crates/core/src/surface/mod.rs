//! Surface language: lexer, parser, AST, and pretty-printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::*;
pub use parser::{parse, parse_prop, parse_state_expr};
pub use pretty::{pretty_decl, pretty_program, pretty_prop, pretty_state, pretty_term, pretty_type};
