//! The `.qfc` flow-chart language: syntax tree, parser, pretty-printer and
//! linear type checker.

mod ast;
mod check;
mod parser;
mod pretty;

pub use ast::{Block, Ident, Proc, Program, Span, Stmt, StmtKind};
pub use check::{typecheck, TypeError, TypeErrors, TypedProgram};
pub use parser::{parse, parse_bytes, ParseError, MAX_NESTING};
pub use pretty::pretty;

/// Outcome of parsing and checking a source: exactly one of the three.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Typed(TypedProgram),
    Parse(ParseError),
    Type(TypeErrors),
}

/// Parses and typechecks raw source bytes.
pub fn check_source(src: &[u8]) -> CheckOutcome {
    match parse_bytes(src) {
        Err(e) => CheckOutcome::Parse(e),
        Ok(p) => match typecheck(&p) {
            Ok(t) => CheckOutcome::Typed(t),
            Err(e) => CheckOutcome::Type(e),
        },
    }
}
