//! The AGM specification language: entity blocks carrying first-order
//! temporal formulas, a well-formedness checker and a three-valued
//! finite-trace evaluator.
//!
//! ```
//! use redapt::spec::{parse_formula, pretty_formula};
//!
//! let f = parse_formula("G(p >= 50% && n <= 350)").unwrap();
//! assert_eq!(pretty_formula(&f), "G (p >= 0.5 && n <= 350)");
//! ```

mod ast;
mod check;
mod eval;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

use thiserror::Error;

pub use ast::*;
pub use check::{check_wellformed, Diagnostic, DiagnosticCode};
pub use eval::{
    evaluate, EvalError, Env, Function, Instance, State, Trace, TraceError, Value, Verdict,
};
pub use parser::{is_keyword, parse_document, parse_formula};
pub use pretty::{pretty_document, pretty_formula, pretty_term};

/// A syntax error with the position of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    /// Tokens that would have been accepted; empty for errors that are
    /// not about a missing token (duplicates, bad characters).
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub fn is_duplicate_entity(&self) -> bool {
        self.found.starts_with("duplicate entity")
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.col)?;
        if self.expected.is_empty() {
            write!(f, "{}", self.found)
        } else {
            write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
        }
    }
}

/// The highway-rail crossing specification shipped with the crate.
pub const HRCS_SPEC: &str = include_str!("../../assets/hrcs.agmspec");
