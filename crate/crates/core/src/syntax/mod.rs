//! Concrete syntax: programs, types, and theory terms with their context
//! header. Every printer in the crate produces text these parsers accept.

use std::fmt;

use thiserror::Error;

use crate::ids::ParamContext;
use crate::term::{CompContext, Term};

mod lexer;
mod program;
mod theory;

pub use program::{parse_program, parse_type, parse_value};
pub use theory::{parse_term, parse_term_file};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A theory term together with the contexts it lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermFile {
    pub gamma: CompContext,
    pub delta: ParamContext,
    pub term: Term,
}

impl fmt::Display for TermFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.gamma.is_empty() {
            writeln!(f, "vars {};", self.gamma)?;
        }
        if !self.delta.is_empty() {
            writeln!(f, "tids {};", self.delta.names().join(", "))?;
        }
        writeln!(f, "{}", self.term)
    }
}
