//! Parser and builder for the textual network-description format (`.qn`).

mod ast;
mod build;
mod parse;
mod serialize;

pub use ast::{
    ArcDecl, CoupleDecl, DelayDecl, GainQuery, GainTerm, KernelDecl, KernelForm, NetworkSpec,
    NodeDecl, SplitterBlock, SplitterDecl, SystemDecl,
};
pub use build::{build_graph, BuiltNetwork};
pub use parse::{parse_dmatrix, parse_dnum, parse_network};

use std::fmt;

/// Location of a token in the source text (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

impl Span {
    pub(crate) fn new(line: usize, col: usize, len: usize) -> Self {
        Span { line, col, len }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}", self.line, self.col)
    }
}

/// Machine-readable failure categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    /// Malformed token or statement.
    Syntax,
    /// A number failed to parse or is out of range.
    InvalidNumber,
    /// Reference to an undeclared identifier.
    UnresolvedIdentifier,
    /// The same identifier declared twice in one namespace.
    DuplicateIdentifier,
    /// Declared or composed shapes are inconsistent.
    ShapeMismatch,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Syntax => "syntax",
            ErrorCode::InvalidNumber => "number",
            ErrorCode::UnresolvedIdentifier => "unresolved",
            ErrorCode::DuplicateIdentifier => "duplicate",
            ErrorCode::ShapeMismatch => "shape",
        }
    }
}

/// Parse or validation failure with its source location.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub code: ErrorCode,
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(code: ErrorCode, span: Span, message: impl Into<String>) -> Self {
        ParseError {
            code,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}] {}: {}", self.code.as_str(), self.span, self.message)
    }
}

impl std::error::Error for ParseError {}
