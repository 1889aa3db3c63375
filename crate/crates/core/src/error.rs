use std::fmt;

use thiserror::Error;

/// A 1-based line/column position in source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Malformed surface syntax.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

/// Failure to turn text into a term, context or other surface form.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: unknown operator `{name}`")]
    UnknownHead { name: String, pos: Pos },
}

impl ParseError {
    pub fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError::Syntax(SyntaxError::new(pos, message))
    }

    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax(e) => e.pos,
            ParseError::UnknownHead { pos, .. } => *pos,
        }
    }
}
