//! Error types shared across the parsing, validation, and realization layers.

use std::fmt;

use thiserror::Error;

/// A 1-based line/column position inside an input stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Errors raised while parsing or validating messages. Both input formats and
/// the validator share this vocabulary.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unbalanced parentheses at {position}: {detail}")]
    UnbalancedParens { position: Position, detail: String },

    #[error("syntax error at {position}: {detail}")]
    Syntax { position: Position, detail: String },

    #[error("unknown attribute `{name}`{}", at(.position))]
    UnknownAttribute { name: String, position: Option<Position> },

    #[error("attribute `{name}` declared more than once{}", at(.position))]
    DuplicateAttribute { name: String, position: Option<Position> },

    #[error("type mismatch for `{attribute}`: expected {expected}, got {got}{}", at(.position))]
    TypeMismatch {
        attribute: String,
        expected: String,
        got: String,
        position: Option<Position>,
    },

    #[error("missing required attribute `{name}`")]
    MissingAttribute { name: String },

    #[error("malformed line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
}

fn at(position: &Option<Position>) -> String {
    match position {
        Some(p) => format!(" at {}", p),
        None => String::new(),
    }
}

impl ParseError {
    /// Attaches a line number to errors produced while handling one JSONL line.
    pub(crate) fn on_line(self, line: usize) -> ParseError {
        let pos = Some(Position { line, column: 1 });
        match self {
            ParseError::UnknownAttribute { name, .. } => {
                ParseError::UnknownAttribute { name, position: pos }
            }
            ParseError::DuplicateAttribute { name, .. } => {
                ParseError::DuplicateAttribute { name, position: pos }
            }
            ParseError::TypeMismatch { attribute, expected, got, .. } => {
                ParseError::TypeMismatch { attribute, expected, got, position: pos }
            }
            ParseError::Syntax { position, detail } => ParseError::Syntax {
                position: Position { line, column: position.column },
                detail,
            },
            other => other,
        }
    }
}

/// Errors raised while loading or validating a run configuration
/// (schema + lexicon + options).
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("lexicon error: {0}")]
    Lexicon(String),

    #[error("options error: {0}")]
    Options(String),
}

/// Errors surfaced while rendering a document plan to text.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RealizeError {
    #[error("no verb configured for action `{action}`")]
    MissingVerb { action: String },

    #[error("no phrase template configured for attribute `{attribute}`")]
    MissingTemplate { attribute: String },
}

/// Errors raised by the plan-expansion oracle.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("deleted attribute `{attribute}` has no retaining clause in its sentence")]
    UnrecoverableDeletion { attribute: String },
}
