//! Line-oriented text format for knowledge bases, its canonical printer and
//! the JSON form of verdicts.

mod json;
mod parser;
mod printer;

pub use json::{emit_result, SCHEMA_VERSION};
pub use parser::parse_kb;
pub use printer::{print_graph, print_kb, print_support};

use thiserror::Error;

use crate::graph::{GraphError, SimpleGraph};
use crate::kb::KnowledgeBase;
use crate::rules::RuleError;
use crate::support::SupportError;

#[derive(Debug, Clone)]
pub struct KbDocument {
    pub kb: KnowledgeBase,
    pub query: Option<SimpleGraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing [support] section")]
    MissingSupport,
    #[error("[support]: {0}")]
    Support(#[from] SupportError),
    #[error("[{section}]: {error}")]
    Graph { section: String, error: GraphError },
    #[error("[{section}]: {error}")]
    Rule { section: String, error: RuleError },
}
