//! Problem-file ingestion, result documents and certificate re-validation
//! for the Deligne-Simpson decision engine.

pub mod doc;
pub mod instance;
pub mod verdict;

use std::fmt;

pub use instance::{instance_from_document, parse_instance, parse_vertex_name, vertex_name};
pub use verdict::{render_verdict, validate_certificate, VerdictDocument};

/// Input errors: syntax errors carry a position, semantic errors a message.
#[derive(Debug)]
pub enum CliError {
    Syntax(doc::DocError),
    Semantic(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Syntax(e) => write!(f, "syntax error: {e}"),
            CliError::Semantic(msg) => write!(f, "error: {msg}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
