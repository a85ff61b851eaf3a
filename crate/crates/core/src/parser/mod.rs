//! Method-level analysis of Java-like source text.

mod extract;
mod lexer;
mod measure;
mod ops;

use thiserror::Error;

pub use extract::{extract_from_tokens, extract_methods, MethodSpan};
pub use lexer::{tokenize, LexError, LexErrorKind, Token, TokenKind};
pub use measure::{categorize, compute_metrics};
pub use ops::glue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{file}:{line}: {message}")]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn lex(file: &str, err: LexError) -> Self {
        ParseError {
            file: file.to_string(),
            line: err.line,
            message: err.kind.to_string(),
        }
    }

    pub(crate) fn unbalanced(file: &str, line: usize, what: &str) -> Self {
        ParseError {
            file: file.to_string(),
            line,
            message: format!("unbalanced `{what}`"),
        }
    }

    pub(crate) fn unclosed(file: &str, line: usize, what: &str) -> Self {
        ParseError {
            file: file.to_string(),
            line,
            message: format!("`{what}` is never closed"),
        }
    }
}

/// A method found in a file together with its computed metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzedMethod {
    pub span: MethodSpan,
    pub metrics: crate::metric::MetricVector,
}

/// Extract all methods of one file and compute their metrics.
pub fn analyze_source(source: &str, file_path: &str) -> Result<Vec<AnalyzedMethod>, ParseError> {
    Ok(extract_methods(source, file_path)?
        .into_iter()
        .map(|span| {
            let metrics = compute_metrics(&span);
            AnalyzedMethod { span, metrics }
        })
        .collect())
}
