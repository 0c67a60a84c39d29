//! Python source analysis: code units, relevant signatures, import graph and
//! semantic-preserving normalization.

mod imports;
mod index;
mod normalize;
mod units;
mod unparse;

pub use imports::{import_graph, module_name_for_path, ImportGraph};
pub use index::{
    build_signature_doc, find_usages, ModuleInfo, ProjectIndex, SignatureDoc, SignatureEntry,
    UsageKind, UsageSite,
};
pub use normalize::normalize_code;
pub use units::{extract_units, CodeUnit, UnitId, UnitKind};
pub(crate) use units::units_from_suite;
pub use unparse::unparse_suite;

use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::Parse;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub(crate) fn parse_suite(source: &str) -> Result<ast::Suite, ParseError> {
    ast::Suite::parse(source, "<unit>").map_err(|e| {
        let offset = usize::from(e.offset).min(source.len());
        let index = LineIndex::new(source);
        let line = index.line_of(offset);
        ParseError {
            line,
            column: offset - index.line_start(line) + 1,
            message: e.error.to_string(),
        }
    })
}

/// Maps byte offsets to 1-based line numbers.
#[derive(Debug, Clone)]
pub(crate) struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(source: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(source.match_indices('\n').map(|(i, _)| i + 1));
        Self { starts }
    }

    pub fn line_of(&self, offset: usize) -> usize {
        match self.starts.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    pub fn line_start(&self, line: usize) -> usize {
        self.starts[line - 1]
    }

    /// First and last line covered by a node's range.
    pub fn span<T: Ranged>(&self, node: &T) -> (usize, usize) {
        let r = node.range();
        let start = usize::from(r.start());
        let end = usize::from(r.end()).max(start + 1);
        (self.line_of(start), self.line_of(end - 1))
    }
}

/// Removes the common leading whitespace of all non-blank lines.
pub(crate) fn dedent(text: &str) -> String {
    let indent = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        out.push_str(line.get(indent..).unwrap_or_else(|| line.trim_start()));
        out.push('\n');
    }
    out
}

pub(crate) fn decorated_start<T: Ranged>(node: &T, decorators: &[ast::Expr]) -> usize {
    decorators
        .iter()
        .map(|d| usize::from(d.range().start()))
        .chain(std::iter::once(usize::from(node.range().start())))
        .min()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_reports_position() {
        let err = parse_suite("x = 1\ndef f(:\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.column, 7);
    }

    #[test]
    fn dedent_strips_common_indent() {
        assert_eq!(dedent("    a\n      b\n\n    c"), "a\n  b\n\nc\n");
    }

    #[test]
    fn line_index_maps_offsets() {
        let idx = LineIndex::new("ab\ncd\n");
        assert_eq!(idx.line_of(0), 1);
        assert_eq!(idx.line_of(2), 1);
        assert_eq!(idx.line_of(3), 2);
        assert_eq!(idx.line_start(2), 3);
    }
}
