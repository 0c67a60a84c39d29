//! Line-level edit representation.
//!
//! A unit of code is a list of [`StatusedLine`]s. Each line carries the change
//! already made to it (nothing, added, deleted). An [`EditRegion`] marks the
//! lines that receive placeholder tokens, and a [`TargetEdit`] describes the
//! change to predict at each placeholder: lines to insert before it and
//! whether to delete it.

mod diff;
mod encode;
mod staged;
mod tokens;

pub use diff::{line_diff, split_lines};
pub use encode::{apply_edit, enc_input, enc_output, enc_output_checked, parse_input, parse_output};
pub(crate) use encode::encode_lines;
pub use staged::{ChangeKind, LineChange, StagedDiff, StagedLine};
pub use tokens::{Token, TokenStream};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EditError {
    #[error("edit region (a={start}, n={extent}) out of bounds for a unit of {lines} lines")]
    RegionOutOfBounds {
        start: usize,
        extent: usize,
        lines: usize,
    },
    #[error("placeholder <{placeholder}> deletes a line that was just added")]
    InvalidDelete { placeholder: usize },
    #[error("malformed output: {0}")]
    MalformedOutput(String),
    #[error("malformed input stream: {0}")]
    MalformedInput(String),
}

/// Change status of a single line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineStatus {
    #[default]
    Empty,
    Add,
    Del,
}

impl LineStatus {
    pub fn token(self) -> Option<Token> {
        match self {
            LineStatus::Empty => None,
            LineStatus::Add => Some(Token::Add),
            LineStatus::Del => Some(Token::Del),
        }
    }

    pub fn is_change(self) -> bool {
        self != LineStatus::Empty
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatusedLine {
    pub status: LineStatus,
    pub text: String,
}

impl StatusedLine {
    pub fn new(status: LineStatus, text: impl Into<String>) -> Self {
        let text = text.into();
        debug_assert!(!text.contains('\n'), "line text must not contain newlines");
        Self { status, text }
    }

    pub fn empty(text: impl Into<String>) -> Self {
        Self::new(LineStatus::Empty, text)
    }

    pub fn add(text: impl Into<String>) -> Self {
        Self::new(LineStatus::Add, text)
    }

    pub fn del(text: impl Into<String>) -> Self {
        Self::new(LineStatus::Del, text)
    }
}

impl fmt::Display for StatusedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.status {
            LineStatus::Empty => ' ',
            LineStatus::Add => '+',
            LineStatus::Del => '-',
        };
        write!(f, "{prefix} {}", self.text)
    }
}

/// An edit expressed as kept, added, and deleted lines.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineDiff {
    pub lines: Vec<StatusedLine>,
}

impl LineDiff {
    pub fn new(lines: Vec<StatusedLine>) -> Self {
        Self { lines }
    }

    /// Lines as they were before the edit.
    pub fn before(&self) -> Vec<String> {
        self.project(LineStatus::Add)
    }

    /// Lines as they are after the edit.
    pub fn after(&self) -> Vec<String> {
        self.project(LineStatus::Del)
    }

    fn project(&self, skip: LineStatus) -> Vec<String> {
        self.lines
            .iter()
            .filter(|l| l.status != skip)
            .map(|l| l.text.clone())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.lines.iter().all(|l| l.status == LineStatus::Empty)
    }

    pub fn changed_lines(&self) -> usize {
        self.lines.iter().filter(|l| l.status.is_change()).count()
    }

    pub fn statuses(&self) -> Vec<LineStatus> {
        self.lines.iter().map(|l| l.status).collect()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

impl fmt::Display for LineDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl From<Vec<StatusedLine>> for LineDiff {
    fn from(lines: Vec<StatusedLine>) -> Self {
        Self { lines }
    }
}

/// The placeholder-marked span: lines `start ..= start + extent` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditRegion {
    #[serde(rename = "a")]
    pub start: usize,
    #[serde(rename = "n")]
    pub extent: usize,
}

impl EditRegion {
    pub fn new(start: usize, extent: usize) -> Self {
        Self { start, extent }
    }

    /// Region covering every line of a unit with `lines` lines.
    pub fn whole(lines: usize) -> Self {
        Self {
            start: 1,
            extent: lines.saturating_sub(1),
        }
    }

    pub fn placeholders(&self) -> usize {
        self.extent + 1
    }

    /// 1-based index of the last line carrying a placeholder.
    pub fn end(&self) -> usize {
        self.start + self.extent
    }

    pub fn validate(&self, lines: usize) -> Result<(), EditError> {
        if self.start >= 1 && self.end() <= lines {
            Ok(())
        } else {
            Err(EditError::RegionOutOfBounds {
                start: self.start,
                extent: self.extent,
                lines,
            })
        }
    }

    /// Placeholder index attached to the 1-based `line`, if inside the region.
    pub fn placeholder_of(&self, line: usize) -> Option<usize> {
        (self.start..=self.end())
            .contains(&line)
            .then(|| line - self.start + 1)
    }

    /// 1-based line index carrying placeholder `k`.
    pub fn line_of(&self, placeholder: usize) -> usize {
        self.start + placeholder - 1
    }
}

/// Change requested at one placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlaceholderEdit {
    /// Lines inserted before the placeholder's line, in order.
    pub insertions: Vec<String>,
    pub delete: bool,
}

impl PlaceholderEdit {
    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty() && !self.delete
    }
}

/// Decoded model output: per-placeholder insertions and deletion flags.
///
/// Only non-empty entries are stored, so two edits that differ only in
/// explicitly empty placeholders compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TargetEdit {
    entries: BTreeMap<usize, PlaceholderEdit>,
}

impl TargetEdit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, placeholder: usize, entry: PlaceholderEdit) {
        if entry.is_empty() {
            self.entries.remove(&placeholder);
        } else {
            self.entries.insert(placeholder, entry);
        }
    }

    pub fn with(mut self, placeholder: usize, insertions: &[&str], delete: bool) -> Self {
        self.set(
            placeholder,
            PlaceholderEdit {
                insertions: insertions.iter().map(|s| s.to_string()).collect(),
                delete,
            },
        );
        self
    }

    pub fn insert_line(&mut self, placeholder: usize, text: impl Into<String>) {
        self.entries
            .entry(placeholder)
            .or_default()
            .insertions
            .push(text.into());
    }

    pub fn mark_delete(&mut self, placeholder: usize) {
        self.entries.entry(placeholder).or_default().delete = true;
    }

    pub fn get(&self, placeholder: usize) -> Option<&PlaceholderEdit> {
        self.entries.get(&placeholder)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &PlaceholderEdit)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of changed lines (insertions plus deletions).
    pub fn changed_lines(&self) -> usize {
        self.entries
            .values()
            .map(|e| e.insertions.len() + usize::from(e.delete))
            .sum()
    }

    /// Checks placeholder bounds and the no-delete-after-add restriction
    /// against the statuses of the whole unit.
    pub fn validate(&self, statuses: &[LineStatus], region: EditRegion) -> Result<(), EditError> {
        region.validate(statuses.len())?;
        for (&k, entry) in &self.entries {
            if k == 0 || k > region.placeholders() {
                return Err(EditError::MalformedOutput(format!(
                    "placeholder <{k}> outside 1..={}",
                    region.placeholders()
                )));
            }
            if entry.delete && statuses[region.line_of(k) - 1] == LineStatus::Add {
                return Err(EditError::InvalidDelete { placeholder: k });
            }
        }
        Ok(())
    }
}
