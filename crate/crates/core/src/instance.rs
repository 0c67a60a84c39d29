//! Problem instances and their line-delimited JSON form.

use crate::edit::{
    apply_edit, enc_input, enc_output, parse_input, parse_output, EditError, EditRegion, LineDiff,
    StagedDiff, StatusedLine, TargetEdit, TokenStream,
};
use crate::python::{SignatureDoc, UnitId};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub const SCHEMA: &str = "coedit/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitChangeKind {
    Added,
    Deleted,
    Modified,
}

/// A contextual unit change Δ_j as seen by the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextChange {
    pub unit: UnitId,
    pub kind: UnitChangeKind,
    pub diff: LineDiff,
}

impl ContextChange {
    /// Statused lines without placeholders.
    pub fn encode(&self) -> TokenStream {
        crate::edit::encode_lines(&self.diff.lines, None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub project: String,
    pub commit: String,
    pub path: String,
    pub unit: Option<UnitId>,
}

/// One auto-editing task.
///
/// `query` always ends with an empty end-of-unit line so that insertions
/// after the unit's last line have a placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub query: Vec<StatusedLine>,
    pub region: EditRegion,
    pub prior_changes: Vec<ContextChange>,
    pub signature_doc: SignatureDoc,
    pub ground_truth: TargetEdit,
    pub provenance: Provenance,
}

impl ProblemInstance {
    /// Instance whose query shows `before` and whose ground truth turns it
    /// into `after`, with the whole unit as edit region.
    pub fn from_texts<S: AsRef<str>>(before: &[S], after: &[S]) -> Self {
        let staged = StagedDiff::from_diff(&crate::edit::line_diff(before, after));
        Self::from_staged(&staged)
    }

    pub fn from_staged(staged: &StagedDiff) -> Self {
        let (query, region) = staged.query();
        Self {
            query,
            region,
            prior_changes: Vec::new(),
            signature_doc: SignatureDoc::default(),
            ground_truth: staged.pending_edit(),
            provenance: Provenance::default(),
        }
    }

    pub fn staged(&self) -> Result<StagedDiff, EditError> {
        StagedDiff::from_query(&self.query, self.region, &self.ground_truth)
    }

    /// Unit text after applying the ground truth (end-of-unit line removed).
    pub fn expected_after(&self) -> Result<Vec<String>, EditError> {
        let mut after = apply_edit(&self.query, self.region, &self.ground_truth)?.after();
        if after.last().is_some_and(|l| l.is_empty()) && self.has_end_line() {
            after.pop();
        }
        Ok(after)
    }

    fn has_end_line(&self) -> bool {
        self.query
            .last()
            .is_some_and(|l| l.text.is_empty() && l.status == crate::edit::LineStatus::Empty)
    }

    pub fn changed_lines(&self) -> usize {
        self.ground_truth.changed_lines()
    }

    pub fn to_record(&self) -> InstanceRecord {
        InstanceRecord {
            schema: SCHEMA.to_string(),
            provenance: self.provenance.clone(),
            query: enc_input(&self.query, self.region)
                .expect("instance region is valid")
                .render(),
            region: self.region,
            ground_truth: enc_output(&self.ground_truth, self.region).render(),
            prior_changes: self
                .prior_changes
                .iter()
                .map(|c| ChangeRecord {
                    unit: c.unit.clone(),
                    kind: c.kind,
                    encoding: c.encode().render(),
                })
                .collect(),
            signature_doc: self.signature_doc.clone(),
        }
    }

    pub fn from_record(record: &InstanceRecord) -> Result<Self, InstanceError> {
        if record.schema != SCHEMA {
            return Err(InstanceError::Schema(record.schema.clone()));
        }
        let (query, region) = parse_input(&TokenStream::parse(&record.query))?;
        let region = region.unwrap_or(record.region);
        if region != record.region {
            return Err(InstanceError::Inconsistent(format!(
                "query placeholders give region {region:?}, record says {:?}",
                record.region
            )));
        }
        let statuses: Vec<_> = query.iter().map(|l| l.status).collect();
        let ground_truth = parse_output(&TokenStream::parse(&record.ground_truth), &statuses, region)?;
        let prior_changes = record
            .prior_changes
            .iter()
            .map(|c| {
                let (lines, _) = parse_input(&TokenStream::parse(&c.encoding))?;
                Ok(ContextChange {
                    unit: c.unit.clone(),
                    kind: c.kind,
                    diff: LineDiff::new(lines),
                })
            })
            .collect::<Result<_, InstanceError>>()?;
        Ok(Self {
            query,
            region,
            prior_changes,
            signature_doc: record.signature_doc.clone(),
            ground_truth,
            provenance: record.provenance.clone(),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error("inconsistent record: {0}")]
    Inconsistent(String),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        source: Box<InstanceError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub unit: UnitId,
    pub kind: UnitChangeKind,
    pub encoding: String,
}

/// Serialized instance; token streams use their canonical text rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub schema: String,
    pub provenance: Provenance,
    pub query: String,
    pub region: EditRegion,
    pub ground_truth: String,
    pub prior_changes: Vec<ChangeRecord>,
    pub signature_doc: SignatureDoc,
}

pub fn write_instances<W: Write>(mut out: W, instances: &[ProblemInstance]) -> std::io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut out, &inst.to_record())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_instances<R: BufRead>(input: R) -> Result<Vec<ProblemInstance>, InstanceError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: InstanceRecord =
            serde_json::from_str(&line).map_err(|source| InstanceError::Json { line: i + 1, source })?;
        out.push(ProblemInstance::from_record(&record).map_err(|e| InstanceError::Record {
            line: i + 1,
            source: Box::new(e),
        })?);
    }
    Ok(out)
}
