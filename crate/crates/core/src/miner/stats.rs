use super::MinedRepo;
use crate::context::{Tokenizer, QUERY_TOKENS, REFERENCE_BLOCK_TOKENS, REFERENCE_BUDGET};
use crate::edit::{enc_input, enc_output};
use crate::instance::{ProblemInstance, UnitChangeKind};
use crate::python::UnitKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Reporting cap for signature tokens: the reference budget minus one
/// reference block.
pub const SIGNATURE_CAP: usize = REFERENCE_BUDGET - REFERENCE_BLOCK_TOKENS;

/// Distribution summary of one token count.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TokenStats {
    pub cap: usize,
    pub median: f64,
    pub mean: f64,
    pub max: usize,
    /// Fraction of instances at or above `cap`.
    pub at_cap: f64,
}

impl TokenStats {
    pub fn from_counts(counts: &[usize], cap: usize) -> Self {
        if counts.is_empty() {
            return Self {
                cap,
                ..Default::default()
            };
        }
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
        };
        Self {
            cap,
            median,
            mean: sorted.iter().sum::<usize>() as f64 / n as f64,
            max: sorted[n - 1],
            at_cap: sorted.iter().filter(|&&c| c >= cap).count() as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub projects: usize,
    /// Commits contributing at least one instance.
    pub commits: usize,
    pub modified_files: usize,
    pub modified_functions: usize,
    pub modified_units: usize,
    /// Changed lines (additions plus deletions) over all instances.
    pub modified_lines: usize,
    /// Only known when computed from mining results.
    pub added_units: Option<usize>,
    pub deleted_units: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetStats {
    pub counts: CorpusCounts,
    pub query_tokens: TokenStats,
    pub output_tokens: TokenStats,
    pub prev_change_tokens: TokenStats,
    pub signature_tokens: TokenStats,
}

impl DatasetStats {
    /// Adds the unit addition/deletion totals of the mined repositories.
    pub fn with_mining(mut self, repos: &[MinedRepo]) -> Self {
        self.counts.added_units = Some(repos.iter().map(|r| r.count(UnitChangeKind::Added)).sum());
        self.counts.deleted_units = Some(repos.iter().map(|r| r.count(UnitChangeKind::Deleted)).sum());
        self
    }
}

pub fn dataset_stats(instances: &[ProblemInstance], tokenizer: &dyn Tokenizer) -> DatasetStats {
    let mut projects = BTreeSet::new();
    let mut commits = BTreeSet::new();
    let mut files = BTreeSet::new();
    let mut counts = CorpusCounts::default();
    let (mut query, mut output, mut prev, mut sig) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for inst in instances {
        let p = &inst.provenance;
        projects.insert(&p.project);
        commits.insert((&p.project, &p.commit));
        files.insert((&p.project, &p.commit, &p.path));
        counts.modified_units += 1;
        if inst.provenance.unit.as_ref().is_none_or(|u| u.kind == UnitKind::Function) {
            counts.modified_functions += 1;
        }
        counts.modified_lines += inst.changed_lines();
        let input = enc_input(&inst.query, inst.region).expect("instance region is valid");
        query.push(tokenizer.count_stream(&input));
        output.push(tokenizer.count_stream(&enc_output(&inst.ground_truth, inst.region)));
        prev.push(inst.prior_changes.iter().map(|c| tokenizer.count_stream(&c.encode())).sum());
        let doc = inst.signature_doc.lines();
        sig.push(doc.iter().map(|l| tokenizer.count(l)).sum::<usize>() + doc.len().saturating_sub(1));
    }
    counts.projects = projects.len();
    counts.commits = commits.len();
    counts.modified_files = files.len();
    DatasetStats {
        counts,
        query_tokens: TokenStats::from_counts(&query, QUERY_TOKENS),
        output_tokens: TokenStats::from_counts(&output, REFERENCE_BLOCK_TOKENS),
        prev_change_tokens: TokenStats::from_counts(&prev, REFERENCE_BUDGET),
        signature_tokens: TokenStats::from_counts(&sig, SIGNATURE_CAP),
    }
}
