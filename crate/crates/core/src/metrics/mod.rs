//! Editing-cost and accuracy metrics.

mod keystroke;

pub use keystroke::{keystroke_cost, keystroke_cost_chars, KeystrokeParams};

use crate::edit::LineDiff;
use crate::python::normalize_code;
use serde::{Deserialize, Serialize};

/// Number of added plus deleted lines.
pub fn lines_cost(diff: &LineDiff) -> u64 {
    diff.changed_lines() as u64
}

/// Character-level Levenshtein distance (insert, delete, substitute).
pub fn levenshtein(a: &str, b: &str) -> u64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars(a: &[char], b: &[char]) -> u64 {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<u64> = (0..=b.len() as u64).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i as u64 + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = diag + u64::from(ca != cb);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

/// Exact match after removing comments and docstrings and sorting keyword
/// arguments. Falls back to raw comparison when either side does not parse.
pub fn exact_match(pred: &str, truth: &str) -> bool {
    match (normalize_code(pred), normalize_code(truth)) {
        (Ok(p), Ok(t)) => p == t,
        _ => pred.trim_end() == truth.trim_end(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EditCostReport {
    pub lines: u64,
    pub levenshtein: u64,
    pub keystrokes: u64,
}

impl EditCostReport {
    /// Cost of turning the `before` lines into the `after` lines, both joined
    /// with newlines; `lines` is taken from their line diff.
    pub fn between(before: &[String], after: &[String], params: KeystrokeParams) -> Self {
        let diff = crate::edit::line_diff(before, after);
        let (b, a) = (before.join("\n"), after.join("\n"));
        Self {
            lines: lines_cost(&diff),
            levenshtein: levenshtein(&b, &a),
            keystrokes: u64::from(keystroke_cost(&b, &a, params)),
        }
    }
}

impl std::ops::Add for EditCostReport {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            lines: self.lines + rhs.lines,
            levenshtein: self.levenshtein + rhs.levenshtein,
            keystrokes: self.keystrokes + rhs.keystrokes,
        }
    }
}

impl std::iter::Sum for EditCostReport {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// Ground-truth cost minus accumulated manual cost, per metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GainReport {
    pub lines: i64,
    pub levenshtein: i64,
    pub keystrokes: i64,
}

impl GainReport {
    /// Gains as fractions of the ground-truth cost; metrics with zero
    /// ground-truth cost yield `None`.
    pub fn ratios(&self, truth: &EditCostReport) -> [Option<f64>; 3] {
        let ratio = |gain: i64, cost: u64| (cost > 0).then(|| gain as f64 / cost as f64);
        [
            ratio(self.lines, truth.lines),
            ratio(self.levenshtein, truth.levenshtein),
            ratio(self.keystrokes, truth.keystrokes),
        ]
    }
}

pub fn total_gain(ground_truth_cost: &EditCostReport, manual_costs: &[EditCostReport]) -> GainReport {
    let manual: EditCostReport = manual_costs.iter().copied().sum();
    let diff = |t: u64, m: u64| t as i64 - m as i64;
    GainReport {
        lines: diff(ground_truth_cost.lines, manual.lines),
        levenshtein: diff(ground_truth_cost.levenshtein, manual.levenshtein),
        keystrokes: diff(ground_truth_cost.keystrokes, manual.keystrokes),
    }
}
