//! Multi-round editing simulation: an oracle suggests changes, suggestions
//! that exactly match the remaining ground truth are accepted, and when none
//! match the user performs the next change by hand.

mod oracle;
mod protocol;

pub use oracle::{
    EchoOracle, NullOracle, Oracle, OracleError, OracleRequest, OracleSession, Predictor, TruthOracle,
};
pub use protocol::{serve, serve_tcp, Handshake, ProtocolClient, Response, DEFAULT_TIMEOUT, PROTOCOL};

use crate::context::{assemble, ContextLimits, Tokenizer};
use crate::edit::{parse_output, ChangeKind, StagedDiff, TargetEdit, TokenStream};
use crate::instance::{ProblemInstance, Provenance};
use crate::metrics::{total_gain, EditCostReport, GainReport, KeystrokeParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MAX_ROUNDS: usize = 6;
pub const REPORT_SCHEMA: &str = "coedit-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub max_rounds: usize,
    pub limits: ContextLimits,
    pub keystrokes: KeystrokeParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_rounds: MAX_ROUNDS,
            limits: ContextLimits::default(),
            keystrokes: KeystrokeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLog {
    /// 1-based; residual changes charged after the round limit use
    /// `max_rounds + 1`.
    pub round: usize,
    /// Changed lines in the oracle's suggestion.
    pub suggested: usize,
    /// Indices (into the unit's full diff) of accepted changes.
    pub accepted: Vec<usize>,
    /// Index of the change performed by hand, if any.
    pub manual: Option<usize>,
    pub manual_cost: EditCostReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub provenance: Provenance,
    pub rounds: usize,
    pub completed: bool,
    pub logs: Vec<RoundLog>,
    pub truth_cost: EditCostReport,
    pub manual_cost: EditCostReport,
    pub gains: GainReport,
    /// Gains if the episode had stopped after the first round's suggestions.
    pub single_round_gains: GainReport,
}

/// Remaining ground truth of an episode in progress.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    pub staged: StagedDiff,
    pub instance: ProblemInstance,
}

impl EpisodeState {
    pub fn new(instance: &ProblemInstance) -> Result<Self, crate::edit::EditError> {
        Ok(Self {
            staged: instance.staged()?,
            instance: instance.clone(),
        })
    }

    /// The instance as the oracle should see it now.
    pub fn current_instance(&self) -> ProblemInstance {
        let mut inst = ProblemInstance::from_staged(&self.staged);
        inst.prior_changes = self.instance.prior_changes.clone();
        inst.signature_doc = self.instance.signature_doc.clone();
        inst.provenance = self.instance.provenance.clone();
        inst
    }

    /// Applies the first remaining change by hand and returns its cost.
    fn manual_step(&mut self, params: KeystrokeParams) -> Option<(usize, EditCostReport)> {
        let first = self.staged.pending_changes().into_iter().map(|c| c.index).min()?;
        let before = self.staged.current_lines();
        self.staged.set_applied(first, true);
        let after = self.staged.current_lines();
        let mut cost = EditCostReport::between(&before, &after, params);
        cost.lines = 1;
        Some((first, cost))
    }
}

/// Pending changes the suggestion reproduces exactly (line text compared
/// after trimming line ends). Insertions at one placeholder are matched in
/// order, so a suggestion may add extra lines around correct ones.
fn matching_changes(staged: &StagedDiff, suggestion: &TargetEdit, region_start: usize) -> Vec<usize> {
    let mut accepted = Vec::new();
    let pending = staged.pending_changes();
    let mut by_placeholder: std::collections::BTreeMap<usize, Vec<&crate::edit::LineChange>> = Default::default();
    for c in &pending {
        by_placeholder.entry(c.placeholder).or_default().push(c);
    }
    for (line, changes) in by_placeholder {
        let Some(k) = (line + 1).checked_sub(region_start).filter(|k| *k >= 1) else { continue };
        let Some(entry) = suggestion.get(k) else { continue };
        let adds: Vec<&&crate::edit::LineChange> = changes.iter().filter(|c| c.kind == ChangeKind::Add).collect();
        let want: Vec<&str> = adds.iter().map(|c| c.text.trim_end()).collect();
        let got: Vec<&str> = entry.insertions.iter().map(|t| t.trim_end()).collect();
        for (i, _) in lcs_pairs(&want, &got) {
            accepted.push(adds[i].index);
        }
        if entry.delete {
            accepted.extend(changes.iter().filter(|c| c.kind == ChangeKind::Del).map(|c| c.index));
        }
    }
    accepted.sort_unstable();
    accepted
}

/// Index pairs of one longest common subsequence.
fn lcs_pairs(a: &[&str], b: &[&str]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i][j] = if a[i] == b[j] {
                dp[i + 1][j + 1] + 1
            } else {
                dp[i + 1][j].max(dp[i][j + 1])
            };
        }
    }
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < n && j < m {
        if a[i] == b[j] {
            out.push((i, j));
            i += 1;
            j += 1;
        } else if dp[i + 1][j] >= dp[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// One suggest/accept round. Oracle failures and undecodable suggestions
/// count as no suggestion.
pub fn run_round(
    state: &mut EpisodeState,
    session: &mut dyn OracleSession,
    round: usize,
    tokenizer: &dyn Tokenizer,
    config: &SimConfig,
) -> RoundLog {
    let mut log = RoundLog {
        round,
        suggested: 0,
        accepted: Vec::new(),
        manual: None,
        manual_cost: EditCostReport::default(),
        error: None,
    };
    match suggest(state, session, round, tokenizer, config) {
        Ok((edit, region_start)) => {
            log.suggested = edit.changed_lines();
            log.accepted = matching_changes(&state.staged, &edit, region_start);
        }
        Err(e) => log.error = Some(e),
    }
    for &i in &log.accepted {
        state.staged.set_applied(i, true);
    }
    if log.accepted.is_empty() {
        if let Some((i, cost)) = state.manual_step(config.keystrokes) {
            log.manual = Some(i);
            log.manual_cost = cost;
        }
    }
    log
}

/// Queries the oracle; returns the decoded suggestion and the first line of
/// the region in the untrimmed query's coordinates.
fn suggest(
    state: &EpisodeState,
    session: &mut dyn OracleSession,
    round: usize,
    tokenizer: &dyn Tokenizer,
    config: &SimConfig,
) -> Result<(TargetEdit, usize), String> {
    let ctx = assemble(&state.current_instance(), tokenizer, &config.limits).map_err(|e| e.to_string())?;
    let statuses: Vec<_> = ctx.query_lines.iter().map(|l| l.status).collect();
    let request = OracleRequest {
        id: round as u64,
        query: ctx.query.payload.render(),
        references: ctx.references.iter().map(|b| b.payload.render()).collect(),
        region: ctx.region,
        statuses: statuses.clone(),
    };
    let output = session.predict(&request).map_err(|e| e.to_string())?;
    let edit = parse_output(&TokenStream::parse(&output), &statuses, ctx.region).map_err(|e| e.to_string())?;
    Ok((edit, ctx.region.start + ctx.trimmed.0))
}

/// Runs rounds until every change is made or the round limit is hit; any
/// residual changes are then charged as manual edits.
pub fn run_episode(
    instance: &ProblemInstance,
    oracle: &dyn Oracle,
    tokenizer: &dyn Tokenizer,
    config: &SimConfig,
) -> Result<SimulationResult, crate::edit::EditError> {
    let mut state = EpisodeState::new(instance)?;
    let initial = state.staged.current_lines();
    let target = state.staged.final_lines();
    let mut truth_cost = EditCostReport::between(&initial, &target, config.keystrokes);
    truth_cost.lines = state.staged.pending_count() as u64;
    let mut session = oracle.session(instance);
    let mut logs = Vec::new();
    let mut single_round_gains = None;
    while !state.staged.is_complete() && logs.len() < config.max_rounds {
        let log = run_round(&mut state, session.as_mut(), logs.len() + 1, tokenizer, config);
        if single_round_gains.is_none() {
            // stop here and do the rest by hand
            let accepted_only = {
                let mut s = state.staged.clone();
                if let Some(m) = log.manual {
                    s.set_applied(m, false);
                }
                s
            };
            let mut rest = EditCostReport::between(&accepted_only.current_lines(), &target, config.keystrokes);
            rest.lines = accepted_only.pending_count() as u64;
            single_round_gains = Some(total_gain(&truth_cost, &[rest]));
        }
        logs.push(log);
    }
    let rounds = logs.len();
    let completed = state.staged.is_complete();
    while let Some((i, cost)) = state.manual_step(config.keystrokes) {
        logs.push(RoundLog {
            round: config.max_rounds + 1,
            suggested: 0,
            accepted: Vec::new(),
            manual: Some(i),
            manual_cost: cost,
            error: None,
        });
    }
    let manual: Vec<EditCostReport> = logs.iter().filter(|l| l.manual.is_some()).map(|l| l.manual_cost).collect();
    debug_assert_eq!(state.staged.current_lines(), target);
    Ok(SimulationResult {
        provenance: instance.provenance.clone(),
        rounds,
        completed,
        logs,
        truth_cost,
        manual_cost: manual.iter().copied().sum(),
        gains: total_gain(&truth_cost, &manual),
        single_round_gains: single_round_gains.unwrap_or_else(|| total_gain(&truth_cost, &[])),
    })
}

/// Mean per-episode gains in percent of the ground-truth cost. Episodes
/// whose cost is zero for a metric are left out of that metric's mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GainSummary {
    pub lines: f64,
    pub levenshtein: f64,
    pub keystrokes: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub completed: usize,
    pub mean_rounds: f64,
    pub multi_round: GainSummary,
    pub single_round: GainSummary,
}

fn mean_percent<'a>(results: impl Iterator<Item = (&'a GainReport, &'a EditCostReport)>) -> GainSummary {
    let mut sums = [0.0; 3];
    let mut counts = [0usize; 3];
    for (gain, cost) in results {
        for (m, r) in gain.ratios(cost).into_iter().enumerate() {
            if let Some(r) = r {
                sums[m] += 100.0 * r;
                counts[m] += 1;
            }
        }
    }
    let avg = |m: usize| if counts[m] == 0 { 0.0 } else { sums[m] / counts[m] as f64 };
    GainSummary {
        lines: avg(0),
        levenshtein: avg(1),
        keystrokes: avg(2),
    }
}

pub fn aggregate(results: &[SimulationResult]) -> Summary {
    Summary {
        episodes: results.len(),
        completed: results.iter().filter(|r| r.completed).count(),
        mean_rounds: if results.is_empty() {
            0.0
        } else {
            results.iter().map(|r| r.rounds as f64).sum::<f64>() / results.len() as f64
        },
        multi_round: mean_percent(results.iter().map(|r| (&r.gains, &r.truth_cost))),
        single_round: mean_percent(results.iter().map(|r| (&r.single_round_gains, &r.truth_cost))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub oracle: String,
    pub max_rounds: usize,
    pub summary: Summary,
    /// Instances that could not be simulated, by position in the input.
    pub skipped: Vec<usize>,
    pub episodes: Vec<SimulationResult>,
}

/// Simulates every instance in parallel; results keep the input order.
pub fn simulate(
    instances: &[ProblemInstance],
    oracle: &dyn Oracle,
    tokenizer: &dyn Tokenizer,
    config: &SimConfig,
    oracle_name: &str,
) -> Report {
    let outcomes: Vec<_> = instances
        .par_iter()
        .map(|inst| run_episode(inst, oracle, tokenizer, config))
        .collect();
    let mut episodes = Vec::new();
    let mut skipped = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => episodes.push(r),
            Err(e) => {
                log::warn!("instance {i}: {e}");
                skipped.push(i);
            }
        }
    }
    Report {
        schema: REPORT_SCHEMA.to_string(),
        oracle: oracle_name.to_string(),
        max_rounds: config.max_rounds,
        summary: aggregate(&episodes),
        skipped,
        episodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::SimpleTokenizer;

    fn run(inst: &ProblemInstance, oracle: &dyn Oracle) -> SimulationResult {
        run_episode(inst, oracle, &SimpleTokenizer, &SimConfig::default()).unwrap()
    }

    fn lines(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("    v{i} = {i}")).collect()
    }

    #[test]
    fn truth_oracle_finishes_in_one_round() {
        let before = lines(6);
        let mut after = before.clone();
        after[1] = "    v1 = 100".into();
        after.insert(4, "    w = v1 + v2".into());
        let inst = ProblemInstance::from_texts(&before, &after);
        let r = run(&inst, &TruthOracle);
        assert_eq!(r.rounds, 1);
        assert!(r.completed);
        assert_eq!(r.gains.lines, r.truth_cost.lines as i64);
        assert_eq!(r.manual_cost, EditCostReport::default());
        assert_eq!(r.single_round_gains, r.gains);
    }

    #[test]
    fn null_oracle_does_one_change_per_round() {
        let before = lines(12);
        let after: Vec<String> = before.iter().map(|l| format!("{l}0")).collect();
        for (n, want_rounds) in [(1, 1), (2, 2), (3, 3), (10, 6)] {
            let mut a = before.clone();
            // n changed lines: replace n/2 lines, plus one insertion if odd
            for l in a.iter_mut().take(n / 2) {
                *l = format!("{l}0");
            }
            if n % 2 == 1 {
                a.push("    tail = 1".into());
            }
            let inst = ProblemInstance::from_texts(&before, &a);
            assert_eq!(inst.changed_lines(), n);
            let r = run(&inst, &NullOracle);
            assert_eq!(r.rounds, want_rounds);
            assert_eq!(r.gains.lines, 0);
            assert_eq!(r.completed, n <= 6);
            assert_eq!(r.logs.iter().filter(|l| l.manual.is_some()).count(), n);
            assert!(r.gains.keystrokes <= 0);
        }
        let _ = after;
    }

    #[test]
    fn partial_match_is_accepted_without_manual_edit() {
        struct Half;
        impl Predictor for Half {
            fn predict(&self, req: &OracleRequest) -> Result<String, OracleError> {
                // suggest only the first of the two insertions at <2>
                Ok(crate::edit::enc_output(&TargetEdit::new().with(2, &["b"], false), req.region).render())
            }
        }
        let inst = ProblemInstance::from_texts(&["a", "c"], &["a", "b", "c", "d"]);
        let r = run(&inst, &Half);
        assert_eq!(r.logs[0].accepted.len(), 1);
        assert_eq!(r.logs[0].manual, None);
        assert_eq!(r.gains.lines, 1);
    }

    #[test]
    fn malformed_output_counts_as_no_suggestion() {
        struct Broken;
        impl Predictor for Broken {
            fn predict(&self, _: &OracleRequest) -> Result<String, OracleError> {
                Ok("<9> <add> nonsense".into())
            }
        }
        let inst = ProblemInstance::from_texts(&["a"], &["b"]);
        let r = run(&inst, &Broken);
        assert!(r.logs[0].error.is_some());
        assert_eq!(r.gains.lines, 0);
        assert!(r.completed);
    }

    #[test]
    fn aggregate_means_percentages() {
        let inst = ProblemInstance::from_texts(&["a", "b"], &["A", "B"]);
        let good = run(&inst, &TruthOracle);
        let bad = run(&inst, &NullOracle);
        let s = aggregate(&[good, bad]);
        assert_eq!(s.multi_round.lines, 50.0);
        assert_eq!(s.mean_rounds, 2.5);
        assert_eq!(s.completed, 2);
    }
}
