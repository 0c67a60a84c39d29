use crate::edit::{EditError, EditRegion, LineStatus, StatusedLine, TargetEdit};
use crate::instance::{InstanceRecord, ProblemInstance};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum NotEligible {
    #[error("needs at least two separable changes, found {groups} group(s) over {lines} changed line(s)")]
    TooFewChanges { lines: usize, groups: usize },
    #[error(transparent)]
    Edit(#[from] EditError),
}

/// Splits the instance's changes: a uniformly random non-empty proper subset
/// of change groups stays as the target, the rest is inlined into the query.
/// A deletion and the addition replacing it always move together.
pub fn synthesize_multiround<R: Rng + ?Sized>(instance: &ProblemInstance, rng: &mut R) -> Result<ProblemInstance, NotEligible> {
    let mut staged = instance.staged()?;
    let groups = staged.pending_groups();
    if staged.pending_count() < 2 || groups.len() < 2 {
        return Err(NotEligible::TooFewChanges {
            lines: staged.pending_count(),
            groups: groups.len(),
        });
    }
    // Rejection sampling over the 2^n - 2 mixed assignments keeps the
    // distribution uniform.
    let keep = loop {
        let bits: Vec<bool> = (0..groups.len()).map(|_| rng.random()).collect();
        if bits.iter().any(|b| *b) && !bits.iter().all(|b| *b) {
            break bits;
        }
    };
    for (group, target) in groups.iter().zip(keep) {
        if !target {
            for &i in group {
                staged.set_applied(i, true);
            }
        }
    }
    let mut out = ProblemInstance::from_staged(&staged);
    out.prior_changes = instance.prior_changes.clone();
    out.signature_doc = instance.signature_doc.clone();
    out.provenance = instance.provenance.clone();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletionKind {
    Addition,
    Replacement,
}

/// Predict one line given the surrounding code.
#[derive(Debug, Clone)]
pub struct CompletionInstance {
    pub kind: CompletionKind,
    /// Change-aware form: earlier changes shown with their statuses, a
    /// single placeholder where the line goes.
    pub query: Vec<StatusedLine>,
    pub region: EditRegion,
    pub target: String,
    /// Plain form for change-unaware models: earlier changes applied.
    pub prefix: Vec<String>,
    pub suffix: Vec<String>,
    pub source: ProblemInstance,
}

impl CompletionInstance {
    /// The change-aware form as an editing problem whose ground truth is the
    /// single insertion.
    pub fn to_problem(&self) -> ProblemInstance {
        let mut p = self.source.clone();
        p.query = self.query.clone();
        p.region = self.region;
        let mut gt = TargetEdit::new();
        gt.insert_line(1, self.target.clone());
        p.ground_truth = gt;
        p
    }

    pub fn to_record(&self) -> CompletionRecord {
        CompletionRecord {
            kind: self.kind,
            target: self.target.clone(),
            prefix: self.prefix.clone(),
            suffix: self.suffix.clone(),
            problem: self.to_problem().to_record(),
        }
    }
}

/// Serialized completion problem: both the change-aware problem and the
/// plain prefix/suffix form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub kind: CompletionKind,
    pub target: String,
    pub prefix: Vec<String>,
    pub suffix: Vec<String>,
    pub problem: InstanceRecord,
}

/// One completion problem per instance whose last changed line is an
/// addition (possibly replacing a deleted line); instances ending with a
/// pure deletion are dropped.
pub fn make_completion_instances(instances: &[ProblemInstance]) -> Vec<CompletionInstance> {
    instances
        .iter()
        .filter_map(|inst| match completion_for(inst) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("skipping instance: {e}");
                None
            }
        })
        .collect()
}

fn completion_for(inst: &ProblemInstance) -> Result<Option<CompletionInstance>, EditError> {
    let mut staged = inst.staged()?;
    let groups = staged.pending_groups();
    let Some(last_index) = groups.iter().flatten().copied().max() else {
        return Ok(None);
    };
    let group = groups
        .iter()
        .find(|g| g.contains(&last_index))
        .expect("index comes from a group")
        .clone();
    let status = |i: usize| staged.lines()[i].line.status;
    let Some(&add) = group.iter().find(|&&i| status(i) == LineStatus::Add) else {
        return Ok(None);
    };
    let kind = if group.len() > 1 {
        CompletionKind::Replacement
    } else {
        CompletionKind::Addition
    };
    for g in &groups {
        for &i in g {
            if i != add {
                staged.set_applied(i, true);
            }
        }
    }
    let change = staged
        .pending_changes()
        .into_iter()
        .find(|c| c.index == add)
        .expect("target is pending");
    let (query, _) = staged.query();
    let current = staged.current_lines();
    // Lines of the current text that precede the target.
    let before_target = (0..add)
        .filter(|&i| {
            let l = &staged.lines()[i];
            match l.line.status {
                LineStatus::Empty => true,
                LineStatus::Add => l.applied,
                LineStatus::Del => !l.applied,
            }
        })
        .count();
    Ok(Some(CompletionInstance {
        kind,
        query,
        region: EditRegion::new(change.placeholder, 0),
        target: change.text,
        prefix: current[..before_target].to_vec(),
        suffix: current[before_target..].to_vec(),
        source: inst.clone(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn six_changes() -> ProblemInstance {
        ProblemInstance::from_texts(
            &["def f(a):", "    x = a", "    y = 2", "    z = 3", "    return x"],
            &["def f(a, b):", "    x = a", "    y = b", "    z = 3", "    w = 4", "    return x + w"],
        )
    }

    #[test]
    fn split_conserves_the_commit() {
        let inst = six_changes();
        assert_eq!(inst.changed_lines(), 7);
        let after = inst.expected_after().unwrap();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let syn = synthesize_multiround(&inst, &mut rng).unwrap();
            let staged = syn.staged().unwrap();
            let inlined = staged.applied_change_count();
            assert!(inlined > 0 && syn.changed_lines() > 0);
            assert_eq!(inlined + syn.changed_lines(), inst.changed_lines());
            assert_eq!(syn.expected_after().unwrap(), after);
            assert_eq!(staged.full_diff(), inst.staged().unwrap().full_diff());
        }
    }

    #[test]
    fn same_seed_same_split() {
        let inst = six_changes();
        let a = synthesize_multiround(&inst, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = synthesize_multiround(&inst, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_change_is_not_eligible() {
        let inst = ProblemInstance::from_texts(&["a", "b"], &["a", "b", "c"]);
        let err = synthesize_multiround(&inst, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(NotEligible::TooFewChanges { lines: 1, .. })));
        // one replacement is two lines but cannot be split
        let inst = ProblemInstance::from_texts(&["a", "b"], &["a", "c"]);
        assert!(synthesize_multiround(&inst, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn subsets_are_uniform() {
        // three groups: 6 mixed subsets, each should appear about 1/6 of the time
        let inst = ProblemInstance::from_texts(&["a", "b", "c"], &["A", "b", "B", "c", "C"]);
        let mut counts = std::collections::HashMap::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..6000 {
            let syn = synthesize_multiround(&inst, &mut rng).unwrap();
            *counts.entry(format!("{:?}", syn.ground_truth)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        assert!(counts.values().all(|&c| (850..1150).contains(&c)), "{counts:?}");
    }

    #[test]
    fn completion_of_added_line() {
        let inst = ProblemInstance::from_texts(&["a", "b"], &["a", "x", "b", "c"]);
        let c = &make_completion_instances(&[inst])[0];
        assert_eq!(c.kind, CompletionKind::Addition);
        assert_eq!(c.target, "c");
        assert_eq!(c.prefix, ["a", "x", "b"]);
        assert!(c.suffix.is_empty());
        assert_eq!(
            c.query.iter().map(|l| l.status).collect::<Vec<_>>(),
            [LineStatus::Empty, LineStatus::Add, LineStatus::Empty, LineStatus::Empty]
        );
        assert!(c.query.iter().all(|l| l.text != "c"));
        let p = c.to_problem();
        assert_eq!(p.expected_after().unwrap(), ["a", "x", "b", "c"]);
    }

    #[test]
    fn completion_of_modified_line() {
        let inst = ProblemInstance::from_texts(&["a", "old", "b"], &["a", "new", "b"]);
        let c = &make_completion_instances(&[inst])[0];
        assert_eq!(c.kind, CompletionKind::Replacement);
        assert_eq!(c.target, "new");
        assert_eq!((c.prefix.clone(), c.suffix.clone()), (vec!["a".to_string()], vec!["b".to_string()]));
        assert_eq!(c.query[1], StatusedLine::del("old"));
        assert_eq!(c.region, EditRegion::new(3, 0));
        assert_eq!(c.to_problem().staged().unwrap().final_lines(), ["a", "new", "b"]);
    }

    #[test]
    fn trailing_deletion_is_dropped() {
        let inst = ProblemInstance::from_texts(&["a", "b", "c"], &["a", "B", "b"]);
        assert!(make_completion_instances(&[inst]).is_empty());
    }
}
