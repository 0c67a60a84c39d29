//! Mining commit histories into editing problem instances.

mod git;
mod stats;
mod synth;

pub use git::{discover_repositories, mine_repository, MineError, MineOptions, MinedCommit, MinedRepo};
pub use stats::{dataset_stats, CorpusCounts, DatasetStats, TokenStats, SIGNATURE_CAP};
pub use synth::{
    make_completion_instances, synthesize_multiround, CompletionInstance, CompletionKind, CompletionRecord,
    NotEligible,
};

use crate::edit::{line_diff, LineDiff, StagedDiff, StatusedLine};
use crate::instance::{ContextChange, ProblemInstance, Provenance, UnitChangeKind};
use crate::python::{
    build_signature_doc, extract_units, import_graph, module_name_for_path, CodeUnit, ImportGraph,
    ProjectIndex, UnitId,
};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

/// Python sources of one codebase version, keyed by repository path.
pub type Snapshot = BTreeMap<String, String>;

/// A unit added, deleted or modified between two versions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitChange {
    pub kind: UnitChangeKind,
    pub path: String,
    pub before: Option<CodeUnit>,
    pub after: Option<CodeUnit>,
    pub diff: LineDiff,
}

impl UnitChange {
    pub fn id(&self) -> &UnitId {
        &self.after.as_ref().or(self.before.as_ref()).expect("change has a unit").id
    }

    /// First line of the unit in the version where it exists (the new
    /// version unless deleted).
    pub fn start_line(&self) -> usize {
        self.after.as_ref().or(self.before.as_ref()).map(|u| u.span.0).unwrap_or(0)
    }

    pub fn to_context(&self) -> ContextChange {
        ContextChange {
            unit: self.id().clone(),
            kind: self.kind,
            diff: self.diff.clone(),
        }
    }
}

/// Matches units of one file by qualified name.
pub(crate) fn diff_units(path: &str, before: &[CodeUnit], after: &[CodeUnit]) -> Vec<UnitChange> {
    let old: HashMap<&str, &CodeUnit> = before.iter().map(|u| (u.id.name.as_str(), u)).collect();
    let new: HashMap<&str, &CodeUnit> = after.iter().map(|u| (u.id.name.as_str(), u)).collect();
    let mut changes = Vec::new();
    for u in before {
        if !new.contains_key(u.id.name.as_str()) {
            let lines: Vec<StatusedLine> = u.lines.iter().map(StatusedLine::del).collect();
            changes.push(UnitChange {
                kind: UnitChangeKind::Deleted,
                path: path.to_string(),
                before: Some(u.clone()),
                after: None,
                diff: LineDiff::new(lines),
            });
        }
    }
    for u in after {
        match old.get(u.id.name.as_str()) {
            None => changes.push(UnitChange {
                kind: UnitChangeKind::Added,
                path: path.to_string(),
                before: None,
                after: Some(u.clone()),
                diff: LineDiff::new(u.lines.iter().map(StatusedLine::add).collect()),
            }),
            Some(b) if b.lines != u.lines => changes.push(UnitChange {
                kind: UnitChangeKind::Modified,
                path: path.to_string(),
                before: Some((*b).clone()),
                after: Some(u.clone()),
                diff: line_diff(&b.lines, &u.lines),
            }),
            Some(_) => {}
        }
    }
    changes
}

/// Unit-level changes between two snapshots. Files that fail to parse in
/// either version are skipped with a warning.
pub fn diff_commit(before: &Snapshot, after: &Snapshot) -> Vec<UnitChange> {
    let mut paths: Vec<&String> = before.keys().chain(after.keys()).collect();
    paths.sort();
    paths.dedup();
    let mut changes = Vec::new();
    for path in paths {
        let (old, new) = (before.get(path), after.get(path));
        if old == new {
            continue;
        }
        let module = module_name_for_path(path);
        let parse = |src: Option<&String>| -> Option<Vec<CodeUnit>> {
            match src {
                None => Some(Vec::new()),
                Some(s) => match extract_units(s, &module) {
                    Ok(units) => Some(units),
                    Err(e) => {
                        log::warn!("skipping {path}: {e}");
                        None
                    }
                },
            }
        };
        if let (Some(b), Some(a)) = (parse(old), parse(new)) {
            changes.extend(diff_units(path, &b, &a));
        }
    }
    changes
}

/// Module ranks: imported modules before importers, import cycles
/// collapsed and ordered by their lexicographically smallest module, ties
/// between independent modules broken lexicographically.
pub fn module_order(graph: &ImportGraph, extra: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut names: Vec<String> = graph.nodes.iter().cloned().chain(extra).collect();
    names.sort();
    names.dedup();
    let idx: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut g: DiGraph<usize, ()> = DiGraph::new();
    let nodes: Vec<_> = (0..names.len()).map(|i| g.add_node(i)).collect();
    for (a, b) in &graph.edges {
        if let (Some(&x), Some(&y)) = (idx.get(a.as_str()), idx.get(b.as_str())) {
            g.add_edge(nodes[x], nodes[y], ());
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp_of = vec![0; names.len()];
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(sccs.len());
    for (c, scc) in sccs.iter().enumerate() {
        let mut m: Vec<usize> = scc.iter().map(|n| g[*n]).collect();
        m.sort();
        for &i in &m {
            comp_of[i] = c;
        }
        members.push(m);
    }
    // A component is ready once every component it imports is placed.
    let mut pending_imports = vec![0usize; members.len()];
    let mut importers: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
    let mut seen = std::collections::HashSet::new();
    for e in g.edge_indices() {
        let (a, b) = g.edge_endpoints(e).expect("edge exists");
        let (ca, cb) = (comp_of[g[a]], comp_of[g[b]]);
        if ca != cb && seen.insert((ca, cb)) {
            pending_imports[ca] += 1;
            importers[cb].push(ca);
        }
    }
    let key = |c: usize| Reverse((names[members[c][0]].clone(), c));
    let mut ready: BinaryHeap<_> = (0..members.len())
        .filter(|&c| pending_imports[c] == 0)
        .map(key)
        .collect();
    let mut order = Vec::with_capacity(names.len());
    while let Some(Reverse((_, c))) = ready.pop() {
        order.extend(members[c].iter().map(|&i| names[i].clone()));
        for &imp in &importers[c] {
            pending_imports[imp] -= 1;
            if pending_imports[imp] == 0 {
                ready.push(key(imp));
            }
        }
    }
    order
}

/// Sorts changes by module order, then by start line within a module.
pub fn order_changes(mut changes: Vec<UnitChange>, graph: &ImportGraph) -> Vec<UnitChange> {
    let order = module_order(graph, changes.iter().map(|c| c.id().module.clone()));
    let rank: HashMap<&str, usize> = order.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
    let kind_rank = |k: UnitChangeKind| match k {
        UnitChangeKind::Deleted => 0,
        UnitChangeKind::Modified => 1,
        UnitChangeKind::Added => 2,
    };
    changes.sort_by_cached_key(|c| {
        (
            rank.get(c.id().module.as_str()).copied().unwrap_or(usize::MAX),
            c.path.clone(),
            c.start_line(),
            kind_rank(c.kind),
            c.id().name.clone(),
        )
    });
    changes
}

/// One instance per modified unit, with every earlier change as context and
/// the signature document taken from the pre-edit index.
pub fn make_instances(ordered: &[UnitChange], before: &ProjectIndex, provenance: &Provenance) -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    for (i, change) in ordered.iter().enumerate() {
        if change.kind != UnitChangeKind::Modified {
            continue;
        }
        let staged = StagedDiff::from_diff(&change.diff);
        let mut inst = ProblemInstance::from_staged(&staged);
        inst.prior_changes = ordered[..i].iter().map(UnitChange::to_context).collect();
        if let Some(unit) = &change.before {
            inst.signature_doc = build_signature_doc(unit, before);
        }
        inst.provenance = Provenance {
            path: change.path.clone(),
            unit: Some(change.id().clone()),
            ..provenance.clone()
        };
        out.push(inst);
    }
    out
}

/// Diffs, orders and turns one pair of snapshots into instances.
pub fn mine_snapshots(before: &Snapshot, after: &Snapshot, provenance: &Provenance) -> (Vec<UnitChange>, Vec<ProblemInstance>) {
    let (before_index, _) = ProjectIndex::build(before.iter());
    let (after_index, _) = ProjectIndex::build(after.iter());
    let ordered = order_changes(diff_commit(before, after), &import_graph(&after_index));
    let instances = make_instances(&ordered, &before_index, provenance);
    (ordered, instances)
}
