use super::{diff_units, make_instances, order_changes, UnitChange};
use crate::instance::{ProblemInstance, Provenance, UnitChangeKind};
use crate::python::{import_graph, CodeUnit, ModuleInfo, ProjectIndex};
use git2::{Delta, DiffOptions, Oid, Repository, Sort, Tree};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum MineError {
    #[error("{path}: {source}")]
    Git { path: PathBuf, source: git2::Error },
    #[error("cannot list {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MineOptions {
    /// Only the most recent `max_commits` eligible commits are mined.
    pub max_commits: usize,
}

impl Default for MineOptions {
    fn default() -> Self {
        Self { max_commits: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct MinedCommit {
    pub id: String,
    /// Unit changes in editing order.
    pub changes: Vec<UnitChange>,
    pub instances: Vec<ProblemInstance>,
}

#[derive(Debug, Clone, Default)]
pub struct MinedRepo {
    pub project: String,
    pub commits: Vec<MinedCommit>,
    /// Files skipped because they did not parse (counted per commit).
    pub parse_failures: usize,
}

impl MinedRepo {
    pub fn instances(&self) -> impl Iterator<Item = &ProblemInstance> {
        self.commits.iter().flat_map(|c| &c.instances)
    }

    pub fn into_instances(self) -> Vec<ProblemInstance> {
        self.commits.into_iter().flat_map(|c| c.instances).collect()
    }

    pub fn count(&self, kind: UnitChangeKind) -> usize {
        self.commits
            .iter()
            .flat_map(|c| &c.changes)
            .filter(|c| c.kind == kind)
            .count()
    }
}

/// Immediate subdirectories of `root` that are git repositories, or `root`
/// itself if it is one.
pub fn discover_repositories(root: &Path) -> Result<Vec<PathBuf>, MineError> {
    if root.join(".git").exists() {
        return Ok(vec![root.to_path_buf()]);
    }
    let io = |source| MineError::Io {
        path: root.to_path_buf(),
        source,
    };
    let mut repos = Vec::new();
    for entry in std::fs::read_dir(root).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.join(".git").exists() || Repository::open_bare(&path).is_ok() {
            repos.push(path);
        }
    }
    repos.sort();
    Ok(repos)
}

/// Parsed Python files of one tree.
#[derive(Clone, Default)]
struct TreeState {
    index: ProjectIndex,
    broken: BTreeSet<String>,
}

impl TreeState {
    /// Units of `path`, or `None` if the file exists but does not parse.
    fn units(&self, path: &str) -> Option<&[CodeUnit]> {
        if self.broken.contains(path) {
            return None;
        }
        Some(self.index.module_by_path(path).map(|m| &m.units[..]).unwrap_or(&[]))
    }

    fn update(&mut self, repo: &Repository, path: &str, blob: Option<Oid>) -> Result<(), git2::Error> {
        self.index.remove_path(path);
        self.broken.remove(path);
        let Some(oid) = blob else { return Ok(()) };
        let blob = repo.find_blob(oid)?;
        let Ok(source) = std::str::from_utf8(blob.content()) else {
            log::warn!("skipping non-UTF-8 file {path}");
            self.broken.insert(path.to_string());
            return Ok(());
        };
        match ModuleInfo::parse(path, source) {
            Ok(info) => self.index.insert(Arc::new(info)),
            Err(e) => {
                log::warn!("skipping {path}: {e}");
                self.broken.insert(path.to_string());
            }
        }
        Ok(())
    }
}

fn is_python(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "py")
}

/// `(path, new blob)` for every Python file that differs between the trees
/// (`None` when the file was removed). Renames are not detected, so they
/// show up as a removal plus an addition.
fn changed_files(repo: &Repository, old: Option<&Tree>, new: &Tree) -> Result<Vec<(String, Option<Oid>)>, git2::Error> {
    let mut opts = DiffOptions::new();
    opts.ignore_submodules(true);
    let diff = repo.diff_tree_to_tree(old, Some(new), Some(&mut opts))?;
    let mut out = Vec::new();
    for delta in diff.deltas() {
        let (file, blob) = match delta.status() {
            Delta::Deleted => (delta.old_file(), None),
            _ => (delta.new_file(), Some(delta.new_file().id())),
        };
        if let Some(path) = file.path().filter(|p| is_python(p)) {
            out.push((path.to_string_lossy().replace('\\', "/"), blob));
        }
    }
    out.sort();
    Ok(out)
}

/// Mines the first-parent history of `HEAD`. Merge commits and the root
/// commit are skipped; of the remaining commits the most recent
/// `max_commits` are used, oldest first.
pub fn mine_repository(path: &Path, options: MineOptions) -> Result<MinedRepo, MineError> {
    let git = |source| MineError::Git {
        path: path.to_path_buf(),
        source,
    };
    let repo = Repository::open(path).map_err(git)?;
    let project = path
        .canonicalize()
        .ok()
        .as_deref()
        .unwrap_or(path)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut walk = repo.revwalk().map_err(git)?;
    walk.push_head().map_err(git)?;
    walk.simplify_first_parent().map_err(git)?;
    walk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE).map_err(git)?;
    let mut eligible = Vec::new();
    for oid in walk {
        let commit = repo.find_commit(oid.map_err(git)?).map_err(git)?;
        if commit.parent_count() == 1 {
            eligible.push(commit);
        }
    }
    let skip = eligible.len().saturating_sub(options.max_commits);
    let mut mined = MinedRepo {
        project: project.clone(),
        ..Default::default()
    };
    let mut state = TreeState::default();
    let mut state_tree: Option<Tree> = None;
    for commit in eligible.into_iter().skip(skip) {
        let parent_tree = commit.parent(0).and_then(|p| p.tree()).map_err(git)?;
        if state_tree.as_ref().map(|t| t.id()) != Some(parent_tree.id()) {
            for (p, blob) in changed_files(&repo, state_tree.as_ref(), &parent_tree).map_err(git)? {
                state.update(&repo, &p, blob).map_err(git)?;
            }
        }
        let tree = commit.tree().map_err(git)?;
        let changed = changed_files(&repo, Some(&parent_tree), &tree).map_err(git)?;
        let before = state.clone();
        for (p, blob) in &changed {
            state.update(&repo, p, *blob).map_err(git)?;
        }
        state_tree = Some(tree);

        let mut changes = Vec::new();
        for (p, _) in &changed {
            match (before.units(p), state.units(p)) {
                (Some(b), Some(a)) => changes.extend(diff_units(p, b, a)),
                _ => mined.parse_failures += 1,
            }
        }
        if changes.is_empty() {
            continue;
        }
        let ordered = order_changes(changes, &import_graph(&state.index));
        let id = commit.id().to_string();
        let provenance = Provenance {
            project: project.clone(),
            commit: id.clone(),
            ..Default::default()
        };
        let instances = make_instances(&ordered, &before.index, &provenance);
        mined.commits.push(MinedCommit {
            id,
            changes: ordered,
            instances,
        });
    }
    Ok(mined)
}
