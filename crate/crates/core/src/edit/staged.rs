use super::{EditError, EditRegion, LineDiff, LineStatus, StatusedLine, TargetEdit};
use serde::{Deserialize, Serialize};

/// A line of a full unit diff; changed lines are either already applied
/// (visible to the model as statused input) or still pending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagedLine {
    pub line: StatusedLine,
    pub applied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Add,
    Del,
}

/// A pending line change located in the coordinates of the current query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineChange {
    /// Position in the staged diff.
    pub index: usize,
    pub kind: ChangeKind,
    pub text: String,
    /// Placeholder (1-based query line) the change attaches to. Insertions
    /// attach to the next visible line, deletions to their own line.
    pub placeholder: usize,
}

/// Full diff of one unit split into applied and pending line changes.
///
/// The query view shows unchanged lines, applied changes with their status,
/// and pending deletions as unchanged lines; pending insertions are hidden.
/// An empty end-of-unit line is appended to the query so insertions after
/// the last line have a placeholder to attach to.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StagedDiff {
    lines: Vec<StagedLine>,
}

impl StagedDiff {
    /// Every change in `diff` becomes pending.
    pub fn from_diff(diff: &LineDiff) -> Self {
        Self {
            lines: diff
                .lines
                .iter()
                .map(|l| StagedLine {
                    line: l.clone(),
                    applied: l.status == LineStatus::Empty,
                })
                .collect(),
        }
    }

    pub fn from_lines(lines: Vec<StagedLine>) -> Self {
        Self { lines }
    }

    /// Rebuilds the staged diff from a query (whose last line must be the
    /// empty end-of-unit line) and the pending target edit.
    pub fn from_query(
        query: &[StatusedLine],
        region: EditRegion,
        edit: &TargetEdit,
    ) -> Result<Self, EditError> {
        let statuses: Vec<LineStatus> = query.iter().map(|l| l.status).collect();
        edit.validate(&statuses, region)?;
        match query.last() {
            Some(l) if l.status == LineStatus::Empty && l.text.is_empty() => {}
            _ => {
                return Err(EditError::MalformedInput(
                    "query must end with an empty end-of-unit line".into(),
                ))
            }
        }
        let mut lines = Vec::with_capacity(query.len() + edit.changed_lines());
        for (i, line) in query.iter().enumerate() {
            let entry = region.placeholder_of(i + 1).and_then(|k| edit.get(k));
            if let Some(entry) = entry {
                lines.extend(entry.insertions.iter().map(|t| StagedLine {
                    line: StatusedLine::add(t.clone()),
                    applied: false,
                }));
            }
            if i + 1 == query.len() {
                if entry.is_some_and(|e| e.delete) {
                    return Err(EditError::MalformedOutput(
                        "cannot delete the end-of-unit line".into(),
                    ));
                }
                break;
            }
            let staged = match entry {
                Some(e) if e.delete => StagedLine {
                    line: StatusedLine::del(line.text.clone()),
                    applied: false,
                },
                _ => StagedLine {
                    line: line.clone(),
                    applied: true,
                },
            };
            lines.push(staged);
        }
        Ok(Self { lines })
    }

    pub fn lines(&self) -> &[StagedLine] {
        &self.lines
    }

    /// The full diff, applied and pending changes alike.
    pub fn full_diff(&self) -> LineDiff {
        LineDiff::new(self.lines.iter().map(|l| l.line.clone()).collect())
    }

    fn is_visible(l: &StagedLine) -> bool {
        !(l.line.status == LineStatus::Add && !l.applied)
    }

    /// Query lines (with end-of-unit line) and the whole-query region.
    pub fn query(&self) -> (Vec<StatusedLine>, EditRegion) {
        let mut out: Vec<StatusedLine> = self
            .lines
            .iter()
            .filter(|l| Self::is_visible(l))
            .map(|l| {
                if l.applied {
                    l.line.clone()
                } else {
                    StatusedLine::empty(l.line.text.clone())
                }
            })
            .collect();
        out.push(StatusedLine::empty(""));
        let region = EditRegion::whole(out.len());
        (out, region)
    }

    pub fn pending_changes(&self) -> Vec<LineChange> {
        let mut changes = Vec::new();
        let mut waiting_adds = Vec::new();
        let mut visible = 0;
        for (index, l) in self.lines.iter().enumerate() {
            if !Self::is_visible(l) {
                waiting_adds.push(index);
                continue;
            }
            visible += 1;
            for idx in waiting_adds.drain(..) {
                changes.push(self.change_at(idx, visible));
            }
            if !l.applied {
                changes.push(self.change_at(index, visible));
            }
        }
        for idx in waiting_adds {
            changes.push(self.change_at(idx, visible + 1));
        }
        changes.sort_by_key(|c| c.index);
        changes
    }

    fn change_at(&self, index: usize, placeholder: usize) -> LineChange {
        let l = &self.lines[index].line;
        LineChange {
            index,
            kind: if l.status == LineStatus::Add {
                ChangeKind::Add
            } else {
                ChangeKind::Del
            },
            text: l.text.clone(),
            placeholder,
        }
    }

    /// Pending changes as a target edit over [`StagedDiff::query`].
    pub fn pending_edit(&self) -> TargetEdit {
        let mut edit = TargetEdit::new();
        for c in self.pending_changes() {
            match c.kind {
                ChangeKind::Add => edit.insert_line(c.placeholder, c.text),
                ChangeKind::Del => edit.mark_delete(c.placeholder),
            }
        }
        edit
    }

    pub fn pending_count(&self) -> usize {
        self.lines.iter().filter(|l| !l.applied).count()
    }

    pub fn applied_change_count(&self) -> usize {
        self.lines
            .iter()
            .filter(|l| l.applied && l.line.status.is_change())
            .count()
    }

    pub fn is_complete(&self) -> bool {
        self.lines.iter().all(|l| l.applied)
    }

    /// Indices of all changed lines (applied or not).
    pub fn change_indices(&self) -> Vec<usize> {
        (0..self.lines.len())
            .filter(|&i| self.lines[i].line.status.is_change())
            .collect()
    }

    pub fn is_applied(&self, index: usize) -> bool {
        self.lines[index].applied
    }

    pub fn set_applied(&mut self, index: usize, applied: bool) {
        let l = &mut self.lines[index];
        debug_assert!(l.line.status.is_change() || applied);
        l.applied = applied || l.line.status == LineStatus::Empty;
    }

    pub fn apply_all(&mut self) {
        for l in &mut self.lines {
            l.applied = true;
        }
    }

    /// Unit text before any change.
    pub fn initial_lines(&self) -> Vec<String> {
        self.full_diff().before()
    }

    /// Unit text once every change is applied.
    pub fn final_lines(&self) -> Vec<String> {
        self.full_diff().after()
    }

    /// Unit text with only the applied changes in effect.
    pub fn current_lines(&self) -> Vec<String> {
        self.lines
            .iter()
            .filter(|l| match l.line.status {
                LineStatus::Empty => true,
                LineStatus::Add => l.applied,
                LineStatus::Del => !l.applied,
            })
            .map(|l| l.line.text.clone())
            .collect()
    }

    /// Pending changes grouped so that a deletion and the addition replacing
    /// it stay together. Within a run of deletions followed by a run of
    /// additions, the i-th deletion pairs with the i-th addition; any excess
    /// lines form singleton groups.
    pub fn pending_groups(&self) -> Vec<Vec<usize>> {
        let pending: Vec<usize> = (0..self.lines.len())
            .filter(|&i| !self.lines[i].applied)
            .collect();
        let status = |i: usize| self.lines[i].line.status;
        let mut groups = Vec::new();
        let mut i = 0;
        while i < pending.len() {
            let mut dels: Vec<usize> = Vec::new();
            while i < pending.len()
                && status(pending[i]) == LineStatus::Del
                && dels.last().is_none_or(|&d| pending[i] == d + 1)
            {
                dels.push(pending[i]);
                i += 1;
            }
            let mut adds: Vec<usize> = Vec::new();
            while i < pending.len() && status(pending[i]) == LineStatus::Add {
                let prev = adds.last().or(dels.last());
                if prev.is_some_and(|&p| pending[i] != p + 1) {
                    break;
                }
                adds.push(pending[i]);
                i += 1;
            }
            let paired = dels.len().min(adds.len());
            for p in 0..paired {
                groups.push(vec![dels[p], adds[p]]);
            }
            groups.extend(dels[paired..].iter().map(|&d| vec![d]));
            groups.extend(adds[paired..].iter().map(|&a| vec![a]));
        }
        groups.sort_by_key(|g| g[0]);
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::{apply_edit, line_diff};

    fn staged(before: &[&str], after: &[&str]) -> StagedDiff {
        StagedDiff::from_diff(&line_diff(before, after))
    }

    #[test]
    fn query_hides_pending_insertions() {
        let s = staged(&["a", "b"], &["a", "c", "d"]);
        let (q, region) = s.query();
        assert_eq!(
            q,
            vec![StatusedLine::empty("a"), StatusedLine::empty("b"), StatusedLine::empty("")]
        );
        assert_eq!(region, EditRegion::new(1, 2));
        let edit = s.pending_edit();
        assert_eq!(edit, TargetEdit::new().with(2, &[], true).with(3, &["c", "d"], false));
        let applied = apply_edit(&q, region, &edit).unwrap();
        assert_eq!(applied.after(), vec!["a", "c", "d", ""]);
    }

    #[test]
    fn from_query_inverts_query() {
        let mut s = staged(&["a", "b", "x"], &["z", "a", "c", "x", "y"]);
        let idx = s.change_indices();
        s.set_applied(idx[1], true);
        let (q, region) = s.query();
        let back = StagedDiff::from_query(&q, region, &s.pending_edit()).unwrap();
        assert_eq!(back.final_lines(), s.final_lines());
        assert_eq!(back.current_lines(), s.current_lines());
        assert_eq!(back.pending_count(), s.pending_count());
    }

    #[test]
    fn groups_pair_replacements() {
        let s = staged(&["a", "b", "c", "d"], &["a", "B", "C", "C2", "d", "e"]);
        let groups = s.pending_groups();
        let texts: Vec<Vec<String>> = groups
            .iter()
            .map(|g| g.iter().map(|&i| s.lines()[i].line.to_string()).collect())
            .collect();
        assert_eq!(
            texts,
            vec![
                vec!["- b".to_string(), "+ B".to_string()],
                vec!["- c".to_string(), "+ C".to_string()],
                vec!["+ C2".to_string()],
                vec!["+ e".to_string()],
            ]
        );
    }

    #[test]
    fn current_lines_track_applied_changes() {
        let mut s = staged(&["a", "b"], &["a", "c"]);
        assert_eq!(s.current_lines(), vec!["a", "b"]);
        let idx = s.change_indices();
        s.set_applied(idx[0], true);
        assert_eq!(s.current_lines(), vec!["a"]);
        s.set_applied(idx[1], true);
        assert_eq!(s.current_lines(), vec!["a", "c"]);
        assert!(s.is_complete());
    }
}
