use crate::edit::{
    enc_output, parse_input, EditError, EditRegion, LineStatus, StagedDiff, StatusedLine, TargetEdit,
    TokenStream,
};
use crate::instance::ProblemInstance;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// What an oracle sees each round: the query block, the admitted reference
/// blocks, and the region and line statuses of the (possibly trimmed) query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub id: u64,
    pub query: String,
    pub references: Vec<String>,
    pub region: EditRegion,
    pub statuses: Vec<LineStatus>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("oracle reported: {0}")]
    Remote(String),
    #[error("oracle transport failed: {0}")]
    Transport(String),
    #[error("oracle protocol violation: {0}")]
    Protocol(String),
    #[error(transparent)]
    Edit(#[from] EditError),
}

/// Edit predictor with state scoped to one episode.
pub trait OracleSession {
    /// Returns canonical EncOutput text.
    fn predict(&mut self, request: &OracleRequest) -> Result<String, OracleError>;
}

/// Factory of episode sessions; shared across worker threads.
pub trait Oracle: Send + Sync {
    fn session<'a>(&'a self, instance: &'a ProblemInstance) -> Box<dyn OracleSession + 'a>;
}

/// Oracle that answers from the request alone.
pub trait Predictor: Send + Sync {
    fn predict(&self, request: &OracleRequest) -> Result<String, OracleError>;

    /// Requests the predictor can serve at once.
    fn max_concurrency(&self) -> usize {
        1
    }
}

struct Stateless<'a, P: ?Sized>(&'a P);

impl<P: Predictor + ?Sized> OracleSession for Stateless<'_, P> {
    fn predict(&mut self, request: &OracleRequest) -> Result<String, OracleError> {
        self.0.predict(request)
    }
}

impl<P: Predictor> Oracle for P {
    fn session<'a>(&'a self, _instance: &'a ProblemInstance) -> Box<dyn OracleSession + 'a> {
        Box::new(Stateless(self))
    }
}

/// Never suggests anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullOracle;

impl Predictor for NullOracle {
    fn predict(&self, request: &OracleRequest) -> Result<String, OracleError> {
        Ok(enc_output(&TargetEdit::new(), request.region).render())
    }

    fn max_concurrency(&self) -> usize {
        usize::MAX
    }
}

/// Knows the instance's ground truth and always suggests every remaining
/// change: the upper bound of any oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct TruthOracle;

impl Oracle for TruthOracle {
    fn session<'a>(&'a self, instance: &'a ProblemInstance) -> Box<dyn OracleSession + 'a> {
        Box::new(TruthSession {
            staged: instance.staged(),
        })
    }
}

struct TruthSession {
    staged: Result<StagedDiff, EditError>,
}

impl OracleSession for TruthSession {
    fn predict(&mut self, request: &OracleRequest) -> Result<String, OracleError> {
        let staged = self.staged.as_ref().map_err(|e| OracleError::Edit(e.clone()))?;
        let (lines, _) = parse_input(&TokenStream::parse(&request.query))?;
        let current = align(staged, &lines)
            .ok_or_else(|| OracleError::Protocol("query does not match the instance".into()))?;
        let mut edit = TargetEdit::new();
        for c in current.pending_changes() {
            let Some(k) = request.region.placeholder_of(c.placeholder) else { continue };
            match c.kind {
                crate::edit::ChangeKind::Add => edit.insert_line(k, c.text),
                crate::edit::ChangeKind::Del => edit.mark_delete(k),
            }
        }
        Ok(enc_output(&edit, request.region).render())
    }
}

/// Recovers which changes of `staged` are applied from a query window that
/// may have lost lines at either end. Returns the part of the diff shown in
/// the window, so that placeholders count from the window's first line.
fn align(staged: &StagedDiff, window: &[StatusedLine]) -> Option<StagedDiff> {
    let lines = staged.lines();
    'start: for start in 0..=lines.len() {
        let mut state = staged.clone();
        let mut q = 0;
        let mut i = start;
        while q < window.len() {
            let Some(l) = lines.get(i) else {
                // only the end-of-unit line may remain
                if q + 1 == window.len() && window[q] == StatusedLine::empty("") {
                    break;
                }
                continue 'start;
            };
            let w = &window[q];
            match l.line.status {
                LineStatus::Empty if *w == l.line => q += 1,
                LineStatus::Empty => continue 'start,
                LineStatus::Add if *w == l.line => {
                    state.set_applied(i, true);
                    q += 1;
                }
                LineStatus::Add => state.set_applied(i, false),
                LineStatus::Del if *w == l.line => {
                    state.set_applied(i, true);
                    q += 1;
                }
                LineStatus::Del if w.status == LineStatus::Empty && w.text == l.line.text => {
                    state.set_applied(i, false);
                    q += 1;
                }
                LineStatus::Del => continue 'start,
            }
            i += 1;
        }
        // pending insertions right after the window still attach inside it
        while lines.get(i).is_some_and(|l| l.line.status == LineStatus::Add) {
            state.set_applied(i, false);
            i += 1;
        }
        return Some(StagedDiff::from_lines(state.lines()[start..i].to_vec()));
    }
    None
}

/// Change-aware retrieval baseline: when a line of the region was changed
/// somewhere in the reference blocks (deleted and replaced, or just
/// deleted), suggests the same change here, keeping the line's indentation.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoOracle;

impl EchoOracle {
    fn rewrites(references: &[String]) -> HashMap<String, Vec<String>> {
        let mut map = HashMap::new();
        for block in references {
            let Ok((lines, _)) = parse_input(&TokenStream::parse(block)) else { continue };
            let mut i = 0;
            while i < lines.len() {
                if lines[i].status != LineStatus::Del {
                    i += 1;
                    continue;
                }
                let dels: Vec<&StatusedLine> =
                    lines[i..].iter().take_while(|l| l.status == LineStatus::Del).collect();
                i += dels.len();
                let adds: Vec<&StatusedLine> =
                    lines[i..].iter().take_while(|l| l.status == LineStatus::Add).collect();
                i += adds.len();
                for (j, d) in dels.iter().enumerate() {
                    let key = d.text.trim().to_string();
                    if key.is_empty() {
                        continue;
                    }
                    let indent = indentation(&d.text);
                    // the last deletion takes any surplus insertions
                    let replacement: Vec<String> = if j + 1 == dels.len() {
                        adds.get(j..).unwrap_or(&[]).iter().map(|a| a.text.clone()).collect()
                    } else {
                        adds.get(j).map(|a| a.text.clone()).into_iter().collect()
                    };
                    let relative: Vec<String> = replacement
                        .into_iter()
                        .map(|t| t.strip_prefix(indent).map(str::to_string).unwrap_or_else(|| t.trim_start().to_string()))
                        .collect();
                    map.entry(key).or_insert(relative);
                }
            }
        }
        map
    }
}

fn indentation(line: &str) -> &str {
    &line[..line.len() - line.trim_start().len()]
}

impl Predictor for EchoOracle {
    fn predict(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let (lines, _) = parse_input(&TokenStream::parse(&request.query))?;
        let rewrites = Self::rewrites(&request.references);
        let placeholders = request.region.placeholders();
        let replacement_at = |k: usize| -> Option<Vec<String>> {
            let line = lines.get(request.region.line_of(k) - 1)?;
            if line.status != LineStatus::Empty {
                return None;
            }
            let indent = indentation(&line.text);
            rewrites
                .get(line.text.trim())
                .map(|r| r.iter().map(|t| format!("{indent}{t}")).collect())
        };
        // Like the reference encoding, a run of replaced lines is written as
        // its deletions followed by all insertions after the run.
        let mut edit = TargetEdit::new();
        let mut k = 1;
        while k <= placeholders {
            let mut inserted = Vec::new();
            let first = k;
            while k <= placeholders {
                let Some(r) = replacement_at(k) else { break };
                edit.mark_delete(k);
                inserted.extend(r);
                k += 1;
            }
            if k == first {
                k += 1;
                continue;
            }
            let at = if k <= placeholders { k } else { first };
            for text in inserted {
                edit.insert_line(at, text);
            }
        }
        Ok(enc_output(&edit, request.region).render())
    }

    fn max_concurrency(&self) -> usize {
        usize::MAX
    }
}
