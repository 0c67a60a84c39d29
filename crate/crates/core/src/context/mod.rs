//! Packing an instance into one query block and bounded reference blocks.

mod bpe;
mod tokenizer;

pub use bpe::{BpeTokenizer, VocabError};
pub use tokenizer::{SimpleTokenizer, Tokenizer};

use crate::edit::{enc_input, EditError, EditRegion, StatusedLine, Token, TokenStream};
use crate::instance::{ContextChange, ProblemInstance};
use crate::python::SignatureDoc;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

pub const QUERY_TOKENS: usize = 1024;
pub const REFERENCE_BLOCK_TOKENS: usize = 512;
pub const REFERENCE_BUDGET: usize = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContextLimits {
    pub query_tokens: usize,
    pub reference_block_tokens: usize,
    pub reference_budget: usize,
}

impl Default for ContextLimits {
    fn default() -> Self {
        Self {
            query_tokens: QUERY_TOKENS,
            reference_block_tokens: REFERENCE_BLOCK_TOKENS,
            reference_budget: REFERENCE_BUDGET,
        }
    }
}

/// Tokenizer named by a vocabulary path, or the built-in one.
pub fn load_tokenizer(vocab: Option<&Path>) -> Result<Arc<dyn Tokenizer>, VocabError> {
    Ok(match vocab {
        Some(p) => Arc::new(BpeTokenizer::load(p)?),
        None => Arc::new(SimpleTokenizer),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockRole {
    Query,
    Reference,
}

/// Where a block's content comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "lowercase")]
pub enum BlockSource {
    Query,
    Signature {
        chunk: usize,
    },
    /// `distance` is 1 for the change immediately preceding the query in
    /// the ordering, 2 for the one before, and so on.
    Change {
        index: usize,
        distance: usize,
        chunk: usize,
    },
}

impl BlockSource {
    /// Admission priority, smaller first: signature chunks, then changes
    /// from nearest to farthest.
    pub fn priority(&self) -> (u8, usize, usize) {
        match *self {
            BlockSource::Query => (0, 0, 0),
            BlockSource::Signature { chunk } => (1, 0, chunk),
            BlockSource::Change {
                distance, chunk, ..
            } => (2, distance, chunk),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub role: BlockRole,
    pub source: BlockSource,
    pub payload: TokenStream,
    pub token_count: usize,
    /// A line longer than the block limit was cut to fit.
    pub truncated_line: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssembledContext {
    pub query: Block,
    /// Query lines kept after margin truncation and the region within them.
    pub query_lines: Vec<StatusedLine>,
    pub region: EditRegion,
    /// Lines cut from the start and the end of the query.
    pub trimmed: (usize, usize),
    pub references: Vec<Block>,
    pub dropped: Vec<BlockSource>,
}

impl AssembledContext {
    pub fn reference_tokens(&self) -> usize {
        self.references.iter().map(|b| b.token_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssembleError {
    #[error("edit region needs {tokens} tokens, query limit is {limit}")]
    QueryOverflow { tokens: usize, limit: usize },
    #[error(transparent)]
    Edit(#[from] EditError),
}

/// Splits rows into chunks of at most `limit` tokens at row boundaries.
/// A row that alone exceeds the limit has its text cut and is flagged.
fn chunk_rows(rows: Vec<Vec<Token>>, tokenizer: &dyn Tokenizer, limit: usize) -> Vec<(TokenStream, usize, bool)> {
    let mut chunks = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut count = 0;
    let mut truncated = false;
    for mut row in rows {
        let mut n = tokenizer.count_row(&row);
        let mut cut = false;
        if n > limit {
            n = truncate_row(&mut row, tokenizer, limit);
            cut = true;
        }
        let joined = if current.is_empty() { n } else { count + 1 + n };
        if joined > limit && !current.is_empty() {
            chunks.push((TokenStream { tokens: std::mem::take(&mut current) }, count, truncated));
            truncated = false;
            count = n;
        } else {
            count = joined;
        }
        truncated |= cut;
        current.extend(row);
    }
    if !current.is_empty() {
        chunks.push((TokenStream { tokens: current }, count, truncated));
    }
    chunks
}

/// Cuts the row's line text to the longest prefix that fits; returns the
/// new count.
fn truncate_row(row: &mut [Token], tokenizer: &dyn Tokenizer, limit: usize) -> usize {
    let specials = row.iter().filter(|t| t.is_special()).count();
    if let Some(Token::Line(text)) = row.last_mut() {
        let bounds: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(text.len()))
            .collect();
        let budget = limit.saturating_sub(specials);
        let (mut lo, mut hi) = (0, bounds.len() - 1);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if tokenizer.count(&text[..bounds[mid]]) <= budget {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        text.truncate(bounds[lo]);
    }
    tokenizer.count_row(row)
}

fn stream_rows(stream: &TokenStream) -> Vec<Vec<Token>> {
    stream.rows().into_iter().map(<[Token]>::to_vec).collect()
}

/// Reference blocks for the contextual changes and the signature document.
pub fn segment_references(
    prior_changes: &[ContextChange],
    signature_doc: &SignatureDoc,
    tokenizer: &dyn Tokenizer,
    limits: &ContextLimits,
) -> Vec<Block> {
    let limit = limits.reference_block_tokens;
    let block = |source, (payload, token_count, truncated_line)| Block {
        role: BlockRole::Reference,
        source,
        payload,
        token_count,
        truncated_line,
    };
    let mut blocks = Vec::new();
    if !signature_doc.is_empty() {
        let rows = signature_doc
            .lines()
            .into_iter()
            .map(|l| vec![Token::Line(l)])
            .collect();
        for (chunk, c) in chunk_rows(rows, tokenizer, limit).into_iter().enumerate() {
            blocks.push(block(BlockSource::Signature { chunk }, c));
        }
    }
    let n = prior_changes.len();
    for (index, change) in prior_changes.iter().enumerate() {
        let rows = stream_rows(&change.encode());
        for (chunk, c) in chunk_rows(rows, tokenizer, limit).into_iter().enumerate() {
            blocks.push(block(
                BlockSource::Change {
                    index,
                    distance: n - index,
                    chunk,
                },
                c,
            ));
        }
    }
    blocks
}

/// Admits blocks in priority order until the next one does not fit; the
/// result depends only on the blocks' priorities, not their input order.
pub fn admit(mut blocks: Vec<Block>, budget: usize) -> (Vec<Block>, Vec<Block>) {
    blocks.sort_by_key(|b| b.source.priority());
    let mut used = 0;
    let mut split = blocks.len();
    for (i, b) in blocks.iter().enumerate() {
        if used + b.token_count > budget {
            split = i;
            break;
        }
        used += b.token_count;
    }
    let dropped = blocks.split_off(split);
    (blocks, dropped)
}

/// Query block, kept lines, region within them, and lines cut from each end.
pub type QueryParts = (Block, Vec<StatusedLine>, EditRegion, (usize, usize));

/// The query block: lines outside the region are dropped from the far ends,
/// alternating sides (longer margin first), until the encoding fits.
pub fn assemble_query(
    query: &[StatusedLine],
    region: EditRegion,
    tokenizer: &dyn Tokenizer,
    limit: usize,
) -> Result<QueryParts, AssembleError> {
    let full = enc_input(query, region)?;
    let rows: Vec<usize> = full.rows().iter().map(|r| tokenizer.count_row(r)).collect();
    let total = |lo: usize, hi: usize| -> usize {
        rows[lo..hi].iter().sum::<usize>() + (hi - lo).saturating_sub(1)
    };
    let (r_lo, r_hi) = (region.start - 1, region.end());
    let region_tokens = total(r_lo, r_hi);
    if region_tokens > limit {
        return Err(AssembleError::QueryOverflow {
            tokens: region_tokens,
            limit,
        });
    }
    let (mut lo, mut hi) = (0, rows.len());
    while total(lo, hi) > limit {
        let before = r_lo - lo;
        let after = hi - r_hi;
        if before >= after {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    let lines = query[lo..hi].to_vec();
    let kept_region = EditRegion::new(region.start - lo, region.extent);
    let payload = enc_input(&lines, kept_region)?;
    let block = Block {
        role: BlockRole::Query,
        source: BlockSource::Query,
        token_count: total(lo, hi),
        payload,
        truncated_line: false,
    };
    Ok((block, lines, kept_region, (lo, query.len() - hi)))
}

pub fn assemble(
    instance: &ProblemInstance,
    tokenizer: &dyn Tokenizer,
    limits: &ContextLimits,
) -> Result<AssembledContext, AssembleError> {
    let (query, query_lines, region, trimmed) =
        assemble_query(&instance.query, instance.region, tokenizer, limits.query_tokens)?;
    let blocks = segment_references(&instance.prior_changes, &instance.signature_doc, tokenizer, limits);
    let (references, dropped) = admit(blocks, limits.reference_budget);
    Ok(AssembledContext {
        query,
        query_lines,
        region,
        trimmed,
        references,
        dropped: dropped.into_iter().map(|b| b.source).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::line_diff;
    use crate::instance::UnitChangeKind;
    use crate::python::{SignatureEntry, UnitId, UnitKind};

    fn change(lines: usize, width: usize) -> ContextChange {
        let before: Vec<String> = (0..lines).map(|i| format!("x{i} = {}", "a ".repeat(width))).collect();
        let after: Vec<String> = before.iter().map(|l| format!("{l}b")).collect();
        ContextChange {
            unit: UnitId {
                module: "m".into(),
                name: "@0".into(),
                kind: UnitKind::ModuleRegion,
            },
            kind: UnitChangeKind::Modified,
            diff: line_diff(&before, &after),
        }
    }

    #[test]
    fn small_change_is_one_block() {
        let blocks = segment_references(&[change(3, 2)], &SignatureDoc::default(), &SimpleTokenizer, &ContextLimits::default());
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].payload, change(3, 2).encode());
        assert_eq!(blocks[0].token_count, SimpleTokenizer.count_stream(&blocks[0].payload));
    }

    #[test]
    fn long_change_splits_at_line_boundaries() {
        let c = change(40, 6);
        let full = c.encode();
        assert!(SimpleTokenizer.count_stream(&full) > 512);
        let blocks = segment_references(&[c], &SignatureDoc::default(), &SimpleTokenizer, &ContextLimits::default());
        assert!(blocks.len() >= 2);
        let mut joined = Vec::new();
        for b in &blocks {
            assert!(b.token_count <= 512);
            assert_eq!(b.token_count, SimpleTokenizer.count_stream(&b.payload));
            joined.extend(b.payload.tokens.clone());
        }
        assert_eq!(joined, full.tokens);
    }

    #[test]
    fn oversized_line_is_cut_and_flagged() {
        let mut c = change(1, 10);
        c.diff.lines[0].text = "y ".repeat(600);
        let blocks = segment_references(&[c], &SignatureDoc::default(), &SimpleTokenizer, &ContextLimits::default());
        assert!(blocks.iter().any(|b| b.truncated_line));
        assert!(blocks.iter().all(|b| b.token_count <= 512));
    }

    #[test]
    fn signature_blocks_first_and_nearest_changes_next() {
        let doc = SignatureDoc {
            entries: vec![SignatureEntry {
                module: "m".into(),
                symbol: "m.f".into(),
                text: "def f(): ...".into(),
            }],
        };
        let changes: Vec<ContextChange> = (0..3).map(|_| change(5, 3)).collect();
        let blocks = segment_references(&changes, &doc, &SimpleTokenizer, &ContextLimits::default());
        let per_change = blocks.iter().find(|b| matches!(b.source, BlockSource::Change { .. })).unwrap().token_count;
        let sig = blocks[0].token_count;
        let (admitted, dropped) = admit(blocks, sig + per_change * 2);
        assert_eq!(admitted[0].source, BlockSource::Signature { chunk: 0 });
        let kept: Vec<usize> = admitted
            .iter()
            .filter_map(|b| match b.source {
                BlockSource::Change { index, .. } => Some(index),
                _ => None,
            })
            .collect();
        assert_eq!(kept, [2, 1]);
        assert_eq!(dropped.len(), 1);
    }

    #[test]
    fn query_margins_shrink_symmetrically() {
        let lines: Vec<StatusedLine> = (0..40).map(|i| StatusedLine::empty(format!("v{i} = {}", "q ".repeat(20)))).collect();
        let region = EditRegion::new(21, 1);
        let (block, kept, r, (cut_before, cut_after)) = assemble_query(&lines, region, &SimpleTokenizer, 300).unwrap();
        assert!(block.token_count <= 300);
        assert!(cut_before > 0 && cut_after > 0);
        // remaining margins differ by at most one line
        assert!((r.start - 1).abs_diff(kept.len() - r.end()) <= 1);
        assert_eq!(kept[r.start - 1], lines[20]);
        assert_eq!(r.extent, 1);
        assert!(matches!(
            assemble_query(&lines, EditRegion::new(1, 39), &SimpleTokenizer, 300),
            Err(AssembleError::QueryOverflow { .. })
        ));
    }
}
