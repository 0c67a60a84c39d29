//! Byte-level BPE loader for `vocab.json` + `merges.txt` vocabularies (the
//! GPT-2/RoBERTa family, which includes the CodeT5 tokenizer).

use super::Tokenizer;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum VocabError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed vocabulary {path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

#[derive(Debug, Clone)]
pub struct BpeTokenizer {
    vocab: HashMap<String, u32>,
    ranks: HashMap<(String, String), usize>,
    byte_chars: [char; 256],
}

impl BpeTokenizer {
    /// Loads from a directory holding `vocab.json` and `merges.txt`, or from
    /// the path of `vocab.json` itself with `merges.txt` next to it.
    pub fn load(path: &Path) -> Result<Self, VocabError> {
        let (vocab_path, merges_path) = if path.is_dir() {
            (path.join("vocab.json"), path.join("merges.txt"))
        } else {
            let dir = path.parent().unwrap_or(Path::new("."));
            (path.to_path_buf(), dir.join("merges.txt"))
        };
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| VocabError::Io {
                path: p.to_path_buf(),
                source,
            })
        };
        let vocab: HashMap<String, u32> =
            serde_json::from_str(&read(&vocab_path)?).map_err(|e| VocabError::Malformed {
                path: vocab_path.clone(),
                message: e.to_string(),
            })?;
        let merges_text = read(&merges_path)?;
        Self::from_parts(vocab, &merges_text).map_err(|message| VocabError::Malformed {
            path: merges_path,
            message,
        })
    }

    pub fn from_parts(vocab: HashMap<String, u32>, merges: &str) -> Result<Self, String> {
        let mut ranks = HashMap::new();
        for (i, line) in merges
            .lines()
            .filter(|l| !l.starts_with("#version") && !l.trim().is_empty())
            .enumerate()
        {
            let (a, b) = line
                .split_once(' ')
                .ok_or_else(|| format!("merge line {} has no pair: {line:?}", i + 1))?;
            ranks.entry((a.to_string(), b.to_string())).or_insert(i);
        }
        Ok(Self {
            vocab,
            ranks,
            byte_chars: byte_to_unicode(),
        })
    }

    fn bpe(&self, word: &str) -> Vec<String> {
        let mut parts: Vec<String> = word.chars().map(String::from).collect();
        while parts.len() > 1 {
            let best = parts
                .windows(2)
                .enumerate()
                .filter_map(|(i, w)| {
                    self.ranks
                        .get(&(w[0].clone(), w[1].clone()))
                        .map(|r| (*r, i))
                })
                .min();
            let Some((_, i)) = best else { break };
            let merged = format!("{}{}", parts[i], parts[i + 1]);
            parts.splice(i..=i + 1, [merged]);
        }
        parts
    }
}

impl Tokenizer for BpeTokenizer {
    fn tokenize(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for piece in pretokenize(text) {
            let mapped: String = piece.bytes().map(|b| self.byte_chars[b as usize]).collect();
            for sub in self.bpe(&mapped) {
                if self.vocab.contains_key(&sub) {
                    out.push(sub);
                } else {
                    // unknown merges fall back to single byte symbols
                    out.extend(sub.chars().map(String::from));
                }
            }
        }
        out
    }
}

/// The reversible byte → printable character table of byte-level BPE.
fn byte_to_unicode() -> [char; 256] {
    let mut table = ['\0'; 256];
    let printable = |b: u32| (33..=126).contains(&b) || (161..=172).contains(&b) || (174..=255).contains(&b);
    let mut extra = 0;
    for b in 0..256u32 {
        table[b as usize] = if printable(b) {
            char::from_u32(b).unwrap_or('?')
        } else {
            extra += 1;
            char::from_u32(255 + extra).unwrap_or('?')
        };
    }
    table
}

/// GPT-2 style pre-tokenization: contractions, optional-space letter runs,
/// optional-space digit runs, optional-space punctuation runs, and
/// whitespace runs where a run followed by a word leaves its last space to
/// that word.
fn pretokenize(text: &str) -> Vec<&str> {
    #[derive(PartialEq, Clone, Copy)]
    enum Class {
        Letter,
        Digit,
        Other,
        Space,
    }
    let class = |c: char| {
        if c.is_alphabetic() {
            Class::Letter
        } else if c.is_numeric() {
            Class::Digit
        } else if c.is_whitespace() {
            Class::Space
        } else {
            Class::Other
        }
    };
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map(|(o, _)| *o).unwrap_or(text.len());
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c == '\'' {
            if let Some(len) = ["'s", "'t", "'re", "'ve", "'m", "'ll", "'d"]
                .iter()
                .find(|s| text[start..].starts_with(**s))
                .map(|s| s.chars().count())
            {
                out.push(&text[start..end_of(i + len)]);
                i += len;
                continue;
            }
        }
        let mut j = i;
        let lead_space = c == ' ' && chars.get(i + 1).is_some_and(|(_, n)| class(*n) != Class::Space);
        if lead_space {
            j += 1;
        }
        let cl = class(chars[j].1);
        if cl == Class::Space {
            while j < chars.len() && class(chars[j].1) == Class::Space {
                j += 1;
            }
            // leave the final space to a following word
            if j < chars.len() && j - i > 1 && chars[j - 1].1 == ' ' {
                j -= 1;
            }
        } else {
            while j < chars.len() && class(chars[j].1) == cl {
                j += 1;
            }
        }
        out.push(&text[start..end_of(j)]);
        i = j;
    }
    out
}
