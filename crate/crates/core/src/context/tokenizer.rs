use crate::edit::{Token, TokenStream};

/// Text → token pieces. Special tokens (`<add>`, `<del>`, `<k>`) are handled
/// by [`Tokenizer::count_stream`] and always count as one token each.
pub trait Tokenizer: Send + Sync {
    fn tokenize(&self, text: &str) -> Vec<String>;

    fn count(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }

    /// Token count of one rendered row of a stream.
    fn count_row(&self, row: &[Token]) -> usize {
        row.iter()
            .map(|t| match t {
                Token::Line(text) => self.count(text),
                _ => 1,
            })
            .sum()
    }

    /// Token count of a stream: its rows plus one newline token between
    /// consecutive rows.
    fn count_stream(&self, stream: &TokenStream) -> usize {
        let rows = stream.rows();
        rows.iter().map(|r| self.count_row(r)).sum::<usize>() + rows.len().saturating_sub(1)
    }
}

/// Self-contained tokenizer: identifier and number runs (split every 8
/// characters), whitespace runs, and one token per other character; non-ASCII
/// characters fall back to one token per UTF-8 byte.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimpleTokenizer;

const MAX_WORD: usize = 8;

impl Tokenizer for SimpleTokenizer {
    fn tokenize(&self, text: &str) -> Vec<String> {
        #[derive(PartialEq, Clone, Copy)]
        enum Class {
            Word,
            Space,
        }
        let mut out = Vec::new();
        let mut run = String::new();
        let mut run_class: Option<Class> = None;
        let mut run_len = 0;
        let flush = |run: &mut String, out: &mut Vec<String>| {
            if !run.is_empty() {
                out.push(std::mem::take(run));
            }
        };
        for c in text.chars() {
            let class = if c.is_ascii_alphanumeric() || c == '_' {
                Some(Class::Word)
            } else if c == ' ' || c == '\t' {
                Some(Class::Space)
            } else {
                None
            };
            match class {
                Some(cl) if run_class == Some(cl) && (cl == Class::Space || run_len < MAX_WORD) => {
                    run.push(c);
                    run_len += 1;
                }
                Some(cl) => {
                    flush(&mut run, &mut out);
                    run.push(c);
                    run_class = Some(cl);
                    run_len = 1;
                }
                None => {
                    flush(&mut run, &mut out);
                    run_class = None;
                    if c.is_ascii() {
                        out.push(c.to_string());
                    } else {
                        let mut buf = [0u8; 4];
                        for b in c.encode_utf8(&mut buf).bytes() {
                            out.push(format!("<0x{b:02X}>"));
                        }
                    }
                }
            }
        }
        flush(&mut run, &mut out);
        out
    }
}
