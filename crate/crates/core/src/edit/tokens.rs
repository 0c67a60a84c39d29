use std::fmt;

/// One element of an encoded sequence.
///
/// `Line` carries the text of one source line and terminates its row;
/// special tokens before it share the row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Placeholder(usize),
    Add,
    Del,
    Line(String),
}

impl Token {
    pub fn is_special(&self) -> bool {
        !matches!(self, Token::Line(_))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Placeholder(k) => write!(f, "<{k}>"),
            Token::Add => f.write_str("<add>"),
            Token::Del => f.write_str("<del>"),
            Token::Line(text) => f.write_str(text),
        }
    }
}

/// Ordered token sequence with a canonical text form.
///
/// Canonical text: special tokens on a row are separated by single spaces;
/// a line's text follows its row's specials after one space and ends the row
/// with `\n`. Specials after the last line form a final row without a
/// newline. Text that would read as a special token (or starts with `\`) is
/// escaped with a leading backslash.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, token: Token) {
        self.tokens.push(token);
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.tokens.push(Token::Line(text.into()));
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    /// Splits into rows, each ending at a `Line` token (the last row may end
    /// without one).
    pub fn rows(&self) -> Vec<&[Token]> {
        let mut rows = Vec::new();
        let mut start = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if matches!(tok, Token::Line(_)) {
                rows.push(&self.tokens[start..=i]);
                start = i + 1;
            }
        }
        if start < self.tokens.len() {
            rows.push(&self.tokens[start..]);
        }
        rows
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a [Token]>) -> Self {
        Self {
            tokens: rows.into_iter().flatten().cloned().collect(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut row_open = false;
        for tok in &self.tokens {
            if row_open {
                out.push(' ');
            }
            match tok {
                Token::Line(text) => {
                    if needs_escape(text) {
                        out.push('\\');
                    }
                    out.push_str(text);
                    out.push('\n');
                    row_open = false;
                }
                special => {
                    out.push_str(&special.to_string());
                    row_open = true;
                }
            }
        }
        out
    }

    /// Inverse of [`TokenStream::render`]. Also accepts a final row of text
    /// without a terminating newline.
    pub fn parse(text: &str) -> Self {
        let mut tokens = Vec::new();
        let mut rest = text;
        loop {
            let (row, terminated) = match rest.find('\n') {
                Some(i) => (&rest[..i], true),
                None => (rest, false),
            };
            parse_row(row, terminated, &mut tokens);
            if !terminated {
                break;
            }
            rest = &rest[row.len() + 1..];
            if rest.is_empty() {
                break;
            }
        }
        Self { tokens }
    }
}

fn parse_row(row: &str, terminated: bool, tokens: &mut Vec<Token>) {
    let mut pos = 0;
    loop {
        let remaining = &row[pos..];
        if let Some((tok, len)) = special_prefix(remaining) {
            tokens.push(tok);
            pos += len;
            if row[pos..].starts_with(' ') {
                pos += 1;
                if pos == row.len() {
                    tokens.push(Token::Line(String::new()));
                    return;
                }
                continue;
            }
            // special at end of row
            if terminated {
                tokens.push(Token::Line(String::new()));
            }
            return;
        }
        if remaining.is_empty() && !terminated {
            return;
        }
        let text = remaining.strip_prefix('\\').unwrap_or(remaining);
        tokens.push(Token::Line(text.to_string()));
        return;
    }
}

/// Recognizes a special token at the start of `s` that is followed by a space
/// or the end of the row.
fn special_prefix(s: &str) -> Option<(Token, usize)> {
    if !s.starts_with('<') {
        return None;
    }
    let close = s.find('>')?;
    let after = &s[close + 1..];
    if !(after.is_empty() || after.starts_with(' ')) {
        return None;
    }
    let inner = &s[1..close];
    let tok = match inner {
        "add" => Token::Add,
        "del" => Token::Del,
        digits => {
            let first = digits.chars().next()?;
            if !('1'..='9').contains(&first) || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            Token::Placeholder(digits.parse().ok()?)
        }
    };
    Some((tok, close + 1))
}

fn needs_escape(text: &str) -> bool {
    text.starts_with('\\') || special_prefix(text).is_some()
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromIterator<Token> for TokenStream {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        Self {
            tokens: iter.into_iter().collect(),
        }
    }
}

impl serde::Serialize for TokenStream {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> serde::Deserialize<'de> for TokenStream {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Ok(TokenStream::parse(&text))
    }
}
