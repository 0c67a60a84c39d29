use super::{LineDiff, StatusedLine};

/// Splits text into lines without terminators. A trailing newline does not
/// produce an extra empty line, and `\r\n` endings are normalized.
pub fn split_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

/// Longest-common-subsequence diff over whole lines.
///
/// Equal lines are matched as early as possible; inside a changed hunk all
/// deletions precede the additions, as `difflib.Differ` prints them.
pub fn line_diff<S: AsRef<str>>(before: &[S], after: &[S]) -> LineDiff {
    let a: Vec<&str> = before.iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = after.iter().map(AsRef::as_ref).collect();

    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();

    let mut lines: Vec<StatusedLine> = Vec::with_capacity(a.len().max(b.len()));
    lines.extend(a[..prefix].iter().map(|l| StatusedLine::empty(*l)));
    diff_middle(
        &a[prefix..a.len() - suffix],
        &b[prefix..b.len() - suffix],
        &mut lines,
    );
    lines.extend(a[a.len() - suffix..].iter().map(|l| StatusedLine::empty(*l)));
    LineDiff::new(lines)
}

fn diff_middle(a: &[&str], b: &[&str], out: &mut Vec<StatusedLine>) {
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    // lcs[i * width + j] = LCS length of a[i..] and b[j..]
    let mut lcs = vec![0u32; (n + 1) * width];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i * width + j] = if a[i] == b[j] {
                lcs[(i + 1) * width + j + 1] + 1
            } else {
                lcs[(i + 1) * width + j].max(lcs[i * width + j + 1])
            };
        }
    }

    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            out.push(StatusedLine::empty(a[i]));
            i += 1;
            j += 1;
        } else if i < n && (j == m || lcs[(i + 1) * width + j] >= lcs[i * width + j + 1]) {
            out.push(StatusedLine::del(a[i]));
            i += 1;
        } else {
            out.push(StatusedLine::add(b[j]));
            j += 1;
        }
    }
}
