use super::{
    EditError, EditRegion, LineDiff, LineStatus, PlaceholderEdit, StatusedLine, TargetEdit, Token,
    TokenStream,
};

/// Encodes a unit with its line statuses, attaching placeholder `<k>` to the
/// k-th line of the region.
pub fn enc_input(unit: &[StatusedLine], region: EditRegion) -> Result<TokenStream, EditError> {
    region.validate(unit.len())?;
    Ok(encode_lines(unit, Some(region)))
}

/// Encoding used for contextual changes: statuses only, no placeholders.
pub(crate) fn encode_lines(unit: &[StatusedLine], region: Option<EditRegion>) -> TokenStream {
    let mut out = TokenStream::new();
    for (i, line) in unit.iter().enumerate() {
        if let Some(k) = region.and_then(|r| r.placeholder_of(i + 1)) {
            out.push(Token::Placeholder(k));
        }
        if let Some(tok) = line.status.token() {
            out.push(tok);
        }
        out.line(line.text.clone());
    }
    out
}

/// Recovers the statused lines and region from an `enc_input` stream.
pub fn parse_input(stream: &TokenStream) -> Result<(Vec<StatusedLine>, Option<EditRegion>), EditError> {
    let mut lines = Vec::new();
    let mut placeholders: Vec<(usize, usize)> = Vec::new();
    for row in stream.rows() {
        let mut status = LineStatus::Empty;
        let mut text = None;
        for tok in row {
            match tok {
                Token::Placeholder(k) if status == LineStatus::Empty && text.is_none() => {
                    placeholders.push((*k, lines.len() + 1));
                }
                Token::Add if status == LineStatus::Empty => status = LineStatus::Add,
                Token::Del if status == LineStatus::Empty => status = LineStatus::Del,
                Token::Line(t) => text = Some(t.clone()),
                other => {
                    return Err(EditError::MalformedInput(format!(
                        "unexpected token {other} on line {}",
                        lines.len() + 1
                    )))
                }
            }
        }
        let text = text.ok_or_else(|| {
            EditError::MalformedInput("trailing special tokens without a line".into())
        })?;
        lines.push(StatusedLine::new(status, text));
    }
    let region = match placeholders.first() {
        None => None,
        Some(&(first_k, start)) => {
            let contiguous = placeholders
                .iter()
                .enumerate()
                .all(|(i, &(k, line))| k == first_k + i && line == start + i);
            if first_k != 1 || !contiguous {
                return Err(EditError::MalformedInput(
                    "placeholders must be <1>..<n+1> on consecutive lines".into(),
                ));
            }
            Some(EditRegion::new(start, placeholders.len() - 1))
        }
    };
    Ok((lines, region))
}

/// Encodes a target edit: `<k>` followed by `<add> line` rows and an optional
/// `<del>`, for every placeholder of the region.
pub fn enc_output(edit: &TargetEdit, region: EditRegion) -> TokenStream {
    let mut out = TokenStream::new();
    let empty = PlaceholderEdit::default();
    for k in 1..=region.placeholders() {
        out.push(Token::Placeholder(k));
        let entry = edit.get(k).unwrap_or(&empty);
        for line in &entry.insertions {
            out.push(Token::Add);
            out.line(line.clone());
        }
        if entry.delete {
            out.push(Token::Del);
        }
    }
    out
}

/// Like [`enc_output`] but also enforces the delete restriction against the
/// input statuses.
pub fn enc_output_checked(
    edit: &TargetEdit,
    statuses: &[LineStatus],
    region: EditRegion,
) -> Result<TokenStream, EditError> {
    edit.validate(statuses, region)?;
    Ok(enc_output(edit, region))
}

/// Decodes an output stream. Placeholders may be omitted but must appear in
/// increasing order.
pub fn parse_output(
    stream: &TokenStream,
    input_statuses: &[LineStatus],
    region: EditRegion,
) -> Result<TargetEdit, EditError> {
    region.validate(input_statuses.len())?;
    let mut edit = TargetEdit::new();
    let mut current: Option<(usize, PlaceholderEdit)> = None;
    let mut last_k = 0;
    let mut tokens = stream.iter().peekable();

    while let Some(tok) = tokens.next() {
        match tok {
            Token::Placeholder(k) => {
                if *k <= last_k || *k > region.placeholders() {
                    return Err(EditError::MalformedOutput(format!(
                        "placeholder <{k}> out of order or outside 1..={}",
                        region.placeholders()
                    )));
                }
                if let Some((prev, entry)) = current.take() {
                    edit.set(prev, entry);
                }
                last_k = *k;
                current = Some((*k, PlaceholderEdit::default()));
            }
            Token::Add => {
                let (k, entry) = current
                    .as_mut()
                    .ok_or_else(|| EditError::MalformedOutput("<add> before any placeholder".into()))?;
                if entry.delete {
                    return Err(EditError::MalformedOutput(format!(
                        "<add> after <del> at placeholder <{k}>"
                    )));
                }
                match tokens.next() {
                    Some(Token::Line(text)) => entry.insertions.push(text.clone()),
                    _ => {
                        return Err(EditError::MalformedOutput(format!(
                            "<add> without a line at placeholder <{k}>"
                        )))
                    }
                }
            }
            Token::Del => {
                let (k, entry) = current
                    .as_mut()
                    .ok_or_else(|| EditError::MalformedOutput("<del> before any placeholder".into()))?;
                if entry.delete {
                    return Err(EditError::MalformedOutput(format!("repeated <del> at <{k}>")));
                }
                if input_statuses[region.line_of(*k) - 1] == LineStatus::Add {
                    return Err(EditError::InvalidDelete { placeholder: *k });
                }
                entry.delete = true;
            }
            Token::Line(text) => {
                return Err(EditError::MalformedOutput(format!(
                    "stray text {text:?} outside an insertion"
                )))
            }
        }
    }
    if let Some((k, entry)) = current {
        edit.set(k, entry);
    }
    Ok(edit)
}

/// Substitutes each placeholder with its change, producing the combined diff
/// of the unit's prior statuses and the target edit.
pub fn apply_edit(
    unit: &[StatusedLine],
    region: EditRegion,
    edit: &TargetEdit,
) -> Result<LineDiff, EditError> {
    let statuses: Vec<LineStatus> = unit.iter().map(|l| l.status).collect();
    edit.validate(&statuses, region)?;
    let mut lines = Vec::with_capacity(unit.len() + edit.changed_lines());
    for (i, line) in unit.iter().enumerate() {
        let entry = region.placeholder_of(i + 1).and_then(|k| edit.get(k));
        match entry {
            None => lines.push(line.clone()),
            Some(entry) => {
                lines.extend(entry.insertions.iter().map(StatusedLine::add));
                let status = if entry.delete {
                    LineStatus::Del
                } else {
                    line.status
                };
                lines.push(StatusedLine::new(status, line.text.clone()));
            }
        }
    }
    Ok(LineDiff::new(lines))
}
