use serde::{Deserialize, Serialize};

/// Items recovered from a numbered-list completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedList {
    pub items: Vec<String>,
    /// Text followed the list and was ignored.
    pub extra_text: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expected {expected} list items, found {}", .found.len())]
pub struct ListParseError {
    pub expected: usize,
    /// Whatever items were recovered.
    pub found: Vec<String>,
}

/// Splits `1) text` / `1. text` into the number and the remainder.
fn split_marker(line: &str) -> Option<(usize, &str)> {
    let digits = line.len() - line.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 || digits > 3 {
        return None;
    }
    let rest = &line[digits..];
    let rest = rest.strip_prefix(')').or_else(|| rest.strip_prefix('.'))?;
    if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
        return None;
    }
    Some((line[..digits].parse().ok()?, rest.trim()))
}

/// Extracts exactly `expected` items from a numbered list.
///
/// With `seeded`, the prompt already ended in the first marker, so leading
/// text without a marker is item 1. Unmarked lines continue the current item
/// (joined with a space). After `expected` items, any further marker, or
/// text past a blank line, ends the list and sets [`ParsedList::extra_text`]. Unmarked text directly after the last item
/// cannot be told apart from a continuation and is joined to it.
pub fn parse_numbered_list(
    completion: &str,
    expected: usize,
    seeded: bool,
) -> Result<ParsedList, ListParseError> {
    let mut items: Vec<String> = Vec::new();
    let mut extra_text = false;
    let mut after_blank = false;
    for raw in completion.lines() {
        let line = raw.trim();
        if line.is_empty() {
            after_blank = !items.is_empty();
            continue;
        }
        let full = items.len() >= expected;
        match split_marker(line) {
            Some(_) if full => {
                extra_text = true;
                break;
            }
            Some((_, text)) => items.push(text.to_string()),
            // Preamble before an unseeded list is skipped.
            None if items.is_empty() => {
                if seeded {
                    items.push(line.to_string());
                }
            }
            None if full && after_blank => {
                extra_text = true;
                break;
            }
            None => {
                let last = items.last_mut().expect("non-empty");
                if !last.is_empty() {
                    last.push(' ');
                }
                last.push_str(line);
            }
        }
        after_blank = false;
    }
    items.retain(|s| !s.is_empty());
    if items.len() < expected {
        return Err(ListParseError {
            expected,
            found: items,
        });
    }
    if items.len() > expected {
        items.truncate(expected);
        extra_text = true;
    }
    Ok(ParsedList { items, extra_text })
}

/// Writes items as `1) a\n2) b…`.
pub fn format_numbered_list(items: &[String], marker: super::ListMarker) -> String {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{} {s}", marker.format(i + 1)))
        .collect::<Vec<_>>()
        .join("\n")
}
