//! Small text helpers shared by the mock backend and corpus ingestion.

/// Splits text into sentences at `.`, `!` or `?` (plus any closing quotes or
/// brackets) followed by whitespace or the end of input. Pieces are trimmed
/// and empty pieces dropped.
pub fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len()
                && matches!(
                    chars[j].1,
                    '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '”' | '’'
                )
            {
                j += 1;
            }
            if j == chars.len() || chars[j].1.is_whitespace() {
                let end = if j == chars.len() {
                    text.len()
                } else {
                    chars[j].0
                };
                let piece = text[start..end].trim();
                if !piece.is_empty() {
                    out.push(piece);
                }
                start = end;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Collapses every whitespace run to a single space and trims the ends.
pub fn squash_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_terminators() {
        assert_eq!(
            sentences("One. Two! Three? Four"),
            vec!["One.", "Two!", "Three?", "Four"]
        );
    }

    #[test]
    fn keeps_abbreviation_like_dots_inside_tokens() {
        assert_eq!(
            sentences("Version 3.0.0 shipped. Done."),
            vec!["Version 3.0.0 shipped.", "Done."]
        );
    }

    #[test]
    fn closing_quotes_stay_attached() {
        assert_eq!(
            sentences("He said \"go.\" Then left."),
            vec!["He said \"go.\"", "Then left."]
        );
    }

    #[test]
    fn empty_input() {
        assert!(sentences("   ").is_empty());
        assert_eq!(squash_whitespace("  a \n b  "), "a b");
    }
}
