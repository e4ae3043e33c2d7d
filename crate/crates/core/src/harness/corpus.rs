use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::meta::TaskKind;
use crate::text::sentences;

use super::HarnessError;

/// A raw corpus document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub source: String,
    pub text: String,
}

/// One sampled task input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusItem {
    pub id: String,
    pub source: String,
    /// LEFT/RIGHT for Creativity, LEFT/CONTENT/RIGHT for Ideation.
    pub fields: BTreeMap<String, String>,
}

/// Sentences of context kept on each side of an Ideation window.
const IDEATION_CONTEXT: usize = 2;

/// Reads JSON lines (`{"id", "text", "source"?}`) when the first non-blank
/// line starts with `{`, otherwise plain text with documents separated by
/// blank lines.
pub fn parse_corpus(text: &str, source: &str) -> Result<Vec<Document>, HarnessError> {
    let json = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('{'));
    let mut docs = Vec::new();
    if json {
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let mut d: Document = serde_json::from_str(line)
                .map_err(|e| HarnessError::Corpus(format!("{source} line {}: {e}", i + 1)))?;
            if d.source.is_empty() {
                d.source = source.to_string();
            }
            docs.push(d);
        }
    } else {
        let mut para: Vec<&str> = Vec::new();
        let flush = |para: &mut Vec<&str>, docs: &mut Vec<Document>| {
            if !para.is_empty() {
                docs.push(Document {
                    id: format!("doc-{:03}", docs.len() + 1),
                    source: source.to_string(),
                    text: para.join(" "),
                });
                para.clear();
            }
        };
        for line in text.lines() {
            if line.trim().is_empty() {
                flush(&mut para, &mut docs);
            } else {
                para.push(line.trim());
            }
        }
        flush(&mut para, &mut docs);
    }
    Ok(docs)
}

fn split(
    doc: &Document,
    kind: TaskKind,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<String, String>, HarnessError> {
    let s = sentences(&doc.text);
    let join = |xs: &[&str]| xs.join(" ");
    let too_short = || HarnessError::TooShort {
        id: doc.id.clone(),
        sentences: s.len(),
    };
    let mut f = BTreeMap::new();
    match kind {
        TaskKind::Creativity => {
            if s.len() < 2 {
                return Err(too_short());
            }
            let at = rng.gen_range(1..s.len());
            f.insert("LEFT".into(), join(&s[..at]));
            f.insert("RIGHT".into(), join(&s[at..]));
        }
        TaskKind::Ideation => {
            if s.is_empty() {
                return Err(too_short());
            }
            let c = rng.gen_range(0..s.len());
            f.insert(
                "LEFT".into(),
                join(&s[c.saturating_sub(IDEATION_CONTEXT)..c]),
            );
            f.insert("CONTENT".into(), s[c].to_string());
            f.insert(
                "RIGHT".into(),
                join(&s[c + 1..(c + 1 + IDEATION_CONTEXT).min(s.len())]),
            );
        }
    }
    Ok(f)
}

/// Draws `n` documents without replacement and cuts each into task fields,
/// all from one seeded stream.
pub fn ingest_corpus(
    path: &Path,
    kind: TaskKind,
    n: usize,
    seed: u64,
) -> Result<Vec<CorpusItem>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let source = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus");
    let docs = parse_corpus(&text, source)?;
    if n > docs.len() {
        return Err(HarnessError::NotEnough {
            requested: n,
            available: docs.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, docs.len(), n);
    picks
        .iter()
        .map(|i| {
            let d = &docs[i];
            Ok(CorpusItem {
                id: d.id.clone(),
                source: d.source.clone(),
                fields: split(d, kind, &mut rng)?,
            })
        })
        .collect()
}
