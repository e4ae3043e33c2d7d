use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pack::AnnotationPack;
use super::HarnessError;

/// What the annotator ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Prompts,
    Outputs,
}

impl Target {
    pub const ALL: [Target; 2] = [Target::Prompts, Target::Outputs];
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Prompts => "prompts",
            Target::Outputs => "outputs",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "prompts" | "prompt" => Ok(Target::Prompts),
            "outputs" | "output" => Ok(Target::Outputs),
            other => Err(format!("unknown target {other:?}")),
        }
    }
}

/// One annotator's strict ranking of an entry's candidates, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub target: Target,
    pub ranking: Vec<String>,
}

impl RankingRecord {
    /// 1-based rank of `id`, if ranked.
    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.ranking.iter().position(|c| c == id).map(|p| p + 1)
    }
}

/// Ranking file layouts.
///
/// CSV has the header `item_id,annotator_id,target,ranking` with rankings
/// written `m1>b2>…`. JSON lines carry the same keys with `ranking` as an
/// array of ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingFormat {
    Csv,
    JsonLines,
}

#[derive(Deserialize)]
struct CsvRow {
    item_id: String,
    annotator_id: String,
    target: String,
    ranking: String,
}

#[derive(Deserialize)]
struct JsonRow {
    item_id: String,
    annotator_id: String,
    target: Target,
    ranking: Vec<String>,
}

fn validate(
    row: usize,
    rec: &RankingRecord,
    pack: &AnnotationPack,
    seen: &mut BTreeSet<(String, String, Target)>,
) -> Result<(), HarnessError> {
    let entry = pack
        .entry(&rec.item_id)
        .ok_or_else(|| HarnessError::Reference {
            row,
            what: "item".into(),
            id: rec.item_id.clone(),
        })?;
    let mut ranked = BTreeSet::new();
    for id in &rec.ranking {
        if id.contains('=') {
            return Err(HarnessError::Tie {
                row,
                id: id.clone(),
            });
        }
        if !entry.candidates.iter().any(|c| &c.id == id) {
            return Err(HarnessError::Reference {
                row,
                what: "candidate".into(),
                id: id.clone(),
            });
        }
        if !ranked.insert(id.as_str()) {
            return Err(HarnessError::Tie {
                row,
                id: id.clone(),
            });
        }
    }
    let mut ids: Vec<&str> = entry.candidates.iter().map(|c| c.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(missing) = ids.iter().find(|id| !ranked.contains(*id)) {
        return Err(HarnessError::Incomplete {
            row,
            id: missing.to_string(),
        });
    }
    if !seen.insert((rec.item_id.clone(), rec.annotator_id.clone(), rec.target)) {
        return Err(HarnessError::Duplicate {
            row,
            item: rec.item_id.clone(),
            annotator: rec.annotator_id.clone(),
            target: rec.target.to_string(),
        });
    }
    Ok(())
}

/// Parses and validates rankings against the pack they annotate. Row
/// numbers in errors are file line numbers.
pub fn parse_rankings(
    text: &str,
    format: RankingFormat,
    pack: &AnnotationPack,
) -> Result<Vec<RankingRecord>, HarnessError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    match format {
        RankingFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let headers = rdr
                .headers()
                .map_err(|e| HarnessError::Ranking {
                    row: 1,
                    message: e.to_string(),
                })?
                .clone();
            for result in rdr.records() {
                let row_err = |row: usize, message: String| HarnessError::Ranking { row, message };
                let record = result.map_err(|e| {
                    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
                    row_err(row, e.to_string())
                })?;
                let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
                let r: CsvRow = record
                    .deserialize(Some(&headers))
                    .map_err(|e| row_err(row, e.to_string()))?;
                let target = r.target.parse().map_err(|m| row_err(row, m))?;
                let rec = RankingRecord {
                    item_id: r.item_id,
                    annotator_id: r.annotator_id,
                    target,
                    ranking: r.ranking.split('>').map(|s| s.trim().to_string()).collect(),
                };
                validate(row, &rec, pack, &mut seen)?;
                out.push(rec);
            }
        }
        RankingFormat::JsonLines => {
            for (i, line) in text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
            {
                let row = i + 1;
                let r: JsonRow = serde_json::from_str(line).map_err(|e| HarnessError::Ranking {
                    row,
                    message: e.to_string(),
                })?;
                let rec = RankingRecord {
                    item_id: r.item_id,
                    annotator_id: r.annotator_id,
                    target: r.target,
                    ranking: r.ranking,
                };
                validate(row, &rec, pack, &mut seen)?;
                out.push(rec);
            }
        }
    }
    Ok(out)
}

/// Reads a ranking file; `.jsonl`/`.json` files are JSON lines, anything
/// else CSV.
pub fn ingest_rankings(
    path: &Path,
    pack: &AnnotationPack,
) -> Result<Vec<RankingRecord>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl" | "json") => RankingFormat::JsonLines,
        _ => RankingFormat::Csv,
    };
    parse_rankings(&text, format, pack)
}
