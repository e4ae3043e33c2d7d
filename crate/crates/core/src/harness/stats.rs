use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::meta::CandidateKind;

use super::pack::AnnotationPack;
use super::rankings::{RankingRecord, Target};
use super::HarnessError;

/// Counts of how often each candidate id landed at each rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    pub target: Target,
    pub records: usize,
    pub candidates: Vec<String>,
    /// `counts[c][r]`: times candidate `c` was ranked `r + 1`.
    pub counts: Vec<Vec<u64>>,
}

impl RankMatrix {
    /// Each row divided by its sum.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if total == 0 {
                            0.0
                        } else {
                            c as f64 / total as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let ranks = self.counts.first().map_or(0, Vec::len);
        let mut out = String::from("candidate");
        for r in 1..=ranks {
            out.push_str(&format!(",rank_{r}"));
        }
        out.push('\n');
        for (c, row) in self.candidates.iter().zip(&self.counts) {
            out.push_str(c);
            for n in row {
                out.push_str(&format!(",{n}"));
            }
            out.push('\n');
        }
        out
    }
}

fn of_target(records: &[RankingRecord], target: Target) -> impl Iterator<Item = &RankingRecord> {
    records.iter().filter(move |r| r.target == target)
}

pub fn rank_matrix(records: &[RankingRecord], target: Target) -> Result<RankMatrix, HarnessError> {
    let recs: Vec<&RankingRecord> = of_target(records, target).collect();
    if recs.is_empty() {
        return Err(HarnessError::Invalid(format!("no {target} rankings")));
    }
    let ranks = recs.iter().map(|r| r.ranking.len()).max().unwrap_or(0);
    let mut rows: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for r in &recs {
        for (pos, id) in r.ranking.iter().enumerate() {
            rows.entry(id.as_str()).or_insert_with(|| vec![0; ranks])[pos] += 1;
        }
    }
    Ok(RankMatrix {
        target,
        records: recs.len(),
        candidates: rows.keys().map(|s| s.to_string()).collect(),
        counts: rows.into_values().collect(),
    })
}

/// Mean 1-based rank per candidate id.
pub fn mean_ranks(records: &[RankingRecord], target: Target) -> BTreeMap<String, f64> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in of_target(records, target) {
        for (pos, id) in r.ranking.iter().enumerate() {
            let e = sums.entry(id.clone()).or_insert((0.0, 0));
            e.0 += (pos + 1) as f64;
            e.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(id, (s, n))| (id, s / n as f64))
        .collect()
}

/// Generated prompts versus everything hard-coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Meta,
    Baseline,
}

impl Group {
    pub fn contains(self, kind: CandidateKind) -> bool {
        match self {
            Group::Meta => kind == CandidateKind::Meta,
            Group::Baseline => kind != CandidateKind::Meta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareDefinition {
    /// Share of all top-k positions held by the group.
    #[default]
    Slots,
    /// Share of records with at least one group candidate in the top k.
    AnyInTopK,
}

/// How often `group` occupies the top `k` ranks.
pub fn topk_share(
    records: &[RankingRecord],
    pack: &AnnotationPack,
    target: Target,
    group: Group,
    k: usize,
    definition: ShareDefinition,
) -> Result<f64, HarnessError> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for r in of_target(records, target) {
        let kinds = pack
            .kinds(&r.item_id)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown item {}", r.item_id)))?;
        if k == 0 || k > r.ranking.len() {
            return Err(HarnessError::Invalid(format!(
                "k = {k} but item {} has {} candidates",
                r.item_id,
                r.ranking.len()
            )));
        }
        let mut in_group = 0;
        for id in &r.ranking[..k] {
            let kind = kinds.get(id.as_str()).ok_or_else(|| {
                HarnessError::Invalid(format!("unknown candidate {id} in item {}", r.item_id))
            })?;
            if group.contains(*kind) {
                in_group += 1;
            }
        }
        match definition {
            ShareDefinition::Slots => {
                hits += in_group;
                total += k;
            }
            ShareDefinition::AnyInTopK => {
                hits += usize::from(in_group > 0);
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(HarnessError::Invalid(format!("no {target} rankings")));
    }
    Ok(hits as f64 / total as f64)
}
