use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::meta::{CandidateKind, TaskKind};

use super::pack::AnnotationPack;
use super::rankings::{RankingRecord, Target};
use super::stats::{mean_ranks, rank_matrix, topk_share, Group, RankMatrix, ShareDefinition};
use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonMode, WilcoxonResult};
use super::{HarnessError, SCHEMA_VERSION};

/// How annotators' records become paired observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Every record is its own observation.
    #[default]
    Independent,
    /// One observation per item, from each candidate's median rank.
    PerItemMedian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub k: usize,
    pub aggregation: Aggregation,
    pub mode: WilcoxonMode,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            k: 3,
            aggregation: Aggregation::Independent,
            mode: WilcoxonMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: Target,
    pub records: usize,
    pub rank_matrix: RankMatrix,
    pub mean_ranks: BTreeMap<String, f64>,
    /// Share of top-k slots held by generated prompts.
    pub topk_share_meta: f64,
    /// Share of records with a generated prompt in the top k.
    pub topk_any_meta: f64,
    /// `(meta mean rank, baseline mean rank)` per observation.
    pub pairs: Vec<(f64, f64)>,
    pub wilcoxon: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub task: TaskKind,
    pub options: AnalysisOptions,
    pub targets: Vec<TargetReport>,
    /// Prompts and outputs tested together, when both were ranked.
    pub pooled: Option<WilcoxonResult>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Splits per-candidate ranks into the meta and baseline means.
fn group_means(
    ranks: &BTreeMap<String, f64>,
    kinds: &BTreeMap<&str, CandidateKind>,
) -> Result<(f64, f64), HarnessError> {
    let mut meta = Vec::new();
    let mut base = Vec::new();
    for (id, r) in ranks {
        match kinds.get(id.as_str()) {
            Some(CandidateKind::Meta) => meta.push(*r),
            Some(_) => base.push(*r),
            None => return Err(HarnessError::Invalid(format!("unknown candidate {id}"))),
        }
    }
    if meta.is_empty() || base.is_empty() {
        return Err(HarnessError::Invalid(
            "entry lacks meta or baseline candidates".into(),
        ));
    }
    Ok((mean(&meta), mean(&base)))
}

fn observations(
    records: &[&RankingRecord],
    pack: &AnnotationPack,
    aggregation: Aggregation,
) -> Result<Vec<(f64, f64)>, HarnessError> {
    let kinds_of = |item: &str| {
        pack.kinds(item)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown item {item}")))
    };
    let ranks_of = |r: &RankingRecord| -> BTreeMap<String, f64> {
        r.ranking
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), (i + 1) as f64))
            .collect()
    };
    match aggregation {
        Aggregation::Independent => records
            .iter()
            .map(|r| group_means(&ranks_of(r), &kinds_of(&r.item_id)?))
            .collect(),
        Aggregation::PerItemMedian => {
            let mut by_item: BTreeMap<&str, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
            for r in records {
                let item = by_item.entry(r.item_id.as_str()).or_default();
                for (id, rank) in ranks_of(r) {
                    item.entry(id).or_default().push(rank);
                }
            }
            by_item
                .into_iter()
                .map(|(item, ranks)| {
                    let medians = ranks.into_iter().map(|(id, rs)| (id, median(rs))).collect();
                    group_means(&medians, &kinds_of(item)?)
                })
                .collect()
        }
    }
}

/// Rank matrices, top-k shares, mean ranks and a signed-rank test of meta
/// against baseline mean ranks, for each ranked target and pooled.
pub fn analyze(
    records: &[RankingRecord],
    pack: &AnnotationPack,
    options: AnalysisOptions,
) -> Result<AnalysisReport, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Invalid("no ranking records".into()));
    }
    let mut targets = Vec::new();
    for target in Target::ALL {
        let recs: Vec<&RankingRecord> = records.iter().filter(|r| r.target == target).collect();
        if recs.is_empty() {
            continue;
        }
        let pairs = observations(&recs, pack, options.aggregation)?;
        targets.push(TargetReport {
            target,
            records: recs.len(),
            rank_matrix: rank_matrix(records, target)?,
            mean_ranks: mean_ranks(records, target),
            topk_share_meta: topk_share(
                records,
                pack,
                target,
                Group::Meta,
                options.k,
                ShareDefinition::Slots,
            )?,
            topk_any_meta: topk_share(
                records,
                pack,
                target,
                Group::Meta,
                options.k,
                ShareDefinition::AnyInTopK,
            )?,
            wilcoxon: wilcoxon_signed_rank(&pairs, options.mode)?,
            pairs,
        });
    }
    let pooled = if targets.len() > 1 {
        let all: Vec<(f64, f64)> = targets
            .iter()
            .flat_map(|t| t.pairs.iter().copied())
            .collect();
        Some(wilcoxon_signed_rank(&all, options.mode)?)
    } else {
        None
    };
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        task: pack.task,
        options,
        targets,
        pooled,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Writes `summary.json` and one `rank_matrix_<target>.csv` per target;
    /// returns the paths written.
    pub fn write_bundle(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        let io = |p: &Path, e: std::io::Error| HarnessError::Io(format!("{}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        let summary = dir.join("summary.json");
        std::fs::write(&summary, self.to_json()).map_err(|e| io(&summary, e))?;
        written.push(summary);
        for t in &self.targets {
            let p = dir.join(format!("rank_matrix_{}.csv", t.target));
            std::fs::write(&p, t.rank_matrix.to_csv()).map_err(|e| io(&p, e))?;
            written.push(p);
        }
        Ok(written)
    }
}
