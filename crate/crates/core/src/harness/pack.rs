use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::Llm;
use crate::meta::{
    execute_prompts, meta_prompt_morphism, CandidateKind, ExecOutcome, GeneratedPromptSet,
    MetaPromptTemplate, TaskBinding, TaskKind,
};

use super::corpus::CorpusItem;
use super::{HarnessError, SCHEMA_VERSION};

/// Generated prompts kept per entry; the rest of the list is dropped.
pub const META_PER_ENTRY: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub kind: CandidateKind,
    pub prompt: String,
    pub output: ExecOutcome,
}

/// One entry to be ranked: a context and its candidates in presentation
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationItem {
    pub item_id: String,
    pub source: String,
    pub fields: BTreeMap<String, String>,
    pub context: String,
    pub candidates: Vec<Candidate>,
    pub shuffle_seed: u64,
    /// All generated prompts, including those not kept as candidates.
    pub generated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackFailure {
    pub item_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationPack {
    pub schema_version: u32,
    pub task: TaskKind,
    pub template: String,
    pub entries: Vec<AnnotationItem>,
    pub failures: Vec<PackFailure>,
}

impl AnnotationPack {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let pack: Self = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Invalid(format!("{}: {e}", path.display())))?;
        if pack.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Invalid(format!(
                "pack schema version {} (expected {SCHEMA_VERSION})",
                pack.schema_version
            )));
        }
        Ok(pack)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pack serializes") + "\n"
    }

    pub fn entry(&self, item_id: &str) -> Option<&AnnotationItem> {
        self.entries.iter().find(|e| e.item_id == item_id)
    }

    /// Candidate kinds by id for one entry.
    pub fn kinds(&self, item_id: &str) -> Option<BTreeMap<&str, CandidateKind>> {
        self.entry(item_id).map(|e| {
            e.candidates
                .iter()
                .map(|c| (c.id.as_str(), c.kind))
                .collect()
        })
    }
}

/// Generated prompts for one corpus item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedEntry {
    pub item: CorpusItem,
    pub set: GeneratedPromptSet,
}

/// Output of the generation stage, before execution and shuffling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRun {
    pub schema_version: u32,
    pub task: TaskKind,
    pub template: String,
    pub entries: Vec<GeneratedEntry>,
    pub failures: Vec<PackFailure>,
}

impl GenerationRun {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run serializes") + "\n"
    }
}

/// Runs the meta-prompt morphism on every item. Items whose call or parse
/// fails are listed in [`GenerationRun::failures`].
pub fn generate_prompt_sets(
    items: &[CorpusItem],
    binding: &TaskBinding,
    template: &MetaPromptTemplate,
    llm: &Llm,
) -> GenerationRun {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for item in items {
        match meta_prompt_morphism(binding, &item.fields, template, llm) {
            Ok(set) => entries.push(GeneratedEntry {
                item: item.clone(),
                set,
            }),
            Err(e) => {
                tracing::warn!(item = %item.id, error = %e, "meta-prompt failed");
                failures.push(PackFailure {
                    item_id: item.id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    GenerationRun {
        schema_version: SCHEMA_VERSION,
        task: binding.kind(),
        template: template.name.clone(),
        entries,
        failures,
    }
}

/// Executes the first [`META_PER_ENTRY`] generated prompts and the
/// baselines on each entry's context, then shuffles the candidates. The
/// presentation order of entry `i` comes from stream `i` of a ChaCha8
/// generator seeded with `seed`.
pub fn pack_generated(
    run: &GenerationRun,
    binding: &TaskBinding,
    llm: &Llm,
    seed: u64,
    jobs: usize,
) -> AnnotationPack {
    let entries = run
        .entries
        .iter()
        .enumerate()
        .map(|(i, GeneratedEntry { item, set })| {
            let mut specs: Vec<(String, CandidateKind, String)> = set
                .prompts
                .iter()
                .take(META_PER_ENTRY)
                .enumerate()
                .map(|(j, p)| (format!("m{}", j + 1), CandidateKind::Meta, p.clone()))
                .collect();
            specs.extend(
                binding
                    .baselines()
                    .iter()
                    .enumerate()
                    .map(|(j, b)| (format!("b{}", j + 1), b.kind, b.prompt.clone())),
            );
            let prompts: Vec<String> = specs.iter().map(|s| s.2.clone()).collect();
            let outputs = execute_prompts(llm, &set.source_context, &prompts, jobs);
            let mut candidates: Vec<Candidate> = specs
                .into_iter()
                .zip(outputs)
                .map(|((id, kind, prompt), output)| Candidate {
                    id,
                    kind,
                    prompt,
                    output,
                })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            candidates.shuffle(&mut rng);
            AnnotationItem {
                item_id: item.id.clone(),
                source: item.source.clone(),
                fields: item.fields.clone(),
                context: set.source_context.clone(),
                candidates,
                shuffle_seed: seed,
                generated: set.prompts.clone(),
            }
        })
        .collect();
    AnnotationPack {
        schema_version: SCHEMA_VERSION,
        task: run.task,
        template: run.template.clone(),
        entries,
        failures: run.failures.clone(),
    }
}

/// Generation followed by packing; failed items are listed in
/// [`AnnotationPack::failures`] and the rest are still emitted.
pub fn build_annotation_pack(
    items: &[CorpusItem],
    binding: &TaskBinding,
    template: &MetaPromptTemplate,
    llm: &Llm,
    seed: u64,
    jobs: usize,
) -> AnnotationPack {
    pack_generated(
        &generate_prompt_sets(items, binding, template, llm),
        binding,
        llm,
        seed,
        jobs,
    )
}
