use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, BudgetDecision, Llm};
use crate::prompt::{tensor_strings, TaskCategory, Template};

use super::parse::parse_numbered_list;
use super::template::{MetaPromptTemplate, TaskPrompt};
use super::MetaError;

/// Examples used for templates with an examples slot.
pub const DEFAULT_EXAMPLES: [&str; 4] = [
    "Talk more about [topic].",
    "Tell me more about [topic].",
    "Elaborate on the [topic] in the last paragraph.",
    "Add a connecting sentence to make the transition [topic] smooth.",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Ideation,
    Creativity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Meta,
    Baseline,
    TaskDescription,
}

/// A hard-coded prompt compared against the generated ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Baseline {
    pub prompt: String,
    pub kind: CandidateKind,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Ideation => "ideation",
            TaskKind::Creativity => "creativity",
        }
    }

    pub fn prompt(self) -> TaskPrompt {
        match self {
            TaskKind::Ideation => TaskPrompt::ideation(),
            TaskKind::Creativity => TaskPrompt::creativity(),
        }
    }

    pub fn fields(self) -> &'static [&'static str] {
        match self {
            TaskKind::Ideation => &["LEFT", "CONTENT", "RIGHT"],
            TaskKind::Creativity => &["LEFT", "RIGHT"],
        }
    }

    pub fn baselines(self) -> Vec<Baseline> {
        let b = |p: &str, kind| Baseline {
            prompt: p.to_string(),
            kind,
        };
        match self {
            TaskKind::Ideation => vec![
                b("Make it more concise", CandidateKind::Baseline),
                b("Make it longer", CandidateKind::Baseline),
                b("Explain this to a 5 year old", CandidateKind::Baseline),
            ],
            TaskKind::Creativity => vec![
                b(
                    "Write a paragraph to connect the left text and right texts",
                    CandidateKind::TaskDescription,
                ),
                b(
                    "Insert a passage connecting the two passages",
                    CandidateKind::TaskDescription,
                ),
                b("", CandidateKind::Baseline),
            ],
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = MetaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ideation" | "idea" => Ok(TaskKind::Ideation),
            "creativity" | "creat" => Ok(TaskKind::Creativity),
            other => Err(MetaError::Context(format!("unknown task {other:?}"))),
        }
    }
}

/// A task-category together with its context layout and baselines.
#[derive(Debug, Clone)]
pub struct TaskBinding {
    task: TaskCategory,
    kind: TaskKind,
    layout: Template,
    baselines: Vec<Baseline>,
}

/// The task arrow that runs `prompt` after the context: `{X}\nprompt`.
fn baseline_arrow(prompt: &str) -> String {
    tensor_strings("{X}", prompt)
}

impl TaskBinding {
    /// Every baseline must be an arrow of `task`, in its `{X}\nP` form.
    pub fn new(task: TaskCategory, kind: TaskKind) -> Result<Self, MetaError> {
        let layout = Template::parse(kind.prompt().layout())
            .map_err(|e| MetaError::Template(e.to_string()))?;
        let labels = task.arrow_labels();
        let baselines = kind.baselines();
        for b in &baselines {
            let arrow = baseline_arrow(&b.prompt);
            if !labels.contains(&arrow) {
                return Err(MetaError::Context(format!(
                    "baseline {:?} is not an arrow of task {}",
                    b.prompt,
                    task.name()
                )));
            }
        }
        Ok(Self {
            task,
            kind,
            layout,
            baselines,
        })
    }

    pub fn task(&self) -> &TaskCategory {
        &self.task
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn baselines(&self) -> &[Baseline] {
        &self.baselines
    }

    pub fn fields(&self) -> &'static [&'static str] {
        self.kind.fields()
    }

    /// Fills the task's input layout. The keys must be exactly the fields.
    pub fn render_context(&self, values: &BTreeMap<String, String>) -> Result<String, MetaError> {
        let fields = self.fields();
        if let Some(k) = values.keys().find(|k| !fields.contains(&k.as_str())) {
            return Err(MetaError::Context(format!(
                "unknown field {k} for {}",
                self.kind.name()
            )));
        }
        let pairs: Vec<(&str, &str)> = fields
            .iter()
            .map(|f| {
                values.get(*f).map(|v| (*f, v.as_str())).ok_or_else(|| {
                    MetaError::Context(format!("missing field {f} for {}", self.kind.name()))
                })
            })
            .collect::<Result<_, _>>()?;
        self.layout
            .render(&pairs)
            .map_err(|e| MetaError::Template(e.to_string()))
    }
}

/// Output of one meta-prompt call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedPromptSet {
    pub source_context: String,
    pub meta_prompt: String,
    pub prompts: Vec<String>,
    pub raw_completion: String,
    /// The completion carried text after the list.
    pub extra_text: bool,
}

fn budget_error(what: &str, d: BudgetDecision) -> MetaError {
    match d {
        BudgetDecision::Reject {
            prompt_tokens,
            max_output,
            k,
        } => {
            tracing::debug!(what, prompt_tokens, max_output, k, "over budget");
            MetaError::Backend(BackendError::BudgetExceeded {
                prompt_tokens,
                max_output,
                k,
            })
        }
        BudgetDecision::Accept { .. } => unreachable!("accepted prompt reported as error"),
    }
}

/// Renders the context, asks the model for prompts with the task's
/// description in the task slot, and parses the numbered list.
///
/// Nothing here depends on which task the binding holds.
pub fn meta_prompt_morphism(
    binding: &TaskBinding,
    values: &BTreeMap<String, String>,
    template: &MetaPromptTemplate,
    llm: &Llm,
) -> Result<GeneratedPromptSet, MetaError> {
    let context = binding.render_context(values)?;
    let examples: Vec<String> = if template.has_examples() {
        DEFAULT_EXAMPLES.iter().map(|s| s.to_string()).collect()
    } else {
        Vec::new()
    };
    let meta_prompt = template.render(binding.task().description(), &context, &examples)?;
    let decision = llm.check(&meta_prompt);
    if matches!(decision, BudgetDecision::Reject { .. }) {
        return Err(budget_error("meta prompt", decision));
    }
    let raw = llm.complete(&meta_prompt)?;
    let parsed = parse_numbered_list(&raw, template.expected_count, true)?;
    if parsed.extra_text {
        tracing::warn!(
            task = binding.task().name(),
            "text after the prompt list was ignored"
        );
    }
    Ok(GeneratedPromptSet {
        source_context: context,
        meta_prompt,
        prompts: parsed.items,
        raw_completion: raw,
        extra_text: parsed.extra_text,
    })
}

/// Result of running one prompt on a context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExecOutcome {
    Output { text: String },
    Skipped { prompt_tokens: usize, k: usize },
    Failed { error: String },
}

impl ExecOutcome {
    pub fn output(&self) -> Option<&str> {
        match self {
            ExecOutcome::Output { text } => Some(text),
            _ => None,
        }
    }
}

fn execute_one(llm: &Llm, context: &str, prompt: &str) -> ExecOutcome {
    let full = tensor_strings(context, prompt);
    if let BudgetDecision::Reject {
        prompt_tokens, k, ..
    } = llm.check(&full)
    {
        return ExecOutcome::Skipped { prompt_tokens, k };
    }
    match llm.complete(&full) {
        Ok(text) => ExecOutcome::Output { text },
        Err(e) => ExecOutcome::Failed {
            error: e.to_string(),
        },
    }
}

/// Runs each prompt after `context`, up to `jobs` at a time. Outcomes follow
/// the order of `prompts`; failures are collected rather than returned.
pub fn execute_prompts(
    llm: &Llm,
    context: &str,
    prompts: &[String],
    jobs: usize,
) -> Vec<ExecOutcome> {
    let jobs = jobs.clamp(1, prompts.len().max(1));
    if jobs == 1 {
        return prompts
            .iter()
            .map(|p| execute_one(llm, context, p))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ExecOutcome>>> = Mutex::new(vec![None; prompts.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = prompts.get(i) else { break };
                let out = execute_one(llm, context, p);
                slots.lock().expect("result lock")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|o| o.expect("every index visited"))
        .collect()
}

pub fn execute_prompt_set(set: &GeneratedPromptSet, llm: &Llm, jobs: usize) -> Vec<ExecOutcome> {
    execute_prompts(llm, &set.source_context, &set.prompts, jobs)
}
