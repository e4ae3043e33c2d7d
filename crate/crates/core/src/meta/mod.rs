//! Meta-prompting: templates that ask a model for prompts, list parsing,
//! and the task-agnostic meta-prompt morphism with its execution step.

mod engine;
mod parse;
mod template;

pub use engine::{
    execute_prompt_set, execute_prompts, meta_prompt_morphism, Baseline, CandidateKind,
    ExecOutcome, GeneratedPromptSet, TaskBinding, TaskKind, DEFAULT_EXAMPLES,
};
pub use parse::{format_numbered_list, parse_numbered_list, ListParseError, ParsedList};
pub use template::{
    ListMarker, MetaPromptTemplate, TaskPrompt, CREATIVITY_BODY, FULL_BODY, IDEATION_BODY,
    SHORT_BODY,
};

use crate::backend::BackendError;
use crate::prompt::PromptError;

#[derive(Debug, thiserror::Error)]
pub enum MetaError {
    #[error("template: {0}")]
    Template(String),
    #[error("{0}")]
    Io(String),
    #[error("context: {0}")]
    Context(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Parse(#[from] ListParseError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}
