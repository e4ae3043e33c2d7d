//! The prompt category: string objects under a token budget, prompt
//! templates as arrows evaluated by a backend, concatenation as tensor, and
//! task-categories included into it.

mod category;
mod fixture;
mod rewrite;
mod task;
mod template;

pub use category::{
    tensor_strings, ExponentialObject, Membership, PromptArrow, PromptCategory, StrObject,
    TensorArrow, TwoSlotArrow, IDENTITY_TEMPLATE, UNIT_OBJECT,
};
pub use fixture::PromptFixture;
pub use rewrite::{
    build_duality_functor, check_lemma1, DualityFunctor, DualitySpec, Lemma1Options, Lemma1Outcome,
    RewriteTable, REWRITE_SEARCH_PROMPT,
};
pub use task::{TaskCategory, TaskSpec};
pub use template::{Segment, Template, TemplateError};

use crate::backend::BackendError;
use crate::cat::CatError;

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{what}: {source}")]
    Budget { what: String, source: BackendError },
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("invalid object: {0}")]
    Object(String),
    #[error("task {task}: {arrow} sends {witness:?} to {output:?}, outside its codomain")]
    TaskMembership {
        task: String,
        arrow: String,
        witness: String,
        output: String,
    },
    #[error("task {task}: {item} is not in the ambient category")]
    NotInAmbient { task: String, item: String },
    #[error("arrow {arrow} has no dual")]
    MissingDual { arrow: String },
    #[error("rewrite table: {0}")]
    Rewrite(String),
    #[error("fixture: {0}")]
    Fixture(String),
}
