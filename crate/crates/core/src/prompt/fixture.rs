use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::backend::{Backend, Llm, MockBackend, MockRuleSet, TokenBudget, Tokenizer};

use super::category::{PromptArrow, PromptCategory, StrObject};
use super::task::{TaskCategory, TaskSpec};
use super::PromptError;

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PromptError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PromptError::Fixture(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| PromptError::Fixture(format!("{}: {e}", path.display())))
}

/// JSON description of a prompt category, its mock semantics, and any
/// task-categories inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptFixture {
    pub name: String,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub max_output_tokens: Option<usize>,
    #[serde(default)]
    pub tokenizer: Option<Tokenizer>,
    #[serde(default)]
    pub mock: MockRuleSet,
    pub objects: Vec<StrObject>,
    #[serde(default)]
    pub arrows: Vec<PromptArrow>,
    #[serde(default)]
    pub relations: Vec<(Vec<String>, Vec<String>)>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

impl PromptFixture {
    pub fn from_path(path: &Path) -> Result<Self, PromptError> {
        read_json(path)
    }

    pub fn mock_backend(&self) -> Result<MockBackend, PromptError> {
        Ok(MockBackend::new(self.mock.clone())?)
    }

    /// Wraps `backend` with this fixture's tokenizer and budget settings.
    pub fn llm(&self, backend: Arc<dyn Backend>) -> Llm {
        let mut llm = Llm::new(backend);
        if let Some(k) = self.budget {
            llm = llm.with_budget(TokenBudget::new(k));
        }
        if let Some(n) = self.max_output_tokens {
            llm = llm.with_max_output(n);
        }
        if let Some(t) = &self.tokenizer {
            llm.tokenizer = t.clone();
        }
        llm
    }

    pub fn build(&self, backend: Arc<dyn Backend>) -> Result<PromptCategory, PromptError> {
        PromptCategory::new(
            &self.name,
            self.llm(backend),
            self.objects.clone(),
            self.arrows.clone(),
            self.relations.clone(),
        )
    }

    /// Builds the category over the fixture's own mock rules.
    pub fn build_mock(&self) -> Result<PromptCategory, PromptError> {
        self.build(Arc::new(self.mock_backend()?))
    }

    pub fn task(&self, ambient: &PromptCategory, name: &str) -> Result<TaskCategory, PromptError> {
        let spec = self.tasks.iter().find(|t| t.name == name).ok_or_else(|| {
            PromptError::Fixture(format!("fixture {} has no task {name}", self.name))
        })?;
        TaskCategory::new(ambient, spec)
    }
}
