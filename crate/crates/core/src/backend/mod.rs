//! Text-to-text backends: a deterministic rule-based mock, an HTTP client
//! and a record/replay cache, behind a single token-budgeted wrapper.

pub mod live;
pub mod mock;
pub mod replay;
pub mod tokenize;

use std::sync::Arc;

use thiserror::Error;

pub use live::{LiveBackend, LiveConfig, RetryPolicy};
pub use mock::{MockBackend, MockRuleSet, PatternSpec, RewriteSpec, RuleSpec, DEFAULT_REFUSAL};
pub use replay::{CacheEntry, CachedRequest, ReplayBackend, ReplayMode};
pub use tokenize::{enforce_budget, BudgetDecision, Token, TokenBudget, TokenScheme, Tokenizer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("prompt of {prompt_tokens} tokens plus {max_output} output tokens exceeds budget {k}")]
    BudgetExceeded {
        prompt_tokens: usize,
        max_output: usize,
        k: usize,
    },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("no cached response for request {hash}")]
    CacheMiss { hash: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("could not decode: {0}")]
    Decode(String),
    #[error("invalid mock rules: {0}")]
    Rules(String),
}

/// A single completion call. The prompt is guaranteed non-blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionRequest {
    prompt: String,
    max_output_tokens: usize,
    seed: u64,
}

impl CompletionRequest {
    pub fn new(
        prompt: impl Into<String>,
        max_output_tokens: usize,
        seed: u64,
    ) -> Result<Self, BackendError> {
        let prompt = prompt.into();
        if prompt.trim().is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        Ok(Self {
            prompt,
            max_output_tokens,
            seed,
        })
    }

    pub fn prompt(&self) -> &str {
        &self.prompt
    }

    pub fn max_output_tokens(&self) -> usize {
        self.max_output_tokens
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(req)
    }
}

/// A backend plus the tokenizer and budget every call is checked against.
#[derive(Clone)]
pub struct Llm {
    backend: Arc<dyn Backend>,
    pub tokenizer: Tokenizer,
    pub budget: TokenBudget,
    pub max_output_tokens: usize,
    pub seed: u64,
}

impl Llm {
    pub const DEFAULT_MAX_OUTPUT: usize = 512;

    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self {
            backend,
            tokenizer: Tokenizer::default(),
            budget: TokenBudget::default(),
            max_output_tokens: Self::DEFAULT_MAX_OUTPUT,
            seed: 0,
        }
    }

    pub fn with_budget(mut self, budget: TokenBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_max_output(mut self, n: usize) -> Self {
        self.max_output_tokens = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    pub fn check(&self, prompt: &str) -> BudgetDecision {
        enforce_budget(prompt, self.max_output_tokens, self.budget, &self.tokenizer)
    }

    /// Runs `prompt` with the default output limit and seed.
    pub fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        self.complete_with(prompt, self.max_output_tokens, self.seed)
    }

    pub fn complete_with(
        &self,
        prompt: &str,
        max_output: usize,
        seed: u64,
    ) -> Result<String, BackendError> {
        let req = CompletionRequest::new(prompt, max_output, seed)?;
        if let BudgetDecision::Reject {
            prompt_tokens,
            max_output,
            k,
        } = enforce_budget(prompt, max_output, self.budget, &self.tokenizer)
        {
            return Err(BackendError::BudgetExceeded {
                prompt_tokens,
                max_output,
                k,
            });
        }
        self.backend.complete(&req)
    }
}
