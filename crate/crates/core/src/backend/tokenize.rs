use serde::{Deserialize, Serialize};

pub const DEFAULT_BOS: &str = "<|bos|>";
pub const DEFAULT_EOS: &str = "<|eos|>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenScheme {
    /// One token per whitespace-delimited word. Whitespace rides along with
    /// the preceding word so that detokenization is exact.
    #[default]
    Whitespace,
    /// One token per UTF-8 byte.
    Byte,
}

/// An opaque token: the exact bytes it covers in the source string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token(Vec<u8>);

impl Token {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    pub scheme: TokenScheme,
    pub bos: String,
    pub eos: String,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self {
            scheme: TokenScheme::Whitespace,
            bos: DEFAULT_BOS.to_string(),
            eos: DEFAULT_EOS.to_string(),
        }
    }
}

impl Tokenizer {
    /// Fails when the sentinels coincide or are blank.
    pub fn new(
        scheme: TokenScheme,
        bos: impl Into<String>,
        eos: impl Into<String>,
    ) -> Result<Self, String> {
        let (bos, eos) = (bos.into(), eos.into());
        if bos == eos {
            return Err(format!("BOS and EOS must differ, both are {bos:?}"));
        }
        if bos.trim().is_empty() || eos.trim().is_empty() {
            return Err("BOS and EOS must be non-blank".into());
        }
        Ok(Self { scheme, bos, eos })
    }

    pub fn tokenize(&self, s: &str) -> Vec<Token> {
        match self.scheme {
            TokenScheme::Byte => s.bytes().map(|b| Token(vec![b])).collect(),
            TokenScheme::Whitespace => whitespace_tokens(s),
        }
    }

    pub fn detokenize(&self, tokens: &[Token]) -> String {
        let bytes: Vec<u8> = tokens.iter().flat_map(|t| t.0.iter().copied()).collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }

    pub fn count(&self, s: &str) -> usize {
        match self.scheme {
            TokenScheme::Byte => s.len(),
            TokenScheme::Whitespace => s.split_whitespace().count().max(usize::from(!s.is_empty())),
        }
    }

    /// Whether `s` ends with the end-of-sequence sentinel (ignoring trailing whitespace).
    pub fn ends_with_eos(&self, s: &str) -> bool {
        s.trim_end().ends_with(&self.eos)
    }

    pub fn starts_with_bos(&self, s: &str) -> bool {
        s.trim_start().starts_with(&self.bos)
    }
}

fn whitespace_tokens(s: &str) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::new();
    let mut current = String::new();
    let mut in_word = false;
    for ch in s.chars() {
        if ch.is_whitespace() {
            current.push(ch);
            in_word = false;
        } else {
            // A word starts after whitespace that followed another word.
            if !in_word && current.chars().any(|c| !c.is_whitespace()) {
                out.push(Token(std::mem::take(&mut current).into_bytes()));
            }
            current.push(ch);
            in_word = true;
        }
    }
    if !current.is_empty() {
        out.push(Token(current.into_bytes()));
    }
    out
}

/// The combined input + output token limit `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBudget {
    pub k: usize,
}

impl TokenBudget {
    pub const DEFAULT_K: usize = 4096;

    pub fn new(k: usize) -> Self {
        Self { k }
    }

    /// Whether a string fits on its own with no room reserved for output.
    pub fn admits(&self, tokenizer: &Tokenizer, s: &str) -> bool {
        tokenizer.count(s) <= self.k
    }
}

impl Default for TokenBudget {
    fn default() -> Self {
        Self { k: Self::DEFAULT_K }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum BudgetDecision {
    Accept {
        prompt_tokens: usize,
        max_output: usize,
        k: usize,
    },
    Reject {
        prompt_tokens: usize,
        max_output: usize,
        k: usize,
    },
}

impl BudgetDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self, BudgetDecision::Accept { .. })
    }
}

/// Rejects when `tokens(prompt) + max_output > k`.
pub fn enforce_budget(
    prompt: &str,
    max_output: usize,
    budget: TokenBudget,
    tokenizer: &Tokenizer,
) -> BudgetDecision {
    let prompt_tokens = tokenizer.count(prompt);
    let k = budget.k;
    if k == 0 || prompt_tokens + max_output > k {
        BudgetDecision::Reject {
            prompt_tokens,
            max_output,
            k,
        }
    } else {
        BudgetDecision::Accept {
            prompt_tokens,
            max_output,
            k,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_round_trip() {
        let t = Tokenizer::default();
        assert!(t.tokenize("").is_empty());
        assert_eq!(t.detokenize(&[]), "");
        assert_eq!(t.count(""), 0);
    }

    #[test]
    fn counts_words() {
        let t = Tokenizer::default();
        assert_eq!(t.tokenize("a b c").len(), 3);
        assert_eq!(t.count("a b c"), 3);
        assert_eq!(t.count("  a\n\nb  "), 2);
        assert_eq!(t.count("   "), 1);
        assert_eq!(t.tokenize("   ").len(), 1);
    }

    #[test]
    fn byte_scheme_counts_bytes() {
        let t = Tokenizer::new(TokenScheme::Byte, "<s>", "</s>").unwrap();
        assert_eq!(t.tokenize("héllo").len(), 6);
        assert_eq!(t.count("héllo"), 6);
        assert_eq!(t.detokenize(&t.tokenize("héllo")), "héllo");
    }

    #[test]
    fn sentinels_must_differ() {
        assert!(Tokenizer::new(TokenScheme::Whitespace, "<s>", "<s>").is_err());
        let t = Tokenizer::default();
        assert_ne!(t.bos, t.eos);
    }

    #[test]
    fn budget_boundaries() {
        let t = Tokenizer::default();
        let b = TokenBudget::new(8);
        assert_eq!(
            enforce_budget("one two three four five", 3, b, &t),
            BudgetDecision::Accept {
                prompt_tokens: 5,
                max_output: 3,
                k: 8
            }
        );
        assert_eq!(
            enforce_budget("one two three four five six", 3, b, &t),
            BudgetDecision::Reject {
                prompt_tokens: 6,
                max_output: 3,
                k: 8
            }
        );
        assert!(!enforce_budget("x", 0, TokenBudget::new(0), &t).is_accept());
        assert!(!enforce_budget("", 1, TokenBudget::new(0), &t).is_accept());
    }

    #[test]
    fn thousand_random_round_trips() {
        use rand::{Rng, SeedableRng};
        let t = Tokenizer::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let alphabet: Vec<char> = "ab c\n\t  é漢{}X".chars().collect();
        for _ in 0..1000 {
            let len = rng.gen_range(0..40);
            let s: String = (0..len)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                .collect();
            assert_eq!(t.detokenize(&t.tokenize(&s)), s);
            assert_eq!(t.tokenize(&s).len(), t.count(&s), "{s:?}");
        }
    }

    proptest! {
        #[test]
        fn round_trip_any_string(s in any::<String>()) {
            for scheme in [TokenScheme::Whitespace, TokenScheme::Byte] {
                let t = Tokenizer { scheme, ..Tokenizer::default() };
                prop_assert_eq!(t.detokenize(&t.tokenize(&s)), s.clone());
            }
        }

        #[test]
        fn rejection_is_monotone(words in 0usize..30, extra in 1usize..10, max_out in 0usize..10, k in 0usize..40) {
            let t = Tokenizer::default();
            let b = TokenBudget::new(k);
            let short = vec!["w"; words].join(" ");
            let long = vec!["w"; words + extra].join(" ");
            if !enforce_budget(&short, max_out, b, &t).is_accept() {
                prop_assert!(!enforce_budget(&long, max_out, b, &t).is_accept());
            }
        }
    }
}
