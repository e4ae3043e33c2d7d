//! Deterministic rule-based completion backend.
//!
//! A rule set is an ordered list of `(pattern, rewrite)` pairs. The first rule
//! whose pattern matches the prompt *and* whose rewrite produces a value wins;
//! if none does, the refusal text is returned.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, CompletionRequest};

pub const DEFAULT_REFUSAL: &str = "As a LLM I cannot perform this task";

/// Capture name always bound to the whole prompt.
pub const PROMPT_CAPTURE: &str = "PROMPT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternSpec {
    /// A full-prompt template such as `Summarize {X}`; each `{NAME}` captures
    /// any text, including newlines.
    Template(String),
    Regex(String),
    Contains(String),
    Prefix(String),
    Suffix(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteSpec {
    /// Output template over the captures, e.g. `{X|upper}`. Use `{{`/`}}` for braces.
    Template(String),
    /// Looks the capture up in a table; a miss falls through to the next rule.
    Table {
        slot: String,
        entries: BTreeMap<String, String>,
    },
    /// Numbered list of the paraphrase-table entries for the capture; a miss
    /// falls through.
    Paraphrases { slot: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub pattern: PatternSpec,
    pub rewrite: RewriteSpec,
}

/// JSON rule file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRuleSet {
    #[serde(default = "default_refusal")]
    pub refusal: String,
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    #[serde(default)]
    pub paraphrases: BTreeMap<String, BTreeSet<String>>,
}

fn default_refusal() -> String {
    DEFAULT_REFUSAL.to_string()
}

impl Default for MockRuleSet {
    fn default() -> Self {
        Self {
            refusal: default_refusal(),
            rules: Vec::new(),
            paraphrases: BTreeMap::new(),
        }
    }
}

impl MockRuleSet {
    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| BackendError::Rules(format!("{}: {e}", path.display())))
    }

    pub fn rule(mut self, pattern: PatternSpec, rewrite: RewriteSpec) -> Self {
        self.rules.push(RuleSpec { pattern, rewrite });
        self
    }

    /// Appends the rules (and paraphrases) of `other` after this set's rules.
    pub fn extend(&mut self, other: MockRuleSet) {
        self.rules.extend(other.rules);
        for (k, v) in other.paraphrases {
            self.paraphrases.entry(k).or_default().extend(v);
        }
    }
}

#[derive(Debug, Clone)]
enum Matcher {
    Regex(Regex),
    Contains(String),
    Prefix(String),
    Suffix(String),
}

#[derive(Debug, Clone)]
enum Piece {
    Lit(String),
    Capture { name: String, filters: Vec<Filter> },
}

#[derive(Debug, Clone, PartialEq)]
enum Filter {
    FirstWords(usize),
    LastWords(usize),
    Sentence(usize),
    Upper,
    Lower,
    Trim,
    TrimPunct,
    ReverseWords,
    Capitalize,
}

#[derive(Debug, Clone)]
enum Action {
    Template(Vec<Piece>),
    Table {
        slot: String,
        entries: BTreeMap<String, String>,
    },
    Paraphrases {
        slot: String,
    },
}

#[derive(Debug, Clone)]
struct Rule {
    matcher: Matcher,
    action: Action,
}

/// The compiled mock backend.
#[derive(Debug, Clone)]
pub struct MockBackend {
    rules: Vec<Rule>,
    refusal: String,
    paraphrases: BTreeMap<String, BTreeSet<String>>,
}

impl MockBackend {
    pub fn new(set: MockRuleSet) -> Result<Self, BackendError> {
        let mut rules = Vec::with_capacity(set.rules.len());
        for (i, spec) in set.rules.iter().enumerate() {
            let err = |m: String| BackendError::Rules(format!("rule {i}: {m}"));
            let (matcher, names) = compile_pattern(&spec.pattern).map_err(err)?;
            let action = match &spec.rewrite {
                RewriteSpec::Template(t) => {
                    let pieces = parse_output_template(t).map_err(err)?;
                    for p in &pieces {
                        if let Piece::Capture { name, .. } = p {
                            if !names.contains(name) {
                                return Err(err(format!(
                                    "output refers to unknown capture {name}"
                                )));
                            }
                        }
                    }
                    Action::Template(pieces)
                }
                RewriteSpec::Table { slot, entries } => {
                    if !names.contains(slot) {
                        return Err(err(format!("table slot {slot} is not captured")));
                    }
                    Action::Table {
                        slot: slot.clone(),
                        entries: entries.clone(),
                    }
                }
                RewriteSpec::Paraphrases { slot } => {
                    if !names.contains(slot) {
                        return Err(err(format!("paraphrase slot {slot} is not captured")));
                    }
                    Action::Paraphrases { slot: slot.clone() }
                }
            };
            rules.push(Rule { matcher, action });
        }
        Ok(Self {
            rules,
            refusal: set.refusal,
            paraphrases: set.paraphrases,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        Self::new(MockRuleSet::from_path(path)?)
    }

    pub fn refusal(&self) -> &str {
        &self.refusal
    }

    /// Pure rewrite of a prompt.
    pub fn respond(&self, prompt: &str) -> String {
        self.try_rules(prompt)
            .unwrap_or_else(|| self.refusal.clone())
    }

    /// The first firing rule's output, or `None` when the refusal would be returned.
    pub fn try_rules(&self, prompt: &str) -> Option<String> {
        self.rules.iter().find_map(|rule| {
            let caps = captures(&rule.matcher, prompt)?;
            match &rule.action {
                Action::Template(pieces) => Some(render_output(pieces, &caps)),
                Action::Table { slot, entries } => entries.get(caps.get(slot)?).cloned(),
                Action::Paraphrases { slot } => {
                    let list = self.paraphrases.get(caps.get(slot)?)?;
                    Some(
                        list.iter()
                            .enumerate()
                            .map(|(i, p)| format!("{}) {p}", i + 1))
                            .collect::<Vec<_>>()
                            .join("\n"),
                    )
                }
            }
        })
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        Ok(self.respond(req.prompt()))
    }
}

fn compile_pattern(p: &PatternSpec) -> Result<(Matcher, BTreeSet<String>), String> {
    let mut names = BTreeSet::from([PROMPT_CAPTURE.to_string()]);
    let matcher = match p {
        PatternSpec::Template(t) => {
            let mut re = String::from("(?s)^");
            let mut rest = t.as_str();
            while let Some(start) = rest.find('{') {
                match rest[start..].find('}') {
                    Some(len) if is_slot_name(&rest[start + 1..start + len]) => {
                        let name = &rest[start + 1..start + len];
                        re.push_str(&regex::escape(&rest[..start]));
                        if !names.insert(name.to_string()) {
                            return Err(format!("slot {name} appears twice"));
                        }
                        re.push_str(&format!("(?P<{name}>.*)"));
                        rest = &rest[start + len + 1..];
                    }
                    _ => {
                        re.push_str(&regex::escape(&rest[..=start]));
                        rest = &rest[start + 1..];
                    }
                }
            }
            re.push_str(&regex::escape(rest));
            re.push('$');
            Matcher::Regex(Regex::new(&re).map_err(|e| e.to_string())?)
        }
        PatternSpec::Regex(r) => {
            let re = Regex::new(r).map_err(|e| e.to_string())?;
            names.extend(re.capture_names().flatten().map(String::from));
            Matcher::Regex(re)
        }
        PatternSpec::Contains(s) => Matcher::Contains(s.clone()),
        PatternSpec::Prefix(s) => Matcher::Prefix(s.clone()),
        PatternSpec::Suffix(s) => Matcher::Suffix(s.clone()),
    };
    Ok((matcher, names))
}

fn is_slot_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn captures(m: &Matcher, prompt: &str) -> Option<BTreeMap<String, String>> {
    let mut out = BTreeMap::from([(PROMPT_CAPTURE.to_string(), prompt.to_string())]);
    let hit = match m {
        Matcher::Regex(re) => {
            let caps = re.captures(prompt)?;
            for name in re.capture_names().flatten() {
                let v = caps.name(name).map(|m| m.as_str()).unwrap_or("");
                out.insert(name.to_string(), v.to_string());
            }
            true
        }
        Matcher::Contains(s) => prompt.contains(s.as_str()),
        Matcher::Prefix(s) => prompt.starts_with(s.as_str()),
        Matcher::Suffix(s) => prompt.trim_end().ends_with(s.as_str()),
    };
    hit.then_some(out)
}

fn parse_output_template(t: &str) -> Result<Vec<Piece>, String> {
    let mut pieces = Vec::new();
    let mut lit = String::new();
    let mut chars = t.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                lit.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                lit.push('}');
            }
            '{' => {
                let mut body = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) => body.push(ch),
                        None => return Err(format!("unclosed placeholder in {t:?}")),
                    }
                }
                if !lit.is_empty() {
                    pieces.push(Piece::Lit(std::mem::take(&mut lit)));
                }
                let mut parts = body.split('|');
                let name = parts.next().unwrap_or_default().trim().to_string();
                if !is_slot_name(&name) {
                    return Err(format!("bad placeholder {{{body}}}"));
                }
                let filters = parts.map(parse_filter).collect::<Result<Vec<_>, _>>()?;
                pieces.push(Piece::Capture { name, filters });
            }
            '}' => return Err(format!("stray '}}' in {t:?}")),
            other => lit.push(other),
        }
    }
    if !lit.is_empty() {
        pieces.push(Piece::Lit(lit));
    }
    Ok(pieces)
}

fn parse_filter(f: &str) -> Result<Filter, String> {
    let (name, arg) = match f.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (f.trim(), None),
    };
    let num = || -> Result<usize, String> {
        arg.ok_or_else(|| format!("filter {name} needs an argument"))?
            .parse()
            .map_err(|e| format!("filter {name}: {e}"))
    };
    Ok(match name {
        "first_words" => Filter::FirstWords(num()?),
        "last_words" => Filter::LastWords(num()?),
        "sentence" => Filter::Sentence(num()?),
        "upper" => Filter::Upper,
        "lower" => Filter::Lower,
        "trim" => Filter::Trim,
        "trim_punct" => Filter::TrimPunct,
        "reverse_words" => Filter::ReverseWords,
        "capitalize" => Filter::Capitalize,
        other => return Err(format!("unknown filter {other}")),
    })
}

fn apply_filter(f: &Filter, s: String) -> String {
    let words = || s.split_whitespace().collect::<Vec<_>>();
    match f {
        Filter::FirstWords(n) => words().into_iter().take(*n).collect::<Vec<_>>().join(" "),
        Filter::LastWords(n) => {
            let w = words();
            w[w.len().saturating_sub(*n)..].join(" ")
        }
        Filter::Sentence(n) => crate::text::sentences(&s)
            .get(n.saturating_sub(1))
            .map(|x| x.to_string())
            .unwrap_or_default(),
        Filter::Upper => s.to_uppercase(),
        Filter::Lower => s.to_lowercase(),
        Filter::Trim => s.trim().to_string(),
        Filter::TrimPunct => s
            .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
            .to_string(),
        Filter::ReverseWords => {
            let mut w = words();
            w.reverse();
            w.join(" ")
        }
        Filter::Capitalize => {
            let mut cs = s.chars();
            match cs.next() {
                Some(c) => c.to_uppercase().chain(cs).collect(),
                None => s,
            }
        }
    }
}

fn render_output(pieces: &[Piece], caps: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for p in pieces {
        match p {
            Piece::Lit(s) => out.push_str(s),
            Piece::Capture { name, filters } => {
                let v = caps.get(name).cloned().unwrap_or_default();
                out.push_str(&filters.iter().fold(v, |acc, f| apply_filter(f, acc)));
            }
        }
    }
    out
}
