use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MetaError;

pub const FULL_BODY: &str = include_str!("../../templates/meta_full.txt");
pub const SHORT_BODY: &str = include_str!("../../templates/meta_short.txt");

const CONTEXT_MARKERS: [&str; 3] = ["{CONTENT}", "{CONTEXT GOES HERE}", "{CONTEXT}"];
const TASK_MARKERS: [&str; 2] = ["{TASK}", "{TASK DESCRIPTION \nGOES HERE}"];
const EXAMPLES_MARKERS: [&str; 2] = ["{EXAMPLES GO HERE}", "{EXAMPLES}"];

/// How list items are numbered: `1)` or `1.`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListMarker {
    Paren,
    Dot,
}

impl ListMarker {
    pub fn suffix(self) -> char {
        match self {
            ListMarker::Paren => ')',
            ListMarker::Dot => '.',
        }
    }

    pub fn format(self, n: usize) -> String {
        format!("{n}{}", self.suffix())
    }
}

/// A meta-prompt with literal context, task and (optionally) examples markers.
///
/// Markers are replaced verbatim; every other byte of the body is preserved,
/// including a trailing list seed such as `1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaPromptTemplate {
    pub name: String,
    body: String,
    context_marker: String,
    task_marker: String,
    examples_marker: Option<String>,
    pub expected_count: usize,
    pub marker: ListMarker,
}

fn find_marker(
    body: &str,
    candidates: &[&str],
    what: &str,
    required: bool,
) -> Result<Option<String>, MetaError> {
    for m in candidates {
        match body.matches(m).count() {
            0 => continue,
            1 => return Ok(Some(m.to_string())),
            n => {
                return Err(MetaError::Template(format!(
                    "{what} marker {m:?} appears {n} times"
                )))
            }
        }
    }
    if required {
        Err(MetaError::Template(format!(
            "no {what} marker (one of {candidates:?})"
        )))
    } else {
        Ok(None)
    }
}

impl MetaPromptTemplate {
    /// Detects markers in `body` and the list style from its trailing seed.
    pub fn new(
        name: impl Into<String>,
        body: impl Into<String>,
        expected_count: usize,
    ) -> Result<Self, MetaError> {
        let body = body.into();
        if expected_count == 0 {
            return Err(MetaError::Template(
                "expected count must be at least 1".into(),
            ));
        }
        let context_marker =
            find_marker(&body, &CONTEXT_MARKERS, "context", true)?.unwrap_or_default();
        let task_marker = find_marker(&body, &TASK_MARKERS, "task", true)?.unwrap_or_default();
        let examples_marker = find_marker(&body, &EXAMPLES_MARKERS, "examples", false)?;
        let tail = body.trim_end();
        let marker = if tail.ends_with("1)") {
            ListMarker::Paren
        } else if tail.ends_with("1.") {
            ListMarker::Dot
        } else {
            return Err(MetaError::Template(
                "body must end with a list seed `1)` or `1.`".into(),
            ));
        };
        Ok(Self {
            name: name.into(),
            body,
            context_marker,
            task_marker,
            examples_marker,
            expected_count,
            marker,
        })
    }

    /// The canonical experiment template, asking for five prompts.
    pub fn full() -> Self {
        Self::new("full", FULL_BODY, 5).expect("bundled template is valid")
    }

    /// The shorter sample template with an examples block.
    pub fn short() -> Self {
        Self::new("short", SHORT_BODY, 5).expect("bundled template is valid")
    }

    /// `full`, `short`, or a path to a template file.
    pub fn load(name_or_path: &str) -> Result<Self, MetaError> {
        match name_or_path {
            "full" => Ok(Self::full()),
            "short" => Ok(Self::short()),
            path => {
                let body = std::fs::read_to_string(Path::new(path))
                    .map_err(|e| MetaError::Io(format!("{path}: {e}")))?;
                Self::new(path, body, 5)
            }
        }
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn has_examples(&self) -> bool {
        self.examples_marker.is_some()
    }

    /// Substitutes the markers in one pass, so values that happen to contain
    /// marker text are left alone. An empty example list removes the block
    /// (paragraph) holding the examples marker.
    pub fn render(
        &self,
        task: &str,
        context: &str,
        examples: &[String],
    ) -> Result<String, MetaError> {
        let mut body = self.body.clone();
        let mut subs: Vec<(String, String)> = vec![
            (self.context_marker.clone(), context.to_string()),
            (self.task_marker.clone(), task.to_string()),
        ];
        match (&self.examples_marker, examples.is_empty()) {
            (None, false) => {
                return Err(MetaError::Template(format!(
                    "template {} has no examples slot",
                    self.name
                )))
            }
            (None, true) => {}
            (Some(m), true) => body = remove_block(&body, m),
            (Some(m), false) => {
                let joined = examples
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        if i == 0 {
                            e.clone()
                        } else {
                            format!("{} {e}", self.marker.format(i + 1))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("\n");
                subs.push((m.clone(), joined));
            }
        }
        let mut hits: Vec<(usize, &str, &str)> = subs
            .iter()
            .filter_map(|(m, v)| body.find(m.as_str()).map(|at| (at, m.as_str(), v.as_str())))
            .collect();
        hits.sort_by_key(|h| h.0);
        let mut out = String::with_capacity(body.len());
        let mut pos = 0;
        for (at, m, v) in hits {
            out.push_str(&body[pos..at]);
            out.push_str(v);
            pos = at + m.len();
        }
        out.push_str(&body[pos..]);
        Ok(out)
    }
}

/// Drops the blank-line-delimited paragraph containing `marker`, together
/// with one adjacent blank line.
fn remove_block(body: &str, marker: &str) -> String {
    let Some(at) = body.find(marker) else {
        return body.to_string();
    };
    let start = body[..at].rfind("\n\n").map(|i| i + 2).unwrap_or(0);
    let end = body[at..]
        .find("\n\n")
        .map(|i| at + i)
        .unwrap_or(body.len());
    if end < body.len() {
        format!("{}{}", &body[..start], &body[end + 2..])
    } else {
        body[..start.saturating_sub(2)].to_string()
    }
}

/// A task's own prompt (context layout plus instruction), e.g. the
/// Creativity and Ideation prompts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskPrompt {
    pub body: String,
}

pub const CREATIVITY_BODY: &str = include_str!("../../templates/creativity.txt");
pub const IDEATION_BODY: &str = include_str!("../../templates/ideation.txt");

impl TaskPrompt {
    pub fn creativity() -> Self {
        Self {
            body: CREATIVITY_BODY.to_string(),
        }
    }

    pub fn ideation() -> Self {
        Self {
            body: IDEATION_BODY.to_string(),
        }
    }

    /// The input layout: everything before the first blank line.
    pub fn layout(&self) -> &str {
        self.body.split("\n\n").next().unwrap_or_default()
    }

    /// Fills the whole prompt, layout and instruction alike.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String, MetaError> {
        crate::prompt::Template::parse(&self.body)
            .and_then(|t| t.render(values))
            .map_err(|e| MetaError::Template(e.to_string()))
    }

    /// The instruction after the layout, with whitespace squashed.
    pub fn instruction(&self) -> String {
        match self.body.split_once("\n\n") {
            Some((_, rest)) => crate::text::squash_whitespace(rest),
            None => String::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_templates_parse() {
        let full = MetaPromptTemplate::full();
        assert_eq!(full.marker, ListMarker::Paren);
        assert!(!full.has_examples());
        let short = MetaPromptTemplate::short();
        assert_eq!(short.marker, ListMarker::Dot);
        assert!(short.has_examples());
    }

    #[test]
    fn markers_must_be_unique_and_present() {
        assert!(MetaPromptTemplate::new("t", "{CONTENT}{TASK}{TASK}\n1)", 5).is_err());
        assert!(MetaPromptTemplate::new("t", "{CONTENT}\n1)", 5).is_err());
        assert!(MetaPromptTemplate::new("t", "{CONTENT}{TASK}", 5).is_err());
        assert!(MetaPromptTemplate::new("t", "{CONTENT}{TASK}\n1)", 0).is_err());
    }

    #[test]
    fn values_containing_markers_are_not_resubstituted() {
        let t = MetaPromptTemplate::new("t", "{CONTENT} / {TASK}\n1)", 5).unwrap();
        assert_eq!(
            t.render("{CONTENT}", "{TASK}", &[]).unwrap(),
            "{TASK} / {CONTENT}\n1)"
        );
    }

    #[test]
    fn empty_examples_remove_the_block() {
        let t = MetaPromptTemplate::new("t", "A {CONTEXT}\n\n# Ex\n1. {EXAMPLES}\n\n{TASK}\n1.", 5)
            .unwrap();
        assert_eq!(t.render("T", "C", &[]).unwrap(), "A C\n\nT\n1.");
        assert_eq!(
            t.render("T", "C", &["x".into(), "y".into()]).unwrap(),
            "A C\n\n# Ex\n1. x\n2. y\n\nT\n1."
        );
    }

    #[test]
    fn task_prompt_layouts() {
        let c = TaskPrompt::creativity();
        assert_eq!(
            c.layout(),
            "# Input text:\n[Left Text] \n{LEFT}\n[Right Text]\n{RIGHT}"
        );
        assert_eq!(
            c.instruction(),
            "Write a paragraph to connect the left text and right text."
        );
        let i = TaskPrompt::ideation();
        assert!(i.layout().ends_with("# [following context]:\n{RIGHT}"));
        assert_eq!(
            i.instruction(),
            "Rewrite the passage in the [text] in a more creative way."
        );
    }
}
