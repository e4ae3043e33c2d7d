use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One piece of a parsed template.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Literal(String),
    Slot(String),
}

/// A prompt description with named `{SLOT}` placeholders.
///
/// Slot names are ASCII alphanumerics and `_`; any other brace is literal
/// text. Substituted values are stored as literals, so a value containing
/// `{X}` never becomes a slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("slot {0} appears more than once")]
    DuplicateSlot(String),
    #[error("no value for slot {0}")]
    MissingValue(String),
    #[error("template has no slot {0}")]
    UnknownSlot(String),
    #[error("expected {expected} slot(s), template {template:?} has {found}")]
    Arity {
        template: String,
        expected: usize,
        found: usize,
    },
}

pub(crate) fn is_slot_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Template {
    pub fn parse(s: &str) -> Result<Self, TemplateError> {
        let mut segments = Vec::new();
        let mut lit = String::new();
        let mut rest = s;
        while let Some(start) = rest.find('{') {
            match rest[start..].find('}') {
                Some(len) if is_slot_name(&rest[start + 1..start + len]) => {
                    lit.push_str(&rest[..start]);
                    if !lit.is_empty() {
                        segments.push(Segment::Literal(std::mem::take(&mut lit)));
                    }
                    segments.push(Segment::Slot(rest[start + 1..start + len].to_string()));
                    rest = &rest[start + len + 1..];
                }
                _ => {
                    lit.push_str(&rest[..=start]);
                    rest = &rest[start + 1..];
                }
            }
        }
        lit.push_str(rest);
        if !lit.is_empty() {
            segments.push(Segment::Literal(lit));
        }
        let t = Self { segments };
        let slots = t.slots();
        for (i, name) in slots.iter().enumerate() {
            if slots[..i].contains(name) {
                return Err(TemplateError::DuplicateSlot(name.to_string()));
            }
        }
        Ok(t)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Slot names in order of appearance.
    pub fn slots(&self) -> Vec<&str> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Slot(n) => Some(n.as_str()),
                Segment::Literal(_) => None,
            })
            .collect()
    }

    pub fn arity(&self) -> usize {
        self.slots().len()
    }

    /// Fills every slot. Values for names the template lacks are rejected.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String, TemplateError> {
        let slots = self.slots();
        if let Some((name, _)) = values.iter().find(|(n, _)| !slots.contains(n)) {
            return Err(TemplateError::UnknownSlot(name.to_string()));
        }
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.push_str(s),
                Segment::Slot(n) => {
                    let v = values
                        .iter()
                        .find(|(k, _)| k == n)
                        .ok_or_else(|| TemplateError::MissingValue(n.clone()))?;
                    out.push_str(v.1);
                }
            }
        }
        Ok(out)
    }

    /// Renders a single-slot template.
    pub fn apply(&self, x: &str) -> Result<String, TemplateError> {
        let slots = self.slots();
        if slots.len() != 1 {
            return Err(self.arity_error(1));
        }
        self.render(&[(slots[0], x)])
    }

    /// Fixes one slot, leaving the others open.
    pub fn partial(&self, slot: &str, value: &str) -> Result<Template, TemplateError> {
        if !self.slots().contains(&slot) {
            return Err(TemplateError::UnknownSlot(slot.to_string()));
        }
        let mut segments: Vec<Segment> = Vec::new();
        for seg in &self.segments {
            let piece = match seg {
                Segment::Slot(n) if n == slot => Segment::Literal(value.to_string()),
                other => other.clone(),
            };
            match (segments.last_mut(), piece) {
                (Some(Segment::Literal(prev)), Segment::Literal(s)) => prev.push_str(&s),
                (_, Segment::Literal(s)) if s.is_empty() => {}
                (_, p) => segments.push(p),
            }
        }
        Ok(Template { segments })
    }

    pub fn rename_slot(&self, from: &str, to: &str) -> Result<Template, TemplateError> {
        if !self.slots().contains(&from) {
            return Err(TemplateError::UnknownSlot(from.to_string()));
        }
        if from != to && self.slots().contains(&to) {
            return Err(TemplateError::DuplicateSlot(to.to_string()));
        }
        let segments = self
            .segments
            .iter()
            .map(|s| match s {
                Segment::Slot(n) if n == from => Segment::Slot(to.to_string()),
                other => other.clone(),
            })
            .collect();
        Ok(Template { segments })
    }

    pub(crate) fn arity_error(&self, expected: usize) -> TemplateError {
        TemplateError::Arity {
            template: self.to_string(),
            expected,
            found: self.arity(),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => f.write_str(s)?,
                Segment::Slot(n) => write!(f, "{{{n}}}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Template {
    type Err = TemplateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for Template {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Template {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Template::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_slots_and_literal_braces() {
        let t = Template::parse("Summarize {X} in {} words {not a slot}").unwrap();
        assert_eq!(t.slots(), vec!["X"]);
        assert_eq!(
            t.apply("p").unwrap(),
            "Summarize p in {} words {not a slot}"
        );
        assert_eq!(t.to_string(), "Summarize {X} in {} words {not a slot}");
    }

    #[test]
    fn duplicate_slots_are_rejected() {
        assert_eq!(
            Template::parse("{X} and {X}"),
            Err(TemplateError::DuplicateSlot("X".into()))
        );
    }

    #[test]
    fn render_checks_names() {
        let t = Template::parse("{A} then {B}").unwrap();
        assert_eq!(t.render(&[("A", "1"), ("B", "2")]).unwrap(), "1 then 2");
        assert_eq!(
            t.render(&[("A", "1")]),
            Err(TemplateError::MissingValue("B".into()))
        );
        assert_eq!(
            t.render(&[("A", "1"), ("B", "2"), ("C", "3")]),
            Err(TemplateError::UnknownSlot("C".into()))
        );
        assert!(t.apply("x").is_err());
    }

    #[test]
    fn partial_values_stay_literal() {
        let t = Template::parse("{A} then {B}").unwrap();
        let p = t.partial("B", "{A}").unwrap();
        assert_eq!(p.slots(), vec!["A"]);
        assert_eq!(p.apply("1").unwrap(), "1 then {A}");
    }

    #[test]
    fn rename() {
        let t = Template::parse("Expand {X}").unwrap();
        assert_eq!(t.rename_slot("X", "Y").unwrap().to_string(), "Expand {Y}");
        assert!(Template::parse("{X}{Y}")
            .unwrap()
            .rename_slot("X", "Y")
            .is_err());
    }

    proptest! {
        #[test]
        fn partial_then_apply_equals_render(a in "[a-z {}]{0,12}", b in "[a-z {}]{0,12}", pre in "[a-z ]{0,6}") {
            let t = Template::parse(&format!("{pre}{{A}}:{{B}}.")).unwrap();
            let whole = t.render(&[("A", &a), ("B", &b)]).unwrap();
            prop_assert_eq!(t.partial("B", &b).unwrap().apply(&a).unwrap(), whole.clone());
            prop_assert_eq!(t.partial("A", &a).unwrap().apply(&b).unwrap(), whole);
        }
    }
}
