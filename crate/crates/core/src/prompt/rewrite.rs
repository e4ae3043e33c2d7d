use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

use crate::cat::{
    check_functor_laws, CatError, FunctorDef, LawConfig, LawReport, ObjectId, Path, Variance,
};

use super::category::PromptCategory;
use super::task::TaskCategory;
use super::template::Template;
use super::PromptError;

/// Admissible rewrites (paraphrases, inversions, translations) per string.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteTable {
    #[serde(default = "yes")]
    pub identity_closed: bool,
    #[serde(default)]
    pub entries: IndexMap<String, IndexSet<String>>,
}

fn yes() -> bool {
    true
}

impl RewriteTable {
    pub fn new() -> Self {
        Self {
            identity_closed: true,
            entries: IndexMap::new(),
        }
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, PromptError> {
        super::fixture::read_json(path)
    }

    pub fn with<S: Into<String>>(mut self, s: &str, rewrites: impl IntoIterator<Item = S>) -> Self {
        self.entries
            .entry(s.to_string())
            .or_default()
            .extend(rewrites.into_iter().map(Into::into));
        self
    }

    pub fn has_entry(&self, s: &str) -> bool {
        self.entries.contains_key(s)
    }

    /// Removes `to` from the rewrites of `from`; returns whether it was there.
    pub fn remove(&mut self, from: &str, to: &str) -> bool {
        self.entries
            .get_mut(from)
            .is_some_and(|set| set.shift_remove(to))
    }

    /// `s` followed by its listed rewrites.
    pub fn rewrite_hom(&self, s: &str) -> IndexSet<String> {
        let mut out = IndexSet::from([s.to_string()]);
        if let Some(rs) = self.entries.get(s) {
            out.extend(rs.iter().cloned());
        }
        out
    }

    /// Whether every listed rewrite lists its source back.
    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|(s, rs)| {
            rs.iter()
                .all(|r| r == s || self.entries.get(r).is_some_and(|back| back.contains(s)))
        })
    }
}

/// Prompt asked of the backend when searching for rewrites beyond the table.
pub const REWRITE_SEARCH_PROMPT: &str = "List rewrites of: {X}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Lemma1Options {
    /// Ask the backend for extra rewrites when the table has no connecting arrow.
    pub backend_search: bool,
    pub laws: LawConfig,
}

#[derive(Debug, Clone)]
pub enum Lemma1Outcome {
    /// Every pair is connected; the constructed functor and its law report.
    Functor {
        functor: Box<FunctorDef>,
        report: LawReport,
    },
    /// No rewrite takes `from` (a rewrite of the first description) to `to`
    /// (a rewrite of the second).
    Counterexample { from: String, to: String },
    /// An arrow of the first task has no rewrite among the second task's arrows.
    Uncovered { arrow: String },
    /// The arrow assignment does not induce a consistent object map.
    Inconsistent { reason: String },
}

impl Lemma1Outcome {
    pub fn functor(&self) -> Option<&FunctorDef> {
        match self {
            Lemma1Outcome::Functor { functor, .. } => Some(functor),
            _ => None,
        }
    }
}

/// Searches for a connecting rewrite for every pair of rewrites of the two
/// task descriptions. On success builds a functor sending each arrow of `t1`
/// to the first arrow of `t2` among its rewrites, with the object map read
/// off the endpoints, and checks it in `ambient`.
pub fn check_lemma1(
    t1: &TaskCategory,
    t2: &TaskCategory,
    rw: &RewriteTable,
    ambient: &PromptCategory,
    options: Lemma1Options,
) -> Result<Lemma1Outcome, PromptError> {
    for t in [t1, t2] {
        if !rw.has_entry(t.description()) {
            return Err(PromptError::Rewrite(format!(
                "description of {} ({:?}) has no rewrite-table entry",
                t.name(),
                t.description()
            )));
        }
    }
    let search = Template::parse(REWRITE_SEARCH_PROMPT)?;
    let reach = |x: &str| -> Result<IndexSet<String>, PromptError> {
        let mut out = rw.rewrite_hom(x);
        if options.backend_search {
            let reply = ambient.run(&search.apply(x)?)?;
            out.extend(list_items(&reply));
        }
        Ok(out)
    };

    for x in rw.rewrite_hom(t1.description()) {
        let from_x = reach(&x)?;
        for y in rw.rewrite_hom(t2.description()) {
            if !from_x.contains(&y) {
                return Ok(Lemma1Outcome::Counterexample { from: x, to: y });
            }
        }
    }

    let targets = t2.arrow_labels();
    let mut assignment: IndexMap<String, String> = IndexMap::new();
    for d1 in t1.arrow_labels() {
        let reachable = reach(&d1)?;
        match targets.iter().find(|d2| reachable.contains(*d2)) {
            Some(d2) => {
                assignment.insert(d1, d2.clone());
            }
            None => return Ok(Lemma1Outcome::Uncovered { arrow: d1 }),
        }
    }

    let mut reasons = Vec::new();
    for variance in [Variance::Covariant, Variance::Contravariant] {
        match functor_from_assignment("lemma1", t1, t2, &assignment, variance) {
            Ok(functor) => {
                let report = check_functor_laws(&functor, ambient, options.laws)?;
                return Ok(Lemma1Outcome::Functor {
                    functor: Box::new(functor),
                    report,
                });
            }
            Err(e) => reasons.push(format!("{variance:?}: {e}")),
        }
    }
    Ok(Lemma1Outcome::Inconsistent {
        reason: reasons.join("; "),
    })
}

fn list_items(reply: &str) -> Vec<String> {
    reply
        .lines()
        .filter_map(|l| {
            let l = l.trim();
            let digits = l.len() - l.trim_start_matches(|c: char| c.is_ascii_digit()).len();
            let rest = &l[digits..];
            (digits > 0)
                .then(|| rest.strip_prefix(')').or_else(|| rest.strip_prefix('.')))
                .flatten()
                .map(|s| s.trim().to_string())
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Builds a functor from an arrow assignment, deriving the object map from
/// arrow endpoints. Objects untouched by any arrow map to the same label.
fn functor_from_assignment(
    name: &str,
    src: &TaskCategory,
    dst: &TaskCategory,
    assignment: &IndexMap<String, String>,
    variance: Variance,
) -> Result<FunctorDef, CatError> {
    let ill = |reason: String| CatError::IllFormedFunctor {
        functor: name.to_string(),
        reason,
    };
    let mut objects: IndexMap<ObjectId, ObjectId> = IndexMap::new();
    let mut arrows: IndexMap<String, Path> = IndexMap::new();
    for (d1, d2) in assignment {
        let f = src.presentation().generator(d1)?;
        let g = dst.presentation().generator(d2)?;
        let pairs = match variance {
            Variance::Covariant => [(&f.dom, &g.dom), (&f.cod, &g.cod)],
            Variance::Contravariant => [(&f.cod, &g.dom), (&f.dom, &g.cod)],
        };
        for (x, fx) in pairs {
            match objects.get(x) {
                Some(prev) if prev != fx => {
                    return Err(ill(format!("{x} would map to both {prev} and {fx}")));
                }
                _ => {
                    objects.insert(x.clone(), fx.clone());
                }
            }
        }
        arrows.insert(d1.clone(), Path::arrow(g.clone()));
    }
    for x in src.presentation().objects() {
        if !objects.contains_key(x) {
            if !dst.presentation().has_object(x) {
                return Err(ill(format!("object {x} is not reached by any arrow")));
            }
            objects.insert(x.clone(), x.clone());
        }
    }
    let ordered = src
        .presentation()
        .objects()
        .map(|o| (o.clone(), objects[o].clone()))
        .collect();
    FunctorDef::new(
        name,
        src.presentation().clone(),
        dst.presentation().clone(),
        variance,
        ordered,
        arrows,
    )
}

/// Reverse-arrow data for a duality functor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualitySpec {
    /// Two-slot template relating an arrow to its dual, e.g. `instead of {F}, do {F_STAR}`.
    pub inversion_template: String,
    /// Each source description mapped to its dual description.
    pub duals: IndexMap<String, String>,
}

impl DualitySpec {
    pub fn from_path(path: &std::path::Path) -> Result<Self, PromptError> {
        super::fixture::read_json(path)
    }
}

#[derive(Debug, Clone)]
pub struct DualityFunctor {
    pub functor: FunctorDef,
    /// The inversion template rendered for every arrow and its dual.
    pub rationales: IndexMap<String, String>,
}

/// Builds the contravariant functor `f: X -> Y  ↦  f*: F(Y) -> F(X)` from a
/// table of duals. When the source and target coincide and every dual is the
/// arrow itself, the identity functor is returned instead.
pub fn build_duality_functor(
    src: &TaskCategory,
    dst: &TaskCategory,
    spec: &DualitySpec,
) -> Result<DualityFunctor, PromptError> {
    let template = Template::parse(&spec.inversion_template)?;
    let slots = template.slots();
    if slots.len() != 2 {
        return Err(template.arity_error(2).into());
    }
    let mut assignment = IndexMap::new();
    let mut rationales = IndexMap::new();
    for d in src.arrow_labels() {
        let dual = spec
            .duals
            .get(&d)
            .ok_or_else(|| PromptError::MissingDual { arrow: d.clone() })?;
        dst.presentation().generator(dual)?;
        rationales.insert(
            d.clone(),
            template.render(&[(slots[0], &d), (slots[1], dual)])?,
        );
        assignment.insert(d, dual.clone());
    }
    let trivial =
        src.presentation() == dst.presentation() && assignment.iter().all(|(a, b)| a == b);
    let functor = if trivial {
        FunctorDef::identity(src.presentation())
    } else {
        functor_from_assignment(
            &format!("{}→{}", src.name(), dst.name()),
            src,
            dst,
            &assignment,
            Variance::Contravariant,
        )?
    };
    Ok(DualityFunctor {
        functor,
        rationales,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewrite_hom_contains_itself() {
        let t = RewriteTable::new().with("Summarize {X}", ["Give me the gist of {X}"]);
        assert_eq!(
            t.rewrite_hom("other").into_iter().collect::<Vec<_>>(),
            vec!["other"]
        );
        let h = t.rewrite_hom("Summarize {X}");
        assert_eq!(h.len(), 2);
        assert!(h.contains("Summarize {X}"));
        assert!(!t.is_symmetric());
    }

    #[test]
    fn parses_listed_rewrites() {
        assert_eq!(list_items("1) a\n2. b\nnoise\n3)"), vec!["a", "b"]);
    }
}
