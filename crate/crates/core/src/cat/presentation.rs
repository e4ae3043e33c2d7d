use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

use super::{ArrowId, CatError, ObjectId, Path};

/// Prefix that names an identity inside a label list, e.g. `1_X`.
pub const IDENTITY_PREFIX: &str = "1_";

/// A declared equation between two parallel paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub lhs: Path,
    pub rhs: Path,
}

/// A finitely presented category: objects, generating arrows, and relations.
///
/// Identities exist implicitly for every object. Iteration order over objects
/// and generators is declaration order, which keeps law reports deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    name: String,
    objects: IndexSet<ObjectId>,
    generators: IndexMap<String, ArrowId>,
    relations: Vec<Relation>,
}

impl Presentation {
    pub fn builder(name: impl Into<String>) -> PresentationBuilder {
        PresentationBuilder {
            name: name.into(),
            objects: Vec::new(),
            generators: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectId> {
        self.objects.iter()
    }

    pub fn has_object(&self, object: &ObjectId) -> bool {
        self.objects.contains(object)
    }

    pub fn generators(&self) -> impl Iterator<Item = &ArrowId> {
        self.generators.values()
    }

    pub fn generator(&self, label: &str) -> Result<&ArrowId, CatError> {
        self.generators
            .get(label)
            .ok_or_else(|| CatError::UnknownArrow(label.to_string()))
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn identity(&self, object: &ObjectId) -> Result<Path, CatError> {
        if !self.objects.contains(object) {
            return Err(CatError::UnknownObject(object.to_string()));
        }
        Ok(Path::identity(object.clone()))
    }

    /// Composes two paths of this presentation in diagrammatic order.
    pub fn compose(&self, f: &Path, g: &Path) -> Result<Path, CatError> {
        for p in [f, g] {
            self.check_path(p)?;
        }
        f.then(g)
    }

    /// Resolves a list of labels into a path. `1_X` denotes the identity at `X`.
    pub fn path<S: AsRef<str>>(&self, labels: &[S]) -> Result<Path, CatError> {
        let mut acc: Option<Path> = None;
        for label in labels {
            let step = self.resolve_label(label.as_ref())?;
            acc = Some(match acc {
                None => step,
                Some(p) => p.then(&step)?,
            });
        }
        acc.ok_or(CatError::EmptyPath)
    }

    fn resolve_label(&self, label: &str) -> Result<Path, CatError> {
        if let Some(a) = self.generators.get(label) {
            return Ok(Path::arrow(a.clone()));
        }
        if let Some(obj) = label.strip_prefix(IDENTITY_PREFIX) {
            return self.identity(&ObjectId::new(obj));
        }
        Err(CatError::UnknownArrow(label.to_string()))
    }

    fn check_path(&self, p: &Path) -> Result<(), CatError> {
        if !self.objects.contains(p.dom()) {
            return Err(CatError::UnknownObject(p.dom().to_string()));
        }
        for step in p.steps() {
            match self.generators.get(&step.label) {
                Some(a) if a == step => {}
                _ => return Err(CatError::UnknownArrow(step.label.clone())),
            }
        }
        Ok(())
    }

    /// All pairs `(f, g)` of generators with `cod f == dom g`, in declaration order.
    pub fn composable_pairs(&self) -> Vec<(&ArrowId, &ArrowId)> {
        let mut out = Vec::new();
        for f in self.generators.values() {
            for g in self.generators.values() {
                if f.cod == g.dom {
                    out.push((f, g));
                }
            }
        }
        out
    }

    /// All composable triples `(f, g, h)` of generators, in declaration order.
    pub fn composable_triples(&self) -> Vec<(&ArrowId, &ArrowId, &ArrowId)> {
        let mut out = Vec::new();
        for (f, g) in self.composable_pairs() {
            for h in self.generators.values() {
                if g.cod == h.dom {
                    out.push((f, g, h));
                }
            }
        }
        out
    }

    pub fn from_spec(spec: &PresentationSpec) -> Result<Self, CatError> {
        let mut b = Presentation::builder(&spec.name);
        for o in &spec.objects {
            b = b.object(o.as_str());
        }
        for g in &spec.generators {
            b = b.generator(g.label.as_str(), g.dom.as_str(), g.cod.as_str());
        }
        for (l, r) in &spec.relations {
            b = b.relation(l.clone(), r.clone());
        }
        b.build()
    }

    pub fn to_spec(&self) -> PresentationSpec {
        PresentationSpec {
            name: self.name.clone(),
            objects: self.objects.iter().map(|o| o.to_string()).collect(),
            generators: self
                .generators
                .values()
                .map(|a| GeneratorSpec {
                    label: a.label.clone(),
                    dom: a.dom.to_string(),
                    cod: a.cod.to_string(),
                    template: None,
                })
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|r| (label_list(&r.lhs), label_list(&r.rhs)))
                .collect(),
        }
    }
}

fn label_list(p: &Path) -> Vec<String> {
    if p.is_identity() {
        vec![format!("{IDENTITY_PREFIX}{}", p.dom())]
    } else {
        p.labels().into_iter().map(String::from).collect()
    }
}

pub struct PresentationBuilder {
    name: String,
    objects: Vec<String>,
    generators: Vec<(String, String, String)>,
    relations: Vec<(Vec<String>, Vec<String>)>,
}

impl PresentationBuilder {
    pub fn object(mut self, label: &str) -> Self {
        self.objects.push(label.to_string());
        self
    }

    pub fn generator(mut self, label: &str, dom: &str, cod: &str) -> Self {
        self.generators
            .push((label.to_string(), dom.to_string(), cod.to_string()));
        self
    }

    pub fn relation<S: Into<String>>(
        mut self,
        lhs: impl IntoIterator<Item = S>,
        rhs: impl IntoIterator<Item = S>,
    ) -> Self {
        self.relations.push((
            lhs.into_iter().map(Into::into).collect(),
            rhs.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn build(self) -> Result<Presentation, CatError> {
        let mut objects = IndexSet::new();
        for o in self.objects {
            if !objects.insert(ObjectId::new(o.clone())) {
                return Err(CatError::DuplicateObject(o));
            }
        }
        let mut generators = IndexMap::new();
        for (label, dom, cod) in self.generators {
            for end in [&dom, &cod] {
                if !objects.contains(&ObjectId::new(end.as_str())) {
                    return Err(CatError::UnknownObject(end.clone()));
                }
            }
            if label.starts_with(IDENTITY_PREFIX) {
                return Err(CatError::ReservedLabel(label));
            }
            if generators.contains_key(&label) {
                return Err(CatError::DuplicateArrow(label));
            }
            generators.insert(label.clone(), ArrowId::new(label, dom, cod));
        }
        let mut pres = Presentation {
            name: self.name,
            objects,
            generators,
            relations: Vec::new(),
        };
        for (index, (l, r)) in self.relations.into_iter().enumerate() {
            let lhs = pres.path(&l)?;
            let rhs = pres.path(&r)?;
            if lhs.dom() != rhs.dom() || lhs.cod() != rhs.cod() {
                return Err(CatError::RelationEndpoints {
                    index,
                    lhs: format!("{}: {} -> {}", lhs, lhs.dom(), lhs.cod()),
                    rhs: format!("{}: {} -> {}", rhs, rhs.dom(), rhs.cod()),
                });
            }
            pres.relations.push(Relation { lhs, rhs });
        }
        Ok(pres)
    }
}

/// JSON form of a presentation.
///
/// ```json
/// {
///   "name": "three",
///   "objects": ["X", "Y", "Z"],
///   "generators": [{"label": "f", "dom": "X", "cod": "Y", "template": "..."}],
///   "relations": [[["f", "g"], ["h"]]]
/// }
/// ```
///
/// Relation paths are label lists in diagrammatic order; `1_X` names an identity.
/// The optional `template` is ignored here and consumed by the prompt layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresentationSpec {
    pub name: String,
    #[serde(default)]
    pub objects: Vec<String>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub relations: Vec<(Vec<String>, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub label: String,
    pub dom: String,
    pub cod: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn three() -> Presentation {
        Presentation::builder("3")
            .object("X")
            .object("Y")
            .object("Z")
            .generator("f", "X", "Y")
            .generator("g", "Y", "Z")
            .generator("h", "X", "Z")
            .relation(["f", "g"], ["h"])
            .build()
            .unwrap()
    }

    #[test]
    fn builds_three() {
        let p = three();
        assert_eq!(p.object_count(), 3);
        assert_eq!(p.generator_count(), 3);
        assert_eq!(p.relations().len(), 1);
        assert_eq!(p.composable_pairs().len(), 1);
        assert!(p.composable_triples().is_empty());
    }

    #[test]
    fn identity_tokens_resolve() {
        let p = three();
        let f = p.path(&["1_X", "f", "1_Y"]).unwrap();
        assert_eq!(f.labels(), vec!["f"]);
        assert!(p.path(&["1_X"]).unwrap().is_identity());
    }

    #[test]
    fn unknown_object_identity() {
        let p = three();
        assert!(matches!(
            p.identity(&"W".into()),
            Err(CatError::UnknownObject(_))
        ));
    }

    #[test]
    fn rejects_bad_relation_endpoints() {
        let err = Presentation::builder("bad")
            .object("X")
            .object("Y")
            .generator("f", "X", "Y")
            .relation(["f"], ["1_X"])
            .build()
            .unwrap_err();
        assert!(matches!(err, CatError::RelationEndpoints { index: 0, .. }));
    }

    #[test]
    fn rejects_dangling_and_duplicate() {
        let dangling = Presentation::builder("d")
            .object("X")
            .generator("f", "X", "Q")
            .build();
        assert!(matches!(dangling, Err(CatError::UnknownObject(_))));
        let dup = Presentation::builder("d").object("X").object("X").build();
        assert!(matches!(dup, Err(CatError::DuplicateObject(_))));
        let dup = Presentation::builder("d")
            .object("X")
            .generator("f", "X", "X")
            .generator("f", "X", "X")
            .build();
        assert!(matches!(dup, Err(CatError::DuplicateArrow(_))));
    }

    #[test]
    fn non_composable_relation_path() {
        let err = Presentation::builder("d")
            .object("X")
            .object("Y")
            .generator("f", "X", "Y")
            .relation(["f", "f"], ["f"])
            .build()
            .unwrap_err();
        assert!(matches!(err, CatError::CompositionMismatch { .. }));
    }

    #[test]
    fn compose_checks_membership() {
        let p = three();
        let foreign = Path::arrow(ArrowId::new("f", "X", "Z"));
        let g = p.path(&["g"]).unwrap();
        assert!(p.compose(&foreign, &g).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let p = three();
        let json = serde_json::to_string(&p.to_spec()).unwrap();
        let spec: PresentationSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(Presentation::from_spec(&spec).unwrap(), p);
    }
}
