use std::fmt;

use serde::{Deserialize, Serialize};

use super::CatError;

/// Symbolic name of an object in a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// A generating arrow `label: dom -> cod`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrowId {
    pub label: String,
    pub dom: ObjectId,
    pub cod: ObjectId,
}

impl ArrowId {
    pub fn new(
        label: impl Into<String>,
        dom: impl Into<ObjectId>,
        cod: impl Into<ObjectId>,
    ) -> Self {
        Self {
            label: label.into(),
            dom: dom.into(),
            cod: cod.into(),
        }
    }
}

impl From<String> for ObjectId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl fmt::Display for ArrowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.label, self.dom, self.cod)
    }
}

/// A composable sequence of generators in diagrammatic order.
///
/// `f ; g` means "first `f`, then `g`", so a path `[f, g]` with `f: X -> Y` and
/// `g: Y -> Z` has domain `X` and codomain `Z`. The identity at `X` is the empty
/// path anchored at `X`; identities are never stored as steps, so the unit laws
/// hold structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    dom: ObjectId,
    cod: ObjectId,
    steps: Vec<ArrowId>,
}

impl Path {
    pub fn identity(object: ObjectId) -> Self {
        Self {
            dom: object.clone(),
            cod: object,
            steps: Vec::new(),
        }
    }

    pub fn arrow(arrow: ArrowId) -> Self {
        Self {
            dom: arrow.dom.clone(),
            cod: arrow.cod.clone(),
            steps: vec![arrow],
        }
    }

    /// Builds a path from a non-empty run of consecutive arrows.
    pub fn from_arrows(arrows: impl IntoIterator<Item = ArrowId>) -> Result<Self, CatError> {
        let mut iter = arrows.into_iter();
        let first = iter.next().ok_or(CatError::EmptyPath)?;
        iter.try_fold(Path::arrow(first), |acc, a| acc.then(&Path::arrow(a)))
    }

    pub fn dom(&self) -> &ObjectId {
        &self.dom
    }

    pub fn cod(&self) -> &ObjectId {
        &self.cod
    }

    pub fn steps(&self) -> &[ArrowId] {
        &self.steps
    }

    // Empty paths are identities; see `is_identity`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.steps.iter().map(|a| a.label.as_str()).collect()
    }

    /// `self ; next`. Fails unless `cod(self) == dom(next)`.
    pub fn then(&self, next: &Path) -> Result<Path, CatError> {
        if self.cod != next.dom {
            return Err(CatError::CompositionMismatch {
                left_cod: self.cod.to_string(),
                right_dom: next.dom.to_string(),
            });
        }
        let mut steps = Vec::with_capacity(self.steps.len() + next.steps.len());
        steps.extend(self.steps.iter().cloned());
        steps.extend(next.steps.iter().cloned());
        Ok(Path {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            steps,
        })
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            write!(f, "1_{}", self.dom)
        } else {
            write!(f, "{}", self.labels().join(";"))
        }
    }
}

/// Diagrammatic composition: `compose(f, g)` runs `f` first.
pub fn compose(f: &Path, g: &Path) -> Result<Path, CatError> {
    f.then(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrow(l: &str, d: &str, c: &str) -> Path {
        Path::arrow(ArrowId::new(l, d, c))
    }

    #[test]
    fn composes_endpoints() {
        let fg = compose(&arrow("f", "X", "Y"), &arrow("g", "Y", "Z")).unwrap();
        assert_eq!(fg.dom().as_str(), "X");
        assert_eq!(fg.cod().as_str(), "Z");
        assert_eq!(fg.labels(), vec!["f", "g"]);
        assert_eq!(fg.to_string(), "f;g");
    }

    #[test]
    fn identity_is_absorbed() {
        let f = arrow("f", "X", "Y");
        let idx = Path::identity("X".into());
        let idy = Path::identity("Y".into());
        assert_eq!(compose(&idx, &f).unwrap(), f);
        assert_eq!(compose(&f, &idy).unwrap(), f);
        assert_eq!(idx.dom(), idx.cod());
        assert!(idx.is_identity());
        assert_eq!(idx.to_string(), "1_X");
    }

    #[test]
    fn associativity_of_concatenation() {
        let f = arrow("f", "W", "X");
        let g = arrow("g", "X", "Y");
        let h = arrow("h", "Y", "Z");
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn mismatch_is_an_error() {
        let err = compose(&arrow("f", "X", "Y"), &arrow("g", "Z", "W")).unwrap_err();
        assert!(matches!(err, CatError::CompositionMismatch { .. }));
    }

    #[test]
    fn from_arrows_rejects_empty_and_gaps() {
        assert!(matches!(
            Path::from_arrows(vec![]),
            Err(CatError::EmptyPath)
        ));
        let gap = Path::from_arrows(vec![
            ArrowId::new("f", "X", "Y"),
            ArrowId::new("g", "X", "Y"),
        ]);
        assert!(gap.is_err());
    }
}
