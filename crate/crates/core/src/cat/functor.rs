use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::laws::{evaluate_path, LawConfig, LawKind, LawReport, Semantics};
use super::{CatError, ObjectId, Path, Presentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variance {
    #[default]
    Covariant,
    /// Sends `f: X -> Y` to an arrow `F(Y) -> F(X)` and reverses composites.
    Contravariant,
}

/// A functor between finite presentations, given on objects and generators.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctorDef {
    name: String,
    source: Presentation,
    target: Presentation,
    variance: Variance,
    object_map: IndexMap<ObjectId, ObjectId>,
    arrow_map: IndexMap<String, Path>,
}

impl FunctorDef {
    /// Validates that every object and generator is mapped and that each
    /// generator image has the endpoints the object map demands.
    pub fn new(
        name: impl Into<String>,
        source: Presentation,
        target: Presentation,
        variance: Variance,
        object_map: IndexMap<ObjectId, ObjectId>,
        arrow_map: IndexMap<String, Path>,
    ) -> Result<Self, CatError> {
        let name = name.into();
        let ill = |reason: String| CatError::IllFormedFunctor {
            functor: name.clone(),
            reason,
        };
        for x in source.objects() {
            let fx = object_map
                .get(x)
                .ok_or_else(|| ill(format!("object {x} has no image")))?;
            if !target.has_object(fx) {
                return Err(ill(format!(
                    "image {fx} of {x} is not an object of {}",
                    target.name()
                )));
            }
        }
        for f in source.generators() {
            let image = arrow_map
                .get(&f.label)
                .ok_or_else(|| ill(format!("generator {} has no image", f.label)))?;
            for step in image.steps() {
                if target.generator(&step.label).ok() != Some(step) {
                    return Err(ill(format!(
                        "image of {} uses unknown arrow {}",
                        f.label, step.label
                    )));
                }
            }
            let (want_dom, want_cod) = match variance {
                Variance::Covariant => (&object_map[&f.dom], &object_map[&f.cod]),
                Variance::Contravariant => (&object_map[&f.cod], &object_map[&f.dom]),
            };
            if image.dom() != want_dom || image.cod() != want_cod {
                return Err(ill(format!(
                    "{} maps to {image}: {} -> {}, expected {want_dom} -> {want_cod}",
                    f.label,
                    image.dom(),
                    image.cod()
                )));
            }
        }
        Ok(Self {
            name,
            source,
            target,
            variance,
            object_map,
            arrow_map,
        })
    }

    pub fn identity(pres: &Presentation) -> Self {
        let object_map = pres.objects().map(|o| (o.clone(), o.clone())).collect();
        let arrow_map = pres
            .generators()
            .map(|a| (a.label.clone(), Path::arrow(a.clone())))
            .collect();
        Self {
            name: format!("1_{}", pres.name()),
            source: pres.clone(),
            target: pres.clone(),
            variance: Variance::Covariant,
            object_map,
            arrow_map,
        }
    }

    /// Builds a functor from label maps, resolving arrow images in the target.
    pub fn from_labels(
        name: impl Into<String>,
        source: Presentation,
        target: Presentation,
        variance: Variance,
        objects: &IndexMap<String, String>,
        arrows: &IndexMap<String, Vec<String>>,
    ) -> Result<Self, CatError> {
        let name = name.into();
        let object_map = objects
            .iter()
            .map(|(k, v)| (ObjectId::new(k.as_str()), ObjectId::new(v.as_str())))
            .collect::<IndexMap<_, _>>();
        let mut arrow_map = IndexMap::new();
        for (label, image) in arrows {
            let path = if image.is_empty() {
                // An empty image collapses the generator to an identity.
                let src = source.generator(label)?;
                let anchor = match variance {
                    Variance::Covariant => &src.dom,
                    Variance::Contravariant => &src.cod,
                };
                let fx = object_map
                    .get(anchor)
                    .ok_or_else(|| CatError::IllFormedFunctor {
                        functor: name.clone(),
                        reason: format!("object {anchor} has no image"),
                    })?;
                target.identity(fx)?
            } else {
                target.path(image).map_err(|e| CatError::IllFormedFunctor {
                    functor: name.clone(),
                    reason: format!("image of {label}: {e}"),
                })?
            };
            arrow_map.insert(label.clone(), path);
        }
        Self::new(name, source, target, variance, object_map, arrow_map)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn target(&self) -> &Presentation {
        &self.target
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn object_map(&self) -> &IndexMap<ObjectId, ObjectId> {
        &self.object_map
    }

    pub fn arrow_map(&self) -> &IndexMap<String, Path> {
        &self.arrow_map
    }

    pub fn map_object(&self, x: &ObjectId) -> Result<&ObjectId, CatError> {
        self.object_map
            .get(x)
            .ok_or_else(|| CatError::UnknownObject(x.to_string()))
    }

    /// Image of a source path. Contravariant functors reverse the order.
    pub fn map_path(&self, path: &Path) -> Result<Path, CatError> {
        let anchor = self.map_object(path.dom())?.clone();
        let mut acc = Path::identity(anchor);
        for step in path.steps() {
            let image = self
                .arrow_map
                .get(&step.label)
                .ok_or_else(|| CatError::UnknownArrow(step.label.clone()))?;
            acc = match self.variance {
                Variance::Covariant => acc.then(image)?,
                Variance::Contravariant => {
                    if acc.is_identity() {
                        image.clone()
                    } else {
                        image.then(&acc)?
                    }
                }
            };
        }
        Ok(acc)
    }
}

/// Checks `F(1_X) = 1_F(X)`, `F(f;g) = F(f);F(g)` on composable generator
/// pairs, and preservation of the source relations, all evaluated in the
/// target semantics.
pub fn check_functor_laws<S: Semantics + ?Sized>(
    functor: &FunctorDef,
    target_sem: &S,
    config: LawConfig,
) -> Result<LawReport, CatError> {
    let mut report = LawReport::new(format!("functor {}", functor.name()), config);
    let src = functor.source();

    for x in src.objects() {
        let fx = functor.map_object(x)?;
        let image = functor.map_path(&Path::identity(x.clone()))?;
        if !image.is_identity() || image.dom() != fx {
            return Err(CatError::IllFormedFunctor {
                functor: functor.name().to_string(),
                reason: format!("identity at {x} maps to {image}"),
            });
        }
        for w in target_sem.witnesses(fx)? {
            let lhs = evaluate_path(target_sem, &image, &w)?;
            let rhs = target_sem.apply_identity(fx, &w)?;
            if !report.record(
                target_sem,
                LawKind::FunctorIdentity,
                format!("F(1_{x})"),
                &w,
                &lhs,
                &rhs,
            ) {
                return Ok(report);
            }
        }
    }

    for (f, g) in src.composable_pairs() {
        let composite = Path::from_arrows([f.clone(), g.clone()])?;
        let whole = functor.map_path(&composite)?;
        let ff = &functor.arrow_map[&f.label];
        let fg = &functor.arrow_map[&g.label];
        let subject = format!("F({};{})", f.label, g.label);
        for w in target_sem.witnesses(whole.dom())? {
            let lhs = evaluate_path(target_sem, &whole, &w)?;
            let rhs = match functor.variance() {
                Variance::Covariant => {
                    evaluate_path(target_sem, fg, &evaluate_path(target_sem, ff, &w)?)?
                }
                Variance::Contravariant => {
                    evaluate_path(target_sem, ff, &evaluate_path(target_sem, fg, &w)?)?
                }
            };
            if !report.record(
                target_sem,
                LawKind::FunctorComposition,
                subject.clone(),
                &w,
                &lhs,
                &rhs,
            ) {
                return Ok(report);
            }
        }
    }

    for rel in src.relations() {
        let lhs_path = functor.map_path(&rel.lhs)?;
        let rhs_path = functor.map_path(&rel.rhs)?;
        let subject = format!("F({}) = F({})", rel.lhs, rel.rhs);
        for w in target_sem.witnesses(lhs_path.dom())? {
            let lhs = evaluate_path(target_sem, &lhs_path, &w)?;
            let rhs = evaluate_path(target_sem, &rhs_path, &w)?;
            if !report.record(
                target_sem,
                LawKind::FunctorRelation,
                subject.clone(),
                &w,
                &lhs,
                &rhs,
            ) {
                return Ok(report);
            }
        }
    }

    Ok(report)
}

/// A natural transformation `F => G` given by one target path per source object.
#[derive(Debug, Clone, PartialEq)]
pub struct NatTransDef {
    name: String,
    from: FunctorDef,
    to: FunctorDef,
    components: IndexMap<ObjectId, Path>,
}

impl NatTransDef {
    pub fn new(
        name: impl Into<String>,
        from: FunctorDef,
        to: FunctorDef,
        components: IndexMap<ObjectId, Path>,
    ) -> Result<Self, CatError> {
        let name = name.into();
        let ill = |reason: String| CatError::IllFormedTransformation {
            transformation: name.clone(),
            reason,
        };
        if from.source() != to.source() || from.target() != to.target() {
            return Err(ill(format!(
                "{} and {} do not share source and target",
                from.name(),
                to.name()
            )));
        }
        if from.variance() != to.variance() {
            return Err(ill("functors differ in variance".into()));
        }
        for x in from.source().objects() {
            let c = components
                .get(x)
                .ok_or_else(|| CatError::IncompleteTransformation {
                    transformation: name.clone(),
                    object: x.to_string(),
                })?;
            let fx = from.map_object(x)?;
            let gx = to.map_object(x)?;
            if c.dom() != fx || c.cod() != gx {
                return Err(ill(format!(
                    "component at {x} is {c}: {} -> {}, expected {fx} -> {gx}",
                    c.dom(),
                    c.cod()
                )));
            }
        }
        Ok(Self {
            name,
            from,
            to,
            components,
        })
    }

    /// The identity transformation `F => F`.
    pub fn identity(functor: &FunctorDef) -> Self {
        let components = functor
            .object_map()
            .iter()
            .map(|(x, fx)| (x.clone(), Path::identity(fx.clone())))
            .collect();
        Self {
            name: format!("1_{}", functor.name()),
            from: functor.clone(),
            to: functor.clone(),
            components,
        }
    }

    pub fn from_labels(
        name: impl Into<String>,
        from: FunctorDef,
        to: FunctorDef,
        components: &IndexMap<String, Vec<String>>,
    ) -> Result<Self, CatError> {
        let name = name.into();
        let mut map = IndexMap::new();
        for (x, labels) in components {
            let obj = ObjectId::new(x.as_str());
            let path = if labels.is_empty() {
                from.target().identity(from.map_object(&obj)?)?
            } else {
                from.target().path(labels)?
            };
            map.insert(obj, path);
        }
        Self::new(name, from, to, map)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn component(&self, x: &ObjectId) -> Option<&Path> {
        self.components.get(x)
    }
}

/// Checks the naturality square `F(f) ; a_Y = a_X ; G(f)` for every source
/// generator `f: X -> Y` on the witnesses of `F(X)` (for contravariant
/// functors the square starts at `F(Y)`).
pub fn check_naturality<S: Semantics + ?Sized>(
    alpha: &NatTransDef,
    target_sem: &S,
    config: LawConfig,
) -> Result<LawReport, CatError> {
    let mut report = LawReport::new(format!("naturality {}", alpha.name()), config);
    for f in alpha.from.source().generators() {
        let (start, end) = match alpha.from.variance() {
            Variance::Covariant => (&f.dom, &f.cod),
            Variance::Contravariant => (&f.cod, &f.dom),
        };
        let missing = |o: &ObjectId| CatError::IncompleteTransformation {
            transformation: alpha.name.clone(),
            object: o.to_string(),
        };
        let a_start = alpha.components.get(start).ok_or_else(|| missing(start))?;
        let a_end = alpha.components.get(end).ok_or_else(|| missing(end))?;
        let ff = &alpha.from.arrow_map()[&f.label];
        let gf = &alpha.to.arrow_map()[&f.label];
        let lhs_path = ff.then(a_end)?;
        let rhs_path = a_start.then(gf)?;
        let subject = format!("{}: {lhs_path} = {rhs_path}", f.label);
        for w in target_sem.witnesses(lhs_path.dom())? {
            let lhs = evaluate_path(target_sem, &lhs_path, &w)?;
            let rhs = evaluate_path(target_sem, &rhs_path, &w)?;
            if !report.record(
                target_sem,
                LawKind::Naturality,
                subject.clone(),
                &w,
                &lhs,
                &rhs,
            ) {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// JSON form of a functor: object and arrow images by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctorSpec {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub variance: Variance,
    pub objects: IndexMap<String, String>,
    pub arrows: IndexMap<String, Vec<String>>,
}

/// JSON form of a natural transformation between two named functors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformationSpec {
    pub name: String,
    pub from: String,
    pub to: String,
    pub components: IndexMap<String, Vec<String>>,
}
