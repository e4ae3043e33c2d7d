use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::cat::{evaluate_path, FunctorDef, ObjectId, Path, Presentation, Variance};

use super::category::PromptCategory;
use super::PromptError;

/// Declarative form of a task-category over some ambient prompt category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub description: String,
    pub objects: Vec<String>,
    /// Arrow labels, i.e. template texts, of the ambient category.
    pub arrows: Vec<String>,
    #[serde(default)]
    pub relations: Vec<(Vec<String>, Vec<String>)>,
}

impl TaskSpec {
    pub fn from_path(path: &std::path::Path) -> Result<Self, PromptError> {
        super::fixture::read_json(path)
    }
}

/// A subcategory of the prompt category holding the prompts that correctly
/// execute one task, together with its inclusion functor.
#[derive(Debug, Clone)]
pub struct TaskCategory {
    name: String,
    description: String,
    presentation: Presentation,
    inclusion: FunctorDef,
}

impl TaskCategory {
    /// Builds the task inside `ambient`.
    ///
    /// Every object and arrow must exist verbatim in the ambient category.
    /// Correct execution is checked on witnesses: each generator, and each
    /// composable pair of generators, must send every domain witness into
    /// the codomain's membership.
    pub fn new(ambient: &PromptCategory, spec: &TaskSpec) -> Result<Self, PromptError> {
        let missing = |item: String| PromptError::NotInAmbient {
            task: spec.name.clone(),
            item,
        };
        let mut b = Presentation::builder(&spec.name);
        for o in &spec.objects {
            if !ambient
                .presentation()
                .has_object(&ObjectId::new(o.as_str()))
            {
                return Err(missing(format!("object {o}")));
            }
            b = b.object(o);
        }
        for a in &spec.arrows {
            let arrow = ambient
                .arrow(a)
                .map_err(|_| missing(format!("arrow {a}")))?;
            b = b.generator(a, arrow.dom.as_str(), arrow.cod.as_str());
        }
        for (l, r) in &spec.relations {
            b = b.relation(l.clone(), r.clone());
        }
        let presentation = b.build()?;

        let objects: IndexMap<ObjectId, ObjectId> = presentation
            .objects()
            .map(|o| (o.clone(), o.clone()))
            .collect();
        let arrows: IndexMap<String, Path> = presentation
            .generators()
            .map(|g| (g.label.clone(), Path::arrow(g.clone())))
            .collect();
        let inclusion = FunctorDef::new(
            format!("inclusion {}", spec.name),
            presentation.clone(),
            ambient.presentation().clone(),
            Variance::Covariant,
            objects,
            arrows,
        )?;

        let task = Self {
            name: spec.name.clone(),
            description: spec.description.clone(),
            presentation,
            inclusion,
        };
        task.check_execution(ambient)?;
        Ok(task)
    }

    fn check_execution(&self, ambient: &PromptCategory) -> Result<(), PromptError> {
        let mut paths: Vec<Path> = self
            .presentation
            .generators()
            .map(|g| Path::arrow(g.clone()))
            .collect();
        for (f, g) in self.presentation.composable_pairs() {
            paths.push(Path::from_arrows([f.clone(), g.clone()])?);
        }
        for path in paths {
            let cod = ambient.object(path.cod())?;
            for w in &ambient.object(path.dom())?.witnesses {
                let out = evaluate_path(ambient, &path, w)?;
                if !cod.contains(&out) {
                    return Err(PromptError::TaskMembership {
                        task: self.name.clone(),
                        arrow: path.to_string(),
                        witness: w.clone(),
                        output: out,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The natural-language description of the task.
    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn inclusion(&self) -> &FunctorDef {
        &self.inclusion
    }

    /// Arrow labels (descriptions) in declaration order.
    pub fn arrow_labels(&self) -> Vec<String> {
        self.presentation
            .generators()
            .map(|g| g.label.clone())
            .collect()
    }
}
