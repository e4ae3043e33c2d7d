//! Witness-extensional law checking.
//!
//! Two arrows are equal when they agree on every declared witness of their
//! domain. Every check enumerates law instances in declaration order and stops
//! recording once the configured cap is reached.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ArrowId, CatError, ObjectId, Path, Presentation, PresentationSpec};

/// Concrete meaning for the arrows of a presentation.
pub trait Semantics {
    type Value: Clone + PartialEq + fmt::Display;

    /// The finite witness suite standing in for an object.
    fn witnesses(&self, object: &ObjectId) -> Result<Vec<Self::Value>, CatError>;

    /// Applies one generator. Unknown generators must yield
    /// [`CatError::MissingSemantics`].
    fn apply(&self, arrow: &ArrowId, input: &Self::Value) -> Result<Self::Value, CatError>;

    /// Evaluation-level identity at an object. Defaults to the identity function.
    fn apply_identity(
        &self,
        _object: &ObjectId,
        input: &Self::Value,
    ) -> Result<Self::Value, CatError> {
        Ok(input.clone())
    }

    /// Canonical form used for the normalized-equality column of reports.
    fn normalize(&self, value: &Self::Value) -> Self::Value {
        value.clone()
    }
}

/// Runs a path left to right. The empty path evaluates through
/// [`Semantics::apply_identity`].
pub fn evaluate_path<S: Semantics + ?Sized>(
    sem: &S,
    path: &Path,
    input: &S::Value,
) -> Result<S::Value, CatError> {
    if path.is_identity() {
        return sem.apply_identity(path.dom(), input);
    }
    let mut value = input.clone();
    for step in path.steps() {
        value = sem.apply(step, &value)?;
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Identity,
    LeftIdentity,
    RightIdentity,
    Associativity,
    Relation,
    FunctorIdentity,
    FunctorComposition,
    FunctorRelation,
    Naturality,
    LeftUnitor,
    RightUnitor,
    Associator,
    Triangle,
    UncurryCurry,
    CurryUncurry,
    Terminal,
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityPolicy {
    /// Byte-for-byte equality of outputs.
    #[default]
    Exact,
    /// Equality after [`Semantics::normalize`].
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LawConfig {
    /// Maximum number of instances recorded per report.
    pub cap: usize,
    pub policy: EqualityPolicy,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            cap: 10_000,
            policy: EqualityPolicy::Exact,
        }
    }
}

/// One checked equation on one witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawInstance {
    pub law: LawKind,
    /// Which arrows/objects the instance is about, e.g. `f;g;h`.
    pub subject: String,
    pub witness: String,
    pub lhs: String,
    pub rhs: String,
    pub exact: bool,
    pub normalized: bool,
}

impl LawInstance {
    pub fn holds(&self, policy: EqualityPolicy) -> bool {
        match policy {
            EqualityPolicy::Exact => self.exact,
            EqualityPolicy::Normalized => self.normalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub subject: String,
    pub policy: EqualityPolicy,
    pub cap: usize,
    pub truncated: bool,
    pub instances: Vec<LawInstance>,
}

impl LawReport {
    pub fn new(subject: impl Into<String>, config: LawConfig) -> Self {
        Self {
            subject: subject.into(),
            policy: config.policy,
            cap: config.cap,
            truncated: false,
            instances: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.instances.iter().all(|i| i.holds(self.policy))
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawInstance> {
        self.instances.iter().filter(|i| !i.holds(self.policy))
    }

    pub fn first_failure(&self) -> Option<&LawInstance> {
        self.failures().next()
    }

    pub fn count(&self, law: LawKind) -> usize {
        self.instances.iter().filter(|i| i.law == law).count()
    }

    pub fn summary(&self) -> LawSummary {
        let mut by_law: BTreeMap<LawKind, (usize, usize)> = BTreeMap::new();
        for i in &self.instances {
            let e = by_law.entry(i.law).or_default();
            e.0 += 1;
            if i.holds(self.policy) {
                e.1 += 1;
            }
        }
        LawSummary {
            total: self.instances.len(),
            passed: self
                .instances
                .iter()
                .filter(|i| i.holds(self.policy))
                .count(),
            by_law,
        }
    }

    fn is_full(&self) -> bool {
        self.instances.len() >= self.cap
    }

    /// Records an equation unless the cap is reached. Returns `false` once full.
    pub fn record<S: Semantics + ?Sized>(
        &mut self,
        sem: &S,
        law: LawKind,
        subject: impl Into<String>,
        witness: &S::Value,
        lhs: &S::Value,
        rhs: &S::Value,
    ) -> bool {
        let normalized = sem.normalize(lhs) == sem.normalize(rhs);
        self.push(LawInstance {
            law,
            subject: subject.into(),
            witness: witness.to_string(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            exact: lhs == rhs,
            normalized,
        })
    }

    pub fn push(&mut self, instance: LawInstance) -> bool {
        if self.is_full() {
            self.truncated = true;
            return false;
        }
        self.instances.push(instance);
        true
    }

    /// Appends another report's instances, respecting this report's cap.
    pub fn absorb(&mut self, other: LawReport) {
        self.truncated |= other.truncated;
        for i in other.instances {
            if !self.push(i) {
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSummary {
    pub total: usize,
    pub passed: usize,
    pub by_law: BTreeMap<LawKind, (usize, usize)>,
}

/// Checks identity, associativity and the declared relations of a presentation
/// on the witnesses supplied by `sem`.
pub fn check_category_laws<S: Semantics + ?Sized>(
    pres: &Presentation,
    sem: &S,
    config: LawConfig,
) -> Result<LawReport, CatError> {
    let mut report = LawReport::new(format!("category {}", pres.name()), config);

    // Evaluation-level identity at each object.
    for x in pres.objects() {
        for w in sem.witnesses(x)? {
            let out = sem.apply_identity(x, &w)?;
            if !report.record(sem, LawKind::Identity, format!("1_{x}"), &w, &out, &w) {
                return Ok(report);
            }
        }
    }

    for f in pres.generators() {
        for w in sem.witnesses(&f.dom)? {
            let direct = sem.apply(f, &w)?;
            let left = sem.apply(f, &sem.apply_identity(&f.dom, &w)?)?;
            if !report.record(
                sem,
                LawKind::LeftIdentity,
                format!("1_{};{}", f.dom, f.label),
                &w,
                &left,
                &direct,
            ) {
                return Ok(report);
            }
            let right = sem.apply_identity(&f.cod, &direct)?;
            if !report.record(
                sem,
                LawKind::RightIdentity,
                format!("{};1_{}", f.label, f.cod),
                &w,
                &right,
                &direct,
            ) {
                return Ok(report);
            }
        }
    }

    for (f, g, h) in pres.composable_triples() {
        let fg = Path::from_arrows([f.clone(), g.clone()])?;
        let gh = Path::from_arrows([g.clone(), h.clone()])?;
        let subject = format!("{};{};{}", f.label, g.label, h.label);
        for w in sem.witnesses(&f.dom)? {
            let lhs = sem.apply(h, &evaluate_path(sem, &fg, &w)?)?;
            let rhs = evaluate_path(sem, &gh, &sem.apply(f, &w)?)?;
            if !report.record(sem, LawKind::Associativity, subject.clone(), &w, &lhs, &rhs) {
                return Ok(report);
            }
        }
    }

    for rel in pres.relations() {
        let subject = format!("{} = {}", rel.lhs, rel.rhs);
        for w in sem.witnesses(rel.lhs.dom())? {
            let lhs = evaluate_path(sem, &rel.lhs, &w)?;
            let rhs = evaluate_path(sem, &rel.rhs, &w)?;
            if !report.record(sem, LawKind::Relation, subject.clone(), &w, &lhs, &rhs) {
                return Ok(report);
            }
        }
    }

    Ok(report)
}

/// Lookup-table semantics over strings: each arrow is a finite function.
///
/// Inputs missing from an arrow's table are an evaluation error, and arrows
/// with no table at all are reported as missing semantics.
#[derive(Debug, Clone, Default)]
pub struct TableSemantics {
    witnesses: BTreeMap<ObjectId, Vec<String>>,
    tables: BTreeMap<String, BTreeMap<String, String>>,
}

impl TableSemantics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_witnesses<S: Into<String>>(
        mut self,
        object: &str,
        ws: impl IntoIterator<Item = S>,
    ) -> Self {
        self.witnesses.insert(
            ObjectId::new(object),
            ws.into_iter().map(Into::into).collect(),
        );
        self
    }

    pub fn with_table<K: Into<String>, V: Into<String>>(
        mut self,
        arrow: &str,
        entries: impl IntoIterator<Item = (K, V)>,
    ) -> Self {
        self.tables.insert(
            arrow.to_string(),
            entries
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        );
        self
    }
}

impl Semantics for TableSemantics {
    type Value = String;

    fn witnesses(&self, object: &ObjectId) -> Result<Vec<String>, CatError> {
        Ok(self.witnesses.get(object).cloned().unwrap_or_default())
    }

    fn apply(&self, arrow: &ArrowId, input: &String) -> Result<String, CatError> {
        let table = self
            .tables
            .get(&arrow.label)
            .ok_or_else(|| CatError::MissingSemantics(arrow.label.clone()))?;
        table
            .get(input)
            .cloned()
            .ok_or_else(|| CatError::Evaluation {
                arrow: arrow.label.clone(),
                message: format!("no value for input {input:?}"),
            })
    }

    fn normalize(&self, value: &String) -> String {
        value.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

/// JSON form of a presentation together with lookup-table semantics.
///
/// ```json
/// {
///   "name": "3", "objects": ["X", "Y", "Z"],
///   "generators": [{"label": "f", "dom": "X", "cod": "Y"}],
///   "relations": [[["f", "g"], ["h"]]],
///   "witnesses": {"X": ["x1"]},
///   "tables": {"f": {"x1": "y1"}}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFixture {
    #[serde(flatten)]
    pub presentation: PresentationSpec,
    #[serde(default)]
    pub witnesses: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub tables: BTreeMap<String, BTreeMap<String, String>>,
}

impl TableFixture {
    pub fn semantics(&self) -> TableSemantics {
        let mut sem = TableSemantics::new();
        for (o, ws) in &self.witnesses {
            sem = sem.with_witnesses(o, ws.iter().cloned());
        }
        for (a, t) in &self.tables {
            sem = sem.with_table(a, t.clone());
        }
        sem
    }

    /// Builds the presentation and checks its laws under the tables.
    pub fn check(&self, config: LawConfig) -> Result<LawReport, CatError> {
        let pres = Presentation::from_spec(&self.presentation)?;
        check_category_laws(&pres, &self.semantics(), config)
    }
}
