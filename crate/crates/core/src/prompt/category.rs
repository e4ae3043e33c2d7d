use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, BudgetDecision, Llm};
use crate::cat::{
    check_category_laws, check_monoidal_laws, ArrowId, BinaryArrow, CatError, Closed, LawConfig,
    LawInstance, LawKind, LawReport, MonoidalSemantics, MonoidalStructure, ObjectId, Presentation,
    Semantics, TensorShape,
};
use crate::text::squash_whitespace;

use super::template::Template;
use super::PromptError;

/// Label of the monoidal unit (the empty string).
pub const UNIT_OBJECT: &str = "ε";
pub const IDENTITY_TEMPLATE: &str = "Return {X}";

/// `x ⊗ y`: concatenation with one newline between non-empty operands.
pub fn tensor_strings(x: &str, y: &str) -> String {
    match (x.is_empty(), y.is_empty()) {
        (true, _) => y.to_string(),
        (_, true) => x.to_string(),
        _ => format!("{x}\n{y}"),
    }
}

/// How membership in a string object is decided beyond its witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    /// Every string under the budget.
    Any,
    /// Exactly the listed strings (witnesses are always members).
    AllowList { members: BTreeSet<String> },
    /// Exactly the witnesses.
    Witnesses,
    /// Everything except the listed strings.
    DenyList { members: BTreeSet<String> },
}

/// An object of the prompt category: a set of strings given by a predicate
/// and sampled by witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrObject {
    pub label: ObjectId,
    #[serde(default)]
    pub description: String,
    pub membership: Membership,
    pub witnesses: Vec<String>,
}

impl StrObject {
    /// Deduplicates witnesses, keeping first occurrences.
    pub fn new(
        label: impl Into<ObjectId>,
        description: impl Into<String>,
        membership: Membership,
        witnesses: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, PromptError> {
        let mut obj = Self {
            label: label.into(),
            description: description.into(),
            membership,
            witnesses: witnesses.into_iter().map(Into::into).collect(),
        };
        obj.normalize()?;
        Ok(obj)
    }

    pub(crate) fn normalize(&mut self) -> Result<(), PromptError> {
        let mut seen = BTreeSet::new();
        self.witnesses.retain(|w| seen.insert(w.clone()));
        if self.witnesses.is_empty() {
            return Err(PromptError::Object(format!(
                "{} has no witnesses",
                self.label
            )));
        }
        if let Some(w) = self.witnesses.iter().find(|w| !self.contains(w)) {
            return Err(PromptError::Object(format!(
                "witness {w:?} is not a member of {}",
                self.label
            )));
        }
        Ok(())
    }

    pub fn contains(&self, s: &str) -> bool {
        match &self.membership {
            Membership::Any => true,
            Membership::AllowList { members } => {
                members.contains(s) || self.witnesses.iter().any(|w| w == s)
            }
            Membership::Witnesses => self.witnesses.iter().any(|w| w == s),
            Membership::DenyList { members } => !members.contains(s),
        }
    }
}

/// A morphism: a single-slot template between two string objects. Its label
/// is the template text, so arrows are identified by their description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptArrow {
    pub template: Template,
    pub dom: ObjectId,
    pub cod: ObjectId,
}

impl PromptArrow {
    pub fn new(
        template: &str,
        dom: impl Into<ObjectId>,
        cod: impl Into<ObjectId>,
    ) -> Result<Self, PromptError> {
        let template = Template::parse(template)?;
        if template.arity() != 1 {
            return Err(template.arity_error(1).into());
        }
        Ok(Self {
            template,
            dom: dom.into(),
            cod: cod.into(),
        })
    }

    pub fn label(&self) -> String {
        self.template.to_string()
    }

    pub fn id(&self) -> ArrowId {
        ArrowId::new(self.label(), self.dom.clone(), self.cod.clone())
    }
}

/// `p ⊗ q`, acting on a pair: `(x, y) ↦ p(x) ⊗ q(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorArrow {
    pub left: PromptArrow,
    pub right: PromptArrow,
    pub dom: ObjectId,
    pub cod: ObjectId,
}

impl TensorArrow {
    /// The two descriptions joined, with the right slot renamed apart.
    pub fn description(&self) -> String {
        let l = self.left.template.slots()[0].to_string();
        let r = self.right.template.slots()[0].to_string();
        let right = if l == r {
            self.right
                .template
                .rename_slot(&r, &format!("{r}_2"))
                .map(|t| t.to_string())
                .unwrap_or_else(|_| self.right.label())
        } else {
            self.right.label()
        };
        tensor_strings(&self.left.label(), &right)
    }

    pub fn apply(&self, cat: &PromptCategory, x: &str, y: &str) -> Result<String, PromptError> {
        let a = cat.run(&self.left.template.apply(x)?)?;
        let b = cat.run(&self.right.template.apply(y)?)?;
        Ok(tensor_strings(&a, &b))
    }
}

/// A two-slot template read as an arrow `X ⊗ Y -> Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSlotArrow {
    pub template: Template,
    pub left_slot: String,
    pub right_slot: String,
    pub shape: TensorShape,
}

impl TwoSlotArrow {
    /// The template's first slot receives `X`, the second `Y`.
    pub fn new(template: &str, shape: TensorShape) -> Result<Self, PromptError> {
        let template = Template::parse(template)?;
        let slots = template.slots();
        if slots.len() != 2 {
            return Err(template.arity_error(2).into());
        }
        Ok(Self {
            left_slot: slots[0].to_string(),
            right_slot: slots[1].to_string(),
            template,
            shape,
        })
    }
}

impl BinaryArrow<PromptCategory> for TwoSlotArrow {
    fn shape(&self) -> &TensorShape {
        &self.shape
    }

    fn apply(&self, cx: &PromptCategory, x: &String, y: &String) -> Result<String, CatError> {
        let prompt = self
            .template
            .render(&[(&self.left_slot, x), (&self.right_slot, y)])
            .map_err(|e| eval_error(&self.template.to_string(), e))?;
        cx.run(&prompt)
            .map_err(|e| eval_error(&self.template.to_string(), e))
    }

    fn partial(&self, _cx: &PromptCategory, y: &String) -> Result<Template, CatError> {
        self.template
            .partial(&self.right_slot, y)
            .map_err(|e| eval_error(&self.template.to_string(), e))
    }
}

fn eval_error(arrow: &str, e: impl std::fmt::Display) -> CatError {
    CatError::Evaluation {
        arrow: arrow.to_string(),
        message: e.to_string(),
    }
}

/// The prompt category: string objects, template arrows evaluated through a
/// backend, concatenation as tensor, and `Return {X}` identities.
#[derive(Clone)]
pub struct PromptCategory {
    llm: Llm,
    objects: IndexMap<ObjectId, StrObject>,
    arrows: IndexMap<String, PromptArrow>,
    presentation: Presentation,
    identity: Template,
}

impl std::fmt::Debug for PromptCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PromptCategory")
            .field("name", &self.presentation.name())
            .field("backend", &self.llm.backend().name())
            .field("objects", &self.objects.keys().collect::<Vec<_>>())
            .field("arrows", &self.arrows.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl PromptCategory {
    /// Validates the budget on every witness and on every arrow rendered at
    /// every domain witness, then builds the underlying presentation.
    pub fn new(
        name: &str,
        llm: Llm,
        objects: Vec<StrObject>,
        arrows: Vec<PromptArrow>,
        relations: Vec<(Vec<String>, Vec<String>)>,
    ) -> Result<Self, PromptError> {
        let mut by_label = IndexMap::new();
        for mut o in objects {
            o.normalize()?;
            for w in &o.witnesses {
                check_budget(&llm, &format!("witness of {}", o.label), w, 0)?;
            }
            if by_label.insert(o.label.clone(), o.clone()).is_some() {
                return Err(CatError::DuplicateObject(o.label.to_string()).into());
            }
        }
        let identity = Template::parse(IDENTITY_TEMPLATE)?;
        let mut b = Presentation::builder(name);
        for label in by_label.keys() {
            b = b.object(label.as_str());
        }
        let mut by_arrow = IndexMap::new();
        for a in arrows {
            if a.template.arity() != 1 {
                return Err(a.template.arity_error(1).into());
            }
            let dom = by_label
                .get(&a.dom)
                .ok_or_else(|| CatError::UnknownObject(a.dom.to_string()))?;
            for w in &dom.witnesses {
                let prompt = a.template.apply(w)?;
                check_budget(&llm, &a.label(), &prompt, llm.max_output_tokens)?;
            }
            b = b.generator(&a.label(), a.dom.as_str(), a.cod.as_str());
            by_arrow.insert(a.label(), a);
        }
        for (l, r) in relations {
            b = b.relation(l, r);
        }
        let presentation = b.build()?;
        Ok(Self {
            llm,
            objects: by_label,
            arrows: by_arrow,
            presentation,
            identity,
        })
    }

    pub fn name(&self) -> &str {
        self.presentation.name()
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn llm(&self) -> &Llm {
        &self.llm
    }

    pub fn object(&self, label: &ObjectId) -> Result<&StrObject, PromptError> {
        self.objects
            .get(label)
            .ok_or_else(|| CatError::UnknownObject(label.to_string()).into())
    }

    pub fn objects(&self) -> impl Iterator<Item = &StrObject> {
        self.objects.values()
    }

    pub fn arrow(&self, label: &str) -> Result<&PromptArrow, PromptError> {
        self.arrows
            .get(label)
            .ok_or_else(|| CatError::UnknownArrow(label.to_string()).into())
    }

    pub fn arrows(&self) -> impl Iterator<Item = &PromptArrow> {
        self.arrows.values()
    }

    /// One backend call.
    pub fn run(&self, prompt: &str) -> Result<String, PromptError> {
        Ok(self.llm.complete(prompt)?)
    }

    /// Applies an arrow of this category to an input string.
    pub fn eval(&self, arrow: &str, x: &str) -> Result<String, PromptError> {
        self.run(&self.arrow(arrow)?.template.apply(x)?)
    }

    /// `x ⊗ y`, rejected when the result would not fit the budget.
    pub fn tensor_within_budget(&self, x: &str, y: &str) -> Result<String, PromptError> {
        let s = tensor_strings(x, y);
        check_budget(&self.llm, "tensor", &s, 0)?;
        Ok(s)
    }

    /// `p ⊗ q` on arrows of this category. Every rendered pair of domain
    /// witnesses must fit the budget.
    pub fn tensor_arrows(&self, p: &str, q: &str) -> Result<TensorArrow, PromptError> {
        let (p, q) = (self.arrow(p)?.clone(), self.arrow(q)?.clone());
        let monoidal = MonoidalStructure::new(UNIT_OBJECT);
        for x in &self.object(&p.dom)?.witnesses {
            for y in &self.object(&q.dom)?.witnesses {
                let prompt = tensor_strings(&p.template.apply(x)?, &q.template.apply(y)?);
                check_budget(
                    &self.llm,
                    "tensor of arrows",
                    &prompt,
                    self.llm.max_output_tokens,
                )?;
            }
        }
        Ok(TensorArrow {
            dom: monoidal.tensor_object(&p.dom, &q.dom),
            cod: monoidal.tensor_object(&p.cod, &q.cod),
            left: p,
            right: q,
        })
    }

    /// `{X} ⊗ EOS`, the map into the terminal object.
    pub fn terminal_template(&self) -> Template {
        Template::parse(&tensor_strings("{X}", &self.llm.tokenizer.eos)).expect("valid template")
    }

    /// `BOS ⊗ {X}`, the map out of the initial object.
    pub fn initial_template(&self) -> Template {
        Template::parse(&tensor_strings(&self.llm.tokenizer.bos, "{X}")).expect("valid template")
    }

    /// Records, for every object, that `{X} ⊗ EOS` sends each witness to ε and
    /// that `BOS ⊗ {X}` applied to ε is a single well-defined string. These
    /// are observations, not part of [`PromptCategory::check_laws`].
    pub fn check_terminal_initial(&self, config: LawConfig) -> Result<LawReport, PromptError> {
        let mut report = LawReport::new("terminal and initial objects", config);
        let terminal = self.terminal_template();
        for o in self.objects.values() {
            for w in &o.witnesses {
                let out = self.run(&terminal.apply(w)?)?;
                if !report.record(
                    self,
                    LawKind::Terminal,
                    format!("!_{}", o.label),
                    w,
                    &out,
                    &String::new(),
                ) {
                    return Ok(report);
                }
            }
        }
        let prompt = self.initial_template().apply("")?;
        let first = self.run(&prompt)?;
        let second = self.run(&prompt)?;
        let same = first == second;
        report.push(LawInstance {
            law: LawKind::Initial,
            subject: "¡ from ε".into(),
            witness: String::new(),
            lhs: first,
            rhs: second,
            exact: same,
            normalized: same,
        });
        Ok(report)
    }

    /// Category laws on the presentation plus the monoidal laws on the
    /// pooled witnesses of every object.
    pub fn check_laws(&self, config: LawConfig) -> Result<LawReport, PromptError> {
        let mut report = check_category_laws(&self.presentation, self, config)?;
        let objects: Vec<ObjectId> = self.objects.keys().cloned().collect();
        report.absorb(check_monoidal_laws(&objects, self, config)?);
        Ok(report)
    }
}

fn check_budget(llm: &Llm, what: &str, prompt: &str, max_output: usize) -> Result<(), PromptError> {
    match crate::backend::enforce_budget(prompt, max_output, llm.budget, &llm.tokenizer) {
        BudgetDecision::Accept { .. } => Ok(()),
        BudgetDecision::Reject {
            prompt_tokens,
            max_output,
            k,
        } => Err(PromptError::Budget {
            what: what.to_string(),
            source: BackendError::BudgetExceeded {
                prompt_tokens,
                max_output,
                k,
            },
        }),
    }
}

impl Semantics for PromptCategory {
    type Value = String;

    fn witnesses(&self, object: &ObjectId) -> Result<Vec<String>, CatError> {
        self.objects
            .get(object)
            .map(|o| o.witnesses.clone())
            .ok_or_else(|| CatError::UnknownObject(object.to_string()))
    }

    fn apply(&self, arrow: &ArrowId, input: &String) -> Result<String, CatError> {
        let a = self
            .arrows
            .get(&arrow.label)
            .filter(|a| a.dom == arrow.dom && a.cod == arrow.cod)
            .ok_or_else(|| CatError::MissingSemantics(arrow.label.clone()))?;
        let prompt = a
            .template
            .apply(input)
            .map_err(|e| eval_error(&arrow.label, e))?;
        self.llm
            .complete(&prompt)
            .map_err(|e| eval_error(&arrow.label, e))
    }

    fn apply_identity(&self, object: &ObjectId, input: &String) -> Result<String, CatError> {
        let prompt = self
            .identity
            .apply(input)
            .map_err(|e| eval_error(&format!("1_{object}"), e))?;
        self.llm
            .complete(&prompt)
            .map_err(|e| eval_error(&format!("1_{object}"), e))
    }

    fn normalize(&self, value: &String) -> String {
        squash_whitespace(value)
    }
}

impl MonoidalSemantics for PromptCategory {
    fn unit(&self) -> String {
        String::new()
    }

    fn tensor(&self, a: &String, b: &String) -> Result<String, CatError> {
        Ok(tensor_strings(a, b))
    }
}

impl Closed for PromptCategory {
    type Exp = Template;

    fn evaluate(&self, exp: &Template, x: &String) -> Result<String, CatError> {
        let prompt = exp.apply(x).map_err(|e| eval_error(&exp.to_string(), e))?;
        self.llm
            .complete(&prompt)
            .map_err(|e| eval_error(&exp.to_string(), e))
    }
}

/// A finite exponential object `Z^X`: enumerated descriptions of arrows `X -> Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentialObject {
    pub base: ObjectId,
    pub exponent: ObjectId,
    pub elements: Vec<Template>,
}

impl ExponentialObject {
    /// Evaluates every element on every exponent witness and returns the
    /// `(element, witness, output)` triples that fall outside the base.
    pub fn strays(
        &self,
        cat: &PromptCategory,
    ) -> Result<Vec<(String, String, String)>, PromptError> {
        let base = cat.object(&self.base)?;
        let mut out = Vec::new();
        for e in &self.elements {
            for x in &cat.object(&self.exponent)?.witnesses {
                let y = cat.evaluate(e, x)?;
                if !base.contains(&y) {
                    out.push((e.to_string(), x.clone(), y));
                }
            }
        }
        Ok(out)
    }
}
