//! Closed structure: exponentials, evaluation, and the curry/uncurry bijection
//! `Hom(X ⊗ Y, Z) ≅ Hom(Y, Z^X)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::laws::{LawConfig, LawKind, LawReport, Semantics};
use super::{CatError, ObjectId};

/// A category whose exponential elements can be evaluated.
pub trait Closed: Semantics {
    /// An element of some `Z^X`: a description of an arrow `X -> Z`.
    type Exp: Clone + PartialEq + fmt::Display;

    /// The evaluation morphism `e: Z^X ⊗ X -> Z`.
    fn evaluate(&self, exp: &Self::Exp, x: &Self::Value) -> Result<Self::Value, CatError>;
}

/// Names the exponential object `Z^X` and its two ingredients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentialWitness {
    /// `Z`
    pub base: ObjectId,
    /// `X`
    pub exponent: ObjectId,
    /// `Z^X`
    pub object: ObjectId,
}

impl ExponentialWitness {
    pub fn new(base: impl Into<ObjectId>, exponent: impl Into<ObjectId>) -> Self {
        let base = base.into();
        let exponent = exponent.into();
        let object = ObjectId::new(format!("{base}^{exponent}"));
        Self {
            base,
            exponent,
            object,
        }
    }
}

/// Domain `X ⊗ Y` and codomain `Z` of a binary arrow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorShape {
    pub left: ObjectId,
    pub right: ObjectId,
    pub cod: ObjectId,
}

/// An arrow `X ⊗ Y -> Z`.
pub trait BinaryArrow<C: Closed + ?Sized> {
    fn shape(&self) -> &TensorShape;

    fn apply(&self, cx: &C, x: &C::Value, y: &C::Value) -> Result<C::Value, CatError>;

    /// Fixes the right argument, leaving a description in `Z^X`.
    fn partial(&self, cx: &C, y: &C::Value) -> Result<C::Exp, CatError>;
}

/// An arrow `Y -> Z^X`.
pub trait Transpose<C: Closed + ?Sized> {
    fn param(&self) -> &ObjectId;

    fn exponential(&self) -> &ExponentialWitness;

    fn select(&self, cx: &C, y: &C::Value) -> Result<C::Exp, CatError>;
}

/// `curry(f)`: the transpose of a binary arrow.
#[derive(Debug, Clone)]
pub struct Curried<B> {
    binary: B,
    witness: ExponentialWitness,
    param: ObjectId,
}

impl<B> Curried<B> {
    pub fn binary(&self) -> &B {
        &self.binary
    }

    pub fn into_binary(self) -> B {
        self.binary
    }
}

impl<C: Closed + ?Sized, B: BinaryArrow<C>> Transpose<C> for Curried<B> {
    fn param(&self) -> &ObjectId {
        &self.param
    }

    fn exponential(&self) -> &ExponentialWitness {
        &self.witness
    }

    fn select(&self, cx: &C, y: &C::Value) -> Result<C::Exp, CatError> {
        self.binary.partial(cx, y)
    }
}

/// Turns `f: X ⊗ Y -> Z` into `Y -> Z^X`. The witness must name `f`'s left
/// factor as exponent and its codomain as base.
pub fn curry<C, B>(f: B, witness: ExponentialWitness) -> Result<Curried<B>, CatError>
where
    C: Closed + ?Sized,
    B: BinaryArrow<C>,
{
    let shape = f.shape();
    if shape.left != witness.exponent || shape.cod != witness.base {
        return Err(CatError::CurryShape {
            expected: format!("{} ⊗ Y -> {}", witness.exponent, witness.base),
            found: format!("{} ⊗ {} -> {}", shape.left, shape.right, shape.cod),
        });
    }
    let param = shape.right.clone();
    Ok(Curried {
        binary: f,
        witness,
        param,
    })
}

/// `uncurry(λ)`: `(x, y) ↦ e(λ(y), x)`.
#[derive(Debug, Clone)]
pub struct Uncurried<L> {
    lambda: L,
    shape: TensorShape,
}

impl<L> Uncurried<L> {
    pub fn lambda(&self) -> &L {
        &self.lambda
    }
}

pub fn uncurry<C, L>(lambda: L) -> Uncurried<L>
where
    C: Closed + ?Sized,
    L: Transpose<C>,
{
    let shape = TensorShape {
        left: lambda.exponential().exponent.clone(),
        right: lambda.param().clone(),
        cod: lambda.exponential().base.clone(),
    };
    Uncurried { lambda, shape }
}

impl<C: Closed + ?Sized, L: Transpose<C>> BinaryArrow<C> for Uncurried<L> {
    fn shape(&self) -> &TensorShape {
        &self.shape
    }

    fn apply(&self, cx: &C, x: &C::Value, y: &C::Value) -> Result<C::Value, CatError> {
        cx.evaluate(&self.lambda.select(cx, y)?, x)
    }

    fn partial(&self, cx: &C, y: &C::Value) -> Result<C::Exp, CatError> {
        self.lambda.select(cx, y)
    }
}

/// Checks `uncurry(curry(f)) = f` (equivalently the evaluation triangle
/// `e ∘ (curry(f) ⊗ 1) = f`) on every witness pair.
pub fn check_uncurry_curry<C, B>(
    cx: &C,
    f: &B,
    witness: &ExponentialWitness,
    config: LawConfig,
) -> Result<LawReport, CatError>
where
    C: Closed + ?Sized,
    B: BinaryArrow<C> + Clone,
{
    let mut report = LawReport::new("uncurry(curry(f)) = f", config);
    let lambda = curry::<C, B>(f.clone(), witness.clone())?;
    let back = uncurry::<C, _>(lambda);
    let shape = f.shape().clone();
    let xs = cx.witnesses(&shape.left)?;
    let ys = cx.witnesses(&shape.right)?;
    for y in &ys {
        for x in &xs {
            let direct = f.apply(cx, x, y)?;
            let round = back.apply(cx, x, y)?;
            let subject = format!("x={x} | y={y}");
            if !report.record(cx, LawKind::UncurryCurry, subject, x, &round, &direct) {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Checks `curry(uncurry(λ)) = λ` on every witness of `λ`'s parameter, both as
/// exponential elements and after evaluation at every exponent witness.
pub fn check_curry_uncurry<C, L>(
    cx: &C,
    lambda: &L,
    config: LawConfig,
) -> Result<LawReport, CatError>
where
    C: Closed + ?Sized,
    L: Transpose<C> + Clone,
{
    let mut report = LawReport::new("curry(uncurry(λ)) = λ", config);
    let witness = lambda.exponential().clone();
    let round = curry::<C, _>(uncurry::<C, _>(lambda.clone()), witness.clone())?;
    let xs = cx.witnesses(&witness.exponent)?;
    for y in cx.witnesses(lambda.param())? {
        let a = lambda.select(cx, &y)?;
        let b = round.select(cx, &y)?;
        let exp_equal = a == b;
        let instance = super::laws::LawInstance {
            law: LawKind::CurryUncurry,
            subject: format!("description at y={y}"),
            witness: y.to_string(),
            lhs: b.to_string(),
            rhs: a.to_string(),
            exact: exp_equal,
            normalized: exp_equal,
        };
        if !report.push(instance) {
            return Ok(report);
        }
        for x in &xs {
            let lhs = cx.evaluate(&b, x)?;
            let rhs = cx.evaluate(&a, x)?;
            if !report.record(
                cx,
                LawKind::CurryUncurry,
                format!("e(λ(y), x) at y={y}"),
                x,
                &lhs,
                &rhs,
            ) {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::laws::TableSemantics;
    use crate::cat::ArrowId;

    /// Exponential elements are "prefix" descriptions: e(p, x) = p + x.
    struct Prefixes(TableSemantics);

    impl Semantics for Prefixes {
        type Value = String;
        fn witnesses(&self, o: &ObjectId) -> Result<Vec<String>, CatError> {
            self.0.witnesses(o)
        }
        fn apply(&self, a: &ArrowId, v: &String) -> Result<String, CatError> {
            self.0.apply(a, v)
        }
    }

    impl Closed for Prefixes {
        type Exp = String;
        fn evaluate(&self, exp: &String, x: &String) -> Result<String, CatError> {
            Ok(format!("{exp}{x}"))
        }
    }

    #[derive(Clone, Debug)]
    struct Join(TensorShape);

    impl BinaryArrow<Prefixes> for Join {
        fn shape(&self) -> &TensorShape {
            &self.0
        }
        fn apply(&self, _: &Prefixes, x: &String, y: &String) -> Result<String, CatError> {
            Ok(format!("{y}:{x}"))
        }
        fn partial(&self, _: &Prefixes, y: &String) -> Result<String, CatError> {
            Ok(format!("{y}:"))
        }
    }

    /// A join whose partial application forgets the separator.
    #[derive(Clone, Debug)]
    struct LossyJoin(TensorShape);

    impl BinaryArrow<Prefixes> for LossyJoin {
        fn shape(&self) -> &TensorShape {
            &self.0
        }
        fn apply(&self, _: &Prefixes, x: &String, y: &String) -> Result<String, CatError> {
            Ok(format!("{y}:{x}"))
        }
        fn partial(&self, _: &Prefixes, y: &String) -> Result<String, CatError> {
            Ok(y.clone())
        }
    }

    fn cx() -> Prefixes {
        Prefixes(
            TableSemantics::new()
                .with_witnesses("X", ["1", "2"])
                .with_witnesses("Y", ["a", "b"]),
        )
    }

    fn shape() -> TensorShape {
        TensorShape {
            left: "X".into(),
            right: "Y".into(),
            cod: "Z".into(),
        }
    }

    #[test]
    fn round_trip_holds_for_lawful_partial() {
        let w = ExponentialWitness::new("Z", "X");
        let report = check_uncurry_curry(&cx(), &Join(shape()), &w, LawConfig::default()).unwrap();
        assert!(report.passed());
        assert_eq!(report.instances.len(), 4);
    }

    #[test]
    fn round_trip_detects_lossy_partial() {
        let w = ExponentialWitness::new("Z", "X");
        let report =
            check_uncurry_curry(&cx(), &LossyJoin(shape()), &w, LawConfig::default()).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn curry_uncurry_is_identity_on_lambdas() {
        let w = ExponentialWitness::new("Z", "X");
        let lambda = curry::<Prefixes, _>(Join(shape()), w).unwrap();
        let report = check_curry_uncurry(&cx(), &lambda, LawConfig::default()).unwrap();
        assert!(report.passed());
        assert_eq!(lambda.param().as_str(), "Y");
        assert_eq!(
            Transpose::<Prefixes>::exponential(&lambda).object.as_str(),
            "Z^X"
        );
    }

    #[test]
    fn shape_mismatch() {
        let w = ExponentialWitness::new("Z", "Y");
        let err = curry::<Prefixes, _>(Join(shape()), w).unwrap_err();
        assert!(matches!(err, CatError::CurryShape { .. }));
    }
}
