use serde::{Deserialize, Serialize};

use super::laws::{LawConfig, LawKind, LawReport, Semantics};
use super::{CatError, ObjectId};

/// Value-level monoidal structure: a unit, a tensor, and the structural
/// isomorphisms. The isomorphisms default to identities, which is the strict
/// case.
pub trait MonoidalSemantics: Semantics {
    fn unit(&self) -> Self::Value;

    fn tensor(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, CatError>;

    /// `l: I ⊗ X -> X`, applied to a value of `I ⊗ X`.
    fn left_unitor(&self, v: &Self::Value) -> Result<Self::Value, CatError> {
        Ok(v.clone())
    }

    /// `r: X ⊗ I -> X`.
    fn right_unitor(&self, v: &Self::Value) -> Result<Self::Value, CatError> {
        Ok(v.clone())
    }

    /// `a: (X ⊗ Y) ⊗ Z -> X ⊗ (Y ⊗ Z)`.
    fn associator(&self, v: &Self::Value) -> Result<Self::Value, CatError> {
        Ok(v.clone())
    }
}

/// Object-level data for a monoidal category: the unit object and how tensor
/// objects are named.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidalStructure {
    pub unit: ObjectId,
}

impl MonoidalStructure {
    pub fn new(unit: impl Into<ObjectId>) -> Self {
        Self { unit: unit.into() }
    }

    /// `X ⊗ Y`, with the unit absorbed on either side.
    pub fn tensor_object(&self, x: &ObjectId, y: &ObjectId) -> ObjectId {
        if *x == self.unit {
            y.clone()
        } else if *y == self.unit {
            x.clone()
        } else {
            ObjectId::new(format!("{x}⊗{y}"))
        }
    }
}

/// Checks unitors, associator and the triangle identity on every witness
/// (pairs and triples drawn from the union of the objects' witnesses).
pub fn check_monoidal_laws<S: MonoidalSemantics + ?Sized>(
    objects: &[ObjectId],
    sem: &S,
    config: LawConfig,
) -> Result<LawReport, CatError> {
    let mut report = LawReport::new("monoidal structure", config);
    let mut pool: Vec<S::Value> = Vec::new();
    for o in objects {
        for w in sem.witnesses(o)? {
            if !pool.contains(&w) {
                pool.push(w);
            }
        }
    }
    let unit = sem.unit();

    for x in &pool {
        let l = sem.left_unitor(&sem.tensor(&unit, x)?)?;
        if !report.record(sem, LawKind::LeftUnitor, "l(I⊗x)", x, &l, x) {
            return Ok(report);
        }
        let r = sem.right_unitor(&sem.tensor(x, &unit)?)?;
        if !report.record(sem, LawKind::RightUnitor, "r(x⊗I)", x, &r, x) {
            return Ok(report);
        }
    }

    for x in &pool {
        for y in &pool {
            // (x ⊗ I) ⊗ y --a--> x ⊗ (I ⊗ y) must agree with r ⊗ 1 and 1 ⊗ l.
            let via_a = sem.associator(&sem.tensor(&sem.tensor(x, &unit)?, y)?)?;
            let via_l = sem.tensor(x, &sem.left_unitor(&sem.tensor(&unit, y)?)?)?;
            let via_r = sem.tensor(&sem.right_unitor(&sem.tensor(x, &unit)?)?, y)?;
            let pair = sem.tensor(x, y)?;
            if !report.record(
                sem,
                LawKind::Triangle,
                "a;(1⊗l) = r⊗1",
                &pair,
                &via_l,
                &via_r,
            ) {
                return Ok(report);
            }
            if !report.record(
                sem,
                LawKind::Triangle,
                "(x⊗I)⊗y under a",
                &pair,
                &via_a,
                &via_l,
            ) {
                return Ok(report);
            }
        }
    }

    for x in &pool {
        for y in &pool {
            for z in &pool {
                let left = sem.associator(&sem.tensor(&sem.tensor(x, y)?, z)?)?;
                let right = sem.tensor(x, &sem.tensor(y, z)?)?;
                let witness = sem.tensor(&sem.tensor(x, y)?, z)?;
                if !report.record(
                    sem,
                    LawKind::Associator,
                    "a((x⊗y)⊗z)",
                    &witness,
                    &left,
                    &right,
                ) {
                    return Ok(report);
                }
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

    /// Strings under plain concatenation.
    struct Concat(TableSemantics);

    impl Semantics for Concat {
        type Value = String;
        fn witnesses(&self, o: &ObjectId) -> Result<Vec<String>, CatError> {
            self.0.witnesses(o)
        }
        fn apply(&self, a: &ArrowId, v: &String) -> Result<String, CatError> {
            self.0.apply(a, v)
        }
    }

    impl MonoidalSemantics for Concat {
        fn unit(&self) -> String {
            String::new()
        }
        fn tensor(&self, a: &String, b: &String) -> Result<String, CatError> {
            Ok(format!("{a}{b}"))
        }
    }

    /// A broken "tensor" that is not associative.
    struct Bracketing(TableSemantics);

    impl Semantics for Bracketing {
        type Value = String;
        fn witnesses(&self, o: &ObjectId) -> Result<Vec<String>, CatError> {
            self.0.witnesses(o)
        }
        fn apply(&self, a: &ArrowId, v: &String) -> Result<String, CatError> {
            self.0.apply(a, v)
        }
    }

    impl MonoidalSemantics for Bracketing {
        fn unit(&self) -> String {
            String::new()
        }
        fn tensor(&self, a: &String, b: &String) -> Result<String, CatError> {
            if a.is_empty() {
                return Ok(b.clone());
            }
            if b.is_empty() {
                return Ok(a.clone());
            }
            Ok(format!("({a}{b})"))
        }
    }

    #[test]
    fn concatenation_is_strict_monoidal() {
        let sem = Concat(TableSemantics::new().with_witnesses("S", ["ab", "cd", ""]));
        let report = check_monoidal_laws(&["S".into()], &sem, LawConfig::default()).unwrap();
        assert!(report.passed());
        assert_eq!(report.count(LawKind::Associator), 27);
        assert_eq!(report.count(LawKind::LeftUnitor), 3);
    }

    #[test]
    fn non_associative_tensor_is_caught() {
        let sem = Bracketing(TableSemantics::new().with_witnesses("S", ["a", "b"]));
        let report = check_monoidal_laws(&["S".into()], &sem, LawConfig::default()).unwrap();
        assert!(!report.passed());
        assert_eq!(report.first_failure().unwrap().law, LawKind::Associator);
    }

    #[test]
    fn unit_absorbed_in_object_names() {
        let m = MonoidalStructure::new("I");
        assert_eq!(m.tensor_object(&"I".into(), &"X".into()).as_str(), "X");
        assert_eq!(m.tensor_object(&"X".into(), &"I".into()).as_str(), "X");
        assert_eq!(m.tensor_object(&"X".into(), &"Y".into()).as_str(), "X⊗Y");
    }
}
