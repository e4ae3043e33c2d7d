//! Finitely presented categories, functors, natural transformations, and
//! monoidal closed structure, checked extensionally on witness suites.
//!
//! Composition is diagrammatic throughout: `f ; g` runs `f` first.

mod closed;
mod functor;
mod laws;
mod monoidal;
mod path;
mod presentation;

pub use closed::{
    check_curry_uncurry, check_uncurry_curry, curry, uncurry, BinaryArrow, Closed, Curried,
    ExponentialWitness, TensorShape, Transpose, Uncurried,
};
pub use functor::{
    check_functor_laws, check_naturality, FunctorDef, FunctorSpec, NatTransDef, TransformationSpec,
    Variance,
};
pub use laws::{
    check_category_laws, evaluate_path, EqualityPolicy, LawConfig, LawInstance, LawKind, LawReport,
    LawSummary, Semantics, TableFixture, TableSemantics,
};
pub use monoidal::{check_monoidal_laws, MonoidalSemantics, MonoidalStructure};
pub use path::{compose, ArrowId, ObjectId, Path};
pub use presentation::{
    GeneratorSpec, Presentation, PresentationBuilder, PresentationSpec, Relation, IDENTITY_PREFIX,
};

#[derive(Debug, thiserror::Error)]
pub enum CatError {
    #[error("cannot compose: codomain {left_cod} does not match domain {right_dom}")]
    CompositionMismatch { left_cod: String, right_dom: String },
    #[error("empty path has no anchor object")]
    EmptyPath,
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown arrow {0}")]
    UnknownArrow(String),
    #[error("duplicate object {0}")]
    DuplicateObject(String),
    #[error("duplicate arrow {0}")]
    DuplicateArrow(String),
    #[error("label {0} is reserved for identities")]
    ReservedLabel(String),
    #[error("relation {index} is not parallel: {lhs} vs {rhs}")]
    RelationEndpoints {
        index: usize,
        lhs: String,
        rhs: String,
    },
    #[error("no semantics for arrow {0}")]
    MissingSemantics(String),
    #[error("evaluating {arrow}: {message}")]
    Evaluation { arrow: String, message: String },
    #[error("ill-formed functor {functor}: {reason}")]
    IllFormedFunctor { functor: String, reason: String },
    #[error("transformation {transformation} has no component at {object}")]
    IncompleteTransformation {
        transformation: String,
        object: String,
    },
    #[error("ill-formed transformation {transformation}: {reason}")]
    IllFormedTransformation {
        transformation: String,
        reason: String,
    },
    #[error("cannot curry: expected {expected}, found {found}")]
    CurryShape { expected: String, found: String },
}
