//! Exact-arithmetic toolkit for elliptic fibrations on ruled surfaces over
//! elliptic curves: finite fields, Weierstrass curves and isogenies, a
//! symbolic vector-bundle calculus, divisor lattices, multiple-fiber
//! arithmetic, transition-matrix verification, cover diagrams, and the
//! fibration classifier that ties them together.

pub mod bundle;
pub mod cocycle;
pub mod curve;
pub mod fibers;
pub mod field;
pub mod lattice;

pub use curve::{
    Curve, CurveError, CurvePoint, FieldEmbedding, Isogeny, IsogenyKind, PreimageSet,
    DEFAULT_EXTENSION_BOUND,
};
pub use field::{ArithOp, Field, FieldElement, FieldError, FieldSpec, DEFAULT_FIELD_CAP};
