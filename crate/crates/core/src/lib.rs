//! Finite-field information-theory workbench.
//!
//! Exact entropies, rate bounds, syndrome-coding simulations, function
//! decomposability analysis, and min-entropy searches for channels and
//! sources that mix addition and multiplication over a prime field `F_q`.
//!
//! The probability layer is generic over its mass scalar through
//! [`Probability`]; the aliases below fix the common choices.

pub mod analysis;
pub mod channel;
pub mod codec;
pub mod error;
pub mod field;
pub mod prob;
pub mod rng;
pub mod scalar;
pub mod source;
pub mod table;

pub use error::{Error, FieldError, ProbError, Result, TableError};
pub use field::{FieldElement, FieldSpec};
pub use prob::{pushforward, JointPmf, Pmf};
pub use scalar::Probability;
pub use table::TableFunction;

/// Exact rational probability mass.
pub type Rational = num_rational::BigRational;

pub type Pmf64 = Pmf<f64>;
pub type Pmf32 = Pmf<f32>;
pub type ExactPmf = Pmf<Rational>;
pub type JointPmf64 = JointPmf<f64>;
pub type JointPmf32 = JointPmf<f32>;
pub type ExactJointPmf = JointPmf<Rational>;
