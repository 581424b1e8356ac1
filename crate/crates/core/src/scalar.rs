//! Probability scalar: f64 for everyday work, f32 where memory matters, and
//! exact rationals for oracle cross-checks.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, NumAssign, One, Signed, ToPrimitive};

/// Numeric type usable as a probability mass.
///
/// Entropies are always reported as `f64` bits; only the mass bookkeeping
/// (pushforwards, marginals, products) is carried out in `Self`.
pub trait Probability:
    Clone + Debug + PartialOrd + NumAssign + Signed + Send + Sync + 'static
{
    /// `num / den`, exact for rationals.
    fn ratio(num: u64, den: u64) -> Self;

    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Whether a total mass counts as 1 for this scalar.
    fn is_unit_mass(sum: &Self) -> bool;

    /// Equality up to the scalar's rounding.
    fn approx_eq(a: &Self, b: &Self) -> bool;
}

impl Probability for f64 {
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_unit_mass(sum: &Self) -> bool {
        (sum - 1.0).abs() <= 1e-12
    }

    fn approx_eq(a: &Self, b: &Self) -> bool {
        (a - b).abs() <= 1e-14
    }
}

impl Probability for f32 {
    fn ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x as f32)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn is_unit_mass(sum: &Self) -> bool {
        (sum - 1.0).abs() <= 1e-5
    }

    fn approx_eq(a: &Self, b: &Self) -> bool {
        (a - b).abs() <= 1e-6
    }
}

impl Probability for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_unit_mass(sum: &Self) -> bool {
        sum.is_one()
    }

    fn approx_eq(a: &Self, b: &Self) -> bool {
        a == b
    }
}

/// `-p log2 p`, with `0 log 0 = 0`.
#[inline]
pub fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}
