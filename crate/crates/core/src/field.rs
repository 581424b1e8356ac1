//! Prime-field arithmetic.
//!
//! [`FieldSpec`] describes `F_q` for a prime `q`; [`FieldElement`] is a value
//! tagged with the field it lives in. Element operations between different
//! fields are rejected. Hot loops elsewhere in the crate use the raw `u32`
//! helpers on [`FieldSpec`] directly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::FieldError;

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FieldSpec {
    q: u32,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// Builds `F_q`, checking primality by trial division.
    pub fn new(q: u32) -> Result<Self, FieldError> {
        if is_prime(q) {
            Ok(Self { q })
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    /// Field order as an alphabet size.
    #[inline]
    pub fn size(&self) -> usize {
        self.q as usize
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value < self.q {
            Ok(FieldElement {
                value,
                field: *self,
            })
        } else {
            Err(FieldError::OutOfRange { value, q: self.q })
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            value: 0,
            field: *self,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            value: 1 % self.q,
            field: *self,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let field = *self;
        (0..self.q).map(move |value| FieldElement { value, field })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.q as u64 - (b % self.q) as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let q = self.q as u64;
        let mut acc = 1 % q;
        let mut b = base as u64 % q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % q;
            }
            b = b * b % q;
            exp >>= 1;
        }
        acc as u32
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: u32) -> Result<u32, FieldError> {
        if a.is_multiple_of(self.q) {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.q) {
            return None;
        }
        let mut x = a % self.q;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        Some(k)
    }

    /// Smallest generator of the cyclic group `F_q^*`.
    pub fn generator(&self) -> u32 {
        (1..self.q)
            .find(|&g| self.multiplicative_order(g) == Some(self.q - 1))
            .expect("F_q^* is cyclic for prime q")
    }
}

impl TryFrom<u32> for FieldSpec {
    type Error = FieldError;

    fn try_from(q: u32) -> Result<Self, Self::Error> {
        FieldSpec::new(q)
    }
}

impl From<FieldSpec> for u32 {
    fn from(f: FieldSpec) -> u32 {
        f.q
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// An element of a particular prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: FieldSpec,
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<FieldSpec, FieldError> {
        if self.field == other.field {
            Ok(self.field)
        } else {
            Err(FieldError::Mismatch {
                left: self.field.q,
                right: other.field.q,
            })
        }
    }

    fn with(&self, value: u32) -> Self {
        Self {
            value,
            field: self.field,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.mul(self.value, other.value)))
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.div(self.value, other.value)?))
    }

    pub fn neg(&self) -> Self {
        self.with(self.field.neg(self.value))
    }

    /// Errors on zero; there is no sentinel inverse.
    pub fn inv(&self) -> Result<Self, FieldError> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn pow(&self, exp: u64) -> Self {
        self.with(self.field.pow(self.value, exp))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.q)
    }
}

/// Counts from an exhaustive run of the field axioms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub q: u32,
    pub associativity_checks: u64,
    pub commutativity_checks: u64,
    pub distributivity_checks: u64,
    pub identity_checks: u64,
    /// `(a / b) * b == a` for every `a` and every nonzero `b`.
    pub inverse_checks: u64,
    pub fermat_checks: u64,
    pub generator: u32,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exhaustively checks the field axioms, Fermat's little theorem, and
/// cyclicity of `F_q^*`. Cubic in `q`.
pub fn check_axioms(field: FieldSpec) -> AxiomReport {
    let q = field.order();
    let mut r = AxiomReport {
        q,
        associativity_checks: 0,
        commutativity_checks: 0,
        distributivity_checks: 0,
        identity_checks: 0,
        inverse_checks: 0,
        fermat_checks: 0,
        generator: 0,
        failures: Vec::new(),
    };
    let mut failures = Vec::new();
    for a in 0..q {
        for b in 0..q {
            r.commutativity_checks += 2;
            if field.add(a, b) != field.add(b, a) {
                failures.push(format!("add not commutative at ({a},{b})"));
            }
            if field.mul(a, b) != field.mul(b, a) {
                failures.push(format!("mul not commutative at ({a},{b})"));
            }
            for c in 0..q {
                r.associativity_checks += 2;
                r.distributivity_checks += 1;
                if field.add(field.add(a, b), c) != field.add(a, field.add(b, c)) {
                    failures.push(format!("add not associative at ({a},{b},{c})"));
                }
                if field.mul(field.mul(a, b), c) != field.mul(a, field.mul(b, c)) {
                    failures.push(format!("mul not associative at ({a},{b},{c})"));
                }
                if field.mul(a, field.add(b, c)) != field.add(field.mul(a, b), field.mul(a, c)) {
                    failures.push(format!("not distributive at ({a},{b},{c})"));
                }
            }
            if b != 0 {
                r.inverse_checks += 1;
                match field.div(a, b) {
                    Ok(d) if field.mul(d, b) == a => {}
                    _ => failures.push(format!("division round-trip failed at ({a},{b})")),
                }
            }
        }
        r.identity_checks += 2;
        if field.add(a, 0) != a || field.mul(a, 1) != a {
            failures.push(format!("identity failed at {a}"));
        }
        let additive: Vec<u32> = (0..q).filter(|&b| field.add(a, b) == 0).collect();
        if additive.len() != 1 {
            failures.push(format!("additive inverse of {a} not unique"));
        }
        if a != 0 {
            let multiplicative: Vec<u32> = (0..q).filter(|&b| field.mul(a, b) == 1).collect();
            if multiplicative.len() != 1 {
                failures.push(format!("multiplicative inverse of {a} not unique"));
            }
            r.fermat_checks += 1;
            if field.pow(a, q as u64 - 1) != 1 {
                failures.push(format!("Fermat failed at {a}"));
            }
        }
    }
    r.generator = field.generator();
    let mut seen = vec![false; q as usize];
    let mut x = 1u32;
    for _ in 0..q - 1 {
        seen[x as usize] = true;
        x = field.mul(x, r.generator);
    }
    if seen.iter().skip(1).any(|s| !s) {
        failures.push(format!("generator {} does not span F_q^*", r.generator));
    }
    r.failures = failures;
    r
}
