//! Probability mass functions over dense finite alphabets `0..k` and their
//! joints, with entropies and mutual informations in bits.
//!
//! Field semantics never appear here: a symbol is just an index. Joints are
//! dense row-major tables (last axis fastest).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProbError;
use crate::scalar::{surprisal_term, Probability};
use crate::table::{flat_index, unflatten, TableFunction};

/// A pmf over `0..len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr<P>", into = "PmfRepr<P>")]
#[serde(bound(
    serialize = "P: Probability + Serialize",
    deserialize = "P: Probability + Deserialize<'de>"
))]
pub struct Pmf<P: Probability> {
    probs: Vec<P>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr<P> {
    alphabet_size: usize,
    probs: Vec<P>,
}

impl<P: Probability> TryFrom<PmfRepr<P>> for Pmf<P> {
    type Error = ProbError;

    fn try_from(r: PmfRepr<P>) -> Result<Self, ProbError> {
        if r.probs.len() != r.alphabet_size {
            return Err(ProbError::ShapeMismatch {
                expected: r.alphabet_size,
                found: r.probs.len(),
            });
        }
        Pmf::new(r.probs)
    }
}

impl<P: Probability> From<Pmf<P>> for PmfRepr<P> {
    fn from(p: Pmf<P>) -> Self {
        PmfRepr {
            alphabet_size: p.probs.len(),
            probs: p.probs,
        }
    }
}

fn validate<P: Probability>(probs: &[P]) -> Result<(), ProbError> {
    if probs.is_empty() {
        return Err(ProbError::Empty);
    }
    if let Some(i) = probs.iter().position(|p| p.is_negative()) {
        return Err(ProbError::Negative(i));
    }
    let sum = probs.iter().fold(P::zero(), |acc, p| acc + p.clone());
    if !P::is_unit_mass(&sum) {
        return Err(ProbError::NotNormalized(sum.to_f64()));
    }
    Ok(())
}

fn entropy_of_masses<'a, P: Probability>(probs: impl Iterator<Item = &'a P>) -> f64 {
    probs.map(|p| surprisal_term(p.to_f64())).sum()
}

impl<P: Probability> Pmf<P> {
    pub fn new(probs: Vec<P>) -> Result<Self, ProbError> {
        validate(&probs)?;
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights with positive total.
    pub fn from_weights(weights: Vec<P>) -> Result<Self, ProbError> {
        if weights.is_empty() {
            return Err(ProbError::Empty);
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(ProbError::Negative(i));
        }
        let total = weights.iter().fold(P::zero(), |acc, w| acc + w.clone());
        if total.is_zero() {
            return Err(ProbError::NotNormalized(0.0));
        }
        let probs = weights.into_iter().map(|w| w / total.clone()).collect();
        Ok(Self { probs })
    }

    pub fn uniform(k: usize) -> Result<Self, ProbError> {
        if k == 0 {
            return Err(ProbError::Empty);
        }
        Ok(Self {
            probs: vec![P::ratio(1, k as u64); k],
        })
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_on(k: usize, support: &[usize]) -> Result<Self, ProbError> {
        if k == 0 || support.is_empty() {
            return Err(ProbError::Empty);
        }
        let mut probs = vec![P::zero(); k];
        let share = P::ratio(1, support.len() as u64);
        for &s in support {
            if s >= k {
                return Err(ProbError::AxisOutOfRange { axis: s, rank: k });
            }
            if !probs[s].is_zero() {
                return Err(ProbError::DuplicateAxis(s));
            }
            probs[s] = share.clone();
        }
        Ok(Self { probs })
    }

    pub fn point(k: usize, symbol: usize) -> Result<Self, ProbError> {
        Self::uniform_on(k, &[symbol])
    }

    /// Bernoulli(`p`) on `{0, 1}`.
    pub fn bernoulli(p: P) -> Result<Self, ProbError> {
        Self::new(vec![P::one() - p.clone(), p])
    }

    /// Random pmf on `support` from normalized uniform weights.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        k: usize,
        support: &[usize],
    ) -> Result<Self, ProbError> {
        let mut weights = vec![P::zero(); k];
        for &s in support {
            if s >= k {
                return Err(ProbError::AxisOutOfRange { axis: s, rank: k });
            }
            // Keep every support point strictly positive.
            let w: f64 = rng.gen_range(0.01..1.0);
            weights[s] = P::from_f64(w).ok_or(ProbError::NotNormalized(w))?;
        }
        Self::from_weights(weights)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> &P {
        &self.probs[symbol]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, _)| i)
    }

    pub fn is_uniform(&self) -> bool {
        let first = &self.probs[0];
        self.probs.iter().all(|p| P::approx_eq(p, first))
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of_masses(self.probs.iter())
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, p) in self.probs.iter().enumerate() {
            let p = p.to_f64();
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }

    /// `(1 - t) self + t other`.
    pub fn mix(&self, other: &Self, t: P) -> Result<Self, ProbError> {
        if self.len() != other.len() {
            return Err(ProbError::ShapeMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let s = P::one() - t.clone();
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| s.clone() * a.clone() + t.clone() * b.clone())
            .collect();
        Self::new(probs)
    }

    pub fn to_f64(&self) -> Pmf<f64> {
        Pmf {
            probs: self.probs.iter().map(|p| p.to_f64()).collect(),
        }
    }
}

impl Pmf<f64> {
    /// Converts to another scalar through `from_f64`; exact for rationals.
    pub fn convert<Q: Probability>(&self) -> Result<Pmf<Q>, ProbError> {
        let probs = self
            .probs
            .iter()
            .map(|&p| Q::from_f64(p).ok_or(ProbError::NotNormalized(p)))
            .collect::<Result<Vec<_>, _>>()?;
        Pmf::from_weights(probs)
    }
}

/// Dense joint pmf over several axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr<P>", into = "JointRepr<P>")]
#[serde(bound(
    serialize = "P: Probability + Serialize",
    deserialize = "P: Probability + Deserialize<'de>"
))]
pub struct JointPmf<P: Probability> {
    dims: Vec<usize>,
    probs: Vec<P>,
}

#[derive(Serialize, Deserialize)]
struct JointRepr<P> {
    dims: Vec<usize>,
    probs: Vec<P>,
}

impl<P: Probability> TryFrom<JointRepr<P>> for JointPmf<P> {
    type Error = ProbError;

    fn try_from(r: JointRepr<P>) -> Result<Self, ProbError> {
        JointPmf::new(r.dims, r.probs)
    }
}

impl<P: Probability> From<JointPmf<P>> for JointRepr<P> {
    fn from(j: JointPmf<P>) -> Self {
        JointRepr {
            dims: j.dims,
            probs: j.probs,
        }
    }
}

impl<P: Probability> From<Pmf<P>> for JointPmf<P> {
    fn from(p: Pmf<P>) -> Self {
        JointPmf {
            dims: vec![p.probs.len()],
            probs: p.probs,
        }
    }
}

impl<P: Probability> JointPmf<P> {
    pub fn new(dims: Vec<usize>, probs: Vec<P>) -> Result<Self, ProbError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(ProbError::Empty);
        }
        let expected: usize = dims.iter().product();
        if probs.len() != expected {
            return Err(ProbError::ShapeMismatch {
                expected,
                found: probs.len(),
            });
        }
        validate(&probs)?;
        Ok(Self { dims, probs })
    }

    /// Joint of independent components, in order.
    pub fn product(parts: &[Pmf<P>]) -> Result<Self, ProbError> {
        let (first, rest) = parts.split_first().ok_or(ProbError::Empty)?;
        Ok(rest.iter().fold(JointPmf::from(first.clone()), |acc, p| {
            acc.with_independent(p)
        }))
    }

    /// i.i.d. `n`-fold product of `p`.
    pub fn product_extension(p: &Pmf<P>, n: usize) -> Result<Self, ProbError> {
        if n == 0 {
            return Err(ProbError::Empty);
        }
        Self::product(&vec![p.clone(); n])
    }

    /// Joint of `(A, B)` from `p(a)` and rows `p(b | a)`.
    pub fn from_conditional(marginal: &Pmf<P>, rows: &[Pmf<P>]) -> Result<Self, ProbError> {
        if rows.len() != marginal.len() {
            return Err(ProbError::ShapeMismatch {
                expected: marginal.len(),
                found: rows.len(),
            });
        }
        let k = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(ProbError::ShapeMismatch {
                expected: k,
                found: bad.len(),
            });
        }
        let mut probs = Vec::with_capacity(marginal.len() * k);
        for (pa, row) in marginal.probs.iter().zip(rows) {
            probs.extend(row.probs.iter().map(|pb| pa.clone() * pb.clone()));
        }
        Ok(Self {
            dims: vec![marginal.len(), k],
            probs,
        })
    }

    /// Appends an axis independent of all existing ones.
    pub fn with_independent(&self, p: &Pmf<P>) -> Self {
        let mut probs = Vec::with_capacity(self.probs.len() * p.len());
        for a in &self.probs {
            probs.extend(p.probs.iter().map(|b| a.clone() * b.clone()));
        }
        let mut dims = self.dims.clone();
        dims.push(p.len());
        Self { dims, probs }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn prob(&self, index: &[usize]) -> &P {
        &self.probs[flat_index(&self.dims, index)]
    }

    /// Total mass; 1 up to rounding for every valid joint.
    pub fn total(&self) -> P {
        self.probs.iter().fold(P::zero(), |acc, p| acc + p.clone())
    }

    fn check_axes(&self, axes: &[usize]) -> Result<(), ProbError> {
        let mut seen = vec![false; self.rank()];
        for &a in axes {
            if a >= self.rank() {
                return Err(ProbError::AxisOutOfRange {
                    axis: a,
                    rank: self.rank(),
                });
            }
            if seen[a] {
                return Err(ProbError::DuplicateAxis(a));
            }
            seen[a] = true;
        }
        Ok(())
    }

    /// Marginal over `axes`, with axes in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<Self, ProbError> {
        self.check_axes(axes)?;
        if axes.is_empty() {
            return Err(ProbError::Empty);
        }
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut probs = vec![P::zero(); dims.iter().product()];
        let mut idx = vec![0; self.rank()];
        for (flat, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            unflatten(&self.dims, flat, &mut idx);
            let target = axes.iter().fold(0, |acc, &a| acc * self.dims[a] + idx[a]);
            probs[target] += p.clone();
        }
        Ok(Self { dims, probs })
    }

    pub fn marginal_pmf(&self, axis: usize) -> Result<Pmf<P>, ProbError> {
        let m = self.marginal(&[axis])?;
        Ok(Pmf { probs: m.probs })
    }

    /// Reorders axes; `order[i]` is the old axis placed at position `i`.
    pub fn permute(&self, order: &[usize]) -> Result<Self, ProbError> {
        if order.len() != self.rank() {
            return Err(ProbError::ShapeMismatch {
                expected: self.rank(),
                found: order.len(),
            });
        }
        self.marginal(order)
    }

    /// Reinterprets the table under new dims with the same total size;
    /// merging adjacent axes `(i, j)` yields index `i * d_j + j`.
    pub fn reshape(&self, dims: Vec<usize>) -> Result<Self, ProbError> {
        let expected: usize = dims.iter().product();
        if expected != self.probs.len() || dims.contains(&0) {
            return Err(ProbError::ShapeMismatch {
                expected: self.probs.len(),
                found: expected,
            });
        }
        Ok(Self {
            dims,
            probs: self.probs.clone(),
        })
    }

    /// Appends the axis `f(args...)`, a deterministic function of the listed
    /// existing axes.
    pub fn extend_with(&self, f: &TableFunction, args: &[usize]) -> Result<Self, ProbError> {
        self.check_axes(args)?;
        if f.arity() != args.len() {
            return Err(ProbError::Arity {
                expected: f.arity(),
                found: args.len(),
            });
        }
        for (position, (&a, &d)) in args.iter().zip(f.domain()).enumerate() {
            if self.dims[a] != d {
                return Err(ProbError::AlphabetMismatch {
                    position,
                    expected: d,
                    found: self.dims[a],
                });
            }
        }
        let m = f.codomain();
        let mut probs = vec![P::zero(); self.probs.len() * m];
        let mut idx = vec![0; self.rank()];
        let mut fargs = vec![0; args.len()];
        for (flat, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            unflatten(&self.dims, flat, &mut idx);
            for (slot, &a) in fargs.iter_mut().zip(args) {
                *slot = idx[a];
            }
            probs[flat * m + f.eval(&fargs)] = p.clone();
        }
        let mut dims = self.dims.clone();
        dims.push(m);
        Ok(Self { dims, probs })
    }

    /// Joint entropy of all axes, in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of_masses(self.probs.iter())
    }

    /// Joint entropy of a subset of axes; zero for the empty set.
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64, ProbError> {
        if axes.is_empty() {
            self.check_axes(axes)?;
            return Ok(0.0);
        }
        Ok(self.marginal(axes)?.entropy())
    }

    /// `H(targets | givens) = H(targets, givens) - H(givens)`.
    pub fn conditional_entropy(
        &self,
        targets: &[usize],
        givens: &[usize],
    ) -> Result<f64, ProbError> {
        self.check_axes(targets)?;
        self.check_axes(givens)?;
        if let Some(&a) = targets.iter().find(|a| givens.contains(a)) {
            return Err(ProbError::OverlappingAxes(a));
        }
        let all: Vec<usize> = targets.iter().chain(givens).copied().collect();
        Ok(self.entropy_of(&all)? - self.entropy_of(givens)?)
    }

    /// `I(axes1; axes2) = H(axes1) + H(axes2) - H(axes1 ∪ axes2)`.
    pub fn mutual_information(&self, axes1: &[usize], axes2: &[usize]) -> Result<f64, ProbError> {
        self.check_axes(axes1)?;
        self.check_axes(axes2)?;
        let union = union(axes1, axes2);
        Ok(self.entropy_of(axes1)? + self.entropy_of(axes2)? - self.entropy_of(&union)?)
    }

    /// `I(axes1; axes2 | given)`.
    pub fn conditional_mutual_information(
        &self,
        axes1: &[usize],
        axes2: &[usize],
        given: &[usize],
    ) -> Result<f64, ProbError> {
        self.check_axes(axes1)?;
        self.check_axes(axes2)?;
        self.check_axes(given)?;
        for &a in axes1.iter().chain(axes2) {
            if given.contains(&a) {
                return Err(ProbError::OverlappingAxes(a));
            }
        }
        let a1g = union(axes1, given);
        let a2g = union(axes2, given);
        let all = union(&a1g, axes2);
        Ok(self.entropy_of(&a1g)? + self.entropy_of(&a2g)?
            - self.entropy_of(&all)?
            - self.entropy_of(given)?)
    }

    pub fn to_f64(&self) -> JointPmf<f64> {
        JointPmf {
            dims: self.dims.clone(),
            probs: self.probs.iter().map(|p| p.to_f64()).collect(),
        }
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = a.to_vec();
    out.extend(b.iter().filter(|x| !a.contains(x)));
    out
}

/// Exact law of `f(inputs)` for independent inputs, optionally keeping the
/// inputs as the leading axes.
pub fn pushforward<P: Probability>(
    inputs: &[Pmf<P>],
    f: &TableFunction,
    keep_inputs: bool,
) -> Result<JointPmf<P>, ProbError> {
    if inputs.len() != f.arity() {
        return Err(ProbError::Arity {
            expected: f.arity(),
            found: inputs.len(),
        });
    }
    let joint = JointPmf::product(inputs)?;
    let args: Vec<usize> = (0..inputs.len()).collect();
    let extended = joint.extend_with(f, &args)?;
    if keep_inputs {
        Ok(extended)
    } else {
        extended.marginal(&[inputs.len()])
    }
}
