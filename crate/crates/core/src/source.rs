//! The sum-product functional source: `Y = A + B*C` with `A`, `B`, `C`
//! independent over `F_q` and `B != 0` almost surely. One encoder sees
//! `X = (A, B)`, the decoder sees `Y` and wants `Z = C = (Y - A) / B`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::prob::{pushforward, JointPmf, Pmf};
use crate::scalar::Probability;
use crate::table::TableFunction;

/// Tolerance for the uniform-`A` identity `H(X|Y) = H(B) + H(C)`.
pub const RATE_IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SumProductSource<P: Probability> {
    field: FieldSpec,
    pa: Pmf<P>,
    pb: Pmf<P>,
    pc: Pmf<P>,
}

impl<P: Probability> SumProductSource<P> {
    pub fn new(field: FieldSpec, pa: Pmf<P>, pb: Pmf<P>, pc: Pmf<P>) -> Result<Self> {
        let q = field.size();
        for (name, p) in [("A", &pa), ("B", &pb), ("C", &pc)] {
            if p.len() != q {
                return Err(Error::invalid(format!(
                    "p{name} has {} symbols, field has {q}",
                    p.len()
                )));
            }
        }
        if !pb.prob(0).is_zero() {
            return Err(Error::invalid("pB must put zero mass on 0"));
        }
        Ok(Self { field, pa, pb, pc })
    }

    /// Additive-noise case: `A` uniform, `B = 1`, `C = Z`.
    pub fn classical(field: FieldSpec, pz: Pmf<P>) -> Result<Self> {
        let q = field.size();
        Self::new(field, Pmf::uniform(q)?, Pmf::point(q, 1)?, pz)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn pa(&self) -> &Pmf<P> {
        &self.pa
    }

    pub fn pb(&self) -> &Pmf<P> {
        &self.pb
    }

    pub fn pc(&self) -> &Pmf<P> {
        &self.pc
    }
}

/// `Y = A + B*C` as a table over `(a, b, c)`.
pub fn sum_product_output(field: FieldSpec) -> TableFunction {
    let q = field.size();
    TableFunction::from_fn(vec![q, q, q], q, |v| {
        field.add(v[0] as u32, field.mul(v[1] as u32, v[2] as u32)) as usize
    })
    .expect("in-range table")
}

/// `F((a, b), y) = (y - a) / b`, with the value 0 on the `b = 0` cells
/// (those carry no probability).
pub fn recovery_function(field: FieldSpec) -> TableFunction {
    let q = field.size();
    TableFunction::from_fn(vec![q * q, q], q, |v| {
        let (a, b) = ((v[0] / q) as u32, (v[0] % q) as u32);
        field.div(field.sub(v[1] as u32, a), b).unwrap_or(0) as usize
    })
    .expect("in-range table")
}

pub mod axis {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const Z: usize = 2;
}

/// Exact joint of `(X, Y, Z)` with `X = (A, B)` flattened as `a * q + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalInstance<P: Probability> {
    source: SumProductSource<P>,
    joint: JointPmf<P>,
    f: TableFunction,
}

impl<P: Probability> FunctionalInstance<P> {
    pub fn build(source: SumProductSource<P>) -> Result<Self> {
        let field = source.field;
        let q = field.size();
        let abcy = pushforward(
            &[source.pa.clone(), source.pb.clone(), source.pc.clone()],
            &sum_product_output(field),
            true,
        )?;
        // (A, B, C, Y) -> (A, B, Y, C) -> (X, Y, Z)
        let joint = abcy.permute(&[0, 1, 3, 2])?.reshape(vec![q * q, q, q])?;
        let f = recovery_function(field);
        Ok(Self { source, joint, f })
    }

    pub fn source(&self) -> &SumProductSource<P> {
        &self.source
    }

    pub fn field(&self) -> FieldSpec {
        self.source.field
    }

    pub fn joint(&self) -> &JointPmf<P> {
        &self.joint
    }

    pub fn recovery(&self) -> &TableFunction {
        &self.f
    }

    pub fn x_index(&self, a: u32, b: u32) -> usize {
        a as usize * self.field().size() + b as usize
    }

    /// Pointwise check that `Z = F(X, Y)` and `Y = A + B*C` on the support.
    pub fn verify_support(&self) -> Result<usize> {
        let field = self.field();
        let q = field.size();
        let mut cells = 0;
        for x in 0..q * q {
            for y in 0..q {
                for z in 0..q {
                    if self.joint.prob(&[x, y, z]).is_zero() {
                        continue;
                    }
                    cells += 1;
                    let (a, b) = ((x / q) as u32, (x % q) as u32);
                    if self.f.eval(&[x, y]) != z || field.add(a, field.mul(b, z as u32)) != y as u32
                    {
                        return Err(Error::Invariant(format!(
                            "support cell ({x},{y},{z}) breaks Y = A + B*C"
                        )));
                    }
                }
            }
        }
        Ok(cells)
    }

    /// `(H(X|Y), H(Z|Y))`: the outer bounds on the minimum rate.
    pub fn rate_bounds(&self) -> Result<RateBounds> {
        let upper = self.joint.conditional_entropy(&[axis::X], &[axis::Y])?;
        let lower = self.joint.conditional_entropy(&[axis::Z], &[axis::Y])?;
        if upper < lower - 1e-12 {
            return Err(Error::Invariant(format!(
                "H(X|Y) = {upper} < H(Z|Y) = {lower}"
            )));
        }
        Ok(RateBounds { upper, lower })
    }

    /// Minimum rate `R* = H(X|Y)`. With `A` uniform the identity
    /// `H(X|Y) = H(B) + H(C)` is enforced and its gap reported.
    pub fn rstar(&self) -> Result<RStar> {
        let value = self.joint.conditional_entropy(&[axis::X], &[axis::Y])?;
        let identity_gap = if self.source.pa.is_uniform() {
            let gap = (value - (self.source.pb.entropy() + self.source.pc.entropy())).abs();
            if gap > RATE_IDENTITY_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "H(X|Y) differs from H(B) + H(C) by {gap}"
                )));
            }
            Some(gap)
        } else {
            None
        };
        Ok(RStar {
            value,
            identity_gap,
        })
    }

    /// Confusability graph on the positive-probability values of `X`.
    pub fn confusability_graph(&self) -> Result<ConfusabilityGraph> {
        let xy = self.joint.marginal(&[axis::X, axis::Y])?;
        let q = self.field().size();
        let vertices: Vec<usize> = self.joint.marginal_pmf(axis::X)?.support().collect();
        let n = vertices.len();
        let mut adjacency = vec![false; n * n];
        let mut edges = 0;
        for i in 0..n {
            for j in i + 1..n {
                let (x, x2) = (vertices[i], vertices[j]);
                let confusable = (0..q).any(|y| {
                    !xy.prob(&[x, y]).is_zero()
                        && !xy.prob(&[x2, y]).is_zero()
                        && self.f.eval(&[x, y]) != self.f.eval(&[x2, y])
                });
                if confusable {
                    adjacency[i * n + j] = true;
                    adjacency[j * n + i] = true;
                    edges += 1;
                }
            }
        }
        Ok(ConfusabilityGraph {
            vertices,
            adjacency,
            edges,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBounds {
    /// `H(X|Y)`
    pub upper: f64,
    /// `H(F(X,Y)|Y)`
    pub lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RStar {
    pub value: f64,
    /// `|H(X|Y) - H(B) - H(C)|`, present when `A` is uniform.
    pub identity_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusabilityGraph {
    /// Flattened `x = a * q + b` values with positive probability.
    pub vertices: Vec<usize>,
    adjacency: Vec<bool>,
    pub edges: usize,
}

impl ConfusabilityGraph {
    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    /// Adjacency by vertex position (not by `x` value).
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.order() + j]
    }

    pub fn is_complete(&self) -> bool {
        let n = self.order();
        self.edges == n * n.saturating_sub(1) / 2
    }
}

/// Points `c` where the lines `a + b c` and `a2 + b2 c` meet.
pub fn line_intersections(field: FieldSpec, (a, b): (u32, u32), (a2, b2): (u32, u32)) -> Vec<u32> {
    (0..field.order())
        .filter(|&c| field.add(a, field.mul(b, c)) == field.add(a2, field.mul(b2, c)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineReport {
    pub q: u32,
    /// Ordered pairs of distinct lines examined.
    pub pairs_checked: u64,
    pub max_intersections: usize,
    /// First pair `((a, b), (a2, b2))` in lexicographic order attaining the max.
    pub argmax: ((u32, u32), (u32, u32)),
}

/// Exhaustive check over all ordered pairs of distinct lines `c -> a + b c`.
pub fn line_intersection_check(field: FieldSpec) -> LineReport {
    let q = field.order();
    let lines = q * q;
    let line = |i: u32| (i / q, i % q);
    let (max_intersections, argmax) = (0..lines)
        .into_par_iter()
        .filter_map(|i| {
            (0..lines)
                .filter(|&j| j != i)
                .map(|j| {
                    (
                        line_intersections(field, line(i), line(j)).len(),
                        (line(i), line(j)),
                    )
                })
                .reduce(|x, y| if y.0 > x.0 { y } else { x })
        })
        // Left operand is always the earlier pair, so ties keep it.
        .reduce_with(|x, y| if y.0 > x.0 { y } else { x })
        .unwrap_or((0, ((0, 0), (0, 0))));
    LineReport {
        q,
        pairs_checked: lines as u64 * (lines as u64 - 1),
        max_intersections,
        argmax,
    }
}

/// Summary record for one source instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceReport {
    pub q: u32,
    #[serde(rename = "H_A")]
    pub h_a: f64,
    #[serde(rename = "H_B")]
    pub h_b: f64,
    #[serde(rename = "H_C")]
    pub h_c: f64,
    #[serde(rename = "H_X_given_Y")]
    pub h_x_given_y: f64,
    #[serde(rename = "H_Z_given_Y")]
    pub h_z_given_y: f64,
    pub rstar_bits: f64,
    /// Lower bound on the first encoder's rate in the two-encoder setup.
    pub first_encoder_rate_lb_bits: f64,
    pub lemma1_identity_gap: Option<f64>,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    pub graph_complete: bool,
    pub max_line_intersections: usize,
}

pub fn analyze<P: Probability>(source: SumProductSource<P>) -> Result<SourceReport> {
    let field = source.field();
    let inst = FunctionalInstance::build(source)?;
    inst.verify_support()?;
    let bounds = inst.rate_bounds()?;
    let rstar = inst.rstar()?;
    let graph = inst.confusability_graph()?;
    let lines = line_intersection_check(field);
    let src = inst.source();
    Ok(SourceReport {
        q: field.order(),
        h_a: src.pa().entropy(),
        h_b: src.pb().entropy(),
        h_c: src.pc().entropy(),
        h_x_given_y: bounds.upper,
        h_z_given_y: bounds.lower,
        rstar_bits: rstar.value,
        first_encoder_rate_lb_bits: rstar.value,
        lemma1_identity_gap: rstar.identity_gap,
        graph_vertices: graph.order(),
        graph_edges: graph.edges,
        graph_complete: graph.is_complete(),
        max_line_intersections: lines.max_intersections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: u32) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    fn nonzero(q: usize) -> Vec<usize> {
        (1..q).collect()
    }

    fn uniform_source(q: u32) -> SumProductSource<f64> {
        let k = q as usize;
        SumProductSource::new(
            f(q),
            Pmf::uniform(k).unwrap(),
            Pmf::uniform_on(k, &nonzero(k)).unwrap(),
            Pmf::uniform(k).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_mass_on_zero_b() {
        let q = 3;
        let err = SumProductSource::new(
            f(3),
            Pmf::uniform(q).unwrap(),
            Pmf::<f64>::uniform(q).unwrap(),
            Pmf::uniform(q).unwrap(),
        );
        assert!(matches!(err, Err(Error::Invalid(_))));
        let err = SumProductSource::new(
            f(3),
            Pmf::uniform(2).unwrap(),
            Pmf::<f64>::point(3, 1).unwrap(),
            Pmf::uniform(q).unwrap(),
        );
        assert!(matches!(err, Err(Error::Invalid(_))));
    }

    /// Independent oracle: enumerate (a, b, c), accumulate p(x, y), and form
    /// H(X, Y) - H(Y) directly.
    fn oracle_h_x_given_y(src: &SumProductSource<f64>) -> f64 {
        let field = src.field();
        let q = field.size();
        let mut pxy = vec![0.0; q * q * q];
        let mut py = vec![0.0; q];
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let p = src.pa().prob(a) * src.pb().prob(b) * src.pc().prob(c);
                    let y = (a + b * c) % q;
                    pxy[(a * q + b) * q + y] += p;
                    py[y] += p;
                }
            }
        }
        let h = |v: &[f64]| -> f64 { v.iter().filter(|&&p| p > 0.0).map(|p| -p * p.log2()).sum() };
        h(&pxy) - h(&py)
    }

    #[test]
    fn classical_case_bounds_coincide() {
        let pz = Pmf::bernoulli(0.1).unwrap();
        let hz = pz.entropy();
        let inst =
            FunctionalInstance::build(SumProductSource::classical(f(2), pz).unwrap()).unwrap();
        let b = inst.rate_bounds().unwrap();
        assert!((b.upper - hz).abs() < 1e-12);
        assert!((b.lower - hz).abs() < 1e-12);
        assert!((inst.rstar().unwrap().value - hz).abs() < 1e-12);
    }

    #[test]
    fn b_one_gives_entropy_of_c() {
        let field = f(5);
        let pc = Pmf::new(vec![0.5, 0.2, 0.1, 0.1, 0.1]).unwrap();
        let src = SumProductSource::new(
            field,
            Pmf::uniform(5).unwrap(),
            Pmf::point(5, 1).unwrap(),
            pc.clone(),
        )
        .unwrap();
        let inst = FunctionalInstance::build(src).unwrap();
        assert!((inst.rstar().unwrap().value - pc.entropy()).abs() < 1e-12);
    }

    #[test]
    fn point_mass_c_collapses_lower_bound() {
        let src: SumProductSource<f64> = SumProductSource::new(
            f(3),
            Pmf::uniform(3).unwrap(),
            Pmf::uniform_on(3, &[1, 2]).unwrap(),
            Pmf::point(3, 2).unwrap(),
        )
        .unwrap();
        let inst = FunctionalInstance::build(src).unwrap();
        let b = inst.rate_bounds().unwrap();
        assert!(b.lower.abs() < 1e-12);
        assert!(
            (b.upper - 1.0).abs() < 1e-12,
            "H(B) = 1 remains: {}",
            b.upper
        );
        let g = inst.confusability_graph().unwrap();
        assert_eq!(g.edges, 0);
    }

    #[test]
    fn q3_uniform_instance() {
        let inst = FunctionalInstance::build(uniform_source(3)).unwrap();
        assert_eq!(inst.verify_support().unwrap(), 18);
        let xy = inst.joint().marginal(&[axis::X, axis::Y]).unwrap();
        assert_eq!(xy.probs().iter().filter(|&&p| p > 0.0).count(), 18);
        let b = inst.rate_bounds().unwrap();
        let log3 = 3f64.log2();
        assert!((b.upper - (1.0 + log3)).abs() < 1e-12);
        assert!((b.lower - log3).abs() < 1e-12);
        assert!((b.upper - oracle_h_x_given_y(inst.source())).abs() < 1e-12);
        let r = inst.rstar().unwrap();
        assert!((r.value - 2.584962500721156).abs() < 1e-12);
        assert!(r.identity_gap.unwrap() < 1e-12);
    }

    #[test]
    fn q5_excess_rate_is_log_q_minus_one() {
        let inst = FunctionalInstance::build(uniform_source(5)).unwrap();
        let r = inst.rstar().unwrap().value;
        assert!((r - (2.0 + 5f64.log2())).abs() < 1e-12);
        let excess = r - inst.source().pc().entropy();
        assert!((excess - 4f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn exact_rational_mode_matches() {
        let k = 3;
        let src: SumProductSource<Rational> = SumProductSource::new(
            f(3),
            Pmf::uniform(k).unwrap(),
            Pmf::uniform_on(k, &[1, 2]).unwrap(),
            Pmf::uniform(k).unwrap(),
        )
        .unwrap();
        let inst = FunctionalInstance::build(src).unwrap();
        assert!(Rational::is_unit_mass(&inst.joint().total()));
        let r = inst.rstar().unwrap();
        assert!((r.value - (1.0 + 3f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn line_examples() {
        assert_eq!(line_intersections(f(5), (1, 2), (3, 4)), vec![4]);
        for q in [2u32, 3, 5, 7] {
            let field = f(q);
            for b in 0..q {
                for a in 0..q {
                    for a2 in (0..q).filter(|&a2| a2 != a) {
                        assert!(line_intersections(field, (a, b), (a2, b)).is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn line_check_small_primes() {
        for q in [2u32, 3, 5, 7] {
            let r = line_intersection_check(f(q));
            assert_eq!(r.max_intersections, 1);
            let n = (q * q) as u64;
            assert_eq!(r.pairs_checked, n * (n - 1));
            let (l1, l2) = r.argmax;
            assert_ne!(l1, l2);
            assert_eq!(line_intersections(f(q), l1, l2).len(), 1);
        }
    }

    #[test]
    fn graphs_are_complete_with_full_support() {
        for q in [2u32, 3, 5] {
            let g = FunctionalInstance::build(uniform_source(q))
                .unwrap()
                .confusability_graph()
                .unwrap();
            assert_eq!(g.order(), (q * (q - 1)) as usize);
            assert!(g.is_complete());
        }
        let pz = Pmf::new(vec![0.7, 0.2, 0.1]).unwrap();
        let g = FunctionalInstance::build(SumProductSource::classical(f(3), pz).unwrap())
            .unwrap()
            .confusability_graph()
            .unwrap();
        assert_eq!(g.order(), 3);
        assert!(g.is_complete());
        assert!(g.adjacent(0, 2));
    }

    #[test]
    fn rate_identity_and_sandwich_on_random_sources() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for q in [2u32, 3, 5] {
            let k = q as usize;
            for _ in 0..350 {
                let pb: Pmf<f64> = Pmf::random(&mut rng, k, &nonzero(k)).unwrap();
                let pc: Pmf<f64> = Pmf::random(&mut rng, k, &(0..k).collect::<Vec<_>>()).unwrap();
                let pa_random: Pmf<f64> =
                    Pmf::random(&mut rng, k, &(0..k).collect::<Vec<_>>()).unwrap();

                let src =
                    SumProductSource::new(f(q), Pmf::uniform(k).unwrap(), pb.clone(), pc.clone())
                        .unwrap();
                let inst = FunctionalInstance::build(src).unwrap();
                let b = inst.rate_bounds().unwrap();
                assert!((b.upper - (pb.entropy() + pc.entropy())).abs() < 1e-9);
                assert!((b.upper - oracle_h_x_given_y(inst.source())).abs() < 1e-9);
                assert!(b.upper >= b.lower - 1e-12);

                let src = SumProductSource::new(f(q), pa_random, pb, pc).unwrap();
                let inst = FunctionalInstance::build(src).unwrap();
                let b = inst.rate_bounds().unwrap();
                assert!(b.upper >= b.lower - 1e-12);
                assert!(inst.rstar().unwrap().identity_gap.is_none());
            }
        }
    }

    #[test]
    fn mixing_b_toward_uniform_never_decreases_rstar() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [3u32, 5] {
            let k = q as usize;
            let target = Pmf::uniform_on(k, &nonzero(k)).unwrap();
            for _ in 0..20 {
                let pb: Pmf<f64> = Pmf::random(&mut rng, k, &nonzero(k)).unwrap();
                let pc: Pmf<f64> = Pmf::random(&mut rng, k, &(0..k).collect::<Vec<_>>()).unwrap();
                let mut last = f64::NEG_INFINITY;
                for step in 0..=10 {
                    let mixed = pb.mix(&target, step as f64 / 10.0).unwrap();
                    let src =
                        SumProductSource::new(f(q), Pmf::uniform(k).unwrap(), mixed, pc.clone())
                            .unwrap();
                    let r = FunctionalInstance::build(src)
                        .unwrap()
                        .rstar()
                        .unwrap()
                        .value;
                    assert!(r >= last - 1e-12);
                    last = r;
                }
            }
        }
    }

    #[test]
    fn analyze_report() {
        let r = analyze(uniform_source(3)).unwrap();
        assert_eq!(r.q, 3);
        assert!(r.graph_complete);
        assert_eq!(r.max_line_intersections, 1);
        assert!((r.h_x_given_y - 2.584962500721156).abs() < 1e-12);
    }
}
