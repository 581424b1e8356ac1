//! Deterministic channels `Y = F(X, S1, S2)` with state `S1` known to the
//! encoder and `S2` known to the decoder.

mod gp;
mod minent;

pub use gp::{gp_search, GpSearchConfig, GpSearchResult};
pub use minent::{
    block_entropy, entropy_bracket, min_entropy_anneal, min_entropy_exhaustive, quadratic_entropy,
    theorem1_check, AnnealConfig, EntropyBracketReport, MinEntropyMethod, MinEntropySearchResult,
};

use serde::{Deserialize, Serialize};

use crate::analysis::{decompose, g_invertible_in_first};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::prob::{JointPmf, Pmf};
use crate::scalar::Probability;
use crate::table::TableFunction;

/// Tolerance for identities between information quantities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStateChannel<P: Probability = f64> {
    field: FieldSpec,
    /// `(x, s1, s2) -> y`
    f: TableFunction,
    ps1: Pmf<P>,
    ps2: Pmf<P>,
}

/// `S1` uniform on the nonzero elements, `S2` uniform on the field.
pub fn default_states<P: Probability>(field: FieldSpec) -> (Pmf<P>, Pmf<P>) {
    let q = field.size();
    let nonzero: Vec<usize> = (1..q).collect();
    (
        Pmf::uniform_on(q, &nonzero).expect("q >= 2"),
        Pmf::uniform(q).expect("q >= 2"),
    )
}

impl<P: Probability> TwoStateChannel<P> {
    pub fn new(field: FieldSpec, f: TableFunction, ps1: Pmf<P>, ps2: Pmf<P>) -> Result<Self> {
        let q = field.size();
        if f.domain() != [q, q, q] || f.codomain() != q {
            return Err(Error::invalid(format!(
                "channel table must map {q}x{q}x{q} to {q}"
            )));
        }
        if ps1.len() != q || ps2.len() != q {
            return Err(Error::invalid("state distributions must live on the field"));
        }
        Ok(Self { field, f, ps1, ps2 })
    }

    /// `Y = X + S1 + S2`
    pub fn sum(field: FieldSpec, ps1: Pmf<P>, ps2: Pmf<P>) -> Result<Self> {
        let q = field.size();
        let f = TableFunction::from_fn(vec![q; 3], q, |v| {
            field.add(field.add(v[0] as u32, v[1] as u32), v[2] as u32) as usize
        })?;
        Self::new(field, f, ps1, ps2)
    }

    /// `Y = X + S1 S2`
    pub fn sum_product(field: FieldSpec, ps1: Pmf<P>, ps2: Pmf<P>) -> Result<Self> {
        Self::additive(field, &product_table(field)?, ps1, ps2)
    }

    /// `Y = X + F'(S1, S2)`
    pub fn additive(
        field: FieldSpec,
        fprime: &TableFunction,
        ps1: Pmf<P>,
        ps2: Pmf<P>,
    ) -> Result<Self> {
        let q = field.size();
        if fprime.domain() != [q, q] || fprime.codomain() != q {
            return Err(Error::invalid(format!("F' must map {q}x{q} to {q}")));
        }
        let f = TableFunction::from_fn(vec![q; 3], q, |v| {
            field.add(v[0] as u32, fprime.eval(&v[1..]) as u32) as usize
        })?;
        Self::new(field, f, ps1, ps2)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn table(&self) -> &TableFunction {
        &self.f
    }

    pub fn ps1(&self) -> &Pmf<P> {
        &self.ps1
    }

    pub fn ps2(&self) -> &Pmf<P> {
        &self.ps2
    }

    /// `F'` with `F(x, s1, s2) = x + F'(s1, s2)`, or an error if the channel
    /// has no such form.
    pub fn additive_part(&self) -> Result<TableFunction> {
        let q = self.field.size();
        let fp = TableFunction::from_fn(vec![q, q], q, |v| self.f.eval(&[0, v[0], v[1]]))?;
        for x in 0..q {
            for s1 in 0..q {
                for s2 in 0..q {
                    let want = self.field.add(x as u32, fp.eval(&[s1, s2]) as u32) as usize;
                    if self.f.eval(&[x, s1, s2]) != want {
                        return Err(Error::invalid(format!(
                            "channel is not of the form x + F'(s1, s2): F({x},{s1},{s2}) = {}, expected {want}",
                            self.f.eval(&[x, s1, s2])
                        )));
                    }
                }
            }
        }
        Ok(fp)
    }

    pub fn is_sum_product(&self) -> bool {
        self.additive_part()
            .ok()
            .is_some_and(|fp| Ok(fp) == product_table(self.field))
    }

    /// `log2 q` when `F` decomposes through a `G(x, s1)` invertible in `x`,
    /// where that rate is known to be the capacity.
    pub fn decomposable_capacity_bits(&self) -> Result<Option<f64>> {
        let r = decompose(&self.f)?;
        Ok(match &r.g {
            Some(g) if g_invertible_in_first(g)? => Some((self.field.order() as f64).log2()),
            _ => None,
        })
    }

    pub fn to_f64(&self) -> TwoStateChannel<f64> {
        TwoStateChannel {
            field: self.field,
            f: self.f.clone(),
            ps1: self.ps1.to_f64(),
            ps2: self.ps2.to_f64(),
        }
    }
}

pub(crate) fn product_table(field: FieldSpec) -> Result<TableFunction> {
    let q = field.size();
    Ok(TableFunction::from_fn(vec![q, q], q, |v| {
        field.mul(v[0] as u32, v[1] as u32) as usize
    })?)
}

/// Auxiliary variable `U` drawn given `S1`, and the input `X = x(U, S1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "P: Probability + serde::de::DeserializeOwned"))]
pub struct GPDesign<P: Probability = f64> {
    pub u_size: usize,
    /// One row `p(u | s1)` per state value.
    pub pu_given_s1: Vec<Pmf<P>>,
    /// `(u, s1) -> x`
    pub x_of_u_s1: TableFunction,
}

impl<P: Probability> GPDesign<P> {
    pub fn new(u_size: usize, pu_given_s1: Vec<Pmf<P>>, x_of_u_s1: TableFunction) -> Result<Self> {
        let d = Self {
            u_size,
            pu_given_s1,
            x_of_u_s1,
        };
        if d.u_size == 0 {
            return Err(Error::invalid("auxiliary alphabet must be non-empty"));
        }
        if let Some((s1, row)) = d
            .pu_given_s1
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != d.u_size)
        {
            return Err(Error::invalid(format!(
                "row p(u | s1 = {s1}) has {} entries, expected {}",
                row.len(),
                d.u_size
            )));
        }
        Ok(d)
    }

    fn check(&self, q: usize) -> Result<()> {
        let d = Self::new(
            self.u_size,
            self.pu_given_s1.clone(),
            self.x_of_u_s1.clone(),
        )?;
        if d.pu_given_s1.len() != q {
            return Err(Error::invalid(format!(
                "design has {} rows p(u | s1), expected {q}",
                d.pu_given_s1.len()
            )));
        }
        if d.x_of_u_s1.domain() != [self.u_size, q] || d.x_of_u_s1.codomain() != q {
            return Err(Error::invalid(format!(
                "x(u, s1) must map {}x{q} to {q}",
                self.u_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpEvaluation {
    /// `I(U; Y, S2) - I(U; S1)`
    pub objective_bits: f64,
    /// `I(U; Y | S2) - I(U; S1)`
    pub conditional_form_bits: f64,
    pub identity_gap: f64,
    pub i_u_y_s2: f64,
    pub i_u_s1: f64,
}

/// Exact value of a design from the joint law of `(S1, U, X, S2, Y)`.
pub fn gp_objective<P: Probability>(
    ch: &TwoStateChannel<P>,
    d: &GPDesign<P>,
) -> Result<GpEvaluation> {
    let q = ch.field.size();
    d.check(q)?;
    // Axes: S1 = 0, U = 1, X = 2, S2 = 3, Y = 4.
    let joint = JointPmf::from_conditional(&ch.ps1, &d.pu_given_s1)?
        .extend_with(&d.x_of_u_s1, &[1, 0])?
        .with_independent(&ch.ps2)
        .extend_with(&ch.f, &[2, 0, 3])?;
    let leak = joint.mutual_information(&[3], &[1, 2, 0])?;
    if leak.abs() > IDENTITY_TOLERANCE {
        return Err(Error::Invariant(format!(
            "S2 depends on (U, X, S1): I = {leak:e}"
        )));
    }
    let i_u_y_s2 = joint.mutual_information(&[1], &[4, 3])?;
    let i_u_s1 = joint.mutual_information(&[1], &[0])?;
    let i_cond = joint.conditional_mutual_information(&[1], &[4], &[3])?;
    let objective = i_u_y_s2 - i_u_s1;
    let conditional = i_cond - i_u_s1;
    let gap = (objective - conditional).abs();
    if gap > IDENTITY_TOLERANCE {
        return Err(Error::Invariant(format!(
            "the two forms of the objective differ by {gap:e}"
        )));
    }
    Ok(GpEvaluation {
        objective_bits: objective,
        conditional_form_bits: conditional,
        identity_gap: gap,
        i_u_y_s2,
        i_u_s1,
    })
}

/// `log2 q - h`
pub fn capacity_from_entropy(q: u32, h: f64) -> f64 {
    (q as f64).log2() - h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn f(q: u32) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    fn uniform_rows<P: Probability>(q: usize, u: usize) -> Vec<Pmf<P>> {
        vec![Pmf::uniform(u).unwrap(); q]
    }

    #[test]
    fn precoded_design_reaches_log_q() {
        for q in [2u32, 3, 5, 7] {
            let field = f(q);
            let (ps1, ps2) = default_states::<f64>(field);
            let ch = TwoStateChannel::sum(field, ps1, ps2).unwrap();
            let k = q as usize;
            // U uniform and independent of S1, X = U - S1.
            let x = TableFunction::from_fn(vec![k, k], k, |v| {
                field.sub(v[0] as u32, v[1] as u32) as usize
            })
            .unwrap();
            let d = GPDesign::new(k, uniform_rows(k, k), x).unwrap();
            let e = gp_objective(&ch, &d).unwrap();
            assert!(
                (e.objective_bits - (q as f64).log2()).abs() < 1e-12,
                "{e:?}"
            );
            assert!(e.identity_gap < 1e-12);
            assert_eq!(
                ch.decomposable_capacity_bits().unwrap(),
                Some((q as f64).log2())
            );
        }
    }

    #[test]
    fn trivial_design_gives_zero() {
        let field = f(3);
        let (ps1, ps2) = default_states::<f64>(field);
        let ch = TwoStateChannel::sum_product(field, ps1, ps2).unwrap();
        let d = GPDesign::new(
            2,
            uniform_rows(3, 2),
            TableFunction::constant(vec![2, 3], 3, 1).unwrap(),
        )
        .unwrap();
        assert!(gp_objective(&ch, &d).unwrap().objective_bits.abs() < 1e-12);
    }

    #[test]
    fn ignoring_the_state_costs_its_entropy() {
        let mut rng = crate::rng::stream(3, crate::rng::Purpose::Fixture, 0);
        for q in [2u32, 3, 5] {
            let field = f(q);
            let k = q as usize;
            let ps1: Pmf<f64> = Pmf::random(&mut rng, k, &(0..k).collect::<Vec<_>>()).unwrap();
            let ch = TwoStateChannel::sum(field, ps1.clone(), Pmf::uniform(k).unwrap()).unwrap();
            let x = TableFunction::from_fn(vec![k, k], k, |v| v[0]).unwrap();
            let d = GPDesign::new(k, uniform_rows(k, k), x).unwrap();
            let e = gp_objective(&ch, &d).unwrap();
            assert!((e.objective_bits - ((q as f64).log2() - ps1.entropy())).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_rational_objective() {
        let field = f(3);
        let (ps1, ps2) = default_states::<Rational>(field);
        let ch = TwoStateChannel::sum(field, ps1, ps2).unwrap();
        let x = TableFunction::from_fn(vec![3, 3], 3, |v| {
            field.sub(v[0] as u32, v[1] as u32) as usize
        })
        .unwrap();
        let d = GPDesign::new(3, uniform_rows(3, 3), x).unwrap();
        assert!((gp_objective(&ch, &d).unwrap().objective_bits - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn additive_form_detection() {
        let field = f(3);
        let (ps1, ps2) = default_states::<f64>(field);
        let sp = TwoStateChannel::sum_product(field, ps1.clone(), ps2.clone()).unwrap();
        assert!(sp.is_sum_product());
        assert_eq!(sp.additive_part().unwrap(), product_table(field).unwrap());
        assert_eq!(sp.decomposable_capacity_bits().unwrap(), None);
        let sum = TwoStateChannel::sum(field, ps1.clone(), ps2.clone()).unwrap();
        assert!(sum.additive_part().is_ok());
        assert!(!sum.is_sum_product());
        let odd = TableFunction::from_fn(vec![3; 3], 3, |v| (v[0] * v[1] + v[2]) % 3).unwrap();
        let odd = TwoStateChannel::new(field, odd, ps1, ps2).unwrap();
        assert!(odd.additive_part().is_err());
    }

    #[test]
    fn design_validation() {
        let field = f(2);
        let (ps1, ps2) = default_states::<f64>(field);
        let ch = TwoStateChannel::sum(field, ps1, ps2).unwrap();
        let bad = GPDesign {
            u_size: 2,
            pu_given_s1: uniform_rows(3, 2),
            x_of_u_s1: TableFunction::constant(vec![2, 2], 2, 0).unwrap(),
        };
        assert!(gp_objective(&ch, &bad).is_err());
        assert!(GPDesign::<f64>::new(
            3,
            uniform_rows(2, 2),
            TableFunction::constant(vec![3, 2], 2, 0).unwrap()
        )
        .is_err());
    }

    #[test]
    fn capacity_arithmetic() {
        assert_eq!(capacity_from_entropy(3, 0.0), 3f64.log2());
        assert!((capacity_from_entropy(3, 2.0 / 3.0) - 0.918).abs() < 5e-4);
        assert!((capacity_from_entropy(5, 1.4) - 0.922).abs() < 5e-4);
    }
}
