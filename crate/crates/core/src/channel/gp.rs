//! Local search over auxiliary-variable designs. Whatever it returns is an
//! achievable rate, hence a lower bound on capacity.

use rand::Rng;
use serde::Serialize;

use super::{gp_objective, GPDesign, GpEvaluation, TwoStateChannel};
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::rng::{self, Purpose};
use crate::scalar::surprisal_term;
use crate::table::TableFunction;

/// Largest `x(u, s1)` table space swept exhaustively.
const X_SWEEP_LIMIT: f64 = 1e6;
const IMPROVE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GpSearchConfig {
    /// Auxiliary alphabet size; `None` means `q^2`.
    pub u_size: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Cap on outer rounds per restart.
    pub max_rounds: usize,
}

impl GpSearchConfig {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            u_size: None,
            restarts,
            seed,
            max_rounds: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpSearchResult {
    pub design: GPDesign<f64>,
    pub lower_bound_bits: f64,
    /// Re-evaluation of the returned design through the full joint law.
    pub evaluation: GpEvaluation,
    /// Largest gap between the two objective forms over all evaluations.
    pub max_identity_gap: f64,
    pub evaluations: u64,
    pub u_size: usize,
    pub restarts: usize,
    /// Set when the channel decomposes with `G` invertible in `x`.
    pub decomposable_capacity_bits: Option<f64>,
}

/// Objective evaluator on flat tables: `rows[s1 * u + u']`, `x[u' * q + s1]`.
struct Evaluator<'a> {
    q: usize,
    u: usize,
    ps1: Vec<f64>,
    ps2: Vec<f64>,
    f: &'a TableFunction,
    h_s1: f64,
    h_s2: f64,
    count: u64,
    max_gap: f64,
    // scratch
    puys: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(ch: &'a TwoStateChannel<f64>, u: usize) -> Self {
        let q = ch.field().size();
        Self {
            q,
            u,
            ps1: ch.ps1().probs().to_vec(),
            ps2: ch.ps2().probs().to_vec(),
            f: ch.table(),
            h_s1: ch.ps1().entropy(),
            h_s2: ch.ps2().entropy(),
            count: 0,
            max_gap: 0.0,
            puys: vec![0.0; u * q * q],
        }
    }

    /// `H(Y,S2) - H(U,Y,S2) - H(S1) + H(U,S1)`, with the conditional form
    /// `H(U,S2) + H(Y,S2) - H(U,Y,S2) - H(S2) - I(U;S1)` checked alongside.
    fn eval(&mut self, rows: &[f64], x: &[usize]) -> f64 {
        let (q, u) = (self.q, self.u);
        self.count += 1;
        self.puys.iter_mut().for_each(|v| *v = 0.0);
        let mut h_us1 = 0.0;
        let mut pu = vec![0.0; u];
        for s1 in 0..q {
            let p1 = self.ps1[s1];
            if p1 == 0.0 {
                continue;
            }
            for uu in 0..u {
                let pj = p1 * rows[s1 * u + uu];
                if pj == 0.0 {
                    continue;
                }
                h_us1 += surprisal_term(pj);
                pu[uu] += pj;
                let xv = x[uu * q + s1];
                for s2 in 0..q {
                    let y = self.f.eval(&[xv, s1, s2]);
                    self.puys[(uu * q + y) * q + s2] += pj * self.ps2[s2];
                }
            }
        }
        let mut pys = vec![0.0; q * q];
        let mut h_uys = 0.0;
        for (i, &p) in self.puys.iter().enumerate() {
            h_uys += surprisal_term(p);
            pys[i % (q * q)] += p;
        }
        let h_ys: f64 = pys.iter().map(|&p| surprisal_term(p)).sum();
        let h_u: f64 = pu.iter().map(|&p| surprisal_term(p)).sum();
        let i_us1 = h_u + self.h_s1 - h_us1;
        let objective = h_u + h_ys - h_uys - i_us1;
        // U and S2 are independent, so H(U,S2) = H(U) + H(S2).
        let mut h_us2 = 0.0;
        for &p in &pu {
            for &p2 in &self.ps2 {
                h_us2 += surprisal_term(p * p2);
            }
        }
        let conditional = h_us2 + h_ys - h_uys - self.h_s2 - i_us1;
        self.max_gap = self.max_gap.max((objective - conditional).abs());
        objective
    }
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

struct State {
    rows: Vec<f64>,
    x: Vec<usize>,
    value: f64,
}

fn improve_x(ev: &mut Evaluator, st: &mut State, support: &[usize]) {
    let (q, u) = (ev.q, ev.u);
    let full_space = (q as f64).powf((u * support.len()) as f64);
    if full_space <= X_SWEEP_LIMIT {
        let mut digits = vec![0; u * support.len()];
        let mut x = st.x.clone();
        loop {
            for (i, &d) in digits.iter().enumerate() {
                x[(i / support.len()) * q + support[i % support.len()]] = d;
            }
            let v = ev.eval(&st.rows, &x);
            if v > st.value + IMPROVE_EPS {
                st.value = v;
                st.x.copy_from_slice(&x);
            }
            if !odometer(&mut digits, q) {
                break;
            }
        }
        return;
    }
    let block_space = (q as f64).powf(support.len() as f64);
    for uu in 0..u {
        if block_space <= X_SWEEP_LIMIT {
            let mut digits = vec![0; support.len()];
            let mut x = st.x.clone();
            loop {
                for (i, &s1) in support.iter().enumerate() {
                    x[uu * q + s1] = digits[i];
                }
                let v = ev.eval(&st.rows, &x);
                if v > st.value + IMPROVE_EPS {
                    st.value = v;
                    st.x.copy_from_slice(&x);
                }
                if !odometer(&mut digits, q) {
                    break;
                }
            }
        } else {
            for &s1 in support {
                for xv in 0..q {
                    let old = st.x[uu * q + s1];
                    st.x[uu * q + s1] = xv;
                    let v = ev.eval(&st.rows, &st.x);
                    if v > st.value + IMPROVE_EPS {
                        st.value = v;
                    } else {
                        st.x[uu * q + s1] = old;
                    }
                }
            }
        }
    }
}

/// Pattern search on each row: move mass `step` between two entries.
fn improve_rows(ev: &mut Evaluator, st: &mut State, support: &[usize]) {
    let u = ev.u;
    let mut step = 0.5f64;
    while step >= 1e-6 {
        let mut moved = false;
        for &s1 in support {
            for to in 0..u {
                for from in 0..u {
                    if from == to {
                        continue;
                    }
                    let avail = st.rows[s1 * u + from];
                    if avail <= 0.0 {
                        continue;
                    }
                    let delta = step.min(avail);
                    st.rows[s1 * u + from] -= delta;
                    st.rows[s1 * u + to] += delta;
                    let v = ev.eval(&st.rows, &st.x);
                    if v > st.value + IMPROVE_EPS {
                        st.value = v;
                        moved = true;
                    } else {
                        st.rows[s1 * u + from] += delta;
                        st.rows[s1 * u + to] -= delta;
                    }
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
}

/// Coordinate ascent over `x(u, s1)` and pattern search over `p(u | s1)`,
/// from a fixed first start (uniform rows, `x = u mod q`) and then seeded
/// random starts.
pub fn gp_search(ch: &TwoStateChannel<f64>, cfg: &GpSearchConfig) -> Result<GpSearchResult> {
    let q = ch.field().size();
    let u = cfg.u_size.unwrap_or(q * q);
    if u == 0 || u > q * q {
        return Err(Error::invalid(format!(
            "auxiliary alphabet size must be in 1..={}",
            q * q
        )));
    }
    let support: Vec<usize> = ch.ps1().support().collect();
    let mut ev = Evaluator::new(ch, u);
    let mut best: Option<State> = None;

    for restart in 0..cfg.restarts.max(1) {
        let (rows, x): (Vec<f64>, Vec<usize>) = if restart == 0 {
            (
                vec![1.0 / u as f64; q * u],
                (0..u * q).map(|i| (i / q) % q).collect(),
            )
        } else {
            let mut rng = rng::stream(cfg.seed, Purpose::Search, restart as u64);
            let all: Vec<usize> = (0..u).collect();
            let mut rows = Vec::with_capacity(q * u);
            for _ in 0..q {
                rows.extend_from_slice(Pmf::<f64>::random(&mut rng, u, &all)?.probs());
            }
            (rows, (0..u * q).map(|_| rng.gen_range(0..q)).collect())
        };
        let value = ev.eval(&rows, &x);
        let mut st = State { rows, x, value };
        for _ in 0..cfg.max_rounds {
            let before = st.value;
            improve_x(&mut ev, &mut st, &support);
            improve_rows(&mut ev, &mut st, &support);
            if st.value <= before + IMPROVE_EPS {
                break;
            }
        }
        if best
            .as_ref()
            .is_none_or(|b| st.value > b.value + IMPROVE_EPS)
        {
            best = Some(st);
        }
    }

    let best = best.expect("at least one restart");
    let rows = best
        .rows
        .chunks(u)
        .map(|r| Pmf::from_weights(r.to_vec()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let x = TableFunction::new(vec![u, q], q, best.x)?;
    let design = GPDesign::new(u, rows, x)?;
    let evaluation = gp_objective(ch, &design)?;
    if (evaluation.objective_bits - best.value).abs() > 1e-9 {
        return Err(Error::Invariant(format!(
            "search value {} disagrees with re-evaluation {}",
            best.value, evaluation.objective_bits
        )));
    }
    Ok(GpSearchResult {
        design,
        lower_bound_bits: evaluation.objective_bits,
        evaluation,
        max_identity_gap: ev.max_gap.max(evaluation.identity_gap),
        evaluations: ev.count,
        u_size: u,
        restarts: cfg.restarts.max(1),
        decomposable_capacity_bits: ch.decomposable_capacity_bits()?,
    })
}
