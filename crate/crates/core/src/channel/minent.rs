//! Minimum over encoder maps `g` of `H(g(S1^n) + F'(S1^n, S2^n) | S2^n)`,
//! per symbol, for channels `Y = X + F'(S1, S2)` with i.i.d. states.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{capacity_from_entropy, TwoStateChannel, IDENTITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::prob::Pmf;
use crate::rng::{self, Purpose};
use crate::scalar::{surprisal_term, Probability};
use crate::table::TableFunction;

/// Cap on the `q^q` maps scanned by [`min_entropy_exhaustive`].
pub const EXHAUSTIVE_BUDGET: u64 = 10_000_000;
/// Cap on `q^n` for annealing.
pub const MAX_ANNEAL_ALPHABET: usize = 32;
/// Cap on `q^n` for evaluating a single block map.
pub const MAX_BLOCK_ALPHABET: usize = 1024;
const TRACE_POINTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinEntropyMethod {
    Exhaustive,
    Quadratic,
    Anneal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinEntropySearchResult {
    pub n: usize,
    /// `F_q^n -> F_q^n`, vectors indexed with the first letter most
    /// significant.
    pub best_g: TableFunction,
    pub best_entropy_per_symbol: f64,
    pub method: MinEntropyMethod,
    /// `(candidates evaluated, best so far)`
    pub trace: Vec<(u64, f64)>,
}

/// Additive-form data in flat arrays over the block alphabet `F_q^n`.
struct Block {
    q: usize,
    n: usize,
    size: usize,
    /// `(index, prob)` of each `s1` vector with positive probability.
    s1: Vec<(usize, f64)>,
    s2: Vec<(usize, f64)>,
    /// `shift[s1 * size + s2]` = `F'(s1, s2)` letterwise.
    shift: Vec<usize>,
    /// `add[a * size + b]`
    add: Vec<usize>,
}

fn block_probs(p: &Pmf<f64>, q: usize, n: usize) -> Vec<(usize, f64)> {
    let size = q.pow(n as u32);
    let mut out = Vec::new();
    let mut digits = vec![0; n];
    for i in 0..size {
        crate::table::unflatten(&vec![q; n], i, &mut digits);
        let pr: f64 = digits.iter().map(|&d| p.probs()[d]).product();
        if pr > 0.0 {
            out.push((i, pr));
        }
    }
    out
}

impl Block {
    fn new(ch: &TwoStateChannel<f64>, n: usize, cap: usize) -> Result<Self> {
        let fp = ch.additive_part()?;
        let field = ch.field();
        let q = field.size();
        let size =
            q.checked_pow(n as u32)
                .filter(|&s| s <= cap.max(q))
                .ok_or(Error::BudgetExceeded {
                    what: "block alphabet q^n",
                    needed: (q as f64).powi(n as i32),
                    cap: cap as f64,
                })?;
        let dims = vec![q; n];
        let letterwise = |a: usize, b: usize, op: &dyn Fn(usize, usize) -> usize| {
            let (mut da, mut db) = (vec![0; n], vec![0; n]);
            crate::table::unflatten(&dims, a, &mut da);
            crate::table::unflatten(&dims, b, &mut db);
            let out: Vec<usize> = da.iter().zip(&db).map(|(&x, &y)| op(x, y)).collect();
            crate::table::flat_index(&dims, &out)
        };
        let mut shift = vec![0; size * size];
        let mut add = vec![0; size * size];
        for a in 0..size {
            for b in 0..size {
                shift[a * size + b] = letterwise(a, b, &|x, y| fp.eval(&[x, y]));
                add[a * size + b] =
                    letterwise(a, b, &|x, y| field.add(x as u32, y as u32) as usize);
            }
        }
        Ok(Self {
            q,
            n,
            size,
            s1: block_probs(ch.ps1(), q, n),
            s2: block_probs(ch.ps2(), q, n),
            shift,
            add,
        })
    }

    /// Per-symbol conditional entropy for the map `g` (flat, length `size`).
    fn entropy(&self, g: &[usize], hist: &mut [f64]) -> f64 {
        let mut total = 0.0;
        for &(s2, p2) in &self.s2 {
            hist.iter_mut().for_each(|h| *h = 0.0);
            for &(s1, p1) in &self.s1 {
                hist[self.add[g[s1] * self.size + self.shift[s1 * self.size + s2]]] += p1;
            }
            total += p2 * hist.iter().map(|&h| surprisal_term(h)).sum::<f64>();
        }
        total / self.n as f64
    }

    fn lift(&self, g1: &[usize]) -> Vec<usize> {
        let dims = vec![self.q; self.n];
        let mut d = vec![0; self.n];
        (0..self.size)
            .map(|i| {
                crate::table::unflatten(&dims, i, &mut d);
                let out: Vec<usize> = d.iter().map(|&x| g1[x]).collect();
                crate::table::flat_index(&dims, &out)
            })
            .collect()
    }
}

/// Per-symbol entropy of a block map `g: F_q^n -> F_q^n`.
pub fn block_entropy<P: Probability>(
    ch: &TwoStateChannel<P>,
    n: usize,
    g: &TableFunction,
) -> Result<f64> {
    let ch = ch.to_f64();
    let b = Block::new(&ch, n, MAX_BLOCK_ALPHABET)?;
    if g.domain() != [b.size] || g.codomain() != b.size {
        return Err(Error::invalid(format!(
            "g must map {0} block symbols to {0}",
            b.size
        )));
    }
    Ok(b.entropy(g.table(), &mut vec![0.0; b.size]))
}

fn decode_g(mut idx: u64, q: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % q as u64) as usize;
        idx /= q as u64;
    }
}

/// Exact `H_min(1)` over all `q^q` letter maps, scanned in lexicographic
/// order (`g(0)` most significant). Among maps within `1e-12` of the
/// minimum the first is returned, whatever the worker count.
pub fn min_entropy_exhaustive<P: Probability>(
    ch: &TwoStateChannel<P>,
) -> Result<MinEntropySearchResult> {
    let ch = ch.to_f64();
    let b = Block::new(&ch, 1, MAX_BLOCK_ALPHABET)?;
    let q = b.q;
    let space = (q as u64)
        .checked_pow(q as u32)
        .filter(|&s| s <= EXHAUSTIVE_BUDGET)
        .ok_or(Error::BudgetExceeded {
            what: "exhaustive g scan q^q",
            needed: (q as f64).powi(q as i32),
            cap: EXHAUSTIVE_BUDGET as f64,
        })?;
    let value = |idx: u64| {
        let mut g = vec![0; q];
        decode_g(idx, q, &mut g);
        b.entropy(&g, &mut vec![0.0; q])
    };

    let chunks = TRACE_POINTS.min(space);
    let mut trace = Vec::with_capacity(chunks as usize);
    let mut best = f64::INFINITY;
    for k in 0..chunks {
        let (lo, hi) = (space * k / chunks, space * (k + 1) / chunks);
        let m = (lo..hi)
            .into_par_iter()
            .map(value)
            .reduce(|| f64::INFINITY, f64::min);
        best = best.min(m);
        trace.push((hi, best));
    }
    let arg = (0..space)
        .into_par_iter()
        .find_first(|&i| value(i) <= best + 1e-12)
        .expect("minimum is attained");
    let mut g = vec![0; q];
    decode_g(arg, q, &mut g);
    let best_entropy_per_symbol = value(arg);
    Ok(MinEntropySearchResult {
        n: 1,
        best_g: TableFunction::new(vec![q], q, g)?,
        best_entropy_per_symbol,
        method: MinEntropyMethod::Exhaustive,
        trace,
    })
}

/// Per-symbol entropy of the letterwise map `s -> s^2` on the sum-product
/// channel. For `n > 1` the block value is computed explicitly and must
/// match the single-letter one.
pub fn quadratic_entropy<P: Probability>(ch: &TwoStateChannel<P>, n: usize) -> Result<f64> {
    let ch = ch.to_f64();
    if !ch.is_sum_product() {
        return Err(Error::invalid(
            "the quadratic map is defined for Y = X + S1 S2",
        ));
    }
    if n == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    let field = ch.field();
    let q = field.size();
    let sq: Vec<usize> = (0..q)
        .map(|s| field.mul(s as u32, s as u32) as usize)
        .collect();
    let b1 = Block::new(&ch, 1, MAX_BLOCK_ALPHABET)?;
    let h1 = b1.entropy(&sq, &mut vec![0.0; q]);
    let check_n = if n == 1 { 2 } else { n };
    let bn = Block::new(&ch, check_n, MAX_BLOCK_ALPHABET)?;
    let hn = bn.entropy(&bn.lift(&sq), &mut vec![0.0; bn.size]);
    if (hn - h1).abs() > IDENTITY_TOLERANCE {
        return Err(Error::Invariant(format!(
            "block length {check_n} gives {hn}, single letter gives {h1}"
        )));
    }
    Ok(if n == 1 { h1 } else { hn })
}

/// `(log2(q/2), log2(q/(2 - 1/q)))`
pub fn entropy_bracket(q: u32) -> (f64, f64) {
    let q = q as f64;
    ((q / 2.0).log2(), (q / (2.0 - 1.0 / q)).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyBracketReport {
    pub q: u32,
    pub h_min_bits: f64,
    pub best_g: TableFunction,
    pub quadratic_bits: f64,
    pub lower_bound_bits: f64,
    pub upper_bound_bits: f64,
    /// `log2 q - H_min(1)`
    pub capacity_lb_bits: f64,
    pub corollary_cap_bits: f64,
    pub lower_bound_holds: bool,
    pub quadratic_within_upper: bool,
    pub corollary_holds: bool,
}

/// Exhaustive single-letter minimum, the quadratic value, and the bracket
/// constants for `Y = X + S1 S2`. Bound violations are reported in the
/// flags rather than raised, since they depend on the state laws.
pub fn theorem1_check<P: Probability>(
    field: FieldSpec,
    ps1: Pmf<P>,
    ps2: Pmf<P>,
) -> Result<EntropyBracketReport> {
    let ch = TwoStateChannel::sum_product(field, ps1, ps2)?;
    let ex = min_entropy_exhaustive(&ch)?;
    let quadratic_bits = quadratic_entropy(&ch, 1)?;
    let q = field.order();
    let (lower, upper) = entropy_bracket(q);
    let capacity_lb_bits = capacity_from_entropy(q, ex.best_entropy_per_symbol);
    Ok(EntropyBracketReport {
        q,
        h_min_bits: ex.best_entropy_per_symbol,
        best_g: ex.best_g,
        quadratic_bits,
        lower_bound_bits: lower,
        upper_bound_bits: upper,
        capacity_lb_bits,
        corollary_cap_bits: 1.0,
        lower_bound_holds: ex.best_entropy_per_symbol >= lower - IDENTITY_TOLERANCE,
        quadratic_within_upper: quadratic_bits <= upper + IDENTITY_TOLERANCE,
        corollary_holds: capacity_lb_bits <= 1.0 + IDENTITY_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealConfig {
    pub n: usize,
    /// Total mutations across all chains.
    pub budget: u64,
    pub seed: u64,
    pub chains: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl AnnealConfig {
    pub fn new(n: usize, budget: u64, seed: u64) -> Self {
        Self {
            n,
            budget,
            seed,
            chains: 4,
            t_start: 1.0,
            t_end: 1e-4,
        }
    }
}

struct Chain {
    value: f64,
    g: Vec<usize>,
    trace: Vec<(u64, f64)>,
}

/// Running per-`s2` histograms for incremental entropy updates.
struct Tracker<'a> {
    b: &'a Block,
    hist: Vec<Vec<f64>>,
    parts: Vec<f64>,
}

impl<'a> Tracker<'a> {
    fn new(b: &'a Block, g: &[usize]) -> Self {
        let mut t = Self {
            b,
            hist: vec![vec![0.0; b.size]; b.s2.len()],
            parts: vec![0.0; b.s2.len()],
        };
        t.rebuild(g);
        t
    }

    fn rebuild(&mut self, g: &[usize]) {
        let b = self.b;
        for (j, &(s2, _)) in b.s2.iter().enumerate() {
            let h = &mut self.hist[j];
            h.iter_mut().for_each(|v| *v = 0.0);
            for &(s1, p1) in &b.s1 {
                h[b.add[g[s1] * b.size + b.shift[s1 * b.size + s2]]] += p1;
            }
            self.parts[j] = h.iter().map(|&v| surprisal_term(v)).sum();
        }
    }

    fn value(&self) -> f64 {
        self.b
            .s2
            .iter()
            .zip(&self.parts)
            .map(|(&(_, p2), &h)| p2 * h)
            .sum::<f64>()
            / self.b.n as f64
    }

    /// Change in per-symbol entropy if `g(s1)` moves from `old` to `new`.
    fn delta(&self, s1: usize, p1: f64, old: usize, new: usize) -> f64 {
        let b = self.b;
        let mut d = 0.0;
        for (j, &(s2, p2)) in b.s2.iter().enumerate() {
            let sh = b.shift[s1 * b.size + s2];
            let (yo, yn) = (b.add[old * b.size + sh], b.add[new * b.size + sh]);
            if yo == yn {
                continue;
            }
            let h = &self.hist[j];
            let before = surprisal_term(h[yo]) + surprisal_term(h[yn]);
            let after = surprisal_term((h[yo] - p1).max(0.0)) + surprisal_term(h[yn] + p1);
            d += p2 * (after - before);
        }
        d / b.n as f64
    }

    fn apply(&mut self, s1: usize, p1: f64, old: usize, new: usize) {
        let b = self.b;
        for (j, &(s2, _)) in b.s2.iter().enumerate() {
            let sh = b.shift[s1 * b.size + s2];
            let (yo, yn) = (b.add[old * b.size + sh], b.add[new * b.size + sh]);
            if yo == yn {
                continue;
            }
            let h = &mut self.hist[j];
            let before = surprisal_term(h[yo]) + surprisal_term(h[yn]);
            h[yo] = (h[yo] - p1).max(0.0);
            h[yn] += p1;
            self.parts[j] += surprisal_term(h[yo]) + surprisal_term(h[yn]) - before;
        }
    }
}

fn run_chain(b: &Block, start: &[usize], cfg: &AnnealConfig, chain: usize, steps: u64) -> Chain {
    let mut rng = rng::stream(cfg.seed, Purpose::Search, chain as u64);
    let mut g = start.to_vec();
    let mut tr = Tracker::new(b, &g);
    let mut current = tr.value();
    let mut best = Chain {
        value: current,
        g: g.clone(),
        trace: vec![(0, current)],
    };
    let every = (steps / TRACE_POINTS).max(1);
    let ratio = if steps > 1 {
        (cfg.t_end / cfg.t_start).powf(1.0 / (steps - 1) as f64)
    } else {
        1.0
    };
    let mut temp = cfg.t_start;
    for step in 1..=steps {
        let (s1, p1) = b.s1[rng.gen_range(0..b.s1.len())];
        let old = g[s1];
        let mut new = rng.gen_range(0..b.size - 1);
        if new >= old {
            new += 1;
        }
        let d = tr.delta(s1, p1, old, new);
        if d <= 0.0 || rng.gen::<f64>() < (-d / temp).exp() {
            tr.apply(s1, p1, old, new);
            g[s1] = new;
            current += d;
            if step % 4096 == 0 {
                tr.rebuild(&g);
                current = tr.value();
            }
            if current < best.value - 1e-12 {
                // Confirm against a fresh evaluation before recording.
                tr.rebuild(&g);
                current = tr.value();
                if current < best.value - 1e-12 {
                    best.value = current;
                    best.g.copy_from_slice(&g);
                }
            }
        }
        temp *= ratio;
        if step % every == 0 {
            best.trace.push((step, best.value));
        }
    }
    best
}

/// Simulated annealing over block maps `g: F_q^n -> F_q^n`, started from
/// the letterwise lift of the exhaustive single-letter optimum, so the
/// result never exceeds that optimum.
pub fn min_entropy_anneal<P: Probability>(
    ch: &TwoStateChannel<P>,
    cfg: &AnnealConfig,
) -> Result<MinEntropySearchResult> {
    let ch = ch.to_f64();
    if cfg.n == 0 || cfg.chains == 0 {
        return Err(Error::invalid(
            "block length and chain count must be positive",
        ));
    }
    if !(cfg.t_start > 0.0 && cfg.t_end > 0.0) {
        return Err(Error::invalid("temperatures must be positive"));
    }
    let b = Block::new(&ch, cfg.n, MAX_ANNEAL_ALPHABET)?;
    let one = min_entropy_exhaustive(&ch)?;
    let start = b.lift(one.best_g.table());
    let mut hist = vec![0.0; b.size];
    let start_value = b.entropy(&start, &mut hist);
    if (start_value - one.best_entropy_per_symbol).abs() > IDENTITY_TOLERANCE {
        return Err(Error::Invariant(format!(
            "letterwise lift evaluates to {start_value}, single-letter optimum is {}",
            one.best_entropy_per_symbol
        )));
    }
    let steps = cfg.budget / cfg.chains as u64;
    let chains: Vec<Chain> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(&b, &start, cfg, c, steps))
        .collect();
    let winner = chains
        .into_iter()
        .reduce(|a, c| if c.value < a.value - 1e-12 { c } else { a })
        .expect("at least one chain");
    let value = b.entropy(&winner.g, &mut hist);
    if (value - winner.value).abs() > IDENTITY_TOLERANCE {
        return Err(Error::Invariant(format!(
            "annealed value {} re-evaluates to {value}",
            winner.value
        )));
    }
    if value > one.best_entropy_per_symbol + IDENTITY_TOLERANCE {
        return Err(Error::Invariant(
            "annealing ended above its starting point".into(),
        ));
    }
    Ok(MinEntropySearchResult {
        n: cfg.n,
        best_g: TableFunction::new(vec![b.size], b.size, winner.g)?,
        best_entropy_per_symbol: value,
        method: MinEntropyMethod::Anneal,
        trace: winner.trace,
    })
}
