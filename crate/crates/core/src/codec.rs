//! Syndrome (coset) coding over `F_q`.
//!
//! Decoding is exact maximum likelihood under an i.i.d. prior: the coset
//! `{z : H z = s}` is parametrized by the free columns of the reduced row
//! echelon form of `H` and enumerated in full, up to a configurable cap.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::field::FieldSpec;
use crate::prob::{JointPmf, Pmf};
use crate::rng::{self, ExperimentRng, Purpose};
use crate::source::SumProductSource;
use crate::table::TableFunction;

/// Default cap on coset candidates per decode (2^24).
pub const DEFAULT_DECODE_CAP: u64 = 1 << 24;

/// Log-probability differences at or below this are treated as ties.
const TIE_EPS: f64 = 1e-9;

/// An `m x n` parity-check matrix over `F_q`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCode {
    field: FieldSpec,
    n: usize,
    m: usize,
    h: Vec<u32>,
}

impl LinearCode {
    pub fn new(field: FieldSpec, n: usize, m: usize, h: Vec<u32>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid(
                "block length and syndrome dimension must be positive",
            ));
        }
        if h.len() != n * m {
            return Err(Error::invalid(format!(
                "matrix has {} entries, {m}x{n} needs {}",
                h.len(),
                n * m
            )));
        }
        if let Some(&v) = h.iter().find(|&&v| v >= field.order()) {
            return Err(FieldError::OutOfRange {
                value: v,
                q: field.order(),
            }
            .into());
        }
        Ok(Self { field, n, m, h })
    }

    /// Uniform i.i.d. entries from the seed's matrix stream.
    pub fn random(field: FieldSpec, n: usize, m: usize, seed: u64) -> Result<Self> {
        Self::random_from(field, n, m, &mut rng::stream(seed, Purpose::Matrix, 0))
    }

    pub fn random_from<R: Rng + ?Sized>(
        field: FieldSpec,
        n: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let q = field.order();
        let h = (0..n * m).map(|_| rng.gen_range(0..q)).collect();
        Self::new(field, n, m, h)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &[u32] {
        &self.h
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.h[row * self.n + col]
    }

    /// `(m / n) log2 q` bits per source symbol.
    pub fn rate_bits(&self) -> f64 {
        self.m as f64 / self.n as f64 * (self.field.order() as f64).log2()
    }

    pub fn syndrome(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.n {
            return Err(Error::invalid(format!(
                "vector has length {}, code has n = {}",
                v.len(),
                self.n
            )));
        }
        if let Some(&x) = v.iter().find(|&&x| x >= self.field.order()) {
            return Err(FieldError::OutOfRange {
                value: x,
                q: self.field.order(),
            }
            .into());
        }
        Ok(self.syndrome_unchecked(v))
    }

    fn syndrome_unchecked(&self, v: &[u32]) -> Vec<u32> {
        let q = self.field.order() as u64;
        self.h
            .chunks(self.n)
            .map(|row| {
                (row.iter()
                    .zip(v)
                    .map(|(&h, &x)| h as u64 * x as u64)
                    .sum::<u64>()
                    % q) as u32
            })
            .collect()
    }

    /// `H diag(scale)`.
    pub fn scale_columns(&self, scale: &[u32]) -> Result<Self> {
        if scale.len() != self.n {
            return Err(Error::invalid("scale vector length must equal n"));
        }
        let h = self
            .h
            .chunks(self.n)
            .flat_map(|row| row.iter().zip(scale).map(|(&h, &b)| self.field.mul(h, b)))
            .collect();
        Self::new(self.field, self.n, self.m, h)
    }

    pub fn rank(&self) -> usize {
        Echelon::reduce(self).rank
    }

    pub fn decoder(&self) -> CosetDecoder {
        CosetDecoder {
            q: self.field.order(),
            n: self.n,
            echelon: Echelon::reduce(self),
        }
    }
}

/// Reduced row echelon form `R = T H`, with the transform `T` kept so that
/// syndromes can be carried along.
#[derive(Debug, Clone)]
struct Echelon {
    m: usize,
    rank: usize,
    /// Pivot column of each of the first `rank` rows.
    pivots: Vec<usize>,
    free: Vec<usize>,
    /// `rank x free.len()` block of `R` on the free columns.
    free_block: Vec<u32>,
    /// `m x m`
    transform: Vec<u32>,
}

impl Echelon {
    fn reduce(code: &LinearCode) -> Self {
        let f = code.field;
        let (m, n) = (code.m, code.n);
        let mut r = code.h.clone();
        let mut t: Vec<u32> = (0..m * m).map(|i| u32::from(i / m == i % m)).collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row == m {
                break;
            }
            let Some(p) = (row..m).find(|&i| r[i * n + col] != 0) else {
                continue;
            };
            if p != row {
                for j in 0..n {
                    r.swap(p * n + j, row * n + j);
                }
                for j in 0..m {
                    t.swap(p * m + j, row * m + j);
                }
            }
            let inv = f.inv(r[row * n + col]).expect("pivot is nonzero");
            for j in 0..n {
                r[row * n + j] = f.mul(r[row * n + j], inv);
            }
            for j in 0..m {
                t[row * m + j] = f.mul(t[row * m + j], inv);
            }
            for i in (0..m).filter(|&i| i != row) {
                let factor = r[i * n + col];
                if factor == 0 {
                    continue;
                }
                for j in 0..n {
                    r[i * n + j] = f.sub(r[i * n + j], f.mul(factor, r[row * n + j]));
                }
                for j in 0..m {
                    t[i * m + j] = f.sub(t[i * m + j], f.mul(factor, t[row * m + j]));
                }
            }
            pivots.push(col);
            row += 1;
        }
        let rank = pivots.len();
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let free_block = (0..rank)
            .flat_map(|i| free.iter().map(|&c| r[i * n + c]).collect::<Vec<_>>())
            .collect();
        Echelon {
            m,
            rank,
            pivots,
            free,
            free_block,
            transform: t,
        }
    }
}

/// Exhaustive ML decoder for one parity-check matrix.
#[derive(Debug, Clone)]
pub struct CosetDecoder {
    q: u32,
    n: usize,
    echelon: Echelon,
}

/// Per-symbol log-probabilities of an i.i.d. prior.
pub fn log_prior(prior: &Pmf<f64>) -> Vec<f64> {
    prior
        .probs()
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect()
}

impl CosetDecoder {
    /// Number of coset members, `q^(n - rank)`, saturating.
    pub fn coset_size(&self) -> u64 {
        (self.q as u64).saturating_pow(self.echelon.free.len() as u32)
    }

    /// Most probable `z` with `H z = s` under the i.i.d. prior given as
    /// per-symbol log-probabilities; ties go to the lexicographically
    /// smallest vector.
    pub fn decode(&self, s: &[u32], logp: &[f64], cap: u64) -> Result<Vec<u32>> {
        let e = &self.echelon;
        let q = self.q;
        let field = FieldSpec::new(q).expect("decoder built from a valid field");
        if s.len() != e.m {
            return Err(Error::invalid(format!(
                "syndrome has length {}, code has m = {}",
                s.len(),
                e.m
            )));
        }
        if logp.len() != q as usize {
            return Err(Error::invalid("prior alphabet must equal the field size"));
        }
        let candidates = self.coset_size();
        if candidates > cap {
            return Err(Error::BudgetExceeded {
                what: "coset enumeration",
                needed: candidates as f64,
                cap: cap as f64,
            });
        }
        let reduced: Vec<u32> = (0..e.m)
            .map(|i| {
                let acc: u64 = (0..e.m)
                    .map(|j| e.transform[i * e.m + j] as u64 * s[j] as u64)
                    .sum();
                (acc % q as u64) as u32
            })
            .collect();
        if reduced[e.rank..].iter().any(|&v| v != 0) {
            return Err(Error::EmptyCoset);
        }

        let nf = e.free.len();
        let mut free_vals = vec![0u32; nf];
        let mut pivot_vals: Vec<u32> = reduced[..e.rank].to_vec();
        let mut z = vec![0u32; self.n];
        let mut best: Option<(f64, Vec<u32>)> = None;

        loop {
            for (i, &c) in e.pivots.iter().enumerate() {
                z[c] = pivot_vals[i];
            }
            for (k, &c) in e.free.iter().enumerate() {
                z[c] = free_vals[k];
            }
            let score: f64 = z.iter().map(|&v| logp[v as usize]).sum();
            let better = match &best {
                None => true,
                Some((b, bz)) => {
                    if score == f64::NEG_INFINITY && *b == f64::NEG_INFINITY {
                        z < *bz
                    } else if score > b + TIE_EPS {
                        true
                    } else if score >= b - TIE_EPS {
                        z < *bz
                    } else {
                        false
                    }
                }
            };
            if better {
                match &mut best {
                    Some((b, bz)) => {
                        *b = score;
                        bz.copy_from_slice(&z);
                    }
                    None => best = Some((score, z.clone())),
                }
            }

            // Odometer step: bumping free variable k by one shifts every
            // pivot value by -R[i, k].
            let mut k = 0;
            loop {
                if k == nf {
                    return Ok(best.expect("coset is non-empty").1);
                }
                free_vals[k] += 1;
                for (i, pv) in pivot_vals.iter_mut().enumerate() {
                    *pv = field.sub(*pv, e.free_block[i * nf + k]);
                }
                if free_vals[k] == q {
                    free_vals[k] = 0;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// A decoder bound to one prior, remembering every syndrome it has solved.
/// The ML answer depends on the syndrome alone, so with a fixed code the
/// work is bounded by the number of distinct syndromes seen.
#[derive(Debug)]
pub struct MemoDecoder {
    decoder: CosetDecoder,
    logp: Vec<f64>,
    cap: u64,
    cache: Mutex<HashMap<Vec<u32>, Vec<u32>>>,
}

impl MemoDecoder {
    pub fn new(decoder: CosetDecoder, logp: Vec<f64>, cap: u64) -> Self {
        Self {
            decoder,
            logp,
            cap,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn decode(&self, s: &[u32]) -> Result<Vec<u32>> {
        if let Some(z) = self.cache.lock().expect("cache lock").get(s) {
            return Ok(z.clone());
        }
        let z = self.decoder.decode(s, &self.logp, self.cap)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(s.to_vec(), z.clone());
        Ok(z)
    }
}

/// ML decode of `s` under the i.i.d. `prior`.
pub fn coset_decode(code: &LinearCode, s: &[u32], prior: &Pmf<f64>, cap: u64) -> Result<Vec<u32>> {
    if prior.len() != code.field.size() {
        return Err(Error::invalid("prior alphabet must equal the field size"));
    }
    code.decoder().decode(s, &log_prior(prior), cap)
}

/// Which parity-check matrix each trial uses.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeDraw {
    /// One matrix for all trials.
    Fixed(LinearCode),
    /// A fresh uniform matrix per trial, drawn first from the trial stream.
    PerTrial {
        field: FieldSpec,
        n: usize,
        m: usize,
    },
}

impl CodeDraw {
    pub fn field(&self) -> FieldSpec {
        match self {
            CodeDraw::Fixed(c) => c.field,
            CodeDraw::PerTrial { field, .. } => *field,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            CodeDraw::Fixed(c) => (c.n, c.m),
            CodeDraw::PerTrial { n, m, .. } => (*n, *m),
        }
    }

    pub fn rate_bits(&self) -> f64 {
        let (n, m) = self.dims();
        m as f64 / n as f64 * (self.field().order() as f64).log2()
    }

    fn for_trial(&self, rng: &mut ExperimentRng) -> Result<std::borrow::Cow<'_, LinearCode>> {
        Ok(match self {
            CodeDraw::Fixed(c) => std::borrow::Cow::Borrowed(c),
            CodeDraw::PerTrial { field, n, m } => {
                std::borrow::Cow::Owned(LinearCode::random_from(*field, *n, *m, rng)?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `Y = X + Z`, both encoders send syndromes, decoder wants `Z`.
    Classical,
    /// Sum-product source; the decoder knows `B^n`.
    CentralizedB,
    /// Sum-product source; both encoders know `B^n` and divide by it.
    EncoderSideB,
    /// Sum-product source; nobody but the first encoder knows `B^n`.
    Decentralized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub decode_cap: u64,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            decode_cap: DEFAULT_DECODE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub q: u32,
    pub n: usize,
    pub m: usize,
    pub rate_bits: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub seed: u64,
}

impl SimOutcome {
    pub fn block_error_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.block_errors as f64 / self.trials as f64
        }
    }
}

fn draw<R: Rng + ?Sized>(p: &Pmf<f64>, n: usize, rng: &mut R) -> Vec<u32> {
    (0..n).map(|_| p.sample(rng) as u32).collect()
}

fn sub_vec(f: FieldSpec, a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

fn run_trials(
    cfg: &SimConfig,
    draw_code: &CodeDraw,
    trial: impl Fn(u64, &mut ExperimentRng) -> Result<bool> + Sync,
) -> Result<SimOutcome> {
    let (n, m) = draw_code.dims();
    let block_errors = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(cfg.seed, Purpose::Trial, t);
            trial(t, &mut rng).map(u64::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(SimOutcome {
        q: draw_code.field().order(),
        n,
        m,
        rate_bits: draw_code.rate_bits(),
        trials: cfg.trials,
        block_errors,
        seed: cfg.seed,
    })
}

/// Classical additive-noise syndrome scheme: per trial draw `X^n` uniform
/// and `Z^n ~ pz`, form `Y = X + Z`, and decode `Z` from
/// `syndrome(Y) - syndrome(X)`.
pub fn km_simulate(code: &CodeDraw, pz: &Pmf<f64>, cfg: &SimConfig) -> Result<SimOutcome> {
    let field = code.field();
    let q = field.size();
    if pz.len() != q {
        return Err(Error::invalid("pZ alphabet must equal the field size"));
    }
    let logp = log_prior(pz);
    let fixed = match code {
        CodeDraw::Fixed(c) => Some(MemoDecoder::new(c.decoder(), logp.clone(), cfg.decode_cap)),
        CodeDraw::PerTrial { .. } => None,
    };
    let uniform = Pmf::uniform(q)?;
    run_trials(cfg, code, |_, rng| {
        let h = code.for_trial(rng)?;
        let n = h.n;
        let x = draw(&uniform, n, rng);
        let z = draw(pz, n, rng);
        let y: Vec<u32> = x.iter().zip(&z).map(|(&a, &b)| field.add(a, b)).collect();
        let s = sub_vec(field, &h.syndrome(&y)?, &h.syndrome(&x)?);
        let zhat = match &fixed {
            Some(d) => d.decode(&s)?,
            None => h.decoder().decode(&s, &logp, cfg.decode_cap)?,
        };
        Ok(zhat != z)
    })
}

/// Law of `W = B * C`.
fn product_law(src: &SumProductSource<f64>) -> Result<Pmf<f64>> {
    let field = src.field();
    let q = field.size();
    let mul = TableFunction::from_fn(vec![q, q], q, |v| {
        field.mul(v[0] as u32, v[1] as u32) as usize
    })?;
    let w = crate::prob::pushforward(&[src.pb().clone(), src.pc().clone()], &mul, false)?;
    Ok(w.marginal_pmf(0)?)
}

/// MAP estimate of `C` from `W = B * C` alone, per symbol.
fn c_given_w(src: &SumProductSource<f64>) -> Result<Vec<u32>> {
    let field = src.field();
    let q = field.size();
    let joint = JointPmf::product(&[src.pb().clone(), src.pc().clone()])?;
    let mut post = vec![vec![0.0; q]; q];
    for b in 0..q {
        for c in 0..q {
            let w = field.mul(b as u32, c as u32) as usize;
            post[w][c] += *joint.prob(&[b, c]);
        }
    }
    Ok(post
        .iter()
        .map(|row| {
            let mut best = 0;
            for (c, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = c;
                }
            }
            best as u32
        })
        .collect())
}

/// Sum-product syndrome scheme `Y = A + B*C`. Encoder 1 sends the syndrome
/// of `A^n`, encoder 2 that of `Y^n`; the variant fixes who knows `B^n`.
/// Draw order per trial is code, `A^n`, `C^n`, `B^n`, so that `B = 1`
/// reproduces [`km_simulate`] trial for trial.
pub fn km_sum_product(
    code: &CodeDraw,
    src: &SumProductSource<f64>,
    variant: Variant,
    cfg: &SimConfig,
) -> Result<SimOutcome> {
    let field = code.field();
    if src.field() != field {
        return Err(Error::invalid("source and code live in different fields"));
    }
    let logp_c = log_prior(src.pc());
    let logp_w = log_prior(&product_law(src)?);
    let fixed = match code {
        CodeDraw::Fixed(c) => Some((
            MemoDecoder::new(c.decoder(), logp_c.clone(), cfg.decode_cap),
            MemoDecoder::new(c.decoder(), logp_w.clone(), cfg.decode_cap),
        )),
        CodeDraw::PerTrial { .. } => None,
    };
    let c_from_w = c_given_w(src)?;
    run_trials(cfg, code, |_, rng| {
        let h = code.for_trial(rng)?;
        let n = h.n;
        let a = draw(src.pa(), n, rng);
        let c = draw(src.pc(), n, rng);
        let b = draw(src.pb(), n, rng);
        let y: Vec<u32> = (0..n)
            .map(|i| field.add(a[i], field.mul(b[i], c[i])))
            .collect();
        let chat = match variant {
            Variant::Classical => {
                return Err(Error::invalid("use km_simulate for the classical variant"));
            }
            Variant::CentralizedB => {
                // H y - H a = (H diag(b)) c
                let s = sub_vec(field, &h.syndrome(&y)?, &h.syndrome(&a)?);
                h.scale_columns(&b)?
                    .decoder()
                    .decode(&s, &logp_c, cfg.decode_cap)?
            }
            Variant::EncoderSideB => {
                let binv: Vec<u32> = b
                    .iter()
                    .map(|&v| field.inv(v))
                    .collect::<std::result::Result<_, _>>()?;
                let a_div: Vec<u32> = a
                    .iter()
                    .zip(&binv)
                    .map(|(&x, &i)| field.mul(x, i))
                    .collect();
                let y_div: Vec<u32> = y
                    .iter()
                    .zip(&binv)
                    .map(|(&x, &i)| field.mul(x, i))
                    .collect();
                let s = sub_vec(field, &h.syndrome(&y_div)?, &h.syndrome(&a_div)?);
                match &fixed {
                    Some((d, _)) => d.decode(&s)?,
                    None => h.decoder().decode(&s, &logp_c, cfg.decode_cap)?,
                }
            }
            Variant::Decentralized => {
                let s = sub_vec(field, &h.syndrome(&y)?, &h.syndrome(&a)?);
                let what = match &fixed {
                    Some((_, d)) => d.decode(&s)?,
                    None => h.decoder().decode(&s, &logp_w, cfg.decode_cap)?,
                };
                what.iter().map(|&w| c_from_w[w as usize]).collect()
            }
        };
        Ok(chat != c)
    })
}

/// Classical scheme at several syndrome dimensions with one shared seed.
pub fn km_sweep(
    field: FieldSpec,
    n: usize,
    ms: &[usize],
    per_trial_code: bool,
    pz: &Pmf<f64>,
    cfg: &SimConfig,
) -> Result<Vec<SimOutcome>> {
    ms.iter()
        .map(|&m| {
            let code = if per_trial_code {
                CodeDraw::PerTrial { field, n, m }
            } else {
                CodeDraw::Fixed(LinearCode::random(field, n, m, cfg.seed)?)
            };
            km_simulate(&code, pz, cfg)
        })
        .collect()
}
