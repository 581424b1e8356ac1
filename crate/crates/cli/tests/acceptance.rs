//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any fails. Reference values come from
//! small brute-force oracles written here, not from the library.

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use sumprod_core::analysis::{
    builtin, decompose, discrete_log_table, log_domain_check, residual_dependence, Builtin,
    DecompositionWitness, ResidualMode,
};
use sumprod_core::channel::{
    default_states, entropy_bracket, gp_search, theorem1_check, GpSearchConfig, TwoStateChannel,
};
use sumprod_core::codec::{km_simulate, km_sum_product, CodeDraw, LinearCode, SimConfig, Variant};
use sumprod_core::rng::{stream, Purpose};
use sumprod_core::source::{line_intersection_check, FunctionalInstance, SumProductSource};
use sumprod_core::{FieldSpec, Pmf, TableFunction};

type Outcome = Result<String, String>;

fn field(q: u32) -> FieldSpec {
    FieldSpec::new(q).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn entropy_of_counts<K>(m: &HashMap<K, f64>) -> f64 {
    m.values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

// ---------------------------------------------------------------------------
// Criteria 1 and 2

/// `H(X|Y)` for `X = (A, B)`, `Y = A + B C`, by direct enumeration.
fn oracle_h_x_given_y(q: u32, pa: &[f64], pb: &[f64], pc: &[f64]) -> f64 {
    let mut xy: HashMap<(u32, u32, u32), f64> = HashMap::new();
    let mut y: HashMap<u32, f64> = HashMap::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let p = pa[a as usize] * pb[b as usize] * pc[c as usize];
                if p == 0.0 {
                    continue;
                }
                let yy = (a + b * c) % q;
                *xy.entry((a, b, yy)).or_default() += p;
                *y.entry(yy).or_default() += p;
            }
        }
    }
    entropy_of_counts(&xy) - entropy_of_counts(&y)
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

struct SweepCase {
    q: u32,
    h_b: f64,
    h_c: f64,
    upper: f64,
    lower: f64,
    oracle: f64,
}

fn identity_sweep() -> Vec<SweepCase> {
    let mut out = Vec::new();
    for q in [2u32, 3, 5] {
        let f = field(q);
        let k = q as usize;
        let nonzero: Vec<usize> = (1..k).collect();
        let all: Vec<usize> = (0..k).collect();
        for i in 0..100u64 {
            let mut rng = stream(2024, Purpose::Fixture, (q as u64) << 16 | i);
            // Every tenth pair uses a random support for C, so point masses
            // and partial supports are exercised too.
            let c_support: Vec<usize> = if i % 10 == 9 {
                vec![(i as usize) % k]
            } else {
                all.clone()
            };
            let pb = Pmf::<f64>::random(&mut rng, k, &nonzero).unwrap();
            let pc = Pmf::<f64>::random(&mut rng, k, &c_support).unwrap();
            let pa = Pmf::<f64>::uniform(k).unwrap();
            out.push(case(f, pa, pb, pc));
        }
        // B constant: the bounds must meet.
        for b in 1..k {
            let mut rng = stream(
                2024,
                Purpose::Fixture,
                1 << 40 | (q as u64) << 16 | b as u64,
            );
            let pc = Pmf::<f64>::random(&mut rng, k, &all).unwrap();
            out.push(case(
                f,
                Pmf::uniform(k).unwrap(),
                Pmf::point(k, b).unwrap(),
                pc,
            ));
        }
    }
    out
}

fn case(f: FieldSpec, pa: Pmf<f64>, pb: Pmf<f64>, pc: Pmf<f64>) -> SweepCase {
    let oracle = oracle_h_x_given_y(f.order(), pa.probs(), pb.probs(), pc.probs());
    let (h_b, h_c) = (h(pb.probs()), h(pc.probs()));
    let inst = FunctionalInstance::build(SumProductSource::new(f, pa, pb, pc).unwrap()).unwrap();
    let bounds = inst.rate_bounds().unwrap();
    SweepCase {
        q: f.order(),
        h_b,
        h_c,
        upper: bounds.upper,
        lower: bounds.lower,
        oracle,
    }
}

fn criterion_1() -> Outcome {
    let cases = identity_sweep();
    let mut worst = 0f64;
    for c in &cases {
        ensure((c.upper - c.oracle).abs() < 1e-9, || {
            format!("q={}: library {} vs enumeration {}", c.q, c.upper, c.oracle)
        })?;
        let gap = (c.oracle - (c.h_b + c.h_c)).abs();
        ensure(gap < 1e-9, || {
            format!(
                "q={}: H(X|Y)={} but H(B)+H(C)={}",
                c.q,
                c.oracle,
                c.h_b + c.h_c
            )
        })?;
        worst = worst.max(gap);
    }
    Ok(format!(
        "{} pairs over q in {{2,3,5}}, max gap {worst:.2e}",
        cases.len()
    ))
}

fn criterion_2() -> Outcome {
    let cases = identity_sweep();
    let mut meets = 0;
    for c in &cases {
        ensure((c.lower - c.h_c).abs() < 1e-9, || {
            format!("q={}: H(Z|Y)={} vs H(C)={}", c.q, c.lower, c.h_c)
        })?;
        ensure(
            c.h_b + c.h_c >= c.oracle - 1e-9 && c.oracle >= c.h_c - 1e-9,
            || {
                format!(
                    "q={}: {} >= {} >= {} fails",
                    c.q,
                    c.h_b + c.h_c,
                    c.oracle,
                    c.h_c
                )
            },
        )?;
        let equal = (c.upper - c.lower).abs() <= 1e-9;
        ensure(equal == (c.h_b <= 1e-12), || {
            format!("q={}: bounds equal = {equal} but H(B) = {}", c.q, c.h_b)
        })?;
        meets += equal as usize;
    }
    Ok(format!(
        "{} cases, bounds coincide exactly in the {meets} with H(B)=0",
        cases.len()
    ))
}

// ---------------------------------------------------------------------------
// Criterion 3

fn criterion_3() -> Outcome {
    let mut pairs = 0u64;
    for q in [2u32, 3, 5, 7, 11, 13] {
        let rep = line_intersection_check(field(q));
        // Brute force: count c with a + b c = a' + b' c.
        let mut max = 0;
        for l1 in 0..q * q {
            for l2 in 0..q * q {
                if l1 == l2 {
                    continue;
                }
                let (a, b, a2, b2) = (l1 / q, l1 % q, l2 / q, l2 % q);
                let n = (0..q)
                    .filter(|&c| (a + b * c) % q == (a2 + b2 * c) % q)
                    .count();
                max = max.max(n);
            }
        }
        ensure(rep.max_intersections == max && max == 1, || {
            format!(
                "q={q}: library max {} brute force {max}",
                rep.max_intersections
            )
        })?;
        pairs += rep.pairs_checked;
    }
    Ok(format!(
        "all prime q <= 13, {pairs} line pairs, max intersections 1"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 4

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for q in [2u32, 3, 5, 7] {
        let f = field(q);
        let sum = decompose(&builtin(Builtin::Sum3, f).unwrap()).unwrap();
        ensure(sum.decomposable, || {
            format!("q={q}: a+b+c not decomposable")
        })?;
        let ft = sum.ftilde.as_ref().unwrap();
        let classes = sum.classes.len();
        for c in 0..q as usize {
            let mut seen: Vec<usize> = (0..classes).map(|t| ft.eval(&[t, c])).collect();
            seen.sort_unstable();
            seen.dedup();
            ensure(seen.len() == classes && classes == q as usize, || {
                format!("q={q}: section at c={c} not bijective")
            })?;
        }
        // Recompose and compare with the original.
        let g = sum.g.as_ref().unwrap();
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let t = g.eval(&[a as usize, b as usize]);
                    ensure(ft.eval(&[t, c as usize]) as u32 == (a + b + c) % q, || {
                        format!("q={q}: recomposition differs")
                    })?;
                }
            }
        }

        let sp = decompose(&builtin(Builtin::SumProduct3, f).unwrap()).unwrap();
        ensure(!sp.decomposable, || {
            format!("q={q}: a+bc reported decomposable")
        })?;
        match sp.witness {
            Some(DecompositionWitness::Collision {
                c,
                pairs: ((a1, b1), (a2, b2)),
                value,
                ..
            }) => {
                let fv = |a: usize, b: usize, c: usize| (a + b * c) % q as usize;
                ensure(fv(a1, b1, c) == value && fv(a2, b2, c) == value, || {
                    format!("q={q}: witness values wrong")
                })?;
                let differ = (0..q as usize).any(|c2| fv(a1, b1, c2) != fv(a2, b2, c2));
                ensure(differ, || {
                    format!("q={q}: witness sections agree everywhere")
                })?;
                notes.push(format!("q={q}: F({a1},{b1},{c})=F({a2},{b2},{c})"));
            }
            other => {
                return Err(format!(
                    "q={q}: expected a collision witness, got {other:?}"
                ))
            }
        }

        if q > 2 {
            let pr = decompose(&builtin(Builtin::Product3Nonzero, f).unwrap()).unwrap();
            ensure(pr.decomposable, || {
                format!("q={q}: abc on nonzero elements not decomposable")
            })?;
            ensure(log_domain_check(f).unwrap().isomorphic, || {
                format!("q={q}: log-domain check failed")
            })?;
            // Independent check that the log table turns products into sums.
            let dl = discrete_log_table(f);
            for x in 1..q {
                for y in 1..q {
                    let lhs = dl.log_of(x * y % q).unwrap();
                    let rhs = (dl.log_of(x).unwrap() + dl.log_of(y).unwrap()) % (q - 1);
                    ensure(lhs == rhs, || format!("q={q}: log({x}*{y}) mismatch"))?;
                }
            }
        }
    }
    Ok(format!(
        "sum decomposable, sum-product not ({}), product isomorphic to sum of logs",
        notes.join("; ")
    ))
}

// ---------------------------------------------------------------------------
// Criterion 5

fn criterion_5() -> Outcome {
    // Every table F(a,b,c) = Ft(G(a,b), c) with G onto {0,1} and each
    // Ft(., c) a bijection.
    let mut reachable = [false; 256];
    for g in 0u32..16 {
        let gv = |a: usize, b: usize| (g >> (2 * a + b)) as usize & 1;
        if (g == 0) || (g == 15) {
            continue;
        }
        for ft in 0u32..16 {
            let fv = |t: usize, c: usize| (ft >> (2 * t + c)) as usize & 1;
            if (0..2).any(|c| fv(0, c) == fv(1, c)) {
                continue;
            }
            let mut code = 0usize;
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        code |= fv(gv(a, b), c) << (4 * a + 2 * b + c);
                    }
                }
            }
            reachable[code] = true;
        }
    }
    let mut count = 0;
    for code in 0..256usize {
        let table = (0..8).map(|i| (code >> i) & 1).collect();
        let tf = TableFunction::new(vec![2, 2, 2], 2, table).unwrap();
        let got = decompose(&tf).unwrap().decomposable;
        ensure(got == reachable[code], || {
            format!(
                "function {code:#010b}: decomposer {got}, brute force {}",
                reachable[code]
            )
        })?;
        count += got as usize;
    }
    Ok(format!(
        "256 functions agree with brute force, {count} decomposable"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 6

fn collapsing_shifts(q: u32, f: impl Fn(u32, u32, u32) -> u32) -> Vec<Vec<u32>> {
    let mut found = Vec::new();
    for code in 0..(q as u64).pow(q) {
        let a: Vec<u32> = (0..q)
            .map(|i| ((code / (q as u64).pow(q - 1 - i)) % q as u64) as u32)
            .collect();
        let ok = (0..q).all(|c| (0..q).all(|b| f(a[b as usize], b, c) == f(a[0], 0, c)));
        if ok {
            found.push(a);
        }
    }
    found
}

fn criterion_6() -> Outcome {
    for q in [3u32, 5] {
        let f = field(q);
        let sp = residual_dependence(&builtin(Builtin::SumProduct3, f).unwrap()).unwrap();
        ensure(sp.mode == ResidualMode::Exhaustive, || {
            format!("q={q}: expected exhaustive mode")
        })?;
        ensure(sp.candidates_checked == (q as u64).pow(q), || {
            format!("q={q}: checked {}", sp.candidates_checked)
        })?;
        ensure(!sp.exists, || {
            format!("q={q}: library found a collapsing a(b) for a+bc")
        })?;
        ensure(
            collapsing_shifts(q, |a, b, c| (a + b * c) % q).is_empty(),
            || format!("q={q}: brute force found one"),
        )?;

        let s = residual_dependence(&builtin(Builtin::Sum3, f).unwrap()).unwrap();
        let a = s
            .a_of_b
            .ok_or_else(|| format!("q={q}: no canceller for a+b+c"))?;
        let neg: Vec<usize> = (0..q).map(|b| ((q - b) % q) as usize).collect();
        ensure(a.table() == neg.as_slice(), || {
            format!("q={q}: canceller {:?} is not -b", a.table())
        })?;
        let brute = collapsing_shifts(q, |a, b, c| (a + b + c) % q);
        let neg32: Vec<u32> = neg.iter().map(|&x| x as u32).collect();
        ensure(brute.first() == Some(&neg32), || {
            format!("q={q}: brute force first canceller {:?}", brute.first())
        })?;
    }
    Ok("no a(b) collapses a+bc for q in {3,5} (3^3 and 5^5 shifts); a(b)=-b cancels a+b+c".into())
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8

/// `H(g(S1) + S1 S2 | S2)` with `S1` uniform nonzero and `S2` uniform.
fn oracle_entropy(q: u32, g: &[u32]) -> f64 {
    let mut total = 0.0;
    for s2 in 0..q {
        let mut counts = vec![0usize; q as usize];
        for s1 in 1..q {
            counts[((g[s1 as usize] + s1 * s2) % q) as usize] += 1;
        }
        let n = (q - 1) as f64;
        total += counts
            .iter()
            .filter(|&&k| k > 0)
            .map(|&k| -(k as f64 / n) * (k as f64 / n).log2())
            .sum::<f64>();
    }
    total / q as f64
}

fn oracle_min(q: u32) -> f64 {
    // g(0) never matters under the default law of S1.
    let mut best = f64::INFINITY;
    let free = q - 1;
    for code in 0..(q as u64).pow(free) {
        let mut g = vec![0u32; q as usize];
        let mut x = code;
        for s in 1..q as usize {
            g[s] = (x % q as u64) as u32;
            x /= q as u64;
        }
        best = best.min(oracle_entropy(q, &g));
    }
    best
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    for q in [3u32, 5, 7] {
        let f = field(q);
        let (ps1, ps2) = default_states::<f64>(f);
        let rep = theorem1_check(f, ps1, ps2).unwrap();
        let (lower, upper) = entropy_bracket(q);
        let oracle = oracle_min(q);
        ensure((rep.h_min_bits - oracle).abs() < 1e-9, || {
            format!("q={q}: library {} vs oracle {oracle}", rep.h_min_bits)
        })?;
        ensure(oracle >= lower - 1e-9, || {
            format!("q={q}: H_min {oracle} below {lower}")
        })?;
        let sq: Vec<u32> = (0..q).map(|s| s * s % q).collect();
        let quad = oracle_entropy(q, &sq);
        ensure((rep.quadratic_bits - quad).abs() < 1e-9, || {
            format!("q={q}: quadratic {} vs oracle {quad}", rep.quadratic_bits)
        })?;
        ensure(quad <= upper + 1e-9, || {
            format!("q={q}: quadratic {quad} above {upper}")
        })?;
        ensure(rep.lower_bound_holds && rep.quadratic_within_upper, || {
            format!("q={q}: report flags false")
        })?;
        notes.push(format!("q={q} H_min={oracle:.4} quad={quad:.4}"));
    }
    let f3 = oracle_entropy(3, &[0, 1, 1]);
    let f5 = oracle_entropy(5, &[0, 1, 4, 4, 1]);
    ensure(
        (f3 - 2.0 / 3.0).abs() < 1e-9 && (f5 - 1.4).abs() < 1e-9,
        || format!("quadratic values {f3}, {f5}"),
    )?;
    Ok(notes.join(", "))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    for q in [2u32, 3, 5, 7] {
        let f = field(q);
        let (ps1, ps2) = default_states::<f64>(f);
        let rep = theorem1_check(f, ps1, ps2).unwrap();
        let gain = (q as f64).log2() - oracle_min(q);
        ensure((rep.capacity_lb_bits - gain).abs() < 1e-9, || {
            format!("q={q}: {} vs oracle {gain}", rep.capacity_lb_bits)
        })?;
        ensure(gain <= 1.0 + 1e-9 && rep.corollary_holds, || {
            format!("q={q}: log q - H_min = {gain}")
        })?;
        notes.push(format!("q={q}: {gain:.4}"));
    }
    Ok(format!("log2 q - H_min(1) <= 1 bit ({})", notes.join(", ")))
}

// ---------------------------------------------------------------------------
// Criterion 9

/// `I(U; Y, S2) - I(U; S1)` for `Y = X + S1 + S2`, by direct enumeration.
fn oracle_gp(
    q: usize,
    ps1: &[f64],
    ps2: &[f64],
    rows: &[Vec<f64>],
    x: &[usize],
    u_size: usize,
) -> f64 {
    let mut us1: HashMap<(usize, usize), f64> = HashMap::new();
    let mut u: HashMap<usize, f64> = HashMap::new();
    let mut s1m: HashMap<usize, f64> = HashMap::new();
    let mut uys: HashMap<(usize, usize, usize), f64> = HashMap::new();
    let mut ys: HashMap<(usize, usize), f64> = HashMap::new();
    for s1 in 0..q {
        for uu in 0..u_size {
            let p = ps1[s1] * rows[s1][uu];
            *us1.entry((uu, s1)).or_default() += p;
            *u.entry(uu).or_default() += p;
            *s1m.entry(s1).or_default() += p;
            for s2 in 0..q {
                let pp = p * ps2[s2];
                let y = (x[uu * q + s1] + s1 + s2) % q;
                *uys.entry((uu, y, s2)).or_default() += pp;
                *ys.entry((y, s2)).or_default() += pp;
            }
        }
    }
    let (hu, hs1, hus1) = (
        entropy_of_counts(&u),
        entropy_of_counts(&s1m),
        entropy_of_counts(&us1),
    );
    let (hys, huys) = (entropy_of_counts(&ys), entropy_of_counts(&uys));
    (hu + hys - huys) - (hu + hs1 - hus1)
}

fn criterion_9() -> Outcome {
    let mut notes = Vec::new();
    for q in [2u32, 3, 5] {
        let f = field(q);
        let (ps1, ps2) = default_states::<f64>(f);
        let ch = TwoStateChannel::sum(f, ps1.clone(), ps2.clone()).unwrap();
        let res = gp_search(&ch, &GpSearchConfig::new(2, 11)).unwrap();
        let target = (q as f64).log2();
        ensure(res.lower_bound_bits >= target - 1e-6, || {
            format!("q={q}: reached {} of {target}", res.lower_bound_bits)
        })?;
        ensure(res.max_identity_gap <= 1e-9, || {
            format!("q={q}: identity gap {}", res.max_identity_gap)
        })?;
        ensure(res.evaluation.identity_gap <= 1e-9, || {
            format!("q={q}: final gap {}", res.evaluation.identity_gap)
        })?;
        let rows: Vec<Vec<f64>> = res
            .design
            .pu_given_s1
            .iter()
            .map(|p| p.probs().to_vec())
            .collect();
        let oracle = oracle_gp(
            q as usize,
            ps1.probs(),
            ps2.probs(),
            &rows,
            res.design.x_of_u_s1.table(),
            res.design.u_size,
        );
        ensure((oracle - res.lower_bound_bits).abs() < 1e-9, || {
            format!("q={q}: oracle {oracle} vs {}", res.lower_bound_bits)
        })?;
        notes.push(format!(
            "q={q}: {:.9} bits, max gap {:.1e} over {} designs",
            res.lower_bound_bits, res.max_identity_gap, res.evaluations
        ));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// Criterion 10

fn criterion_10() -> Outcome {
    let f2 = field(2);
    let pz = Pmf::bernoulli(0.05).unwrap();
    ensure((h(pz.probs()) - 0.286).abs() < 5e-4, || {
        "H(Z) is not 0.286".into()
    })?;
    let cfg = SimConfig::new(10_000, 1);
    let good = km_simulate(
        &CodeDraw::Fixed(LinearCode::random(f2, 24, 12, 1).unwrap()),
        &pz,
        &cfg,
    )
    .unwrap();
    let bad = km_simulate(
        &CodeDraw::Fixed(LinearCode::random(f2, 24, 4, 1).unwrap()),
        &pz,
        &cfg,
    )
    .unwrap();
    ensure(good.block_error_rate() < 0.1, || {
        format!("rate 0.5: error rate {}", good.block_error_rate())
    })?;
    ensure(bad.block_error_rate() > 0.5, || {
        format!("rate 0.167: error rate {}", bad.block_error_rate())
    })?;

    let f3 = field(3);
    let pa = Pmf::<f64>::uniform(3).unwrap();
    let pc = Pmf::new(vec![0.85, 0.15, 0.0]).unwrap();
    let draw = CodeDraw::PerTrial {
        field: f3,
        n: 12,
        m: 6,
    };
    let src = SumProductSource::new(
        f3,
        pa.clone(),
        Pmf::uniform_on(3, &[1, 2]).unwrap(),
        pc.clone(),
    )
    .unwrap();
    let base = SumProductSource::new(f3, pa, Pmf::point(3, 1).unwrap(), pc).unwrap();
    let central = km_sum_product(&draw, &src, Variant::CentralizedB, &cfg).unwrap();
    let baseline = km_sum_product(&draw, &base, Variant::CentralizedB, &cfg).unwrap();
    let diff = (central.block_error_rate() - baseline.block_error_rate()).abs();
    ensure(diff <= 0.02, || {
        format!(
            "centralized {} vs B=1 baseline {}",
            central.block_error_rate(),
            baseline.block_error_rate()
        )
    })?;
    Ok(format!(
        "q=2 n=24: rate 0.5 -> {:.4}, rate 0.167 -> {:.4}; q=3 n=12 m=6: centralized {:.4} vs B=1 {:.4}",
        good.block_error_rate(),
        bad.block_error_rate(),
        central.block_error_rate(),
        baseline.block_error_rate()
    ))
}

// ---------------------------------------------------------------------------
// Criterion 11

fn run_cli(jobs: usize, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sumprod"))
        .arg("--jobs")
        .arg(jobs.to_string())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn payload(stdout: &[u8], report: bool) -> Result<String, String> {
    if report {
        return String::from_utf8(stdout.to_vec()).map_err(|e| e.to_string());
    }
    let doc: Value = serde_json::from_slice(stdout).map_err(|e| e.to_string())?;
    serde_json::to_string(&doc["results"]).map_err(|e| e.to_string())
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs_dir: &Path = dir.path();
    for (name, q) in [("m5.json", "5"), ("m3.json", "3")] {
        let out = runs_dir.join(name);
        run_cli(1, &["--out", out.to_str().unwrap(), "minent", "--q", q])?;
    }
    let table = data("sum_product3_q3.table");
    let design = data("precoding_design_q3.json");
    let runs_arg = runs_dir.to_string_lossy().into_owned();
    let cases: Vec<Vec<&str>> = vec![
        vec!["field-check", "--q", "11"],
        vec!["km-bounds", "--q", "5"],
        vec![
            "km-sim", "--n", "16", "--m", "8", "--trials", "2000", "--seed", "5",
        ],
        vec![
            "km-sim",
            "--q",
            "3",
            "--n",
            "10",
            "--m",
            "5",
            "--code",
            "per-trial",
            "--variant",
            "decentralized",
            "--pc",
            "0.8,0.2,0",
            "--trials",
            "300",
        ],
        vec!["decompose", &table],
        vec!["decompose", "--builtin", "product3-nonzero", "--q", "5"],
        vec!["minent", "--q", "7"],
        vec![
            "minent", "--q", "3", "--n", "2", "--method", "anneal", "--budget", "200000", "--seed",
            "9",
        ],
        vec![
            "gp-eval",
            "--q",
            "3",
            "--channel",
            "sum-product",
            "--search",
            "--restarts",
            "3",
            "--seed",
            "4",
        ],
        vec![
            "gp-eval",
            "--q",
            "3",
            "--channel",
            "sum",
            "--design",
            &design,
        ],
        vec!["report", &runs_arg],
    ];
    let mut commands = Vec::new();
    for args in &cases {
        let report = args[0] == "report";
        let a = payload(&run_cli(1, args)?, report)?;
        let b = payload(&run_cli(1, args)?, report)?;
        let c = payload(&run_cli(8, args)?, report)?;
        ensure(a == b, || format!("{args:?}: two runs differ"))?;
        ensure(a == c, || format!("{args:?}: --jobs 1 and --jobs 8 differ"))?;
        if !commands.contains(&args[0]) {
            commands.push(args[0]);
        }
    }
    Ok(format!(
        "{} runs over {} subcommands, identical payloads",
        cases.len() * 3,
        commands.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("rate identity H(X|Y) = H(B) + H(C)", criterion_1),
        ("rate sandwich and equality iff H(B) = 0", criterion_2),
        ("distinct lines meet in at most one point", criterion_3),
        ("decomposability of sum, sum-product, product", criterion_4),
        (
            "decomposer matches brute force on 256 functions",
            criterion_5,
        ),
        ("no residual shift for sum-product", criterion_6),
        ("single-letter entropy bracket", criterion_7),
        ("capacity gain capped at one bit", criterion_8),
        (
            "auxiliary search reaches log q on the sum channel",
            criterion_9,
        ),
        ("linear syndrome codec error rates", criterion_10),
        ("CLI output is deterministic", criterion_11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {:>2}: {name} [{detail}] ({secs:.1}s)",
                i + 1
            ),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} [{why}] ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
