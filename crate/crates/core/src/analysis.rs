//! Structure of functions on finite alphabets: decomposability through an
//! intermediate variable, cancellation by a shift `a(b)`, operation laws,
//! and discrete logarithms.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::table::TableFunction;

/// Largest candidate space `|A|^|B|` that [`residual_dependence`] scans
/// one candidate at a time.
pub const RESIDUAL_EXHAUSTIVE_LIMIT: u64 = 6u64.pow(6);

/// Section of a 3-ary function at `(a, b)`: the row `c -> F(a, b, c)`.
fn section(f: &TableFunction, a: usize, b: usize) -> &[usize] {
    let d = f.domain();
    let start = (a * d[1] + b) * d[2];
    &f.table()[start..start + d[2]]
}

/// Groups the pairs `(a, b)` by equal sections. Classes are numbered in
/// order of first appearance in row-major `(a, b)` order; the result maps
/// each flattened pair `a * |B| + b` to its class.
pub fn section_classes(f: &TableFunction) -> Result<Vec<usize>> {
    f.expect_arity(3)?;
    let d = f.domain();
    let mut seen: HashMap<&[usize], usize> = HashMap::new();
    let mut class = Vec::with_capacity(d[0] * d[1]);
    for a in 0..d[0] {
        for b in 0..d[1] {
            let next = seen.len();
            class.push(*seen.entry(section(f, a, b)).or_insert(next));
        }
    }
    Ok(class)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecompositionWitness {
    /// Two classes whose sections agree at `c`.
    Collision {
        c: usize,
        classes: (usize, usize),
        pairs: ((usize, usize), (usize, usize)),
        value: usize,
    },
    /// No class reaches `value` at `c`.
    Unreached { c: usize, value: usize },
}

impl fmt::Display for DecompositionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionWitness::Collision {
                c,
                pairs: ((a1, b1), (a2, b2)),
                value,
                ..
            } => {
                write!(
                    f,
                    "F({a1},{b1},{c}) = F({a2},{b2},{c}) = {value} although the sections differ"
                )
            }
            DecompositionWitness::Unreached { c, value } => {
                write!(f, "no (a,b) gives F(a,b,{c}) = {value}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionResult {
    pub decomposable: bool,
    /// Members `(a, b)` of each class.
    pub classes: Vec<Vec<(usize, usize)>>,
    /// `(a, b) -> class`, present on success.
    pub g: Option<TableFunction>,
    /// `(class, c) -> F`, present on success.
    pub ftilde: Option<TableFunction>,
    pub witness: Option<DecompositionWitness>,
    /// Over all `c`, classes sharing a value with an earlier class.
    pub collisions: usize,
    /// Over all `c`, codomain values no class reaches.
    pub unreached: usize,
}

/// Decides whether `F(a, b, c) = F~(G(a, b), c)` with every `F~(., c)` a
/// bijection onto the codomain. `G` is the canonical map to section
/// classes, so `F~` is forced and only its bijectivity needs checking.
pub fn decompose(f: &TableFunction) -> Result<DecompositionResult> {
    let class_of = section_classes(f)?;
    let d = f.domain();
    let (kb, kc, m) = (d[1], d[2], f.codomain());
    let n_classes = class_of.iter().max().map_or(0, |&t| t + 1);
    let mut reps = vec![usize::MAX; n_classes];
    let mut classes = vec![Vec::new(); n_classes];
    for (flat, &t) in class_of.iter().enumerate() {
        if reps[t] == usize::MAX {
            reps[t] = flat;
        }
        classes[t].push((flat / kb, flat % kb));
    }

    let mut collisions = 0;
    let mut unreached = 0;
    let mut first_unreached = None;
    for c in 0..kc {
        let mut hit = vec![false; m];
        for &rep in &reps {
            if std::mem::replace(&mut hit[section(f, rep / kb, rep % kb)[c]], true) {
                collisions += 1;
            }
        }
        for (y, _) in hit.iter().enumerate().filter(|(_, &h)| !h) {
            unreached += 1;
            first_unreached.get_or_insert(DecompositionWitness::Unreached { c, value: y });
        }
    }
    let witness = first_collision(f, &reps, kb, kc, m).or(first_unreached);

    let decomposable = collisions == 0 && unreached == 0;
    let (g, ftilde) = if decomposable {
        let g = TableFunction::new(vec![d[0], kb], n_classes, class_of)?;
        let ft = TableFunction::from_fn(vec![n_classes, kc], m, |v| {
            section(f, reps[v[0]] / kb, reps[v[0]] % kb)[v[1]]
        })?;
        (Some(g), Some(ft))
    } else {
        (None, None)
    };
    Ok(DecompositionResult {
        decomposable,
        classes,
        g,
        ftilde,
        witness: if decomposable { None } else { witness },
        collisions,
        unreached,
    })
}

fn first_collision(
    f: &TableFunction,
    reps: &[usize],
    kb: usize,
    kc: usize,
    m: usize,
) -> Option<DecompositionWitness> {
    for c in 0..kc {
        let mut owner = vec![usize::MAX; m];
        for (t, &rep) in reps.iter().enumerate() {
            let y = section(f, rep / kb, rep % kb)[c];
            if owner[y] != usize::MAX {
                let first = reps[owner[y]];
                return Some(DecompositionWitness::Collision {
                    c,
                    classes: (owner[y], t),
                    pairs: ((first / kb, first % kb), (rep / kb, rep % kb)),
                    value: y,
                });
            }
            owner[y] = t;
        }
    }
    None
}

/// Whether `a -> G(a, b)` is a bijection for every `b`.
pub fn g_invertible_in_first(g: &TableFunction) -> Result<bool> {
    g.expect_arity(2)?;
    let (ka, kb) = (g.domain()[0], g.domain()[1]);
    if ka != g.codomain() {
        return Ok(false);
    }
    Ok((0..kb).all(|b| {
        let mut hit = vec![false; ka];
        (0..ka).all(|a| !std::mem::replace(&mut hit[g.eval(&[a, b])], true))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    /// Every map `a(.)` was tried.
    Exhaustive,
    /// Decided by intersecting, over `b`, the sets of reachable sections.
    SectionIntersection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidualResult {
    pub exists: bool,
    /// `b -> a(b)`, when one exists.
    pub a_of_b: Option<TableFunction>,
    pub mode: ResidualMode,
    pub candidates_checked: u64,
    /// `(b, b')` whose reachable section sets are disjoint, ruling out
    /// every `a(.)` at once.
    pub witness: Option<(usize, usize)>,
}

/// Searches for `a(.)` making `(b, c) -> F(a(b), b, c)` independent of `b`.
/// Candidates are ordered lexicographically with `a(0)` most significant
/// and the first success is returned.
pub fn residual_dependence(f: &TableFunction) -> Result<ResidualResult> {
    f.expect_arity(3)?;
    let d = f.domain();
    let (ka, kb) = (d[0], d[1]);
    let space = (ka as u64).checked_pow(kb as u32).unwrap_or(u64::MAX);
    let witness = disjoint_pair(f);

    if space <= RESIDUAL_EXHAUSTIVE_LIMIT {
        let decode = |idx: u64| -> Vec<usize> {
            let mut a = vec![0; kb];
            let mut rem = idx;
            for slot in a.iter_mut().rev() {
                *slot = (rem % ka as u64) as usize;
                rem /= ka as u64;
            }
            a
        };
        let found = (0..space).into_par_iter().find_first(|&idx| {
            let a = decode(idx);
            let first = section(f, a[0], 0);
            (1..kb).all(|b| section(f, a[b], b) == first)
        });
        let a_of_b = found
            .map(|idx| TableFunction::new(vec![kb], ka, decode(idx)))
            .transpose()?;
        let candidates_checked = found.map_or(space, |i| i + 1);
        return Ok(ResidualResult {
            exists: a_of_b.is_some(),
            a_of_b,
            mode: ResidualMode::Exhaustive,
            candidates_checked,
            witness: if found.is_some() { None } else { witness },
        });
    }

    // Target sections reachable at b = 0, tried in order of a.
    let mut checked = 0u64;
    for a0 in 0..ka {
        let target = section(f, a0, 0);
        let mut choice = vec![a0];
        for b in 1..kb {
            checked += ka as u64;
            match (0..ka).find(|&a| section(f, a, b) == target) {
                Some(a) => choice.push(a),
                None => break,
            }
        }
        if choice.len() == kb {
            return Ok(ResidualResult {
                exists: true,
                a_of_b: Some(TableFunction::new(vec![kb], ka, choice)?),
                mode: ResidualMode::SectionIntersection,
                candidates_checked: checked,
                witness: None,
            });
        }
    }
    Ok(ResidualResult {
        exists: false,
        a_of_b: None,
        mode: ResidualMode::SectionIntersection,
        candidates_checked: checked,
        witness,
    })
}

fn disjoint_pair(f: &TableFunction) -> Option<(usize, usize)> {
    let d = f.domain();
    let sets: Vec<Vec<&[usize]>> = (0..d[1])
        .map(|b| {
            let mut s: Vec<&[usize]> = (0..d[0]).map(|a| section(f, a, b)).collect();
            s.sort();
            s.dedup();
            s
        })
        .collect();
    for b1 in 0..d[1] {
        for b2 in b1 + 1..d[1] {
            if sets[b1].iter().all(|s| sets[b2].binary_search(s).is_err()) {
                return Some((b1, b2));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpProperties {
    pub commutative: bool,
    pub associative: bool,
}

/// Exhaustive commutativity and associativity of a binary operation on a
/// `k`-element set.
pub fn op_properties(op: &TableFunction) -> Result<OpProperties> {
    op.expect_arity(2)?;
    let k = op.codomain();
    if op.domain() != [k, k] {
        return Err(Error::invalid("operation must map k x k to k"));
    }
    let e = |a: usize, b: usize| op.eval(&[a, b]);
    let commutative = (0..k).all(|a| (a..k).all(|b| e(a, b) == e(b, a)));
    let associative =
        (0..k).all(|a| (0..k).all(|b| (0..k).all(|c| e(e(a, b), c) == e(a, e(b, c)))));
    Ok(OpProperties {
        commutative,
        associative,
    })
}

/// Logarithms to the base of the smallest generator of `F_q^*`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscreteLog {
    pub q: u32,
    pub generator: u32,
    /// `log[x - 1]` for `x` in `1..q`.
    pub log: Vec<u32>,
}

impl DiscreteLog {
    pub fn new(field: FieldSpec) -> Self {
        let q = field.order();
        let g = field.generator();
        let mut log = vec![0; q as usize - 1];
        let mut x = 1;
        for k in 0..q - 1 {
            log[x as usize - 1] = k;
            x = field.mul(x, g);
        }
        Self {
            q,
            generator: g,
            log,
        }
    }

    pub fn log_of(&self, x: u32) -> Option<u32> {
        (x != 0 && x < self.q).then(|| self.log[x as usize - 1])
    }

    pub fn exp(&self, k: u32) -> u32 {
        FieldSpec::new(self.q)
            .expect("valid order")
            .pow(self.generator, k as u64)
    }
}

pub fn discrete_log_table(field: FieldSpec) -> DiscreteLog {
    DiscreteLog::new(field)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogDomainReport {
    pub q: u32,
    pub generator: u32,
    pub classes: usize,
    /// Under `t -> log` of the class product, `G` becomes addition of logs
    /// mod `q - 1` and `F~` becomes `(t, c) -> t + log c`.
    pub isomorphic: bool,
}

/// Decomposes `a x b x c` on `F_q \ {0}` and checks that logarithms carry
/// the result onto modular addition.
pub fn log_domain_check(field: FieldSpec) -> Result<LogDomainReport> {
    let dl = DiscreteLog::new(field);
    let k = field.size() - 1;
    let f = builtin(Builtin::Product3Nonzero, field)?;
    let r = decompose(&f)?;
    let (Some(g), Some(ft)) = (&r.g, &r.ftilde) else {
        return Ok(LogDomainReport {
            q: field.order(),
            generator: dl.generator,
            classes: r.classes.len(),
            isomorphic: false,
        });
    };
    // Index i stands for the element i + 1.
    let lg = |i: usize| dl.log[i] as usize;
    let phi: Vec<usize> = r
        .classes
        .iter()
        .map(|members| {
            let (a, b) = members[0];
            (lg(a) + lg(b)) % k
        })
        .collect();
    let mut hit = vec![false; k];
    let bijective = phi.len() == k && phi.iter().all(|&p| !std::mem::replace(&mut hit[p], true));
    let g_ok = (0..k).all(|a| (0..k).all(|b| phi[g.eval(&[a, b])] == (lg(a) + lg(b)) % k));
    let f_ok =
        (0..r.classes.len()).all(|t| (0..k).all(|c| lg(ft.eval(&[t, c])) == (phi[t] + lg(c)) % k));
    Ok(LogDomainReport {
        q: field.order(),
        generator: dl.generator,
        classes: r.classes.len(),
        isomorphic: bijective && g_ok && f_ok,
    })
}

/// Built-in tables over `F_q`. The `-nonzero` variants live on
/// `F_q \ {0}` with index `i` standing for the element `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `a + b + c`
    Sum3,
    /// `a + b c`
    SumProduct3,
    /// `a b c` on nonzero elements
    Product3Nonzero,
    /// `a + b`
    Add2,
    /// `a b`
    Mul2,
    /// `a b` on nonzero elements
    Mul2Nonzero,
    /// `a + 2b`
    Affine2,
}

impl Builtin {
    pub const ALL: [Builtin; 7] = [
        Builtin::Sum3,
        Builtin::SumProduct3,
        Builtin::Product3Nonzero,
        Builtin::Add2,
        Builtin::Mul2,
        Builtin::Mul2Nonzero,
        Builtin::Affine2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sum3 => "sum3",
            Builtin::SumProduct3 => "sum-product3",
            Builtin::Product3Nonzero => "product3-nonzero",
            Builtin::Add2 => "add2",
            Builtin::Mul2 => "mul2",
            Builtin::Mul2Nonzero => "mul2-nonzero",
            Builtin::Affine2 => "affine2",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown builtin '{s}'")))
    }
}

pub fn builtin(which: Builtin, field: FieldSpec) -> Result<TableFunction> {
    let q = field.size();
    let u = |x: usize| x as u32;
    let t = match which {
        Builtin::Sum3 => TableFunction::from_fn(vec![q; 3], q, |v| {
            field.add(field.add(u(v[0]), u(v[1])), u(v[2])) as usize
        }),
        Builtin::SumProduct3 => TableFunction::from_fn(vec![q; 3], q, |v| {
            field.add(u(v[0]), field.mul(u(v[1]), u(v[2]))) as usize
        }),
        Builtin::Product3Nonzero => TableFunction::from_fn(vec![q - 1; 3], q - 1, |v| {
            field.mul(field.mul(u(v[0]) + 1, u(v[1]) + 1), u(v[2]) + 1) as usize - 1
        }),
        Builtin::Add2 => {
            TableFunction::from_fn(vec![q; 2], q, |v| field.add(u(v[0]), u(v[1])) as usize)
        }
        Builtin::Mul2 => {
            TableFunction::from_fn(vec![q; 2], q, |v| field.mul(u(v[0]), u(v[1])) as usize)
        }
        Builtin::Mul2Nonzero => TableFunction::from_fn(vec![q - 1; 2], q - 1, |v| {
            field.mul(u(v[0]) + 1, u(v[1]) + 1) as usize - 1
        }),
        Builtin::Affine2 => TableFunction::from_fn(vec![q; 2], q, |v| {
            field.add(u(v[0]), field.mul(2 % field.order(), u(v[1]))) as usize
        }),
    };
    Ok(t?)
}
