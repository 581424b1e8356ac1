use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sumprod_core::analysis::{
    self, builtin, decompose, g_invertible_in_first, log_domain_check, op_properties,
    residual_dependence, Builtin,
};
use sumprod_core::channel::{
    self, entropy_bracket, gp_objective, gp_search, min_entropy_anneal, min_entropy_exhaustive,
    quadratic_entropy, AnnealConfig, GPDesign, GpSearchConfig, TwoStateChannel,
};
use sumprod_core::codec::{self, CodeDraw, LinearCode, SimConfig, SimOutcome, Variant};
use sumprod_core::field::check_axioms;
use sumprod_core::source::{self, SumProductSource};
use sumprod_core::{Error, FieldSpec, TableFunction};

use crate::dist::{biased_toward_zero, parse_dist};
use crate::error::{CliError, CliResult};
use crate::report::to_json_value;

fn field(q: u32) -> CliResult<FieldSpec> {
    Ok(FieldSpec::new(q)?)
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_table(path: &Path) -> CliResult<TableFunction> {
    read_text(path)?
        .parse::<TableFunction>()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FieldCheckArgs {
    /// Field order (must be prime).
    #[arg(long, default_value_t = 7)]
    pub q: u32,
}

pub fn field_check(a: &FieldCheckArgs) -> CliResult<Value> {
    let f = field(a.q)?;
    let r = check_axioms(f);
    if !r.passed() {
        return Err(
            Error::Invariant(format!("field axioms failed: {}", r.failures.join("; "))).into(),
        );
    }
    let mut v = to_json_value(&r);
    v["passed"] = json!(true);
    Ok(v)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KmBoundsArgs {
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    /// Law of A.
    #[arg(long, default_value = "uniform")]
    pub pa: String,
    /// Law of B; must put no mass on zero.
    #[arg(long, default_value = "uniform-nonzero")]
    pub pb: String,
    /// Law of C.
    #[arg(long, default_value = "uniform")]
    pub pc: String,
}

#[derive(Serialize)]
struct KmBoundsResults {
    upper_bound_bits: f64,
    lower_bound_bits: f64,
    bounds_coincide: bool,
    #[serde(flatten)]
    report: source::SourceReport,
    line_pairs_checked: u64,
}

pub fn km_bounds(a: &KmBoundsArgs) -> CliResult<Value> {
    let f = field(a.q)?;
    let q = f.size();
    let src = SumProductSource::new(
        f,
        parse_dist(&a.pa, q)?,
        parse_dist(&a.pb, q)?,
        parse_dist(&a.pc, q)?,
    )?;
    let report = source::analyze(src)?;
    let lines = source::line_intersection_check(f);
    Ok(to_json_value(&KmBoundsResults {
        upper_bound_bits: report.h_x_given_y,
        lower_bound_bits: report.h_z_given_y,
        bounds_coincide: (report.h_x_given_y - report.h_z_given_y).abs() < 1e-9,
        report,
        line_pairs_checked: lines.pairs_checked as u64,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Classical,
    CentralizedB,
    EncoderSideB,
    Decentralized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeArg {
    /// One parity-check matrix from the seed's matrix stream.
    Fixed,
    /// A fresh matrix for every trial.
    PerTrial,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KmSimArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    /// Block length.
    #[arg(long, default_value_t = 24)]
    pub n: usize,
    /// Syndrome length.
    #[arg(long, default_value_t = 12)]
    pub m: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = VariantArg::Classical)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = CodeArg::Fixed)]
    pub code: CodeArg,
    /// Noise law for the classical variant [default: 0.95 on zero, the rest spread evenly].
    #[arg(long)]
    pub pz: Option<String>,
    #[arg(long, default_value = "uniform")]
    pub pa: String,
    #[arg(long, default_value = "uniform-nonzero")]
    pub pb: String,
    /// Law of C for the sum-product variants [default: as --pz].
    #[arg(long)]
    pub pc: Option<String>,
    /// Comma-separated syndrome lengths to sweep instead of the single --m.
    #[arg(long, value_delimiter = ',')]
    pub sweep_m: Option<Vec<usize>>,
    /// Also write the sweep as TSV here.
    #[arg(long)]
    pub tsv: Option<PathBuf>,
    /// Cap on coset members enumerated per decode.
    #[arg(long, default_value_t = codec::DEFAULT_DECODE_CAP)]
    pub decode_cap: u64,
}

#[derive(Serialize)]
struct SimPoint {
    #[serde(flatten)]
    outcome: SimOutcome,
    block_error_rate: f64,
}

fn sim_point(o: SimOutcome) -> SimPoint {
    SimPoint {
        block_error_rate: o.block_error_rate(),
        outcome: o,
    }
}

pub fn km_sim(a: &KmSimArgs, seed: u64) -> CliResult<Value> {
    let f = field(a.q)?;
    let q = f.size();
    let default_noise = || biased_toward_zero(q, 0.95);
    let spec_or_default = |s: &Option<String>| {
        s.as_deref()
            .map(|s| parse_dist(s, q))
            .transpose()
            .map(|p| p.unwrap_or_else(default_noise))
    };
    let cfg = SimConfig {
        decode_cap: a.decode_cap,
        ..SimConfig::new(a.trials, seed)
    };
    if a.m == 0 || a.n == 0 {
        return Err(CliError::usage("--n and --m must be positive"));
    }

    let (source_entropy, runner): (
        f64,
        Box<dyn Fn(&CodeDraw) -> sumprod_core::Result<SimOutcome>>,
    ) = match a.variant {
        VariantArg::Classical => {
            let pz = spec_or_default(&a.pz)?;
            (
                pz.entropy(),
                Box::new(move |c| codec::km_simulate(c, &pz, &cfg)),
            )
        }
        v => {
            let pc = spec_or_default(&a.pc.clone().or(a.pz.clone()))?;
            let src = SumProductSource::new(f, parse_dist(&a.pa, q)?, parse_dist(&a.pb, q)?, pc)?;
            let variant = match v {
                VariantArg::CentralizedB => Variant::CentralizedB,
                VariantArg::EncoderSideB => Variant::EncoderSideB,
                _ => Variant::Decentralized,
            };
            (
                src.pc().entropy(),
                Box::new(move |c| codec::km_sum_product(c, &src, variant, &cfg)),
            )
        }
    };
    let draw = |m: usize| -> CliResult<CodeDraw> {
        Ok(match a.code {
            CodeArg::Fixed => CodeDraw::Fixed(LinearCode::random(f, a.n, m, seed)?),
            CodeArg::PerTrial => CodeDraw::PerTrial {
                field: f,
                n: a.n,
                m,
            },
        })
    };

    let ms = a.sweep_m.clone().unwrap_or_else(|| vec![a.m]);
    if ms.contains(&0) {
        return Err(CliError::usage("syndrome lengths must be positive"));
    }
    let points = ms
        .iter()
        .map(|&m| Ok(sim_point(runner(&draw(m)?)?)))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(path) = &a.tsv {
        let mut tsv = String::from("m\trate_bits\tblock_error_rate\tblock_errors\ttrials\n");
        for p in &points {
            let o = &p.outcome;
            tsv.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                o.m,
                round12(o.rate_bits),
                round12(p.block_error_rate),
                o.block_errors,
                o.trials
            ));
        }
        fs::write(path, tsv).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
    }

    let mut v = if a.sweep_m.is_some() {
        json!({ "q": a.q, "n": a.n, "points": to_json_value(&points) })
    } else {
        to_json_value(&points[0])
    };
    v["variant"] = to_json_value(&a.variant);
    v["code"] = to_json_value(&a.code);
    v["source_entropy_bits"] = to_json_value(&source_entropy);
    Ok(v)
}

fn round12(x: f64) -> String {
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    r.to_string()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecomposeArgs {
    /// Truth-table file ("k1 k2 ... -> m" header, then row-major entries).
    #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
    pub file: Option<PathBuf>,
    /// Built-in table instead of a file.
    #[arg(long, value_parser = builtin_names())]
    pub builtin: Option<String>,
    /// Field order for --builtin.
    #[arg(long, default_value_t = 3)]
    pub q: u32,
}

fn builtin_names() -> clap::builder::PossibleValuesParser {
    clap::builder::PossibleValuesParser::new(Builtin::ALL.map(Builtin::name))
}

pub fn decompose_cmd(a: &DecomposeArgs) -> CliResult<Value> {
    let (table, which) = match (&a.file, &a.builtin) {
        (Some(p), _) => (read_table(p)?, None),
        (None, Some(name)) => {
            let b: Builtin = name.parse()?;
            (builtin(b, field(a.q)?)?, Some(b))
        }
        (None, None) => return Err(CliError::usage("give a table file or --builtin")),
    };
    let mut v = json!({
        "domain": table.domain(),
        "codomain": table.codomain(),
    });
    if which.is_some() {
        v["q"] = json!(a.q);
    }
    match table.arity() {
        3 => {
            let r = decompose(&table)?;
            v["decomposable"] = json!(r.decomposable);
            v["classes"] = json!(r.classes.len());
            v["class_members"] = to_json_value(&r.classes);
            v["g_table"] = to_json_value(&r.g.as_ref().map(TableFunction::table));
            v["ftilde_table"] = to_json_value(&r.ftilde.as_ref().map(TableFunction::table));
            v["g_invertible_in_first"] = match &r.g {
                Some(g) => json!(g_invertible_in_first(g)?),
                None => Value::Null,
            };
            v["witness"] = to_json_value(&r.witness);
            v["witness_text"] = to_json_value(&r.witness.as_ref().map(|w| w.to_string()));
            v["collisions"] = json!(r.collisions);
            v["unreached"] = json!(r.unreached);
            v["residual"] = to_json_value(&residual_dependence(&table)?);
            if which == Some(Builtin::Product3Nonzero) {
                v["log_domain"] = to_json_value(&log_domain_check(field(a.q)?)?);
            }
        }
        2 => {
            v["g_invertible_in_first"] = json!(g_invertible_in_first(&table)?);
            if table.domain() == [table.codomain(), table.codomain()] {
                v["operation"] = to_json_value(&op_properties(&table)?);
            }
            if matches!(which, Some(Builtin::Mul2Nonzero)) {
                v["discrete_log"] = to_json_value(&analysis::discrete_log_table(field(a.q)?));
            }
        }
        k => {
            return Err(CliError::usage(format!(
                "expected a 2- or 3-argument table, got {k} arguments"
            )))
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Exhaustive,
    Quadratic,
    Anneal,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinentArgs {
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    /// Law of S1 (known to the encoder).
    #[arg(long, default_value = "uniform-nonzero")]
    pub ps1: String,
    /// Law of S2 (known to the decoder).
    #[arg(long, default_value = "uniform")]
    pub ps2: String,
    /// Block length.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Exhaustive)]
    pub method: MethodArg,
    /// Mutations for --method anneal, over all chains.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Independent annealing chains.
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
}

pub fn minent(a: &MinentArgs, seed: u64) -> CliResult<Value> {
    let f = field(a.q)?;
    let q = f.size();
    let (ps1, ps2) = (parse_dist(&a.ps1, q)?, parse_dist(&a.ps2, q)?);
    let ch = TwoStateChannel::sum_product(f, ps1.clone(), ps2.clone())?;
    let (lower, upper) = entropy_bracket(a.q);
    let quadratic = quadratic_entropy(&ch, a.n)?;
    let (h, best_g, trace) = match a.method {
        MethodArg::Exhaustive => {
            if a.n != 1 {
                return Err(CliError::usage(
                    "--method exhaustive is single-letter; use --n 1",
                ));
            }
            let r = min_entropy_exhaustive(&ch)?;
            (r.best_entropy_per_symbol, Some(r.best_g), r.trace)
        }
        MethodArg::Quadratic => (quadratic, None, Vec::new()),
        MethodArg::Anneal => {
            let cfg = AnnealConfig {
                chains: a.chains,
                ..AnnealConfig::new(a.n, a.budget, seed)
            };
            let r = min_entropy_anneal(&ch, &cfg)?;
            (r.best_entropy_per_symbol, Some(r.best_g), r.trace)
        }
    };
    let capacity_lb = channel::capacity_from_entropy(a.q, h);
    Ok(json!({
        "q": a.q,
        "n": a.n,
        "pS1": to_json_value(&ps1.probs()),
        "pS2": to_json_value(&ps2.probs()),
        "method": to_json_value(&a.method),
        "H_min_bits": to_json_value(&h),
        "best_g_table": to_json_value(&best_g.as_ref().map(TableFunction::table)),
        "quadratic_bits": to_json_value(&quadratic),
        "lower_bound_bits": to_json_value(&lower),
        "upper_bound_bits": to_json_value(&upper),
        "capacity_lb_bits": to_json_value(&capacity_lb),
        "corollary_cap_bits": 1.0,
        "lower_bound_holds": h >= lower - 1e-9,
        "quadratic_within_upper": quadratic <= upper + 1e-9,
        "corollary_holds": capacity_lb <= 1.0 + 1e-9,
        "trace": to_json_value(&trace),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelArg {
    /// Y = X + S1 + S2
    Sum,
    /// Y = X + S1 S2
    SumProduct,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GpEvalArgs {
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    #[arg(long, value_enum, default_value_t = ChannelArg::SumProduct, conflicts_with = "channel_table")]
    pub channel: ChannelArg,
    /// Channel truth table "q q q -> q" over (x, s1, s2), instead of --channel.
    #[arg(long)]
    pub channel_table: Option<PathBuf>,
    #[arg(long, default_value = "uniform-nonzero")]
    pub ps1: String,
    #[arg(long, default_value = "uniform")]
    pub ps2: String,
    /// JSON design {u_size, pu_given_s1, x_of_u_s1} to evaluate.
    #[arg(long, required_unless_present = "search", conflicts_with = "search")]
    pub design: Option<PathBuf>,
    /// Search for a good design instead of evaluating one.
    #[arg(long)]
    pub search: bool,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Auxiliary alphabet size [default: q^2].
    #[arg(long)]
    pub u_size: Option<usize>,
}

pub fn gp_eval(a: &GpEvalArgs, seed: u64) -> CliResult<Value> {
    let f = field(a.q)?;
    let q = f.size();
    let (ps1, ps2) = (parse_dist(&a.ps1, q)?, parse_dist(&a.ps2, q)?);
    let ch = match (&a.channel_table, a.channel) {
        (Some(p), _) => TwoStateChannel::new(f, read_table(p)?, ps1, ps2)?,
        (None, ChannelArg::Sum) => TwoStateChannel::sum(f, ps1, ps2)?,
        (None, ChannelArg::SumProduct) => TwoStateChannel::sum_product(f, ps1, ps2)?,
    };
    let decomposable_cap = ch.decomposable_capacity_bits()?;
    if a.search {
        let cfg = GpSearchConfig {
            u_size: a.u_size,
            ..GpSearchConfig::new(a.restarts, seed)
        };
        let r = gp_search(&ch, &cfg)?;
        let mut v = json!({ "q": a.q, "mode": "search" });
        v["capacity_lower_bound_bits"] = to_json_value(&r.lower_bound_bits);
        v["conditional_form_bits"] = to_json_value(&r.evaluation.conditional_form_bits);
        v["max_identity_gap"] = to_json_value(&r.max_identity_gap);
        v["evaluations"] = json!(r.evaluations);
        v["u_size"] = json!(r.u_size);
        v["restarts"] = json!(r.restarts);
        v["decomposable_capacity_bits"] = to_json_value(&decomposable_cap);
        v["design"] = to_json_value(&r.design);
        Ok(v)
    } else {
        let path = a
            .design
            .as_ref()
            .expect("clap requires --design without --search");
        let text = read_text(path)?;
        let d: GPDesign<f64> = serde_json::from_str(&text).map_err(|e| CliError::Json {
            path: path.clone(),
            source: e,
        })?;
        let e = gp_objective(&ch, &d)?;
        let mut v = json!({ "q": a.q, "mode": "evaluate" });
        v["objective_bits"] = to_json_value(&e.objective_bits);
        v["conditional_form_bits"] = to_json_value(&e.conditional_form_bits);
        v["identity_gap"] = to_json_value(&e.identity_gap);
        v["I_U_YS2_bits"] = to_json_value(&e.i_u_y_s2);
        v["I_U_S1_bits"] = to_json_value(&e.i_u_s1);
        v["decomposable_capacity_bits"] = to_json_value(&decomposable_cap);
        Ok(v)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Directory of JSON run reports.
    pub dir: PathBuf,
}
