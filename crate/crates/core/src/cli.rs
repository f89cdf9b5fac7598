//! Run configuration, pipeline orchestration and rendering for the command
//! line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutplane::{check_integrality, enumerate_max_rank_integral, CutplaneError, GateOptions};
use crate::discretize::{label_base, Family, ModelSpec, Restriction, SpecError};
use crate::matrices::{build, MatrixError};
use crate::molp::{build_ddcp, oracle_undominated, solve_undominated, IneqVector, MolpError};
use crate::rat::{ParseRatError, Rat};
use crate::reduce::eliminate_redundant;
use crate::sampler::{probabilistic_frontier, SamplerConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default `y`-dimension limit of the brute-force oracle.
pub const ORACLE_LIMIT: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Benson,
    Cutplane,
    Probabilistic,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub solver: Solver,
    pub sampler: SamplerConfig,
    /// Standard deviation of the integrality-check objectives (cutplane).
    pub sigma: f64,
    /// Lets the cutplane solver run on dynamic families.
    #[serde(default)]
    pub allow_dynamic: bool,
    #[serde(default)]
    pub out: Option<String>,
    pub format: Format,
    #[serde(default)]
    pub marginal: bool,
}

impl RunConfig {
    pub fn new(model: ModelSpec, solver: Solver) -> RunConfig {
        RunConfig {
            model,
            solver,
            sampler: SamplerConfig::default(),
            sigma: 100.0,
            allow_dynamic: false,
            out: None,
            format: Format::Json,
            marginal: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
    pub zdim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub patches: usize,
    pub dims: Dims,
    pub raw: Vec<Vec<Rat>>,
    pub reduced: Vec<Vec<Rat>>,
    pub rendered: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid model: {0}")]
    Spec(#[from] SpecError),
    #[error("invalid model: {0}")]
    Matrix(#[from] MatrixError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Gate(#[from] CutplaneError),
    #[error(transparent)]
    Oracle(#[from] MolpError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ParseRatError> for RunError {
    fn from(e: ParseRatError) -> RunError {
        RunError::Input(format!("not a rational literal: {:?}", e.0))
    }
}

impl RunError {
    /// 2 for validation errors, 3 for solver refusals, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Spec(_) | RunError::Matrix(_) | RunError::Input(_) => 2,
            RunError::Gate(_) | RunError::Oracle(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Discretizes, builds the dual polyhedron, runs the selected solver and
/// reduces the output.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    let total = Instant::now();
    let mut timings = BTreeMap::new();
    config.model.validate()?;
    let t = Instant::now();
    let model = build(&config.model)?;
    timings.insert("discretize".to_string(), ms(t));
    let t = Instant::now();
    let poly = build_ddcp(&model);
    timings.insert("ddcp".to_string(), ms(t));
    let t = Instant::now();
    let mut seed = None;
    let raw: Vec<IneqVector> = match config.solver {
        Solver::Benson => solve_undominated(&poly),
        Solver::Cutplane => {
            seed = Some(config.sampler.seed);
            let report = check_integrality(&poly, config.sampler.k, config.sigma, config.sampler.seed);
            let gate = GateOptions {
                allow_dynamic: config.allow_dynamic,
            };
            enumerate_max_rank_integral(&poly, &report, gate)?
        }
        Solver::Probabilistic => {
            seed = Some(config.sampler.seed);
            probabilistic_frontier(&poly, &config.sampler).raw
        }
        Solver::Oracle => oracle_undominated(&poly, ORACLE_LIMIT)?.vectors,
    };
    timings.insert("solve".to_string(), ms(t));
    let t = Instant::now();
    let reduced = eliminate_redundant(&raw).ys();
    timings.insert("reduce".to_string(), ms(t));
    let rendered = reduced
        .iter()
        .map(|y| {
            if config.marginal {
                render_marginal(y, &model.row_labels, config.model.d, first_period(config.model.family))
            } else {
                render_inequality(y, &model.row_labels)
            }
        })
        .collect();
    timings.insert("total".to_string(), ms(total));
    Ok(RunReport {
        config: config.clone(),
        patches: model.patches.len(),
        dims: Dims {
            rows: model.n_rows,
            cols: model.n_cols(),
            zdim: poly.n_z,
        },
        raw: raw.into_iter().map(|v| v.y).collect(),
        reduced,
        rendered,
        timings_ms: timings,
        seed,
        version: VERSION.to_string(),
    })
}

fn term(labels: &[usize]) -> String {
    let inner: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    format!("p[{}]", inner.join(","))
}

fn side(terms: &[(Rat, String)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    terms
        .iter()
        .map(|(c, t)| if c.is_one() { t.clone() } else { format!("{c}*{t}") })
        .collect::<Vec<_>>()
        .join("+")
}

/// `yᵀp ≤ 0` written with positive coefficients on both sides.
pub fn render_inequality(y: &[Rat], labels: &[Vec<usize>]) -> String {
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for (c, l) in y.iter().zip(labels) {
        if c.is_positive() {
            lhs.push((c.clone(), term(l)));
        } else if c.is_negative() {
            rhs.push((-c, term(l)));
        }
    }
    format!("{} ≤ {}", side(&lhs), side(&rhs))
}

fn label_set(set: &[usize]) -> String {
    if set.len() == 1 {
        format!("={}", set[0])
    } else {
        let inner: Vec<String> = set.iter().map(|l| l.to_string()).collect();
        format!("∈{{{}}}", inner.join(","))
    }
}

/// Period number of the first outcome coordinate: 0 when the outcome
/// includes the initial choice.
pub fn first_period(family: Family) -> usize {
    match family {
        Family::DynUncondOneLag => 0,
        _ => 1,
    }
}

/// Indicator of `{Y_s ∈ set}` over the outcomes.
fn marginal_indicator(labels: &[Vec<usize>], s: usize, set: &[usize]) -> Vec<i64> {
    labels.iter().map(|l| i64::from(set.contains(&l[s]))).collect()
}

/// Renders `y` as a comparison of marginal probabilities when it has the
/// form `𝟙{Y_s ∈ S} − 𝟙{Y_t ∈ S}`, or as an event bounded by a marginal
/// when it is `𝟙_E − 𝟙{Y_s ∈ S}` for a set of outcomes `E`. Falls back to
/// [`render_inequality`].
pub fn render_marginal(y: &[Rat], labels: &[Vec<usize>], d: usize, first: usize) -> String {
    let base = label_base(d);
    let t = labels.first().map_or(0, |l| l.len());
    let Some(yi): Option<Vec<i64>> = y
        .iter()
        .map(|c| c.is_integer().then(|| c.as_small().map(|(n, _)| n)).flatten())
        .collect()
    else {
        return render_inequality(y, labels);
    };
    let mut subsets: Vec<Vec<usize>> = (1u32..(1u32 << d) - 1)
        .map(|m| (0..d).filter(|&a| m >> a & 1 == 1).map(|a| a + base).collect())
        .collect();
    subsets.sort_by_key(|s| (s.len(), d == 2 && s[0] == 0, s.clone()));
    for set in &subsets {
        for s in 0..t {
            let plus = marginal_indicator(labels, s, set);
            for u in 0..t {
                if u == s {
                    continue;
                }
                let minus = marginal_indicator(labels, u, set);
                if yi.iter().zip(plus.iter().zip(&minus)).all(|(c, (a, b))| *c == a - b) {
                    return format!("P(Y{}{}) ≤ P(Y{}{})", s + first, label_set(set), u + first, label_set(set));
                }
            }
        }
    }
    let mut best: Option<(usize, String)> = None;
    for set in &subsets {
        for s in 0..t {
            let minus = marginal_indicator(labels, s, set);
            let event: Vec<i64> = yi.iter().zip(&minus).map(|(c, m)| c + m).collect();
            if event.iter().any(|e| *e != 0 && *e != 1) {
                continue;
            }
            let size = event.iter().filter(|e| **e == 1).count();
            if size == 0 || best.as_ref().is_some_and(|(b, _)| *b <= size) {
                continue;
            }
            let mut text = String::new();
            for (k, l) in labels.iter().enumerate() {
                if event[k] == 1 {
                    if !text.is_empty() {
                        text.push('+');
                    }
                    let _ = write!(text, "{}", term(l));
                }
            }
            best = Some((size, format!("{text} ≤ P(Y{}{})", s + first, label_set(set))));
        }
    }
    best.map(|(_, s)| s).unwrap_or_else(|| render_inequality(y, labels))
}

/// Parses `"r1c1,r1c2;r2c1,…"` into rows of rationals.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<Rat>>, RunError> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<Rat>().map_err(RunError::from))
                .collect()
        })
        .collect()
}

pub fn parse_family(text: &str) -> Result<Family, RunError> {
    match text {
        "static" => Ok(Family::StaticPanel),
        "dyn-cond" => Ok(Family::DynCondOneLag),
        "dyn-uncond" => Ok(Family::DynUncondOneLag),
        "ar2" => Ok(Family::DynCondBinaryTwoLag),
        other => Err(RunError::Input(format!(
            "unknown family {other:?} (expected static, dyn-cond, dyn-uncond or ar2)"
        ))),
    }
}

/// Model flags as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct ModelArgs {
    pub family: Option<String>,
    pub d: Option<usize>,
    pub t: Option<usize>,
    pub restriction: Option<Restriction>,
    pub v: Option<String>,
    pub gamma: Option<String>,
    pub gamma1: Option<String>,
    pub gamma2: Option<String>,
    pub y0: Option<usize>,
    pub ym1: Option<usize>,
}

/// Builds a model from flags. A single row of `--v` for a binary model gives
/// the index of alternative 1, with alternative 0 at zero.
pub fn model_from_args(args: &ModelArgs) -> Result<ModelSpec, RunError> {
    let family = parse_family(args.family.as_deref().unwrap_or("static"))?;
    let text = args
        .v
        .as_deref()
        .ok_or_else(|| RunError::Input("--v is required".to_string()))?;
    let mut v = parse_matrix(text)?;
    let binary = family == Family::DynCondBinaryTwoLag || args.d == Some(2);
    if v.len() == 1 && binary {
        let zeros = vec![Rat::zero(); v[0].len()];
        v.insert(0, zeros);
    }
    let parse = |x: &Option<String>| -> Result<Rat, RunError> {
        x.as_deref().map_or(Ok(Rat::zero()), |s| s.parse::<Rat>().map_err(RunError::from))
    };
    let spec = ModelSpec {
        family,
        d: args.d.unwrap_or(v.len()),
        t: args.t.unwrap_or_else(|| v.first().map_or(0, |r| r.len())),
        restriction: args.restriction.unwrap_or(Restriction::Stationary),
        v,
        gamma: parse(&args.gamma)?,
        gamma1: parse(&args.gamma1)?,
        gamma2: parse(&args.gamma2)?,
        y0: args.y0,
        y_minus1: args.ym1,
    };
    spec.validate()?;
    Ok(spec)
}

/// Plain-text form of a report.
pub fn report_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "patches: {}  A: {}x{}  z: {}",
        report.patches, report.dims.rows, report.dims.cols, report.dims.zdim
    );
    let _ = writeln!(out, "raw vectors: {}  reduced: {}", report.raw.len(), report.reduced.len());
    for line in &report.rendered {
        let _ = writeln!(out, "{line}");
    }
    out
}
