use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use sharpset::cases::{enumerate_cases, CaseFamily, Symmetry};
use sharpset::cli::{
    first_period, model_from_args, parse_family, render_inequality, render_marginal, report_text, run, Format,
    ModelArgs, RunConfig, RunError, Solver, ORACLE_LIMIT,
};
use sharpset::closedform::{
    ar2_family, cm_inequalities, dynamic_family, exchangeable_family, kpt_family, pp2_family,
    pp_static_inequalities, RankedAlternatives,
};
use sharpset::cutplane::check_integrality;
use sharpset::discretize::{label_base, Restriction};
use sharpset::matrices::{build, outcome_labels};
use sharpset::molp::{build_ddcp, oracle_undominated, IneqVector, Provenance};
use sharpset::rat::Rat;
use sharpset::reduce::{eliminate_redundant, IneqSet};
use sharpset::sampler::{Distribution, SamplerConfig};

#[derive(Parser)]
#[command(name = "sharpset", version, about = "Sharp moment inequalities for panel discrete choice models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (SHARPSET_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one local model.
    Solve(SolveArgs),
    /// Enumerate the cases of a model family.
    Cases(CasesArgs),
    /// Emit an analytic inequality family.
    ClosedForm(ClosedFormArgs),
    /// Remove redundant vectors from a JSON list.
    Reduce(ReduceArgs),
    /// Randomized integrality check of a dual polyhedron.
    CheckIntegrality(IntegralityArgs),
    /// Brute-force enumeration over {0, ±1} vectors.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct ModelFlags {
    /// static | dyn-cond | dyn-uncond | ar2
    #[arg(long, default_value = "static")]
    family: String,
    #[arg(long = "D")]
    d: Option<usize>,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long, value_enum, default_value = "stationary")]
    restriction: RestrictionArg,
    /// Index values, one row per alternative: "r1c1,r1c2;r2c1,r2c2".
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma2: Option<String>,
    #[arg(long)]
    y0: Option<usize>,
    #[arg(long)]
    ym1: Option<usize>,
}

impl ModelFlags {
    fn to_args(&self, family: &str) -> ModelArgs {
        ModelArgs {
            family: Some(family.to_string()),
            d: self.d,
            t: self.t,
            restriction: Some(self.restriction.into()),
            v: self.v.clone(),
            gamma: self.gamma.clone(),
            gamma1: self.gamma1.clone(),
            gamma2: self.gamma2.clone(),
            y0: self.y0,
            ym1: self.ym1,
        }
    }
}

#[derive(Args)]
struct SamplerFlags {
    #[arg(long = "K", default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exponential")]
    dist: DistArg,
    #[arg(long, default_value_t = 100.0)]
    sigma: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long, value_enum, default_value = "benson")]
    solver: SolverArg,
    #[command(flatten)]
    sampler: SamplerFlags,
    /// Run the cutplane solver on a dynamic family.
    #[arg(long)]
    allow_dynamic: bool,
    /// Render inequalities with marginal probabilities where possible.
    #[arg(long)]
    marginal: bool,
}

#[derive(Args)]
struct CasesArgs {
    #[arg(long, default_value = "static")]
    family: String,
    #[arg(long = "D", default_value_t = 2)]
    d: usize,
    #[arg(long = "T", default_value_t = 2)]
    t: usize,
    #[arg(long)]
    y0: Option<usize>,
    #[arg(long)]
    ym1: Option<usize>,
    #[arg(long, value_enum, default_value = "canonical")]
    symmetry: SymmetryArg,
    #[arg(long, value_enum, default_value = "stationary")]
    restriction: RestrictionArg,
    /// Solve every case and report its inequality set.
    #[arg(long)]
    solve_all: bool,
}

#[derive(Args)]
struct ClosedFormArgs {
    /// cm | pp-static | exchangeable | dynamic | kpt | pp2 | ar2
    #[arg(long)]
    family: String,
    #[command(flatten)]
    model: ClosedFormModel,
}

#[derive(Args)]
struct ClosedFormModel {
    #[arg(long = "D")]
    d: Option<usize>,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma2: Option<String>,
    #[arg(long)]
    y0: Option<usize>,
    #[arg(long)]
    ym1: Option<usize>,
}

#[derive(Args)]
struct ReduceArgs {
    /// JSON file with a list of vectors or a report with a "raw" field.
    #[arg(long)]
    input: String,
    /// Number of alternatives, for rendering.
    #[arg(long = "D")]
    d: Option<usize>,
}

#[derive(Args)]
struct IntegralityArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    sampler: SamplerFlags,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long, default_value_t = ORACLE_LIMIT)]
    dim_limit: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum RestrictionArg {
    Stationary,
    Exchangeable,
}

impl From<RestrictionArg> for Restriction {
    fn from(r: RestrictionArg) -> Restriction {
        match r {
            RestrictionArg::Stationary => Restriction::Stationary,
            RestrictionArg::Exchangeable => Restriction::Exchangeable,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Benson,
    Cutplane,
    Probabilistic,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Exponential,
    HalfNormal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    None,
    Canonical,
}

struct Output {
    format: Format,
    out: Option<String>,
}

impl Output {
    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> Result<(), RunError> {
        let body = match self.format {
            Format::Json => serde_json::to_string_pretty(value).map_err(|e| RunError::Input(e.to_string()))? + "\n",
            Format::Text => text(),
        };
        match &self.out {
            Some(path) => fs::write(path, body)?,
            None => print!("{body}"),
        }
        Ok(())
    }
}

fn configure_threads(flag: Option<usize>) {
    let env = std::env::var("SHARPSET_THREADS").ok().and_then(|s| s.parse::<usize>().ok());
    if let Some(n) = env.or(flag).filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn set_json(set: &IneqSet, rendered: &[String]) -> Value {
    json!({
        "vectors": set.ys(),
        "rendered": rendered,
        "removed": set.log,
    })
}

fn render_all(ys: &[Vec<Rat>], labels: &[Vec<usize>]) -> Vec<String> {
    ys.iter().map(|y| render_inequality(y, labels)).collect()
}

fn solve(args: SolveArgs, output: &Output) -> Result<(), RunError> {
    let model = model_from_args(&args.model.to_args(&args.model.family))?;
    let config = RunConfig {
        model,
        solver: match args.solver {
            SolverArg::Benson => Solver::Benson,
            SolverArg::Cutplane => Solver::Cutplane,
            SolverArg::Probabilistic => Solver::Probabilistic,
            SolverArg::Oracle => Solver::Oracle,
        },
        sampler: SamplerConfig {
            k: args.sampler.k,
            distribution: match args.sampler.dist {
                DistArg::Exponential => Distribution::Exponential,
                DistArg::HalfNormal => Distribution::HalfNormal,
            },
            seed: args.sampler.seed,
            record_objectives: false,
        },
        sigma: args.sampler.sigma,
        allow_dynamic: args.allow_dynamic,
        out: output.out.clone(),
        format: output.format,
        marginal: args.marginal,
    };
    let report = run(&config)?;
    output.emit(&report, || report_text(&report))
}

fn cases(args: CasesArgs, output: &Output) -> Result<(), RunError> {
    let family = parse_family(&args.family)?;
    let case_family = CaseFamily::new(family, args.d, args.t, args.y0, args.ym1)
        .map_err(|e| RunError::Input(e.to_string()))?;
    let symmetry = match args.symmetry {
        SymmetryArg::None => Symmetry::None,
        SymmetryArg::Canonical => Symmetry::Canonical,
    };
    let list = enumerate_cases(&case_family, symmetry).map_err(|e| RunError::Input(e.to_string()))?;
    let restriction: Restriction = args.restriction.into();
    let solved: Vec<Option<Value>> = if args.solve_all {
        list.par_iter()
            .map(|case| {
                let config = RunConfig::new(case.to_spec(restriction), Solver::Benson);
                run(&config).map(|r| Some(json!({"reduced": r.reduced, "rendered": r.rendered})))
            })
            .collect::<Result<_, _>>()?
    } else {
        vec![None; list.len()]
    };
    let rows: Vec<Value> = list
        .iter()
        .zip(&solved)
        .map(|(case, solution)| {
            let mut row = json!({
                "ordering": case.describe(),
                "groups": case.ordering,
                "params": case.family.params,
                "representative": case.representative,
                "realizable": case.realizable,
            });
            if let Some(s) = solution {
                row["inequalities"] = s.clone();
            }
            row
        })
        .collect();
    let value = json!({"family": args.family, "D": args.d, "T": args.t, "cases": rows});
    output.emit(&value, || {
        let mut text = format!("{} cases\n", list.len());
        for (case, solution) in list.iter().zip(&solved) {
            let rep: Vec<String> = case.representative.iter().map(|x| x.to_string()).collect();
            text += &format!("{}    [{}]\n", case.describe(), rep.join(", "));
            if let Some(s) = solution {
                for line in s["rendered"].as_array().into_iter().flatten() {
                    text += &format!("    {}\n", line.as_str().unwrap_or_default());
                }
            }
        }
        text
    })
}

fn closed_form(args: ClosedFormArgs, output: &Output) -> Result<(), RunError> {
    let m = &args.model;
    let flags = |family: &str| ModelArgs {
        family: Some(family.to_string()),
        d: m.d,
        t: m.t,
        restriction: Some(Restriction::Stationary),
        v: m.v.clone(),
        gamma: m.gamma.clone(),
        gamma1: m.gamma1.clone(),
        gamma2: m.gamma2.clone(),
        y0: m.y0,
        ym1: m.ym1,
    };
    let err = |e: sharpset::closedform::ClosedFormError| RunError::Input(e.to_string());
    let mut extra = Value::Null;
    let set: IneqSet = match args.family.as_str() {
        "cm" => {
            let spec = model_from_args(&ModelArgs { d: Some(2), ..flags("static") })?;
            let a = spec.delta_v();
            cm_inequalities(a[0].cmp(&a[1]))
        }
        "pp-static" | "exchangeable" => {
            let spec = model_from_args(&flags("static"))?;
            let ranked = RankedAlternatives::from_spec(&spec).map_err(err)?;
            if args.family == "pp-static" {
                pp_static_inequalities(&ranked)
            } else {
                exchangeable_family(&ranked)
            }
        }
        "dynamic" => dynamic_family(&model_from_args(&flags("dyn-cond"))?).map_err(err)?,
        "kpt" => {
            let spec = model_from_args(&ModelArgs { d: Some(2), ..flags("dyn-cond") })?;
            let y0 = spec.initial().expect("validated");
            let gamma_tilde = &spec.gamma * &Rat::from_int(2);
            kpt_family(&spec.binary_index(0), &spec.binary_index(1), &gamma_tilde, y0)
        }
        "pp2" => {
            let spec = model_from_args(&flags("dyn-cond"))?;
            let family = pp2_family(&spec).map_err(err)?;
            let base = label_base(spec.d);
            let sets: Vec<Vec<usize>> = family
                .sets
                .iter()
                .map(|s| s.iter().map(|a| a + base).collect())
                .collect();
            let nonlinear: Vec<String> = sets
                .iter()
                .map(|s| {
                    let names: Vec<String> = s.iter().map(|a| a.to_string()).collect();
                    let a = format!("{{{}}}", names.join(","));
                    format!("P(Y1∈{a}, Y2∈{a}) ≥ P(Y1∈{a})²")
                })
                .collect();
            extra = json!({ "sets": sets, "rendered": nonlinear });
            IneqSet {
                vectors: Vec::new(),
                labels: outcome_labels(spec.d, 2, base),
                log: Vec::new(),
            }
        }
        "ar2" => {
            let mut spec_args = flags("ar2");
            spec_args.d = Some(2);
            let spec = model_from_args(&spec_args)?;
            ar2_family(&spec, spec.t).map_err(err)?
        }
        other => return Err(RunError::Input(format!("unknown closed-form family {other:?}"))),
    };
    let reduced = eliminate_redundant(&set.vectors).with_labels(set.labels.clone());
    let rendered = render_all(&reduced.ys(), &set.labels);
    let value = json!({
        "family": args.family,
        "candidates": set.ys(),
        "reduced": set_json(&reduced, &rendered),
        "pp2": extra,
    });
    output.emit(&value, || {
        let mut text = format!("{} candidates, {} after reduction\n", set.len(), reduced.len());
        for line in extra.get("rendered").and_then(Value::as_array).into_iter().flatten() {
            text += &format!("{}\n", line.as_str().unwrap_or_default());
        }
        for line in &rendered {
            text += &format!("{line}\n");
        }
        text
    })
}

fn reduce(args: ReduceArgs, output: &Output) -> Result<(), RunError> {
    let body = fs::read_to_string(&args.input)?;
    let value: Value = serde_json::from_str(&body).map_err(|e| RunError::Input(e.to_string()))?;
    let list = match value.get("raw") {
        Some(raw) => raw.clone(),
        None => value,
    };
    let ys: Vec<Vec<Rat>> = serde_json::from_value(list).map_err(|e| RunError::Input(e.to_string()))?;
    let vectors: Vec<IneqVector> = ys.into_iter().map(|y| IneqVector::new(y, Provenance::Benson)).collect();
    let n = vectors.first().map_or(0, |v| v.y.len());
    let labels = match args.d {
        Some(d) if d >= 2 => {
            let mut t = 0;
            while d.pow(t as u32) < n {
                t += 1;
            }
            if d.pow(t as u32) != n {
                return Err(RunError::Input(format!("{n} coordinates is not a power of D = {d}")));
            }
            outcome_labels(d, t, label_base(d))
        }
        _ => (0..n).map(|i| vec![i]).collect(),
    };
    let reduced = eliminate_redundant(&vectors).with_labels(labels.clone());
    let rendered = render_all(&reduced.ys(), &labels);
    output.emit(&set_json(&reduced, &rendered), || rendered.join("\n") + "\n")
}

fn integrality(args: IntegralityArgs, output: &Output) -> Result<(), RunError> {
    let spec = model_from_args(&args.model.to_args(&args.model.family))?;
    let poly = build_ddcp(&build(&spec)?);
    let report = check_integrality(&poly, args.sampler.k, args.sampler.sigma, args.sampler.seed);
    output.emit(&report, || {
        if report.evidence {
            format!("all {} objective values integral\n", report.tested)
        } else {
            format!("fractional value after {} objectives: {:?}\n", report.tested, report.counterexample)
        }
    })
}

fn oracle(args: OracleArgs, output: &Output) -> Result<(), RunError> {
    let spec = model_from_args(&args.model.to_args(&args.model.family))?;
    let model = build(&spec)?;
    let poly = build_ddcp(&model);
    let set = oracle_undominated(&poly, args.dim_limit)?;
    let rendered = render_all(&set.ys(), &model.row_labels);
    let marginal: Vec<String> = set.ys().iter().map(|y| render_marginal(y, &model.row_labels, spec.d, first_period(spec.family))).collect();
    let value = json!({"reduced": set_json(&set, &rendered), "marginal": marginal});
    output.emit(&value, || rendered.join("\n") + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let output = Output {
        format: match cli.format {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        },
        out: cli.out.clone(),
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a, &output),
        Command::Cases(a) => cases(a, &output),
        Command::ClosedForm(a) => closed_form(a, &output),
        Command::Reduce(a) => reduce(a, &output),
        Command::CheckIntegrality(a) => integrality(a, &output),
        Command::Oracle(a) => oracle(a, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
