//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when any solver failed (itemized on stderr),
//! 2 on malformed input or unknown tokens. Settings resolve as flag, then
//! `--config` file, then built-in default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};
use weightscape_core::conformal::{select_space, split_indices, GroupOlsTrainer};
use weightscape_core::diagnostics::{self, check_sparsity_conditions, check_uniqueness};
use weightscape_core::estimators::{self, MallowsInputs};
use weightscape_core::simulation::{
    build_candidate_sets, default_columns, BetaProfile, ScenarioSpec,
};
use weightscape_core::{
    Error as CoreError, ForecastPanel, MallowsVariant, MethodSpec, PerformanceFamily,
    WeightSolution, WeightSpace,
};

use crate::grid::run_grid;
use crate::io::{read_meta, read_panel, read_xy, PanelMeta};
use crate::json;
use crate::tables::{emit_tables, Format};

#[derive(Debug, Parser)]
#[command(
    name = "weightscape",
    version,
    about = "Constrained forecast-combination weights"
)]
pub struct Cli {
    /// TOML file of `key = value` settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit weights and diagnostics for every (method, space) pair.
    Combine(PanelArgs),
    /// Uniqueness and sparsity-condition report per (method, space) pair.
    Diagnose(PanelArgs),
    /// Choose a weight space by split-conformal interval length.
    SelectSpace(SelectArgs),
    /// Run the Monte Carlo grid and write result tables.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct PanelArgs {
    /// Panel CSV: `y` then one column per candidate.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON sidecar with `q`, `labels`, `phi`, `sigma2`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Leave-one-out forecasts CSV, one column per candidate.
    #[arg(long)]
    pub loo: Option<PathBuf>,
    /// Held-out panel for test MSFE.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Comma-separated: reg, ma, kl, cv, pf:saic, pf:sbic, eig.
    #[arg(long)]
    pub methods: Option<String>,
    /// Comma-separated: A, Aprime, B, C, D, E.
    #[arg(long)]
    pub spaces: Option<String>,
    /// Output directory (combine) or file (diagnose); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// CSV with a `y` column and regressor columns.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub spaces: Option<String>,
    /// Candidate grouping pattern 1-4 over the regressor columns.
    #[arg(long)]
    pub set: Option<u8>,
    /// Fit each candidate with an intercept.
    #[arg(long)]
    pub intercept: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated cases in 1..=4.
    #[arg(long)]
    pub cases: Option<String>,
    /// Comma-separated candidate sets in 1..=4.
    #[arg(long)]
    pub sets: Option<String>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long = "t-test")]
    pub t_test: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// one-over-j, constant or custom-file.
    #[arg(long = "beta-profile")]
    pub beta_profile: Option<String>,
    /// Coefficients for `custom-file`, separated by commas or whitespace.
    #[arg(long = "beta-file")]
    pub beta_file: Option<PathBuf>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// csv or markdown.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Settings accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub loo: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub methods: Option<String>,
    pub spaces: Option<String>,
    pub out: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub set: Option<u8>,
    pub intercept: Option<bool>,
    pub cases: Option<String>,
    pub sets: Option<String>,
    pub t: Option<usize>,
    pub t_test: Option<usize>,
    pub d: Option<usize>,
    pub reps: Option<usize>,
    pub beta_profile: Option<String>,
    pub beta_file: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Solver(Vec<String>),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Solver(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Solver(items) => {
                for (i, m) in items.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "solver failure: {m}")?;
                }
                Ok(())
            }
        }
    }
}

fn input<E: fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

pub fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// Estimation families reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodToken {
    Reg,
    Ma,
    Kl,
    Cv,
    PfSaic,
    PfSbic,
    Eig,
}

impl MethodToken {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodToken::Reg => "reg",
            MethodToken::Ma => "ma",
            MethodToken::Kl => "kl",
            MethodToken::Cv => "cv",
            MethodToken::PfSaic => "pf:saic",
            MethodToken::PfSbic => "pf:sbic",
            MethodToken::Eig => "eig",
        }
    }

    /// Spaces the method is defined on.
    pub fn supports(self, space: WeightSpace) -> bool {
        match self {
            MethodToken::Reg => true,
            MethodToken::Ma | MethodToken::Kl | MethodToken::Cv => space != WeightSpace::Aprime,
            MethodToken::PfSaic | MethodToken::PfSbic => space == WeightSpace::D,
            MethodToken::Eig => space == WeightSpace::E,
        }
    }
}

impl FromStr for MethodToken {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "reg" => Ok(MethodToken::Reg),
            "ma" => Ok(MethodToken::Ma),
            "kl" => Ok(MethodToken::Kl),
            "cv" => Ok(MethodToken::Cv),
            "pf:saic" => Ok(MethodToken::PfSaic),
            "pf:sbic" => Ok(MethodToken::PfSbic),
            "eig" => Ok(MethodToken::Eig),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, Failure>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(input))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(input(format!("empty list `{s}`")));
    }
    Ok(items)
}

/// Loaded panel plus the metadata that the Mallows and KL criteria need.
pub struct PanelContext {
    pub panel: ForecastPanel,
    pub meta: PanelMeta,
    pub test: Option<ForecastPanel>,
}

/// The `MethodSpec` and weights for one pair; input problems are `Err(Input)`.
pub fn fit_pair(
    ctx: &PanelContext,
    method: MethodToken,
    space: WeightSpace,
) -> Result<Result<WeightSolution, CoreError>, Failure> {
    let panel = &ctx.panel;
    let mallows = |variant: MallowsVariant| -> Result<Result<WeightSolution, CoreError>, Failure> {
        let q = panel.q.clone().ok_or_else(|| {
            input(format!(
                "{} needs `q` in the metadata sidecar",
                method.as_str()
            ))
        })?;
        let phi = match variant {
            MallowsVariant::Kl => Some(
                ctx.meta
                    .phi
                    .clone()
                    .ok_or_else(|| input("kl needs `phi` in the metadata sidecar"))?,
            ),
            MallowsVariant::Mallows => None,
        };
        let sigma2 = match ctx.meta.sigma2 {
            Some(s) => s,
            None => match estimators::estimate_sigma2(panel) {
                Ok(s) => s,
                Err(e) => return Ok(Err(e)),
            },
        };
        let inputs = MallowsInputs { sigma2, k: q, phi };
        Ok(estimators::fit_generalized_mallows(
            panel, &inputs, variant, space,
        ))
    };
    let performance =
        |family: PerformanceFamily| -> Result<Result<WeightSolution, CoreError>, Failure> {
            let q = panel.q.clone().ok_or_else(|| {
                input(format!(
                    "{} needs `q` in the metadata sidecar",
                    method.as_str()
                ))
            })?;
            Ok(estimators::fit_performance(
                &q,
                panel.t(),
                &estimators::candidate_variances(panel),
                &family,
            ))
        };
    match method {
        MethodToken::Reg => Ok(estimators::fit_regression(panel, space)),
        MethodToken::Ma => mallows(MallowsVariant::Mallows),
        MethodToken::Kl => mallows(MallowsVariant::Kl),
        MethodToken::Cv => {
            if panel.loo.is_none() {
                return Err(input("cv needs leave-one-out forecasts (--loo)"));
            }
            Ok(estimators::fit_cv(panel, space))
        }
        MethodToken::PfSaic => performance(PerformanceFamily::SmoothedAic),
        MethodToken::PfSbic => performance(PerformanceFamily::SmoothedBic),
        MethodToken::Eig => Ok(estimators::fit_eigenvector(panel)),
    }
}

struct PanelPlan {
    ctx: PanelContext,
    pairs: Vec<(MethodToken, WeightSpace)>,
    out: Option<PathBuf>,
}

fn plan_panel(
    args: &PanelArgs,
    cfg: &FileConfig,
    default_methods: &str,
) -> Result<PanelPlan, Failure> {
    let path = args
        .input
        .clone()
        .or_else(|| cfg.input.clone())
        .ok_or_else(|| input("--input is required"))?;
    let meta = match args.meta.clone().or_else(|| cfg.meta.clone()) {
        Some(p) => read_meta(&p).map_err(input)?,
        None => PanelMeta::default(),
    };
    let loo = args.loo.clone().or_else(|| cfg.loo.clone());
    let panel = read_panel(&path, Some(&meta), loo.as_deref()).map_err(input)?;
    let test = match args.test.clone().or_else(|| cfg.test.clone()) {
        Some(p) => Some(read_panel(&p, None, None).map_err(input)?),
        None => None,
    };
    if let Some(t) = &test {
        if t.s() != panel.s() {
            return Err(input(format!(
                "test panel has {} candidates, training panel {}",
                t.s(),
                panel.s()
            )));
        }
    }
    let methods: Vec<MethodToken> = parse_list(
        args.methods
            .as_deref()
            .or(cfg.methods.as_deref())
            .unwrap_or(default_methods),
    )?;
    let spaces: Vec<WeightSpace> = parse_list(
        args.spaces
            .as_deref()
            .or(cfg.spaces.as_deref())
            .unwrap_or("A,B,C,D,E"),
    )?;
    let mut pairs = Vec::new();
    for &m in &methods {
        for &s in &spaces {
            if m.supports(s) {
                pairs.push((m, s));
            } else {
                eprintln!("note: {} is not defined on space {s}; skipped", m.as_str());
            }
        }
    }
    Ok(PanelPlan {
        ctx: PanelContext { panel, meta, test },
        pairs,
        out: args.out.clone().or_else(|| cfg.out.clone()),
    })
}

fn file_stem(method: MethodToken, space: WeightSpace) -> String {
    format!("{}_{space}", method.as_str().replace(':', "-"))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn cmd_combine(args: &PanelArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let plan = plan_panel(args, cfg, "reg")?;
    let mut failures = Vec::new();
    let mut records = Vec::new();
    for &(method, space) in &plan.pairs {
        let label = format!("{}/{space}", method.as_str());
        let sol = match fit_pair(&plan.ctx, method, space)? {
            Ok(sol) => sol,
            Err(e) => {
                failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        let report = diagnostics::diagnose(&sol, &plan.ctx.panel, plan.ctx.test.as_ref(), 10)
            .map_err(|e| input(format!("{label}: {e}")))?;
        let record = json!({
            "method": method.as_str(),
            "space": space.as_str(),
            "solution": json::to_value(&sol),
            "diagnostics": json::to_value(&report),
        });
        match &plan.out {
            Some(dir) => write_text(
                &dir.join(format!("{}.json", file_stem(method, space))),
                &json::to_string(&record),
            )?,
            None => records.push(record),
        }
    }
    if plan.out.is_none() {
        print!("{}", json::to_string(&Value::Array(records)));
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Solver(failures))
    }
}

/// The `MethodSpec` the uniqueness check should evaluate for a pair.
fn method_spec(
    ctx: &PanelContext,
    method: MethodToken,
    sol: Option<&WeightSolution>,
) -> MethodSpec {
    if let Some(s) = sol {
        return s.method.clone();
    }
    match method {
        MethodToken::Reg => MethodSpec::Regression,
        MethodToken::Cv => MethodSpec::CrossValidation,
        MethodToken::Eig => MethodSpec::Eigenvector,
        MethodToken::PfSaic => MethodSpec::Performance {
            family: PerformanceFamily::SmoothedAic,
        },
        MethodToken::PfSbic => MethodSpec::Performance {
            family: PerformanceFamily::SmoothedBic,
        },
        MethodToken::Ma | MethodToken::Kl => MethodSpec::GeneralizedMallows {
            variant: if method == MethodToken::Kl {
                MallowsVariant::Kl
            } else {
                MallowsVariant::Mallows
            },
            sigma2: ctx.meta.sigma2.unwrap_or(0.0),
            phi: if method == MethodToken::Kl {
                ctx.meta.phi.clone()
            } else {
                None
            },
        },
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Fit failures are reported as notes; only input errors are fatal.
pub fn cmd_diagnose(args: &PanelArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let plan = plan_panel(args, cfg, "reg")?;
    let mut rows = Vec::new();
    for &(method, space) in &plan.pairs {
        let label = format!("{}/{space}", method.as_str());
        let fitted = fit_pair(&plan.ctx, method, space)?;
        let sol = fitted.as_ref().ok();
        let uniq = check_uniqueness(&method_spec(&plan.ctx, method, sol), space, &plan.ctx.panel);
        let mut notes = Vec::new();
        let sparsity = match (&fitted, space) {
            (Ok(s), WeightSpace::C | WeightSpace::D) => {
                match check_sparsity_conditions(s, &plan.ctx.panel) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        notes.push(format!("sparsity check unavailable: {e}"));
                        None
                    }
                }
            }
            (Ok(_), _) => None,
            (Err(e), _) => {
                notes.push(format!("fit failed: {e}"));
                None
            }
        };
        eprintln!(
            "{label}: unique={} lambda_min={:e}{}{}",
            uniq.holds,
            uniq.lambda_min_scaled,
            uniq.multiplicity
                .map(|m| format!(" multiplicity={m}"))
                .unwrap_or_default(),
            sparsity
                .as_ref()
                .map(|r| format!(" sparsity={}% forced={}", r.sparsity_pct, r.sparsity_forced))
                .unwrap_or_default(),
        );
        rows.push(json!({
            "method": method.as_str(),
            "space": space.as_str(),
            "uniqueness": {
                "condition_checked": uniq.condition_checked,
                "lambda_min_scaled": finite_or_null(uniq.lambda_min_scaled),
                "holds": uniq.holds,
                "multiplicity": uniq.multiplicity,
            },
            "sparsity": sparsity.map(|r| json::to_value(&r)),
            "notes": notes,
        }));
    }
    let text = json::to_string(&Value::Array(rows));
    match &plan.out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Groups of the chosen set pattern, or one candidate per regressor when
/// there are too few columns for the pattern.
fn selection_groups(d: usize, set: u8) -> Result<Vec<Vec<usize>>, Failure> {
    if d < 5 {
        return Ok((0..d).map(|j| vec![j]).collect());
    }
    build_candidate_sets(set, d).map_err(input)
}

pub fn cmd_select_space(args: &SelectArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let path = args
        .input
        .clone()
        .or_else(|| cfg.input.clone())
        .ok_or_else(|| input("--input is required"))?;
    let alpha = args.alpha.or(cfg.alpha).unwrap_or(0.1);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let set = args.set.or(cfg.set).unwrap_or(1);
    let intercept = args.intercept || cfg.intercept.unwrap_or(false);
    let spaces: Vec<WeightSpace> = parse_list(
        args.spaces
            .as_deref()
            .or(cfg.spaces.as_deref())
            .unwrap_or("A,B,C,D,E"),
    )?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(input(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let (x, y, _) = read_xy(&path).map_err(input)?;
    split_indices(y.len(), seed).map_err(input)?;
    let trainer = GroupOlsTrainer {
        groups: selection_groups(x.ncols(), set)?,
        intercept,
    };
    let sel = select_space(&x, &y, &trainer, &spaces, alpha, seed)
        .map_err(|e| Failure::Solver(vec![e.to_string()]))?;
    for note in &sel.result.notes {
        eprintln!("note: {note}");
    }
    let text = json::to_string(&json::selection_value(&sel.result));
    match args.out.clone().or_else(|| cfg.out.clone()) {
        Some(p) => write_text(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_beta_file(path: &Path) -> Result<Vec<f64>, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| input(format!("{}: cannot parse {t:?}", path.display())))
        })
        .collect()
}

/// Resolved simulation settings.
#[derive(Debug, Clone)]
pub struct SimulateSettings {
    pub specs: Vec<ScenarioSpec>,
    pub out_dir: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

pub fn resolve_simulate(
    args: &SimulateArgs,
    cfg: &FileConfig,
) -> Result<SimulateSettings, Failure> {
    let cases: Vec<u8> = parse_list(
        args.cases
            .as_deref()
            .or(cfg.cases.as_deref())
            .unwrap_or("1,2,3,4"),
    )?;
    let sets: Vec<u8> = parse_list(
        args.sets
            .as_deref()
            .or(cfg.sets.as_deref())
            .unwrap_or("1,2,3,4"),
    )?;
    let t = args.t.or(cfg.t).unwrap_or(2000);
    let t_test = args.t_test.or(cfg.t_test).unwrap_or(1000);
    let d = args.d.or(cfg.d).unwrap_or(42);
    let reps = args.reps.or(cfg.reps).unwrap_or(20);
    let seed = args.seed.or(cfg.seed).unwrap_or(2024);
    let profile = match args
        .beta_profile
        .as_deref()
        .or(cfg.beta_profile.as_deref())
        .unwrap_or("one-over-j")
    {
        "one-over-j" => BetaProfile::OneOverJ,
        "constant" => BetaProfile::Constant(1.0),
        "custom-file" => {
            let path = args
                .beta_file
                .clone()
                .or_else(|| cfg.beta_file.clone())
                .ok_or_else(|| input("beta profile custom-file needs --beta-file"))?;
            BetaProfile::Custom(read_beta_file(&path)?)
        }
        other => return Err(input(format!("unknown beta profile `{other}`"))),
    };
    let beta = profile.coefficients(d).map_err(input)?;
    let format: Format = args
        .format
        .as_deref()
        .or(cfg.format.as_deref())
        .unwrap_or("csv")
        .parse()
        .map_err(input)?;
    let mut specs = Vec::new();
    for &case in &cases {
        for &set in &sets {
            let spec = ScenarioSpec {
                case,
                set,
                t,
                t_test,
                d,
                beta: beta.clone(),
                seed,
                replications: reps,
            };
            spec.validate().map_err(input)?;
            specs.push(spec);
        }
    }
    Ok(SimulateSettings {
        specs,
        out_dir: args
            .out_dir
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("results")),
        format,
        threads: args.threads.or(cfg.threads),
    })
}

pub fn cmd_simulate(args: &SimulateArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let settings = resolve_simulate(args, cfg)?;
    let columns = default_columns();
    let outcomes = run_grid(&settings.specs, &columns, settings.threads)
        .map_err(|e| Failure::Solver(vec![e.to_string()]))?;
    emit_tables(&outcomes, &columns, settings.format, &settings.out_dir).map_err(input)?;
    write_text(
        &settings.out_dir.join("summary.json"),
        &json::to_string(&json::to_value(&outcomes)),
    )?;
    let failed: usize = outcomes
        .iter()
        .flat_map(|o| &o.summary)
        .map(|c| c.failures)
        .sum();
    let violations: usize = outcomes.iter().map(|o| o.violations.len()).sum();
    eprintln!(
        "{} scenarios written to {} ({failed} failed cells, {violations} SSR-ordering violations)",
        outcomes.len(),
        settings.out_dir.display()
    );
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = load_config(cli.config.as_deref()).and_then(|cfg| match &cli.command {
        Command::Combine(a) => cmd_combine(a, &cfg),
        Command::Diagnose(a) => cmd_diagnose(a, &cfg),
        Command::SelectSpace(a) => cmd_select_space(a, &cfg),
        Command::Simulate(a) => cmd_simulate(a, &cfg),
    });
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
