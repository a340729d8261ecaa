//! Monte Carlo harness: regressor designs, nested and overlapping candidate
//! sets, and per-replication metrics for every (method, space) column.
//!
//! Everything here is sequential and seeded; parallel scheduling over
//! replications belongs to the caller.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::estimators::{self, MallowsInputs};
use crate::linalg::{self, SpectralDecomposition};
use crate::math;
use crate::types::{ForecastPanel, MallowsVariant, PerformanceFamily, WeightSolution, WeightSpace};

/// Degrees of freedom of the heavy-tailed designs.
pub const T_DF: f64 = 2.0;
/// AR-type correlation of the correlated designs.
pub const CORRELATION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum BetaProfile {
    /// `β_j = 1/j`.
    OneOverJ,
    Constant(f64),
    Custom(Vec<f64>),
}

impl BetaProfile {
    pub fn coefficients(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            BetaProfile::OneOverJ => Ok((1..=d).map(|j| 1.0 / j as f64).collect()),
            BetaProfile::Constant(c) => Ok(vec![*c; d]),
            BetaProfile::Custom(b) if b.len() == d => Ok(b.clone()),
            BetaProfile::Custom(b) => Err(Error::Dimension(format!(
                "{} coefficients for d = {d}",
                b.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScenarioSpec {
    pub case: u8,
    pub set: u8,
    pub t: usize,
    pub t_test: usize,
    pub d: usize,
    pub beta: Vec<f64>,
    pub seed: u64,
    pub replications: usize,
}

impl ScenarioSpec {
    /// Defaults: `β_j = 1/j`, 1000 test rows, 20 replications.
    pub fn new(case: u8, set: u8, t: usize, d: usize, seed: u64) -> Self {
        Self {
            case,
            set,
            t,
            t_test: 1000,
            d,
            beta: (1..=d).map(|j| 1.0 / j as f64).collect(),
            seed,
            replications: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.case) || !(1..=4).contains(&self.set) {
            return Err(Error::InvalidInput(format!(
                "case {} / set {} outside 1..=4",
                self.case, self.set
            )));
        }
        if self.d < 5 {
            return Err(Error::InvalidInput(format!(
                "d = {} must be at least 5",
                self.d
            )));
        }
        if self.t < self.d + 2 {
            return Err(Error::InvalidInput(format!(
                "T = {} must be at least d + 2 = {}",
                self.t,
                self.d + 2
            )));
        }
        if self.t_test == 0 || self.replications == 0 {
            return Err(Error::InvalidInput(
                "t_test and replications must be positive".into(),
            ));
        }
        if self.beta.len() != self.d || self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "beta must hold {} finite values",
                self.d
            )));
        }
        Ok(())
    }
}

fn correlated_factor(d: usize) -> Result<DMatrix<f64>> {
    let sigma = DMatrix::from_fn(d, d, |i, j| math::powf(CORRELATION, i.abs_diff(j) as f64));
    Ok(linalg::cholesky(&sigma)?.l())
}

/// Rows of `x` drawn from the design of `case` using `rng`.
pub fn sample_regressors<R: Rng + ?Sized>(
    case: u8,
    t: usize,
    d: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(1..=4).contains(&case) {
        return Err(Error::InvalidInput(format!("case {case} outside 1..=4")));
    }
    let factor = if case.is_multiple_of(2) {
        Some(correlated_factor(d)?)
    } else {
        None
    };
    let chi = ChiSquared::new(T_DF).map_err(|e| Error::InvalidInput(format!("{e}")))?;
    let mut x = DMatrix::zeros(t, d);
    for r in 0..t {
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let mut row = match &factor {
            Some(l) => l * z,
            None => z,
        };
        if case >= 3 {
            let g: f64 = chi.sample(rng);
            row *= math::sqrt(T_DF / g);
        }
        x.set_row(r, &row.transpose());
    }
    Ok(x)
}

pub fn generate_regressors(case: u8, t: usize, d: usize, seed: u64) -> Result<DMatrix<f64>> {
    sample_regressors(case, t, d, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Zero-based regressor indices of each candidate model.
pub fn build_candidate_sets(set: u8, d: usize) -> Result<Vec<Vec<usize>>> {
    if d < 5 {
        return Err(Error::InvalidInput(format!(
            "d = {d} is too small for the candidate sets"
        )));
    }
    let groups = match set {
        1 | 2 => {
            let top = if set == 1 { d } else { d - 2 };
            (0..top.div_ceil(4))
                .map(|s| (4 * s..(4 * s + 4).min(top)).collect())
                .collect()
        }
        3 | 4 => {
            let top = if set == 3 { d } else { d - 2 };
            (0..top.div_ceil(4))
                .map(|s| (s + 2..(s + 5).min(top)).collect())
                .collect()
        }
        _ => return Err(Error::InvalidInput(format!("set {set} outside 1..=4"))),
    };
    Ok(groups)
}

/// Least-squares coefficients of one candidate on its regressor columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFit {
    pub columns: Vec<usize>,
    pub coef: DVector<f64>,
}

impl GroupFit {
    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x.select_columns(&self.columns) * &self.coef
    }
}

/// Candidates fitted on a training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFit {
    /// In-sample forecasts `P_s y`, one column per candidate.
    pub f: DMatrix<f64>,
    /// Diagonals of each `P_s`.
    pub hat: DMatrix<f64>,
    /// `tr(P_s)`, the group size.
    pub q: Vec<f64>,
    pub models: Vec<GroupFit>,
}

fn check_group(group: &[usize], cols: usize) -> Result<()> {
    if group.is_empty() {
        return Err(Error::InvalidInput("empty candidate group".into()));
    }
    if let Some(&c) = group.iter().find(|&&c| c >= cols) {
        return Err(Error::Dimension(format!(
            "column {c} out of range for {cols} regressors"
        )));
    }
    Ok(())
}

pub fn fit_group_ols(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    groups: &[Vec<usize>],
) -> Result<Vec<GroupFit>> {
    Ok(fit_candidates(x, y, groups)?.models)
}

/// OLS without intercept on each group: forecasts, leverages and `q`.
pub fn fit_candidates(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    groups: &[Vec<usize>],
) -> Result<CandidateFit> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "x has {} rows, y has {}",
            x.nrows(),
            y.len()
        )));
    }
    if groups.is_empty() {
        return Err(Error::InvalidInput("no candidate groups".into()));
    }
    let t = x.nrows();
    let mut f = DMatrix::zeros(t, groups.len());
    let mut hat = DMatrix::zeros(t, groups.len());
    let mut models = Vec::with_capacity(groups.len());
    for (s, group) in groups.iter().enumerate() {
        check_group(group, x.ncols())?;
        let xs = x.select_columns(group);
        let gram = linalg::gram(&xs);
        SpectralDecomposition::new(&gram)?.require_positive_definite()?;
        let chol = linalg::cholesky(&gram)?;
        let coef = chol.solve(&xs.tr_mul(y));
        let z = chol
            .l()
            .solve_lower_triangular(&xs.transpose())
            .ok_or(Error::Singular {
                lambda_min: 0.0,
                lambda_max: 0.0,
            })?;
        f.set_column(s, &(&xs * &coef));
        for r in 0..t {
            hat[(r, s)] = z.column(r).norm_squared();
        }
        models.push(GroupFit {
            columns: group.clone(),
            coef,
        });
    }
    let q = groups.iter().map(|g| g.len() as f64).collect();
    Ok(CandidateFit { f, hat, q, models })
}

/// Estimation families run on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum GridMethod {
    Regression,
    Mallows,
    CrossValidation,
    SmoothedAic,
    SmoothedBic,
    Eigenvector,
}

impl GridMethod {
    pub fn token(self) -> &'static str {
        match self {
            GridMethod::Regression => "reg",
            GridMethod::Mallows => "ma",
            GridMethod::CrossValidation => "cv",
            GridMethod::SmoothedAic => "pf:saic",
            GridMethod::SmoothedBic => "pf:sbic",
            GridMethod::Eigenvector => "eig",
        }
    }
}

/// One (method, space) column of the result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Column {
    pub method: GridMethod,
    pub space: WeightSpace,
}

impl Column {
    pub const fn new(method: GridMethod, space: WeightSpace) -> Self {
        Self { method, space }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.method.token(), self.space)
    }
}

/// Table column order: regression A′, A–E; Mallows A–E; CV A–E; smoothed
/// AIC and BIC on D; eigenvector on E.
pub fn default_columns() -> Vec<Column> {
    use WeightSpace::*;
    let mut cols = vec![Column::new(GridMethod::Regression, Aprime)];
    for m in [
        GridMethod::Regression,
        GridMethod::Mallows,
        GridMethod::CrossValidation,
    ] {
        cols.extend([A, B, C, D, E].map(|s| Column::new(m, s)));
    }
    cols.push(Column::new(GridMethod::SmoothedAic, D));
    cols.push(Column::new(GridMethod::SmoothedBic, D));
    cols.push(Column::new(GridMethod::Eigenvector, E));
    cols
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CellMetrics {
    pub ssr: f64,
    pub bias: f64,
    pub msfe: f64,
    pub sparsity_pct: f64,
    pub weights: Vec<f64>,
    pub intercept: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum CellOutcome {
    Ok(CellMetrics),
    Failed(String),
}

impl CellOutcome {
    pub fn metrics(&self) -> Option<&CellMetrics> {
        match self {
            CellOutcome::Ok(m) => Some(m),
            CellOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ReplicationResult {
    pub replication: usize,
    pub seed: u64,
    /// Aligned with the requested columns.
    pub cells: Vec<CellOutcome>,
}

impl ReplicationResult {
    pub fn cell(&self, columns: &[Column], column: Column) -> Option<&CellMetrics> {
        let i = columns.iter().position(|&c| c == column)?;
        self.cells[i].metrics()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream seed for one replication of one scenario.
pub fn derive_seed(base: u64, case: u8, set: u8, replication: usize) -> u64 {
    [case as u64, set as u64, replication as u64]
        .iter()
        .fold(splitmix(base), |h, &v| splitmix(h ^ v))
}

struct Fitted {
    panel: ForecastPanel,
    test: ForecastPanel,
    sigma2_mallows: Result<f64>,
}

fn evaluate(sol: &WeightSolution, fitted: &Fitted) -> Result<CellMetrics> {
    Ok(CellMetrics {
        ssr: diagnostics::ssr(sol, &fitted.panel)?,
        bias: diagnostics::empirical_bias(sol, &fitted.panel)?,
        msfe: diagnostics::msfe(sol, &fitted.test)?,
        sparsity_pct: diagnostics::sparsity_pct(&sol.weights),
        weights: sol.weights.clone(),
        intercept: sol.intercept,
    })
}

fn fit_column(column: Column, fitted: &Fitted) -> Result<WeightSolution> {
    let panel = &fitted.panel;
    let q = panel.q.as_deref().unwrap_or(&[]);
    match column.method {
        GridMethod::Regression => estimators::fit_regression(panel, column.space),
        GridMethod::Mallows => {
            let sigma2 = fitted.sigma2_mallows.clone()?;
            let inputs = MallowsInputs {
                sigma2,
                k: q.to_vec(),
                phi: None,
            };
            estimators::fit_generalized_mallows(
                panel,
                &inputs,
                MallowsVariant::Mallows,
                column.space,
            )
        }
        GridMethod::CrossValidation => estimators::fit_cv(panel, column.space),
        GridMethod::SmoothedAic | GridMethod::SmoothedBic => {
            if column.space != WeightSpace::D {
                return Err(Error::UnsupportedSpace {
                    method: column.method.token(),
                    space: column.space.as_str(),
                });
            }
            let family = if column.method == GridMethod::SmoothedAic {
                PerformanceFamily::SmoothedAic
            } else {
                PerformanceFamily::SmoothedBic
            };
            estimators::fit_performance(
                q,
                panel.t(),
                &estimators::candidate_variances(panel),
                &family,
            )
        }
        GridMethod::Eigenvector => {
            if column.space != WeightSpace::E {
                return Err(Error::UnsupportedSpace {
                    method: "eig",
                    space: column.space.as_str(),
                });
            }
            estimators::fit_eigenvector(panel)
        }
    }
}

fn draw(
    spec: &ScenarioSpec,
    rows: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let x = sample_regressors(spec.case, rows, spec.d, rng)?;
    let beta = DVector::from_column_slice(&spec.beta);
    let noise = DVector::from_fn(rows, |_, _| StandardNormal.sample(rng));
    let y = &x * beta + noise;
    Ok((x, y))
}

fn prepare(spec: &ScenarioSpec, seed: u64) -> Result<Fitted> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, y) = draw(spec, spec.t, &mut rng)?;
    let (x_test, y_test) = draw(spec, spec.t_test, &mut rng)?;
    let groups = build_candidate_sets(spec.set, spec.d)?;
    let cand = fit_candidates(&x, &y, &groups)?;
    let mut f_test = DMatrix::zeros(spec.t_test, groups.len());
    for (s, m) in cand.models.iter().enumerate() {
        f_test.set_column(s, &m.predict(&x_test));
    }
    let panel = ForecastPanel::new(y, cand.f.clone())?.with_q(cand.q.clone())?;
    let panel = estimators::build_loo_forecasts(&panel, &cand.hat)?;
    let sigma2_mallows = estimators::estimate_sigma2(&panel);
    Ok(Fitted {
        panel,
        test: ForecastPanel::new(y_test, f_test)?,
        sigma2_mallows,
    })
}

/// One replication: fresh train and test draws, candidates fitted on the
/// training rows, and metrics for every column. Column failures are
/// recorded in place.
pub fn run_replication(
    spec: &ScenarioSpec,
    replication: usize,
    columns: &[Column],
) -> Result<ReplicationResult> {
    spec.validate()?;
    let seed = derive_seed(spec.seed, spec.case, spec.set, replication);
    let fitted = prepare(spec, seed)?;
    let cells = columns
        .iter()
        .map(
            |&c| match fit_column(c, &fitted).and_then(|sol| evaluate(&sol, &fitted)) {
                Ok(m) => CellOutcome::Ok(m),
                Err(e) => CellOutcome::Failed(format!("{e}")),
            },
        )
        .collect();
    Ok(ReplicationResult {
        replication,
        seed,
        cells,
    })
}

pub fn run_scenario(spec: &ScenarioSpec, columns: &[Column]) -> Result<Vec<ReplicationResult>> {
    (0..spec.replications)
        .map(|r| run_replication(spec, r, columns))
        .collect()
}

/// Pairs `(larger, smaller)` of the SSR orderings checked per family.
fn ordering_pairs(method: GridMethod) -> Vec<(WeightSpace, WeightSpace)> {
    use WeightSpace::*;
    let mut pairs = vec![(D, C), (C, A), (D, B), (B, A), (E, A)];
    if method == GridMethod::Regression {
        pairs.push((A, Aprime));
    }
    pairs
}

/// SSR orderings violated by more than `1e-9` relative slack.
pub fn ordering_violations(rep: &ReplicationResult, columns: &[Column]) -> Vec<String> {
    let mut out = Vec::new();
    for method in [GridMethod::Regression, GridMethod::Mallows] {
        for (big, small) in ordering_pairs(method) {
            let (Some(b), Some(s)) = (
                rep.cell(columns, Column::new(method, big)),
                rep.cell(columns, Column::new(method, small)),
            ) else {
                continue;
            };
            if b.ssr < s.ssr - 1e-9 * s.ssr.abs() {
                out.push(format!(
                    "rep {}: SSR {}:{big} = {} < SSR {}:{small} = {}",
                    rep.replication,
                    method.token(),
                    b.ssr,
                    method.token(),
                    s.ssr
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MetricSummary {
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CellSummary {
    pub column: Column,
    pub ssr: Option<MetricSummary>,
    pub bias: Option<MetricSummary>,
    pub msfe: Option<MetricSummary>,
    pub sparsity_pct: Option<MetricSummary>,
    pub failures: usize,
}

fn summarize(values: &[f64]) -> Option<MetricSummary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Some(MetricSummary {
        mean: linalg::pairwise_sum(values) / n as f64,
        median,
    })
}

/// Mean and median per column over successful replications, in replication
/// order so the result does not depend on scheduling.
pub fn aggregate(reps: &[ReplicationResult], columns: &[Column]) -> Vec<CellSummary> {
    let mut ordered: Vec<&ReplicationResult> = reps.iter().collect();
    ordered.sort_by_key(|r| r.replication);
    columns
        .iter()
        .enumerate()
        .map(|(i, &column)| {
            let ok: Vec<&CellMetrics> = ordered
                .iter()
                .filter_map(|r| r.cells[i].metrics())
                .collect();
            let pick = |f: fn(&CellMetrics) -> f64| {
                summarize(&ok.iter().map(|m| f(m)).collect::<Vec<_>>())
            };
            CellSummary {
                column,
                ssr: pick(|m| m.ssr),
                bias: pick(|m| m.bias),
                msfe: pick(|m| m.msfe),
                sparsity_pct: pick(|m| m.sparsity_pct),
                failures: ordered.len() - ok.len(),
            }
        })
        .collect()
}

/// Monte Carlo estimate of the expected weight vector of one column: the
/// average of the fitted weights over successful replications. Comparing it
/// with the generating weights gives the bias of the estimator.
pub fn mean_weights(
    reps: &[ReplicationResult],
    columns: &[Column],
    column: Column,
) -> Option<Vec<f64>> {
    let mut ordered: Vec<&ReplicationResult> = reps.iter().collect();
    ordered.sort_by_key(|r| r.replication);
    let ok: Vec<&CellMetrics> = ordered
        .iter()
        .filter_map(|r| r.cell(columns, column))
        .collect();
    let s = ok.first()?.weights.len();
    Some(
        (0..s)
            .map(|j| {
                let xs: Vec<f64> = ok.iter().map(|m| m.weights[j]).collect();
                linalg::pairwise_sum(&xs) / xs.len() as f64
            })
            .collect(),
    )
}
