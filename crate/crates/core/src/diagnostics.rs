//! Evaluation quantities and theoretical checks for fitted weights.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{bottom_multiplicity, error_moment_matrix};
use crate::kernel::{self, QuadraticObjective};
use crate::linalg::{self, SpectralDecomposition};
use crate::math;
use crate::types::{DiagnosticsReport, ForecastPanel, MethodSpec, WeightSolution, WeightSpace};

/// Weights at or below this magnitude count as zeros.
pub const ZERO_TOL: f64 = 1e-8;

fn check_dims(sol: &WeightSolution, panel: &ForecastPanel) -> Result<()> {
    if sol.weights.len() != panel.s() {
        return Err(Error::Dimension(format!(
            "{} weights for {} candidates",
            sol.weights.len(),
            panel.s()
        )));
    }
    Ok(())
}

/// `y − δ̂₀ − Fw`.
pub fn residuals(sol: &WeightSolution, panel: &ForecastPanel) -> Result<DVector<f64>> {
    check_dims(sol, panel)?;
    Ok(&panel.y - sol.predict(&panel.f))
}

pub fn ssr(sol: &WeightSolution, panel: &ForecastPanel) -> Result<f64> {
    Ok(residuals(sol, panel)?.norm_squared())
}

/// Mean of `y − ŷ`.
pub fn empirical_bias(sol: &WeightSolution, panel: &ForecastPanel) -> Result<f64> {
    let r = residuals(sol, panel)?;
    Ok(linalg::pairwise_sum(r.as_slice()) / r.len() as f64)
}

pub fn msfe(sol: &WeightSolution, test: &ForecastPanel) -> Result<f64> {
    let r = residuals(sol, test)?;
    Ok(r.norm_squared() / r.len() as f64)
}

pub fn sparsity_pct(weights: &[f64]) -> f64 {
    if weights.is_empty() {
        return 0.0;
    }
    let zeros = weights.iter().filter(|w| w.abs() <= ZERO_TOL).count();
    100.0 * zeros as f64 / weights.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum BoundKind {
    Exact,
    Bound,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct VarianceReport {
    pub space_method: String,
    pub exact_variance: Option<f64>,
    pub upper_bound: f64,
    pub bound_kind: BoundKind,
}

/// Conditional variance of the one-step combined forecast for least-squares
/// weights on A, A′ or B, given the next forecast vector `f_next`.
pub fn conditional_variance(
    space: WeightSpace,
    f_next: &DVector<f64>,
    panel: &ForecastPanel,
    sigma2: f64,
) -> Result<VarianceReport> {
    if f_next.len() != panel.s() {
        return Err(Error::Dimension(format!(
            "f_next has {} entries for {} candidates",
            f_next.len(),
            panel.s()
        )));
    }
    let g = linalg::gram(&panel.f);
    SpectralDecomposition::new(&g)?.require_positive_definite()?;
    let chol = linalg::cholesky(&g)?;
    let g_inv_f = chol.solve(f_next);
    let base = sigma2 * f_next.dot(&g_inv_f);
    let var = match space {
        WeightSpace::A => base,
        WeightSpace::Aprime => {
            let col_sums = DVector::from_fn(panel.s(), |c, _| panel.f.column(c).sum());
            let theta = panel.t() as f64 - col_sums.dot(&chol.solve(&col_sums));
            if theta <= 0.0 {
                return Err(Error::Singular {
                    lambda_min: theta,
                    lambda_max: panel.t() as f64,
                });
            }
            let beta = g_inv_f.dot(&col_sums);
            base + sigma2 * (1.0 - beta) * (1.0 - beta) / theta
        }
        WeightSpace::B => {
            let ones = DVector::from_element(panel.s(), 1.0);
            let phi = ones.dot(&chol.solve(&ones));
            let c = g_inv_f.sum();
            base - sigma2 * c * c / phi
        }
        other => {
            return Err(Error::UnsupportedSpace {
                method: "closed-form variance",
                space: other.as_str(),
            })
        }
    };
    let var = var.max(0.0);
    Ok(VarianceReport {
        space_method: format!("reg/{space}"),
        exact_variance: Some(var),
        upper_bound: var,
        bound_kind: BoundKind::Exact,
    })
}

/// Variance bounds valid for any estimator restricted to C, D or E.
pub fn variance_bound(
    space: WeightSpace,
    f_next: &DVector<f64>,
    s: usize,
) -> Result<VarianceReport> {
    let ff = f_next.norm_squared();
    let bound = match space {
        WeightSpace::C => s as f64 * ff,
        WeightSpace::D | WeightSpace::E => ff,
        other => {
            return Err(Error::UnsupportedSpace {
                method: "variance bound",
                space: other.as_str(),
            })
        }
    };
    Ok(VarianceReport {
        space_method: format!("any/{space}"),
        exact_variance: None,
        upper_bound: bound,
        bound_kind: BoundKind::Bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum MsfeBound {
    Unbounded,
    Finite(f64),
}

/// Unconditional MSFE bound `σ² + 2μ² + 3c·fᵀf` with `c = S` on C and
/// `c = 1` on D and E; no bound exists on A, A′ or B.
pub fn msfe_bound(
    space: WeightSpace,
    mu_next: f64,
    f_next: &DVector<f64>,
    s: usize,
    sigma2: f64,
) -> MsfeBound {
    let ff = f_next.norm_squared();
    let base = sigma2 + 2.0 * mu_next * mu_next;
    match space {
        WeightSpace::A | WeightSpace::Aprime | WeightSpace::B => MsfeBound::Unbounded,
        WeightSpace::C => MsfeBound::Finite(base + 3.0 * s as f64 * ff),
        WeightSpace::D | WeightSpace::E => MsfeBound::Finite(base + 3.0 * ff),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct UniquenessReport {
    pub condition_checked: String,
    pub lambda_min_scaled: f64,
    pub holds: bool,
    pub multiplicity: Option<usize>,
}

fn scaled_spectrum(m: &DMatrix<f64>, t: usize) -> Option<SpectralDecomposition> {
    SpectralDecomposition::new(&(m / t as f64)).ok()
}

/// Evaluates the uniqueness condition matching `(method, space)`.
pub fn check_uniqueness(
    method: &MethodSpec,
    space: WeightSpace,
    panel: &ForecastPanel,
) -> UniquenessReport {
    let t = panel.t();
    let report = |condition: &str, lambda: f64, holds: bool, multiplicity| UniquenessReport {
        condition_checked: condition.to_string(),
        lambda_min_scaled: lambda,
        holds,
        multiplicity,
    };
    match method {
        MethodSpec::Eigenvector => match scaled_spectrum(&error_moment_matrix(panel), 1) {
            Some(spec) => {
                let m = bottom_multiplicity(&spec);
                let first = spec.eigenvectors[(0, 0)];
                let cond = if first.abs() > 1e-12 {
                    "smallest eigenvalue of M is simple; first weight positive"
                } else {
                    "smallest eigenvalue of M is simple; first weight is zero, sign fixed lexicographically"
                };
                report(cond, spec.lambda_min(), m == 1, Some(m))
            }
            None => report("eigendecomposition of M failed", f64::NAN, false, None),
        },
        MethodSpec::Performance { .. } => report(
            "performance weights are an explicit function of the inputs",
            f64::NAN,
            true,
            None,
        ),
        _ => {
            let (matrix, label) = match method {
                MethodSpec::CrossValidation => match &panel.loo {
                    Some(loo) => (loo.clone(), "loo"),
                    None => {
                        return report("leave-one-out forecasts missing", f64::NAN, false, None)
                    }
                },
                _ if space == WeightSpace::Aprime => (
                    DMatrix::from_fn(t, panel.s() + 1, |r, c| {
                        if c == 0 {
                            1.0
                        } else {
                            panel.f[(r, c - 1)]
                        }
                    }),
                    "intercept-augmented",
                ),
                _ => (panel.f.clone(), "F"),
            };
            let gram = linalg::gram(&matrix);
            let spec = match scaled_spectrum(&gram, t) {
                Some(s) => s,
                None => return report("eigendecomposition failed", f64::NAN, false, None),
            };
            let pd = spec.is_positive_definite();
            let lambda = spec.lambda_min();
            if space != WeightSpace::E {
                let cond = format!("lambda_min(T^-1 Gram[{label}]) > 0");
                return report(&cond, lambda, pd, None);
            }
            if !pd {
                let cond = format!("lambda_min(T^-1 Gram[{label}]) > 0");
                return report(&cond, lambda, false, None);
            }
            let b = match (method, &panel.loo) {
                (MethodSpec::CrossValidation, Some(loo)) => loo.tr_mul(&panel.y),
                (MethodSpec::GeneralizedMallows { sigma2, phi, .. }, _) => match &panel.q {
                    Some(q) => {
                        let mut psi = DVector::from_fn(panel.s(), |i, _| sigma2 * q[i])
                            - panel.f.tr_mul(&panel.y);
                        if let Some(phi) = phi {
                            psi -= DVector::from_column_slice(phi);
                        }
                        -psi
                    }
                    None => return report("Mallows uniqueness needs q", lambda, false, None),
                },
                _ => panel.f.tr_mul(&panel.y),
            };
            let obj = match QuadraticObjective::new(gram, -b, 0.0) {
                Ok(o) => o,
                Err(_) => return report("invalid objective", lambda, false, None),
            };
            let check = kernel::certify_interior_uniqueness(&obj);
            let cond = format!(
                "lambda_min > 0 and f(nu) > 1 on (lambda_min, lambda_max); min f = {:e}",
                check.min_value
            );
            report(&cond, lambda, check.certified, None)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SparsityReport {
    pub zero_count: usize,
    pub sparsity_pct: f64,
    /// D: `‖g* − mean(g*)1‖∞` of the scaled criterion gradient at the solution.
    pub gradient_spread: Option<f64>,
    /// C: the unconstrained minimizer leaves the box with a negative entry.
    pub center_outside_negative: Option<bool>,
    /// Whether the analytic condition forces at least one zero weight.
    pub sparsity_forced: bool,
    pub condition: String,
}

/// Gram matrix and linear term `ψ` of the criterion that produced `sol`.
fn criterion_terms(
    sol: &WeightSolution,
    panel: &ForecastPanel,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    match &sol.method {
        MethodSpec::CrossValidation => {
            let loo = panel.loo.as_ref().ok_or(Error::MissingLoo)?;
            Ok((linalg::gram(loo), -loo.tr_mul(&panel.y)))
        }
        MethodSpec::GeneralizedMallows { sigma2, phi, .. } => {
            let q = panel
                .q
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("Mallows diagnostics need q".into()))?;
            let mut psi =
                DVector::from_fn(panel.s(), |i, _| sigma2 * q[i]) - panel.f.tr_mul(&panel.y);
            if let Some(phi) = phi {
                psi -= DVector::from_column_slice(phi);
            }
            Ok((linalg::gram(&panel.f), psi))
        }
        _ => Ok((linalg::gram(&panel.f), -panel.f.tr_mul(&panel.y))),
    }
}

/// Measured sparsity together with the analytic sparsity condition for C or D.
pub fn check_sparsity_conditions(
    sol: &WeightSolution,
    panel: &ForecastPanel,
) -> Result<SparsityReport> {
    check_dims(sol, panel)?;
    let zero_count = sol.weights.iter().filter(|w| w.abs() <= ZERO_TOL).count();
    let pct = sparsity_pct(&sol.weights);
    let (g, psi) = criterion_terms(sol, panel)?;
    match sol.space {
        WeightSpace::D => {
            let grad = (&g * sol.w() + &psi) * (2.0 / panel.t() as f64);
            let mean = grad.mean();
            let spread = grad.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
            let degenerate = spread <= 1e-8 * grad.amax().max(1.0);
            Ok(SparsityReport {
                zero_count,
                sparsity_pct: pct,
                gradient_spread: Some(spread),
                center_outside_negative: None,
                sparsity_forced: !degenerate,
                condition: if degenerate {
                    "gradient is proportional to 1: sparsity not forced".into()
                } else {
                    "gradient is not proportional to 1: sparsity forced".into()
                },
            })
        }
        WeightSpace::C => {
            let center = -linalg::cholesky(&g)?.solve(&psi);
            let outside_negative = center.iter().any(|&c| c < 0.0);
            Ok(SparsityReport {
                zero_count,
                sparsity_pct: pct,
                gradient_spread: None,
                center_outside_negative: Some(outside_negative),
                sparsity_forced: outside_negative,
                condition: if outside_negative {
                    "unconstrained center has a negative entry: sparsity forced".into()
                } else {
                    "unconstrained center has no negative entry: sparsity not forced".into()
                },
            })
        }
        other => Err(Error::UnsupportedSpace {
            method: "sparsity condition",
            space: other.as_str(),
        }),
    }
}

/// `Σ − (1ρᵀ + ρ1ᵀ)`.
pub fn shrinkage_covariance(sigma: &DMatrix<f64>, rho: &[f64]) -> Result<DMatrix<f64>> {
    let s = sigma.nrows();
    if !sigma.is_square() || rho.len() != s {
        return Err(Error::Dimension(format!(
            "Sigma is {}x{}, rho has {}",
            s,
            sigma.ncols(),
            rho.len()
        )));
    }
    Ok(DMatrix::from_fn(s, s, |i, j| {
        sigma[(i, j)] - rho[i] - rho[j]
    }))
}

/// Sample autocorrelations of `e_t = ŷ_t − y_t` at lags `1..=max_lag`,
/// normalized by the lag-0 sum (divide-by-T convention).
pub fn error_autocorrelation(
    sol: &WeightSolution,
    panel: &ForecastPanel,
    max_lag: usize,
) -> Result<Vec<f64>> {
    let e = -residuals(sol, panel)?;
    acf(e.as_slice(), max_lag)
}

pub fn acf(e: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let t = e.len();
    if max_lag >= t {
        return Err(Error::InvalidInput(format!(
            "max_lag {max_lag} must be below T = {t}"
        )));
    }
    let mean = e.iter().sum::<f64>() / t as f64;
    let c: Vec<f64> = e.iter().map(|x| x - mean).collect();
    let c0: f64 = c.iter().map(|x| x * x).sum();
    if c0 <= 0.0 {
        return Err(Error::InvalidInput(
            "constant error series has no autocorrelation".into(),
        ));
    }
    Ok((1..=max_lag)
        .map(|k| (0..t - k).map(|i| c[i] * c[i + k]).sum::<f64>() / c0)
        .collect())
}

/// Half-length of the Chebyshev interval `sqrt(msfe/α)`.
pub fn chebyshev_length(msfe_estimate: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(msfe_estimate >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need msfe >= 0 and alpha in (0,1), got {msfe_estimate}, {alpha}"
        )));
    }
    Ok(math::sqrt(msfe_estimate / alpha))
}

/// SSR, bias, optional test MSFE, sparsity and error autocorrelations.
pub fn diagnose(
    sol: &WeightSolution,
    train: &ForecastPanel,
    test: Option<&ForecastPanel>,
    max_lag: usize,
) -> Result<DiagnosticsReport> {
    let mut notes = Vec::new();
    let error_acf = match error_autocorrelation(sol, train, max_lag.min(train.t() - 1)) {
        Ok(a) => a,
        Err(e) => {
            notes.push(format!("acf unavailable: {e}"));
            Vec::new()
        }
    };
    if sol.unique_certified == Some(false) {
        notes.push("uniqueness not certified".into());
    }
    Ok(DiagnosticsReport {
        ssr: ssr(sol, train)?,
        empirical_bias: empirical_bias(sol, train)?,
        msfe: test.map(|t| msfe(sol, t)).transpose()?,
        sparsity_pct: sparsity_pct(&sol.weights),
        error_acf,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_regression;
    use alloc::vec;
    use nalgebra::dvector;

    fn sol(w: &[f64]) -> WeightSolution {
        WeightSolution::new(w.to_vec(), WeightSpace::A, MethodSpec::Regression)
    }

    fn panel(y: &[f64], cols: &[&[f64]]) -> ForecastPanel {
        let t = y.len();
        let f = DMatrix::from_fn(t, cols.len(), |r, c| cols[c][r]);
        ForecastPanel::new(DVector::from_column_slice(y), f).unwrap()
    }

    #[test]
    fn ssr_and_bias_examples() {
        let y = [1.0, -2.0, 0.5];
        let p = panel(&y, &[&y]);
        assert_eq!(ssr(&sol(&[1.0]), &p).unwrap(), 0.0);
        assert_eq!(ssr(&sol(&[0.0]), &p).unwrap(), 5.25);
        assert!((empirical_bias(&sol(&[0.0]), &p).unwrap() - (-0.5 / 3.0)).abs() < 1e-15);
        assert_eq!(msfe(&sol(&[1.0]), &p).unwrap(), 0.0);
    }

    #[test]
    fn ssr_identity_for_sum_to_one() {
        let p = panel(
            &[1.0, 2.1, 2.9, 4.2, 5.1],
            &[&[1.3, 2.4, 3.5, 4.6, 5.2], &[0.6, 1.7, 2.2, 3.9, 4.5]],
        );
        let a = fit_regression(&p, WeightSpace::A).unwrap();
        let b = fit_regression(&p, WeightSpace::B).unwrap();
        let g = p.f.transpose() * &p.f;
        let ones = dvector![1.0, 1.0];
        let phi = ones.dot(&g.clone().lu().solve(&ones).unwrap());
        let rho = (a.weights.iter().sum::<f64>() - 1.0) / phi;
        let lhs = ssr(&b, &p).unwrap() - ssr(&a, &p).unwrap();
        assert!((lhs - rho * rho * phi).abs() <= 1e-8 * ssr(&a, &p).unwrap());
        assert!((b.multipliers.rho0.unwrap() - rho).abs() < 1e-10);
    }

    #[test]
    fn variance_examples() {
        let f = DMatrix::<f64>::identity(3, 3);
        let p = ForecastPanel::new(dvector![1.0, 2.0, 3.0], f).unwrap();
        let e1 = dvector![1.0, 0.0, 0.0];
        let a = conditional_variance(WeightSpace::A, &e1, &p, 1.0).unwrap();
        assert_eq!(a.exact_variance, Some(1.0));
        let b = conditional_variance(WeightSpace::B, &e1, &p, 1.0).unwrap();
        assert!((b.exact_variance.unwrap() - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(
            variance_bound(WeightSpace::C, &e1, 3).unwrap().upper_bound,
            3.0
        );
        assert_eq!(
            variance_bound(WeightSpace::D, &e1, 3).unwrap().upper_bound,
            1.0
        );
        assert_eq!(
            variance_bound(WeightSpace::E, &dvector![1.0, 2.0], 2)
                .unwrap()
                .upper_bound,
            5.0
        );
    }

    #[test]
    fn msfe_bound_examples() {
        assert_eq!(
            msfe_bound(WeightSpace::A, 0.0, &dvector![1.0], 1, 1.0),
            MsfeBound::Unbounded
        );
        assert_eq!(
            msfe_bound(WeightSpace::D, 0.0, &dvector![1.0, 0.0], 2, 1.0),
            MsfeBound::Finite(4.0)
        );
        assert_eq!(
            msfe_bound(WeightSpace::C, 1.0, &dvector![1.0, 1.0], 2, 0.0),
            MsfeBound::Finite(14.0)
        );
    }

    #[test]
    fn uniqueness_examples() {
        let x = [1.0, 2.0, 0.5, -1.0];
        let p = panel(&[0.3, 1.0, 2.0, 0.1], &[&x, &x]);
        let r = check_uniqueness(&MethodSpec::Regression, WeightSpace::A, &p);
        assert!(!r.holds && r.lambda_min_scaled.abs() < 1e-12);

        let t = 4.0f64;
        let q = [[0.5, 0.5], [0.5, -0.5], [-0.5, 0.5], [-0.5, -0.5]];
        let f = DMatrix::from_fn(4, 2, |r, c| q[r][c] * t.sqrt());
        let p = ForecastPanel::new(dvector![1.0, 0.0, 0.5, 2.0], f).unwrap();
        let r = check_uniqueness(&MethodSpec::Regression, WeightSpace::B, &p);
        assert!(r.holds && (r.lambda_min_scaled - 1.0).abs() < 1e-12);

        let y = [0.3, 1.0, 2.0, 0.1];
        let p = panel(&y, &[&y, &y, &[0.0, 1.5, 1.0, 0.4]]);
        let r = check_uniqueness(&MethodSpec::Eigenvector, WeightSpace::E, &p);
        assert_eq!(r.multiplicity, Some(2));
        assert!(!r.holds);
    }

    #[test]
    fn sparsity_examples() {
        let p = panel(&[1.0, 2.0, 3.0], &[&[1.2, 1.9, 3.1], &[3.0, -1.0, 0.5]]);
        let d = fit_regression(&p, WeightSpace::D).unwrap();
        assert_eq!(d.active_set, vec![1]);
        let r = check_sparsity_conditions(&d, &p).unwrap();
        assert_eq!(r.sparsity_pct, 50.0);

        // unconstrained optimum (0.5, 0.5) is interior
        let p = panel(
            &[1.0, 1.0, 0.0, 0.0],
            &[&[2.0, 0.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 0.0]],
        );
        let d = fit_regression(&p, WeightSpace::D).unwrap();
        let r = check_sparsity_conditions(&d, &p).unwrap();
        assert!(!r.sparsity_forced && r.zero_count == 0, "{r:?}");
        assert!(
            check_sparsity_conditions(&fit_regression(&p, WeightSpace::A).unwrap(), &p).is_err()
        );
    }

    #[test]
    fn shrinkage_examples() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert_eq!(shrinkage_covariance(&i2, &[0.0, 0.0]).unwrap(), i2);
        let s = shrinkage_covariance(&i2, &[0.1, 0.0]).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.8, -0.1, -0.1, 1.0]);
        assert!((s - want).amax() < 1e-15);
    }

    #[test]
    fn acf_and_chebyshev_examples() {
        let alt: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let r = acf(&alt, 1).unwrap();
        assert!((r[0] + 0.99).abs() < 1e-12);
        assert!(acf(&[1.0, 1.0, 1.0], 1).is_err());
        assert_eq!(chebyshev_length(1.0, 0.25).unwrap(), 2.0);
        assert_eq!(chebyshev_length(0.0, 0.25).unwrap(), 0.0);
        assert!((chebyshev_length(4.0, 0.04).unwrap() - 10.0).abs() < 1e-14);
    }
}
