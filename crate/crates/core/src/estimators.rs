//! Weight estimators for every criterion and compatible weight space.
//!
//! Least squares, generalized Mallows and leave-one-out CV all minimize a
//! criterion of the form `wᵀGw + 2wᵀψ + c`, which is handed to the kernel as
//! `H = 2G`, `g = 2ψ`. Reported multipliers are rescaled to that criterion:
//! `Gw + ψ + ρ₀1 − ρ + κ = 0` on B, C and D, and `(G − ν)w = −ψ` on E.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{self, QuadraticObjective};
use crate::linalg::{self, SpectralDecomposition};
use crate::math;
use crate::types::{
    ForecastPanel, MallowsVariant, MethodSpec, Multipliers, PenaltyFlavor, PerformanceFamily,
    WeightSolution, WeightSpace,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MallowsInputs {
    pub sigma2: f64,
    /// Effective parameter count `tr(P_s)` per candidate.
    pub k: Vec<f64>,
    pub phi: Option<Vec<f64>>,
}

fn solve_criterion(
    gram: DMatrix<f64>,
    psi: DVector<f64>,
    space: WeightSpace,
    method: MethodSpec,
) -> Result<WeightSolution> {
    let obj = QuadraticObjective::new(gram * 2.0, psi * 2.0, 0.0)?;
    let mut sol = WeightSolution::new(Vec::new(), space, method);
    match space {
        WeightSpace::A | WeightSpace::B => {
            let eq = kernel::solve_equality_qp(&obj, space == WeightSpace::B)?;
            sol.weights = eq.w.as_slice().to_vec();
            sol.multipliers.rho0 = eq.rho.map(|r| 0.5 * r);
            sol.unique_certified = Some(true);
        }
        WeightSpace::C | WeightSpace::D => {
            let ineq = kernel::solve_inequality_qp(&obj, space)?;
            sol.weights = ineq.w.as_slice().to_vec();
            sol.multipliers = Multipliers {
                rho0: ineq.rho.map(|r| -0.5 * r),
                nu: None,
                lower: Some(ineq.lower.iter().map(|m| 0.5 * m).collect()),
                upper: (space == WeightSpace::C)
                    .then(|| ineq.upper.iter().map(|m| 0.5 * m).collect()),
            };
            sol.active_set = ineq.active_set;
            sol.unique_certified = Some(true);
        }
        WeightSpace::E => {
            let sph = kernel::solve_unit_norm(&obj)?;
            sol.weights = sph.w.as_slice().to_vec();
            sol.multipliers.nu = Some(0.5 * sph.nu);
            sol.unique_certified = Some(kernel::certify_interior_uniqueness(&obj).certified);
        }
        WeightSpace::Aprime => {
            return Err(Error::UnsupportedSpace {
                method: sol.method.token(),
                space: "Aprime",
            });
        }
    }
    Ok(sol)
}

/// Least-squares combination weights `argmin ‖y − Fw‖²` over `space`.
///
/// `Aprime` adds a free intercept δ̂₀ to the criterion; the weights are the
/// unconstrained ones corrected along `G⁻¹Fᵀ1`.
pub fn fit_regression(panel: &ForecastPanel, space: WeightSpace) -> Result<WeightSolution> {
    let g = linalg::gram(&panel.f);
    let b = panel.f.tr_mul(&panel.y);
    if space == WeightSpace::Aprime {
        return fit_regression_intercept(panel, &g, &b);
    }
    solve_criterion(g, -b, space, MethodSpec::Regression)
}

fn fit_regression_intercept(
    panel: &ForecastPanel,
    g: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<WeightSolution> {
    let (t, s) = (panel.t(), panel.s());
    SpectralDecomposition::new(g)?.require_positive_definite()?;
    let augmented = DMatrix::from_fn(
        t,
        s + 1,
        |r, c| if c == 0 { 1.0 } else { panel.f[(r, c - 1)] },
    );
    SpectralDecomposition::new(&linalg::gram(&augmented))?.require_positive_definite()?;

    let chol = linalg::cholesky(g)?;
    let w_a = chol.solve(b);
    let col_sums = DVector::from_fn(s, |c, _| panel.f.column(c).sum());
    let v = chol.solve(&col_sums);
    let theta = t as f64 - col_sums.dot(&v);
    if theta <= 0.0 {
        return Err(Error::Singular {
            lambda_min: theta,
            lambda_max: t as f64,
        });
    }
    let resid_sum = panel.y.sum() - col_sums.dot(&w_a);
    let delta = resid_sum / theta;
    let w = w_a - v * delta;

    let mut sol = WeightSolution::new(
        w.as_slice().to_vec(),
        WeightSpace::Aprime,
        MethodSpec::Regression,
    );
    sol.intercept = Some(delta);
    sol.unique_certified = Some(true);
    Ok(sol)
}

/// Residual variance of the full model with all candidates, `‖y − Fŵ^A‖²/(T − S)`.
pub fn estimate_sigma2(panel: &ForecastPanel) -> Result<f64> {
    let (t, s) = (panel.t(), panel.s());
    if t <= s {
        return Err(Error::InvalidInput(format!(
            "T = {t} must exceed S = {s} to estimate sigma2"
        )));
    }
    let g = linalg::gram(&panel.f);
    SpectralDecomposition::new(&g)?.require_positive_definite()?;
    let w = linalg::cholesky(&g)?.solve(&panel.f.tr_mul(&panel.y));
    let r = &panel.y - &panel.f * w;
    Ok(r.norm_squared() / (t - s) as f64)
}

/// Minimizes `wᵀFᵀFw + 2wᵀψ` with `ψ = σ̂²k − φ − Fᵀy` (φ = 0 for Mallows).
pub fn fit_generalized_mallows(
    panel: &ForecastPanel,
    inputs: &MallowsInputs,
    variant: MallowsVariant,
    space: WeightSpace,
) -> Result<WeightSolution> {
    let s = panel.s();
    if !(inputs.sigma2 >= 0.0) || !inputs.sigma2.is_finite() {
        return Err(Error::InvalidInput(format!(
            "sigma2 must be finite and >= 0, got {}",
            inputs.sigma2
        )));
    }
    if inputs.k.len() != s || inputs.k.iter().any(|&k| !(k >= 0.0) || !k.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "k must hold {s} finite non-negative entries"
        )));
    }
    let phi = match (variant, &inputs.phi) {
        (MallowsVariant::Kl, Some(phi)) if phi.len() == s && phi.iter().all(|v| v.is_finite()) => {
            Some(phi.clone())
        }
        (MallowsVariant::Kl, Some(_)) => {
            return Err(Error::InvalidInput(format!(
                "phi must hold {s} finite entries"
            )))
        }
        (MallowsVariant::Kl, None) => {
            return Err(Error::InvalidInput("the KL variant requires phi".into()))
        }
        (MallowsVariant::Mallows, Some(_)) => {
            return Err(Error::InvalidInput(
                "the Mallows variant takes no phi".into(),
            ))
        }
        (MallowsVariant::Mallows, None) => None,
    };
    let mut psi =
        DVector::from_fn(s, |i, _| inputs.sigma2 * inputs.k[i]) - panel.f.tr_mul(&panel.y);
    if let Some(phi) = &phi {
        psi -= DVector::from_column_slice(phi);
    }
    let method = MethodSpec::GeneralizedMallows {
        variant,
        sigma2: inputs.sigma2,
        phi,
    };
    solve_criterion(linalg::gram(&panel.f), psi, space, method)
}

/// Fills `loo` through `f^[−t] = (f − h·y)/(1 − h)` for linear candidates.
pub fn build_loo_forecasts(
    panel: &ForecastPanel,
    hat_diagonals: &DMatrix<f64>,
) -> Result<ForecastPanel> {
    if hat_diagonals.shape() != panel.f.shape() {
        return Err(Error::Dimension(format!(
            "hat diagonals are {}x{} but F is {}x{}",
            hat_diagonals.nrows(),
            hat_diagonals.ncols(),
            panel.f.nrows(),
            panel.f.ncols()
        )));
    }
    if let Some(&h) = hat_diagonals.iter().find(|&&h| !(h < 1.0)) {
        return Err(Error::Leverage(h));
    }
    if hat_diagonals.iter().any(|&h| h < 0.0) {
        return Err(Error::InvalidInput(
            "hat diagonals must be non-negative".into(),
        ));
    }
    let loo = DMatrix::from_fn(panel.t(), panel.s(), |t, s| {
        let h = hat_diagonals[(t, s)];
        (panel.f[(t, s)] - h * panel.y[t]) / (1.0 - h)
    });
    panel.clone().with_loo(loo)
}

/// Minimizes the leave-one-out criterion `‖y − F̄w‖²`.
pub fn fit_cv(panel: &ForecastPanel, space: WeightSpace) -> Result<WeightSolution> {
    let loo = panel.loo.as_ref().ok_or(Error::MissingLoo)?;
    let g = linalg::gram(loo);
    let b = loo.tr_mul(&panel.y);
    solve_criterion(g, -b, space, MethodSpec::CrossValidation)
}

/// Per-candidate maximum-likelihood variances `‖y − f_(s)‖²/T`.
pub fn candidate_variances(panel: &ForecastPanel) -> Vec<f64> {
    let t = panel.t() as f64;
    panel
        .f
        .column_iter()
        .map(|c| (&panel.y - c).norm_squared() / t)
        .collect()
}

/// Performance-based weights, computed in log space and max-shifted before
/// exponentiation. Always lands in the simplex.
pub fn fit_performance(
    q: &[f64],
    t: usize,
    sigma2: &[f64],
    family: &PerformanceFamily,
) -> Result<WeightSolution> {
    let tf = t as f64;
    let log_w: Vec<f64> = match family {
        PerformanceFamily::InverseLoss { loss } => {
            if loss.is_empty() || loss.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
                return Err(Error::InvalidInput(
                    "inverse-loss weights need positive finite losses".into(),
                ));
            }
            loss.iter().map(|&l| -math::ln(l)).collect()
        }
        _ => {
            let (log_a, b, c) = match *family {
                PerformanceFamily::General { a, b, c } => {
                    if !(a > 0.0 && b >= 0.0 && c <= 0.0)
                        || !(a.is_finite() && b.is_finite() && c.is_finite())
                    {
                        return Err(Error::InvalidInput(format!(
                            "need a > 0, b >= 0, c <= 0; got a = {a}, b = {b}, c = {c}"
                        )));
                    }
                    (math::ln(a), b, c)
                }
                PerformanceFamily::SmoothedAic => (-1.0, 0.0, -0.5 * tf),
                PerformanceFamily::SmoothedBic => (-0.5 * math::ln(tf), 0.0, -0.5 * tf),
                PerformanceFamily::InverseLoss { .. } => unreachable!(),
            };
            if sigma2.is_empty() || q.len() != sigma2.len() {
                return Err(Error::Dimension(format!(
                    "{} parameter counts for {} variances",
                    q.len(),
                    sigma2.len()
                )));
            }
            if sigma2.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::InvalidInput(
                    "candidate variances must be positive and finite".into(),
                ));
            }
            q.iter()
                .zip(sigma2)
                .map(|(&qs, &s2)| {
                    let df_term = if b == 0.0 {
                        0.0
                    } else if tf - qs > 0.0 {
                        b * math::ln(tf - qs)
                    } else {
                        f64::NEG_INFINITY
                    };
                    qs * log_a + df_term + c * math::ln(s2)
                })
                .collect()
        }
    };
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::InvalidInput(
            "every candidate received zero weight".into(),
        ));
    }
    let raw: Vec<f64> = log_w.iter().map(|&l| math::exp(l - top)).collect();
    let total = linalg::pairwise_sum(&raw);
    let weights = raw.iter().map(|r| r / total).collect();
    let mut sol = WeightSolution::new(
        weights,
        WeightSpace::D,
        MethodSpec::Performance {
            family: family.clone(),
        },
    );
    sol.unique_certified = Some(true);
    Ok(sol)
}

/// `M = T⁻¹(y1ᵀ − F)ᵀ(y1ᵀ − F)`, the second-moment matrix of forecast errors.
pub fn error_moment_matrix(panel: &ForecastPanel) -> DMatrix<f64> {
    let e = DMatrix::from_fn(panel.t(), panel.s(), |t, s| panel.y[t] - panel.f[(t, s)]);
    linalg::gram(&e) / panel.t() as f64
}

/// Number of eigenvalues within `1e-9·λ_max` of the smallest one.
pub fn bottom_multiplicity(spec: &SpectralDecomposition) -> usize {
    let tol = 1e-9 * spec.lambda_max().abs();
    spec.eigenvalues
        .iter()
        .filter(|&&l| l - spec.lambda_min() <= tol)
        .count()
}

/// Unit eigenvector of the smallest eigenvalue of `M`; `nu` carries that
/// eigenvalue. A repeated bottom eigenvalue is reported through
/// `unique_certified = false` with a deterministic representative.
pub fn fit_eigenvector(panel: &ForecastPanel) -> Result<WeightSolution> {
    let spec = SpectralDecomposition::new(&error_moment_matrix(panel))?;
    let w = spec.eigenvectors.column(0);
    let mut sol = WeightSolution::new(
        w.iter().copied().collect(),
        WeightSpace::E,
        MethodSpec::Eigenvector,
    );
    sol.multipliers.nu = Some(spec.lambda_min());
    sol.unique_certified = Some(bottom_multiplicity(&spec) == 1);
    Ok(sol)
}

/// Unconstrained minimizer of `‖y − Fw‖²` plus the soft penalty of `flavor`:
/// `−μᵀw − νᵀ(1 − w)` for C, `λ1ᵀw − μᵀw` for D, `λwᵀw` for E.
/// Empty `mu`/`nu` mean zero vectors.
pub fn fit_soft_penalized(
    panel: &ForecastPanel,
    lambda: f64,
    mu: &[f64],
    nu: &[f64],
    flavor: PenaltyFlavor,
) -> Result<WeightSolution> {
    let s = panel.s();
    let expand = |v: &[f64], name: &str| -> Result<DVector<f64>> {
        match v.len() {
            0 => Ok(DVector::zeros(s)),
            n if n == s && v.iter().all(|&x| x >= 0.0 && x.is_finite()) => {
                Ok(DVector::from_column_slice(v))
            }
            _ => Err(Error::InvalidInput(format!(
                "{name} must be empty or hold {s} non-negative entries"
            ))),
        }
    };
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let mu_v = expand(mu, "mu")?;
    let nu_v = expand(nu, "nu")?;
    let mut h = linalg::gram(&panel.f) * 2.0;
    let mut g = panel.f.tr_mul(&panel.y) * -2.0;
    match flavor {
        PenaltyFlavor::C => g -= &mu_v - &nu_v,
        PenaltyFlavor::D => g += DVector::from_element(s, lambda) - &mu_v,
        PenaltyFlavor::E => {
            for i in 0..s {
                h[(i, i)] += 2.0 * lambda;
            }
        }
    }
    let obj = QuadraticObjective::new(h, g, 0.0)?;
    let w = kernel::solve_equality_qp(&obj, false)?.w;
    let method = MethodSpec::SoftPenalized {
        lambda,
        mu: mu_v.as_slice().to_vec(),
        nu: nu_v.as_slice().to_vec(),
        flavor,
    };
    let mut sol = WeightSolution::new(w.as_slice().to_vec(), WeightSpace::A, method);
    sol.unique_certified = Some(true);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use nalgebra::dvector;

    /// Six observations, two candidates; frozen fixture.
    fn fixture() -> ForecastPanel {
        let y = dvector![1.0, 2.1, 2.9, 4.2, 5.1, 5.8];
        let f = DMatrix::from_row_slice(
            6,
            2,
            &[1.3, 0.6, 2.4, 1.7, 3.5, 2.2, 4.6, 3.9, 5.2, 4.5, 6.6, 5.1],
        );
        ForecastPanel::new(y, f).unwrap()
    }

    fn ssr(panel: &ForecastPanel, w: &[f64]) -> f64 {
        (&panel.y - &panel.f * DVector::from_column_slice(w)).norm_squared()
    }

    /// Grid over the 2-simplex `(u, 1−u)` at resolution 1e-5.
    fn simplex_grid_argmin(obj: impl Fn(&[f64]) -> f64) -> [f64; 2] {
        let mut best = (0.0, f64::INFINITY);
        for i in 0..=100_000 {
            let u = i as f64 * 1e-5;
            let v = obj(&[u, 1.0 - u]);
            if v < best.1 {
                best = (u, v);
            }
        }
        [best.0, 1.0 - best.0]
    }

    #[test]
    fn perfect_single_forecast() {
        let y = dvector![1.0, -2.0, 0.5];
        let p =
            ForecastPanel::new(y.clone(), DMatrix::from_column_slice(3, 1, y.as_slice())).unwrap();
        let s = fit_regression(&p, WeightSpace::A).unwrap();
        assert!((s.weights[0] - 1.0).abs() < 1e-14);
        assert!(ssr(&p, &s.weights) < 1e-26);
    }

    #[test]
    fn exact_fit_ignores_noise_column() {
        let y = dvector![1.0, -2.0, 0.5, 3.0];
        let u = [0.3, 0.9, -1.2, 0.4];
        let mut f = DMatrix::zeros(4, 2);
        f.set_column(0, &y);
        f.set_column(1, &DVector::from_column_slice(&u));
        let s = fit_regression(&ForecastPanel::new(y, f).unwrap(), WeightSpace::A).unwrap();
        assert!((s.weights[0] - 1.0).abs() < 1e-12 && s.weights[1].abs() < 1e-12);
    }

    #[test]
    fn regression_d_matches_grid_oracle() {
        let p = fixture();
        let s = fit_regression(&p, WeightSpace::D).unwrap();
        let o = simplex_grid_argmin(|w| ssr(&p, w));
        assert!(
            (s.weights[0] - o[0]).abs() <= 2e-5,
            "{:?} vs {o:?}",
            s.weights
        );
        assert!(
            (s.weights[0] - 0.533_898_305_084_744_9).abs() < 1e-12,
            "{:?}",
            s.weights
        );
    }

    #[test]
    fn intercept_space_is_unbiased() {
        let p = fixture();
        let s = fit_regression(&p, WeightSpace::Aprime).unwrap();
        let r = &p.y - s.predict(&p.f);
        assert!(r.sum().abs() <= 1e-8 * p.y.norm());
    }

    #[test]
    fn sigma2_examples() {
        let y = dvector![1.0, 2.0, 3.0];
        let p =
            ForecastPanel::new(y.clone(), DMatrix::from_column_slice(3, 1, y.as_slice())).unwrap();
        assert!(estimate_sigma2(&p).unwrap() < 1e-28);
        let p = ForecastPanel::new(
            dvector![1.0, -1.0, 0.0],
            DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1.0]),
        )
        .unwrap();
        assert!((estimate_sigma2(&p).unwrap() - 1.0).abs() < 1e-15);
        // two-pass residual: Gram–Schmidt projection of y
        let p = fixture();
        let (a, b) = (p.f.column(0).into_owned(), p.f.column(1).into_owned());
        let q1 = &a / a.norm();
        let b2 = &b - &q1 * q1.dot(&b);
        let q2 = &b2 / b2.norm();
        let r = &p.y - &q1 * q1.dot(&p.y) - &q2 * q2.dot(&p.y);
        assert!((estimate_sigma2(&p).unwrap() - r.norm_squared() / 4.0).abs() < 1e-12);
        assert!(estimate_sigma2(
            &ForecastPanel::new(dvector![1.0, 2.0], DMatrix::identity(2, 2)).unwrap()
        )
        .is_err());
    }

    #[test]
    fn mallows_d_matches_grid_oracle() {
        let p = fixture();
        let inputs = MallowsInputs {
            sigma2: 1.0,
            k: vec![2.0, 3.0],
            phi: None,
        };
        let s =
            fit_generalized_mallows(&p, &inputs, MallowsVariant::Mallows, WeightSpace::D).unwrap();
        let crit = |w: &[f64]| ssr(&p, w) + 2.0 * (2.0 * w[0] + 3.0 * w[1]);
        let o = simplex_grid_argmin(crit);
        assert!(
            (s.weights[0] - o[0]).abs() <= 2e-5,
            "{:?} vs {o:?}",
            s.weights
        );
        assert!(
            (s.weights[0] - 0.703_389_830_508_473_1).abs() < 1e-12,
            "{:?}",
            s.weights
        );
    }

    #[test]
    fn mallows_collapses_and_kl_needs_phi() {
        let p = fixture();
        for space in [
            WeightSpace::A,
            WeightSpace::B,
            WeightSpace::C,
            WeightSpace::D,
            WeightSpace::E,
        ] {
            let reg = fit_regression(&p, space).unwrap();
            let ma = MallowsInputs {
                sigma2: 0.0,
                k: vec![7.0, 1.0],
                phi: None,
            };
            let m = fit_generalized_mallows(&p, &ma, MallowsVariant::Mallows, space).unwrap();
            assert_eq!(reg.weights, m.weights);
        }
        let bad = MallowsInputs {
            sigma2: 1.0,
            k: vec![1.0, 1.0],
            phi: None,
        };
        assert!(fit_generalized_mallows(&p, &bad, MallowsVariant::Kl, WeightSpace::A).is_err());
        assert!(
            fit_generalized_mallows(&p, &bad, MallowsVariant::Mallows, WeightSpace::Aprime)
                .is_err()
        );
    }

    #[test]
    fn loo_formula_examples() {
        let p = ForecastPanel::new(
            dvector![0.8, 0.1],
            DMatrix::from_column_slice(2, 1, &[1.0, 0.3]),
        )
        .unwrap();
        let zero = build_loo_forecasts(&p, &DMatrix::zeros(2, 1)).unwrap();
        assert_eq!(zero.loo.as_ref().unwrap(), &p.f);
        let half = build_loo_forecasts(&p, &DMatrix::from_element(2, 1, 0.5)).unwrap();
        assert!((half.loo.unwrap()[(0, 0)] - 1.2).abs() < 1e-15);
        assert!(matches!(
            build_loo_forecasts(&p, &DMatrix::from_element(2, 1, 1.0)),
            Err(Error::Leverage(_))
        ));
    }

    #[test]
    fn loo_matches_explicit_refit() {
        let x = [0.5, -1.2, 2.0, 0.3, 1.1];
        let y = dvector![1.1, -2.0, 3.7, 0.9, 2.5];
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        let beta = sxy / sxx;
        let f = DMatrix::from_fn(5, 1, |t, _| beta * x[t]);
        let h = DMatrix::from_fn(5, 1, |t, _| x[t] * x[t] / sxx);
        let p = build_loo_forecasts(&ForecastPanel::new(y.clone(), f).unwrap(), &h).unwrap();
        for t in 0..5 {
            let b_minus = (sxy - x[t] * y[t]) / (sxx - x[t] * x[t]);
            assert!((p.loo.as_ref().unwrap()[(t, 0)] - b_minus * x[t]).abs() < 1e-10);
        }
    }

    #[test]
    fn cv_examples() {
        let p = fixture();
        let same = p.clone().with_loo(p.f.clone()).unwrap();
        for space in [
            WeightSpace::A,
            WeightSpace::B,
            WeightSpace::C,
            WeightSpace::D,
            WeightSpace::E,
        ] {
            assert_eq!(
                fit_cv(&same, space).unwrap().weights,
                fit_regression(&p, space).unwrap().weights
            );
        }
        assert_eq!(fit_cv(&p, WeightSpace::A), Err(Error::MissingLoo));

        let loo = DMatrix::from_row_slice(
            6,
            2,
            &[1.5, 0.4, 2.2, 1.9, 3.8, 2.0, 4.3, 4.1, 5.5, 4.2, 6.9, 5.4],
        );
        let p = p.with_loo(loo.clone()).unwrap();
        let s = fit_cv(&p, WeightSpace::B).unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // ρ̄₀ = (1ᵀŵ − 1)/1ᵀG⁻¹1 with an explicit 2×2 inverse
        let g = loo.transpose() * &loo;
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let inv =
            DMatrix::from_row_slice(2, 2, &[g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]]) / det;
        let wa = &inv * loo.transpose() * &p.y;
        let ones = dvector![1.0, 1.0];
        let rho = (wa.sum() - 1.0) / ones.dot(&(&inv * &ones));
        let wb = wa - &inv * &ones * rho;
        assert!((s.w() - wb).amax() < 1e-10);
        assert!((s.multipliers.rho0.unwrap() - rho).abs() < 1e-8 * rho.abs().max(1.0));
    }

    #[test]
    fn performance_examples() {
        let inv = fit_performance(
            &[],
            10,
            &[],
            &PerformanceFamily::InverseLoss {
                loss: vec![1.0, 2.0],
            },
        )
        .unwrap();
        assert!(
            (inv.weights[0] - 2.0 / 3.0).abs() < 1e-15
                && (inv.weights[1] - 1.0 / 3.0).abs() < 1e-15
        );
        let eq =
            fit_performance(&[2.0; 4], 50, &[1.5; 4], &PerformanceFamily::SmoothedBic).unwrap();
        assert!(eq.weights.iter().all(|&w| (w - 0.25).abs() < 1e-15));
        // AIC_s = T ln σ² + 2q with σ² = 1 gives AIC = {0, 2}
        let aic = fit_performance(
            &[0.0, 1.0],
            100,
            &[1.0, 1.0],
            &PerformanceFamily::SmoothedAic,
        )
        .unwrap();
        let e = (-1.0f64).exp();
        assert!((aic.weights[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((aic.weights[0] - 0.73106).abs() < 1e-5 && (aic.weights[1] - 0.26894).abs() < 1e-5);
        assert!(fit_performance(&[1.0], 10, &[0.0], &PerformanceFamily::SmoothedAic).is_err());
        assert!(fit_performance(
            &[],
            10,
            &[],
            &PerformanceFamily::InverseLoss {
                loss: vec![1.0, 0.0]
            }
        )
        .is_err());
    }

    #[test]
    fn bates_granger_is_inverse_unbiased_variance() {
        let w = fit_performance(
            &[1.0, 3.0],
            11,
            &[2.0, 1.0],
            &PerformanceFamily::bates_granger(),
        )
        .unwrap();
        let raw = [10.0 / 2.0, 8.0 / 1.0];
        assert!((w.weights[0] - raw[0] / (raw[0] + raw[1])).abs() < 1e-15);
    }

    #[test]
    fn eigenvector_examples() {
        let y = dvector![1.0, -0.5, 2.0, 0.3];
        let mut f = DMatrix::zeros(4, 2);
        f.set_column(0, &y);
        f.set_column(1, &dvector![0.7, 0.1, 1.5, 0.9]);
        let s = fit_eigenvector(&ForecastPanel::new(y.clone(), f).unwrap()).unwrap();
        assert!((s.weights[0] - 1.0).abs() < 1e-12 && s.weights[1].abs() < 1e-12);
        assert!(s.multipliers.nu.unwrap().abs() <= 1e-12);

        let single = ForecastPanel::new(
            y.clone(),
            DMatrix::from_column_slice(4, 1, &[0.1, 0.2, 0.3, 0.4]),
        )
        .unwrap();
        assert_eq!(fit_eigenvector(&single).unwrap().weights, vec![1.0]);

        let p = fixture();
        let m = error_moment_matrix(&p);
        let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
        let lambda = 0.5 * (a + c) - (0.25 * (a - c).powi(2) + b * b).sqrt();
        let v = dvector![b, lambda - a];
        let v = if v[0] < 0.0 {
            -&v / v.norm()
        } else {
            &v / v.norm()
        };
        let s = fit_eigenvector(&p).unwrap();
        assert!((s.w() - v).amax() < 1e-12);
        assert!((s.multipliers.nu.unwrap() - lambda).abs() < 1e-12);
    }

    #[test]
    fn soft_penalty_examples() {
        let p = fixture();
        let ridge0 = fit_soft_penalized(&p, 0.0, &[], &[], PenaltyFlavor::E).unwrap();
        let a = fit_regression(&p, WeightSpace::A).unwrap();
        assert!((ridge0.w() - a.w()).amax() < 1e-10);
        let heavy = fit_soft_penalized(&p, 1e8, &[], &[], PenaltyFlavor::E).unwrap();
        assert!(heavy.w().norm() <= 1e-3);

        let d = fit_soft_penalized(&p, 1.0, &[], &[], PenaltyFlavor::D).unwrap();
        let g = p.f.transpose() * &p.f;
        let rhs = p.f.transpose() * &p.y - dvector![0.5, 0.5];
        let lu = g.lu().solve(&rhs).unwrap();
        assert!((d.w() - lu).amax() < 1e-10);
    }
}
