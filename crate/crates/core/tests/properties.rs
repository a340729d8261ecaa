mod common;

use common::{panel, ssr_of};
use proptest::prelude::*;
use weightscape_core::conformal::conformal_quantile;
use weightscape_core::estimators::{
    candidate_variances, error_moment_matrix, fit_cv, fit_eigenvector, fit_generalized_mallows,
    fit_performance, fit_regression, MallowsInputs,
};
use weightscape_core::kernel::project;
use weightscape_core::linalg::gram;
use weightscape_core::{DVector, MallowsVariant, PerformanceFamily, WeightSolution, WeightSpace};

const SPACES: [WeightSpace; 5] = [
    WeightSpace::A,
    WeightSpace::B,
    WeightSpace::C,
    WeightSpace::D,
    WeightSpace::E,
];

fn fixture() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 12usize..40, 2usize..6)
}

fn ssr(sol: &WeightSolution, p: &weightscape_core::ForecastPanel) -> f64 {
    ssr_of(p, &sol.weights, sol.intercept)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent_and_feasible(v in prop::collection::vec(-5.0f64..5.0, 1..8)) {
        let v = DVector::from_vec(v);
        for space in SPACES {
            let Ok(p) = project(&v, space) else { continue };
            prop_assert!(space.is_feasible(p.as_slice()), "{space}: {p}");
            let pp = project(&p, space).unwrap();
            prop_assert!((&pp - &p).amax() <= 1e-12, "{space}");
        }
    }

    #[test]
    fn regression_ssr_follows_space_nesting((seed, t, s) in fixture()) {
        let p = panel(seed, t, s);
        let fit = |space| fit_regression(&p, space).unwrap();
        let [a, ap, b, c, d, e] = [
            WeightSpace::A, WeightSpace::Aprime, WeightSpace::B,
            WeightSpace::C, WeightSpace::D, WeightSpace::E,
        ].map(|sp| ssr(&fit(sp), &p));
        let slack = 1e-9 * a.max(1.0);
        prop_assert!(ap <= a + slack);
        prop_assert!(a <= b + slack && b <= d + slack);
        prop_assert!(a <= c + slack && c <= d + slack);
        prop_assert!(a <= e + slack);
    }

    #[test]
    fn constrained_solutions_satisfy_kkt((seed, t, s) in fixture(), mallows in any::<bool>()) {
        let p = panel(seed, t, s);
        let k: Vec<f64> = (1..=s).map(|i| i as f64).collect();
        let g = gram(&p.f);
        let mut psi = -p.f.tr_mul(&p.y);
        if mallows {
            psi += DVector::from_column_slice(&k) * 0.5;
        }
        for space in [WeightSpace::B, WeightSpace::C, WeightSpace::D] {
            let sol = if mallows {
                let inputs = MallowsInputs { sigma2: 0.5, k: k.clone(), phi: None };
                fit_generalized_mallows(&p, &inputs, MallowsVariant::Mallows, space).unwrap()
            } else {
                fit_regression(&p, space).unwrap()
            };
            prop_assert!(space.is_feasible(&sol.weights));
            let w = sol.w();
            let m = &sol.multipliers;
            let mut resid = &g * &w + &psi;
            if let Some(r0) = m.rho0 {
                resid.add_scalar_mut(r0);
            }
            for i in 0..s {
                let lower = m.lower.as_ref().map_or(0.0, |l| l[i]);
                let upper = m.upper.as_ref().map_or(0.0, |u| u[i]);
                prop_assert!(lower >= -1e-9 && upper >= -1e-9);
                prop_assert!(lower * w[i] <= 1e-7 * (1.0 + lower));
                prop_assert!(upper * (1.0 - w[i]) <= 1e-7 * (1.0 + upper));
                resid[i] += upper - lower;
            }
            let scale = 1.0 + g.amax() + psi.amax();
            prop_assert!(resid.amax() <= 1e-8 * scale, "{space}: {}", resid.amax());
            for &i in &sol.active_set {
                prop_assert!(w[i].abs() <= 1e-12 || (w[i] - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn criteria_collapse_onto_each_other((seed, t, s) in fixture()) {
        let p = panel(seed, t, s);
        let k = vec![1.0; s];
        let loo = p.clone().with_loo(p.f.clone()).unwrap();
        for space in SPACES {
            let reg = fit_regression(&p, space).unwrap().weights;
            let ma0 = fit_generalized_mallows(
                &p, &MallowsInputs { sigma2: 0.0, k: k.clone(), phi: None },
                MallowsVariant::Mallows, space,
            ).unwrap().weights;
            let ma = fit_generalized_mallows(
                &p, &MallowsInputs { sigma2: 0.7, k: k.clone(), phi: None },
                MallowsVariant::Mallows, space,
            ).unwrap().weights;
            let kl = fit_generalized_mallows(
                &p, &MallowsInputs { sigma2: 0.7, k: k.clone(), phi: Some(vec![0.0; s]) },
                MallowsVariant::Kl, space,
            ).unwrap().weights;
            let cv = fit_cv(&loo, space).unwrap().weights;
            let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(dist(&reg, &ma0) <= 1e-10, "{space}");
            prop_assert!(dist(&ma, &kl) <= 1e-10, "{space}");
            prop_assert!(dist(&reg, &cv) <= 1e-10, "{space}");
        }
    }

    #[test]
    fn performance_weights_lie_on_the_simplex((seed, t, s) in fixture(), bic in any::<bool>()) {
        let p = panel(seed, t, s);
        let q: Vec<f64> = (0..s).map(|i| ((seed >> i) % 7 + 1) as f64).collect();
        let family = if bic { PerformanceFamily::SmoothedBic } else { PerformanceFamily::SmoothedAic };
        let sol = fit_performance(&q, p.t(), &candidate_variances(&p), &family).unwrap();
        prop_assert!(WeightSpace::D.is_feasible(&sol.weights));
    }

    #[test]
    fn eigenvector_weights_solve_the_eigenproblem((seed, t, s) in fixture()) {
        let p = panel(seed, t, s);
        let sol = fit_eigenvector(&p).unwrap();
        let m = error_moment_matrix(&p);
        let w = sol.w();
        let lambda = sol.multipliers.nu.unwrap();
        let lmax = m.symmetric_eigenvalues().max();
        prop_assert!((&m * &w - &w * lambda).amax() <= 1e-10 * (1.0 + lmax));
        prop_assert!((w.norm() - 1.0).abs() <= 1e-10);
        let first = w.iter().find(|x| x.abs() > 1e-12).unwrap();
        prop_assert!(*first > 0.0);
    }

    #[test]
    fn fits_are_deterministic((seed, t, s) in fixture()) {
        let p = panel(seed, t, s);
        for space in SPACES {
            prop_assert_eq!(fit_regression(&p, space).unwrap(), fit_regression(&p, space).unwrap());
        }
    }

    #[test]
    fn conformal_quantile_grows_with_coverage(
        r in prop::collection::vec(0.0f64..10.0, 1..60),
        a1 in 0.01f64..0.99,
        a2 in 0.01f64..0.99,
    ) {
        let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
        let q_lo = conformal_quantile(&r, lo).unwrap();
        let q_hi = conformal_quantile(&r, hi).unwrap();
        prop_assert!(q_hi <= q_lo);
        prop_assert!(q_hi.is_infinite() || r.contains(&q_hi));
    }
}
