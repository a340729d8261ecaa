//! Minimization over the unit sphere through the secular equation
//! `f(ν) = Σ b̃ᵢ²/(λᵢ − ν)² = 1`, `b = −g`, `b̃ = Qᵀb`.

use alloc::vec::Vec;
use nalgebra::DVector;

use super::QuadraticObjective;
use crate::error::{Error, Result};
use crate::linalg::SpectralDecomposition;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSolution {
    pub w: DVector<f64>,
    /// Root ν₁ < λ_min with `(H − ν₁I)w = b`.
    pub nu: f64,
    /// `b` had no component on the bottom eigenspace; ν₁ = λ_min.
    pub hard_case: bool,
    pub iterations: usize,
}

pub fn secular(spec: &SpectralDecomposition, bt: &DVector<f64>, nu: f64) -> f64 {
    spec.eigenvalues
        .iter()
        .zip(bt.iter())
        .map(|(&l, &b)| {
            let r = b / (l - nu);
            r * r
        })
        .sum()
}

fn secular_slope(spec: &SpectralDecomposition, bt: &DVector<f64>, nu: f64) -> f64 {
    spec.eigenvalues
        .iter()
        .zip(bt.iter())
        .map(|(&l, &b)| {
            let d = l - nu;
            2.0 * b * b / (d * d * d)
        })
        .sum()
}

/// Global minimizer of `½wᵀHw + gᵀw` subject to `wᵀw = 1`.
///
/// The root is bracketed in `(λ_min − ‖b‖ − 1, λ_min − 1e-9(1 + |λ_min|))`
/// where `f` is increasing. Newton steps on `1/√f`, which is nearly linear in
/// ν, are taken when they stay inside the bracket; otherwise the bracket is bisected.
pub fn solve_unit_norm(obj: &QuadraticObjective) -> Result<SphereSolution> {
    let spec = obj.certify_convex()?;
    let b = -&obj.g;
    let bn = b.norm();
    if bn == 0.0 {
        return Err(Error::DegenerateRhs);
    }
    let bt = spec.rotate(&b);
    let lmin = spec.lambda_min();
    let f = |nu: f64| secular(&spec, &bt, nu);

    let mut lo = lmin - bn - 1.0;
    let mut eps = 1e-9;
    let mut hi = lmin - eps * (1.0 + lmin.abs());
    while f(hi) < 1.0 && eps > 1e-15 {
        eps *= 0.1;
        hi = lmin - eps * (1.0 + lmin.abs());
    }
    if f(hi) < 1.0 {
        return hard_case(&spec, &bt);
    }

    let mut nu = lo;
    let max_iter = 400;
    for iter in 0..max_iter {
        let fv = f(nu);
        if (fv - 1.0).abs() <= 1e-12 {
            return Ok(finish(&spec, &bt, nu, iter + 1));
        }
        if fv < 1.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        // φ(ν) = f^{-1/2} − 1 and φ' = −½ f^{-3/2} f'
        let step = (1.0 / math::sqrt(fv) - 1.0)
            / (0.5 * secular_slope(&spec, &bt, nu) / (fv * math::sqrt(fv)));
        let candidate = nu + step;
        nu = if candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
    }
    let fv = f(nu);
    if (fv - 1.0).abs() <= 1e-10 {
        Ok(finish(&spec, &bt, nu, max_iter))
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
        })
    }
}

fn finish(
    spec: &SpectralDecomposition,
    bt: &DVector<f64>,
    nu: f64,
    iterations: usize,
) -> SphereSolution {
    let coords = DVector::from_fn(bt.len(), |i, _| bt[i] / (spec.eigenvalues[i] - nu));
    let w = &spec.eigenvectors * coords;
    let w = &w / w.norm();
    SphereSolution {
        w,
        nu,
        hard_case: false,
        iterations,
    }
}

fn hard_case(spec: &SpectralDecomposition, bt: &DVector<f64>) -> Result<SphereSolution> {
    let lmin = spec.lambda_min();
    let tol = 1e-12 * (1.0 + spec.lambda_max().abs());
    let mut coords = DVector::zeros(bt.len());
    let mut bottom = Vec::new();
    for i in 0..bt.len() {
        let gap = spec.eigenvalues[i] - lmin;
        if gap <= tol {
            bottom.push(i);
        } else {
            coords[i] = bt[i] / gap;
        }
    }
    let rest = coords.norm_squared();
    if rest > 1.0 {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    coords[bottom[0]] = math::sqrt(1.0 - rest);
    let w = &spec.eigenvectors * coords;
    let w = &w / w.norm();
    Ok(SphereSolution {
        w,
        nu: lmin,
        hard_case: true,
        iterations: 0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorCheck {
    /// `f > 1` throughout `(λ_min, λ_max)`, so the sphere minimizer is unique.
    pub certified: bool,
    /// Smallest value of `f` found on the interval (`+∞` when it is empty).
    pub min_value: f64,
    pub note: Option<&'static str>,
}

/// Checks that `f(ν) > 1` on the open spectral interval, segment by segment
/// between poles. `f` is convex on each segment, so a dense grid with
/// geometric refinement toward both ends followed by golden-section search
/// locates each segment minimum.
pub fn certify_interior_uniqueness(obj: &QuadraticObjective) -> InteriorCheck {
    let spec = match obj.spectral() {
        Ok(s) if s.is_positive_definite() => s,
        _ => {
            return InteriorCheck {
                certified: false,
                min_value: f64::NAN,
                note: Some("quadratic term is not positive definite"),
            }
        }
    };
    let bt = spec.rotate(&(-&obj.g));
    let lmin = spec.lambda_min();
    let lmax = spec.lambda_max();
    let tie = 1e-12 * lmax.abs().max(1.0);
    if lmax - lmin <= tie {
        return InteriorCheck {
            certified: true,
            min_value: f64::INFINITY,
            note: Some("empty spectral interval"),
        };
    }

    let mut breaks: Vec<f64> = alloc::vec![lmin];
    let n = spec.dim();
    let mut i = 0;
    while i < n {
        let mut j = i;
        let mut mass = 0.0;
        while j < n && spec.eigenvalues[j] - spec.eigenvalues[i] <= tie {
            mass += bt[j] * bt[j];
            j += 1;
        }
        let l = spec.eigenvalues[i];
        if mass > 0.0 && l - lmin > tie && lmax - l > tie {
            breaks.push(l);
        }
        i = j;
    }
    breaks.push(lmax);

    let f = |nu: f64| secular(&spec, &bt, nu);
    let mut min_value = f64::INFINITY;
    for seg in breaks.windows(2) {
        min_value = min_value.min(segment_minimum(&f, seg[0], seg[1]));
    }
    if (min_value - 1.0).abs() <= 1e-9 {
        InteriorCheck {
            certified: false,
            min_value,
            note: Some("inconclusive: minimum is within 1e-9 of 1"),
        }
    } else {
        InteriorCheck {
            certified: min_value > 1.0,
            min_value,
            note: None,
        }
    }
}

fn segment_minimum(f: &impl Fn(f64) -> f64, a: f64, c: f64) -> f64 {
    let width = c - a;
    let mut pts: Vec<f64> = Vec::with_capacity(10_000);
    for k in 1..5000 {
        pts.push(a + width * k as f64 / 5000.0);
    }
    for k in 0..2500 {
        let r = math::powf(10.0, -1.0 - 11.0 * k as f64 / 2499.0);
        pts.push(a + width * r);
        pts.push(c - width * r);
    }
    pts.retain(|&p| p > a && p < c);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.is_empty() {
        return f64::INFINITY;
    }
    let vals: Vec<f64> = pts.iter().map(|&p| f(p)).collect();
    let (k, _) = vals.iter().enumerate().filter(|(_, v)| v.is_finite()).fold(
        (0, f64::INFINITY),
        |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
    );
    let mut lo = if k == 0 { pts[0] } else { pts[k - 1] };
    let mut hi = if k + 1 == pts.len() {
        pts[k]
    } else {
        pts[k + 1]
    };
    let ratio = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= 1e-15 * (lo.abs() + hi.abs()) {
            break;
        }
    }
    vals[k].min(f1).min(f2)
}
