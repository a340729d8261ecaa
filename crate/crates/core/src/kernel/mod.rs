//! Geometry and solvers for the weight spaces.
//!
//! Every solver minimizes `½wᵀHw + gᵀw + c`. The sum-to-one multiplier enters
//! the equality solver as `Hw + g + ρ1 = 0` and the inequality solver as
//! `Hw + g − ρ1 − μ + κ = 0`.

mod active_set;
mod sphere;

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

pub use active_set::{solve_inequality_qp, InequalitySolution};
pub use sphere::{
    certify_interior_uniqueness, secular, solve_unit_norm, InteriorCheck, SphereSolution,
};

use crate::error::{Error, Result};
use crate::linalg::{self, SpectralDecomposition};
use crate::types::WeightSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    pub h: DMatrix<f64>,
    pub g: DVector<f64>,
    pub constant: f64,
}

impl QuadraticObjective {
    /// `h` must be symmetric to 1e-12 relative to its largest entry; it is
    /// stored exactly symmetrized.
    pub fn new(h: DMatrix<f64>, g: DVector<f64>, constant: f64) -> Result<Self> {
        if !h.is_square() || h.nrows() != g.len() || g.is_empty() {
            return Err(Error::Dimension(format!(
                "H is {}x{} but g has length {}",
                h.nrows(),
                h.ncols(),
                g.len()
            )));
        }
        if h.iter().chain(g.iter()).any(|v| !v.is_finite()) || !constant.is_finite() {
            return Err(Error::NonFinite("objective"));
        }
        let asym = (&h - h.transpose()).amax();
        if asym > 1e-12 * h.amax().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "H is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Self {
            h: linalg::symmetrize(&h),
            g,
            constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn value(&self, w: &DVector<f64>) -> f64 {
        0.5 * w.dot(&(&self.h * w)) + self.g.dot(w) + self.constant
    }

    pub fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.h * w + &self.g
    }

    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::new(&self.h)
    }

    /// Eigendecomposition of `H`, or an error carrying `λ_min` when `H` is not
    /// safely positive definite.
    pub fn certify_convex(&self) -> Result<SpectralDecomposition> {
        let s = self.spectral()?;
        s.require_positive_definite()?;
        Ok(s)
    }
}

/// Euclidean projection onto `space`. `Aprime` behaves like `A`.
pub fn project(v: &DVector<f64>, space: WeightSpace) -> Result<DVector<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("vector"));
    }
    Ok(match space {
        WeightSpace::A | WeightSpace::Aprime => v.clone(),
        WeightSpace::B => {
            let shift = (v.sum() - 1.0) / v.len() as f64;
            v.add_scalar(-shift)
        }
        WeightSpace::C => v.map(|x| x.clamp(0.0, 1.0)),
        WeightSpace::D => project_simplex(v),
        WeightSpace::E => {
            let n = v.norm();
            if n == 0.0 {
                return Err(Error::ZeroProjection);
            }
            v / n
        }
    })
}

/// Sorting-based projection onto the probability simplex.
pub fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualitySolution {
    pub w: DVector<f64>,
    /// Multiplier of `1ᵀw = 1` in `Hw + g + ρ1 = 0`; `None` without the constraint.
    pub rho: Option<f64>,
}

/// Closed-form minimizer over ℝ^S or over the sum-to-one hyperplane.
pub fn solve_equality_qp(obj: &QuadraticObjective, sum_to_one: bool) -> Result<EqualitySolution> {
    obj.certify_convex()?;
    let chol = linalg::cholesky(&obj.h)?;
    let u = chol.solve(&obj.g);
    if !sum_to_one {
        return Ok(EqualitySolution { w: -u, rho: None });
    }
    let v = chol.solve(&DVector::from_element(obj.dim(), 1.0));
    let rho = -(1.0 + u.sum()) / v.sum();
    let w = -(u + &v * rho);
    Ok(EqualitySolution { w, rho: Some(rho) })
}
