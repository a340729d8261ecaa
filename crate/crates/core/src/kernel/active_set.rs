//! Primal active-set method for the box and the simplex.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::{project_simplex, QuadraticObjective};
use crate::error::{Error, Result};
use crate::linalg;
use crate::types::WeightSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySolution {
    pub w: DVector<f64>,
    /// Sum-to-one multiplier (simplex only), signed as in `Hw + g − ρ1 − μ + κ = 0`.
    pub rho: Option<f64>,
    /// Lower-bound multipliers μ ≥ 0.
    pub lower: DVector<f64>,
    /// Upper-bound multipliers κ ≥ 0; identically zero on the simplex.
    pub upper: DVector<f64>,
    /// Zero-based indices held at a bound, ascending.
    pub active_set: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Free,
    Lower,
    Upper,
}

/// Minimizes `½wᵀHw + gᵀw` over the unit box (C) or the simplex (D).
///
/// Starts from the projection of the unconstrained minimizer, adds the
/// lowest-index blocking bound on each partial step and releases the bound
/// with the most negative multiplier. After a fixed number of iterations the
/// release rule switches to lowest index first, which rules out cycling.
pub fn solve_inequality_qp(
    obj: &QuadraticObjective,
    space: WeightSpace,
) -> Result<InequalitySolution> {
    let simplex = match space {
        WeightSpace::C => false,
        WeightSpace::D => true,
        other => {
            return Err(Error::UnsupportedSpace {
                method: "inequality QP",
                space: other.as_str(),
            })
        }
    };
    obj.certify_convex()?;
    let n = obj.dim();
    let unconstrained = -linalg::cholesky(&obj.h)?.solve(&obj.g);
    let mut w = if simplex {
        project_simplex(&unconstrained)
    } else {
        unconstrained.map(|x| x.clamp(0.0, 1.0))
    };
    let mut status: Vec<Status> = w
        .iter()
        .map(|&x| {
            if x <= 0.0 {
                Status::Lower
            } else if !simplex && x >= 1.0 {
                Status::Upper
            } else {
                Status::Free
            }
        })
        .collect();

    let scale = 1.0 + obj.g.amax() + obj.h.amax();
    let mult_tol = 1e-11 * scale;
    let cap = 50 + 20 * n;
    let bland_after = 10 + 5 * n;

    for iter in 0..cap {
        let free: Vec<usize> = (0..n).filter(|&i| status[i] == Status::Free).collect();
        let z = subspace_minimizer(obj, &w, &free, simplex)?;

        let mut alpha = 1.0;
        let mut blocker = None;
        for (k, &i) in free.iter().enumerate() {
            if z[k] < 0.0 {
                let a = w[i] / (w[i] - z[k]);
                if a < alpha {
                    alpha = a;
                    blocker = Some((i, Status::Lower));
                }
            } else if !simplex && z[k] > 1.0 {
                let a = (1.0 - w[i]) / (z[k] - w[i]);
                if a < alpha {
                    alpha = a;
                    blocker = Some((i, Status::Upper));
                }
            }
        }

        if let Some((i, bound)) = blocker {
            for (k, &j) in free.iter().enumerate() {
                w[j] += alpha * (z[k] - w[j]);
            }
            w[i] = if bound == Status::Upper { 1.0 } else { 0.0 };
            status[i] = bound;
            continue;
        }
        for (k, &j) in free.iter().enumerate() {
            w[j] = z[k];
        }

        let r = obj.gradient(&w);
        let rho = if simplex && !free.is_empty() {
            free.iter().map(|&i| r[i]).sum::<f64>() / free.len() as f64
        } else {
            0.0
        };
        let mut lower = DVector::zeros(n);
        let mut upper = DVector::zeros(n);
        let mut release: Option<(usize, f64)> = None;
        let bland = iter >= bland_after;
        for i in 0..n {
            let m = match status[i] {
                Status::Free => continue,
                Status::Lower => {
                    lower[i] = r[i] - rho;
                    lower[i]
                }
                Status::Upper => {
                    upper[i] = rho - r[i];
                    upper[i]
                }
            };
            if m < -mult_tol {
                let better = match release {
                    None => true,
                    Some((_, best)) => !bland && m < best,
                };
                if better {
                    release = Some((i, m));
                }
            }
        }
        match release {
            Some((i, _)) => status[i] = Status::Free,
            None => {
                lower.iter_mut().for_each(|m| *m = m.max(0.0));
                upper.iter_mut().for_each(|m| *m = m.max(0.0));
                return Ok(InequalitySolution {
                    w,
                    rho: simplex.then_some(rho),
                    lower,
                    upper,
                    active_set: (0..n).filter(|&i| status[i] != Status::Free).collect(),
                    iterations: iter + 1,
                });
            }
        }
    }
    Err(Error::NoConvergence { iterations: cap })
}

/// Minimizer over the free coordinates with the others held at their current
/// bound values; on the simplex the free block carries the remaining mass.
fn subspace_minimizer(
    obj: &QuadraticObjective,
    w: &DVector<f64>,
    free: &[usize],
    simplex: bool,
) -> Result<DVector<f64>> {
    let m = free.len();
    if m == 0 {
        return Ok(DVector::zeros(0));
    }
    let n = obj.dim();
    let is_free = {
        let mut v = alloc::vec![false; n];
        free.iter().for_each(|&i| v[i] = true);
        v
    };
    let h_ff = DMatrix::from_fn(m, m, |a, b| obj.h[(free[a], free[b])]);
    let mut c = DVector::from_fn(m, |a, _| obj.g[free[a]]);
    let mut fixed_mass = 0.0;
    for j in (0..n).filter(|&j| !is_free[j]) {
        if w[j] != 0.0 {
            fixed_mass += w[j];
            for a in 0..m {
                c[a] += obj.h[(free[a], j)] * w[j];
            }
        }
    }
    let chol = linalg::cholesky(&h_ff)?;
    let u = chol.solve(&c);
    if !simplex {
        return Ok(-u);
    }
    let v = chol.solve(&DVector::from_element(m, 1.0));
    let lambda = -((1.0 - fixed_mass) + u.sum()) / v.sum();
    Ok(-(u + v * lambda))
}
