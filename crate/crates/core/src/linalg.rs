//! Dense linear-algebra helpers shared by the solvers.

use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest one count as singular.
pub const DEGENERACY_RATIO: f64 = 1e-10;

/// Symmetric eigendecomposition with ascending eigenvalues and
/// sign-normalized eigenvectors (columns of `q`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Output is deterministic for identical input: eigenpairs are sorted
    /// ascending (stable on ties) and each vector's first nonzero entry is positive.
    pub fn new(h: &DMatrix<f64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Dimension(alloc::format!(
                "expected a square matrix, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        let n = h.nrows();
        let sym = symmetrize(h);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).into_owned();
            normalize_sign(&mut col);
            eigenvectors.set_column(dst, &col);
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Strict convexity in the sense used by every solver here.
    pub fn is_positive_definite(&self) -> bool {
        let lo = self.lambda_min();
        lo > 0.0 && lo > DEGENERACY_RATIO * self.lambda_max()
    }

    pub fn require_positive_definite(&self) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::Singular {
                lambda_min: self.lambda_min(),
                lambda_max: self.lambda_max(),
            })
        }
    }

    /// Rotates `v` into the eigenbasis.
    pub fn rotate(&self, v: &DVector<f64>) -> DVector<f64> {
        self.eigenvectors.tr_mul(v)
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        q * DMatrix::from_diagonal(&self.eigenvalues) * q.transpose()
    }
}

/// Flips `v` so that its first entry that is nonzero relative to the largest
/// magnitude is positive.
pub fn normalize_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

pub fn symmetrize(h: &DMatrix<f64>) -> DMatrix<f64> {
    (h + h.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// `FᵀF`, symmetrized so downstream eigen solvers see exact symmetry.
pub fn gram(f: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&f.tr_mul(f))
}

pub fn cholesky(h: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(h.clone()).ok_or_else(|| {
        let spec = SpectralDecomposition::new(h);
        match spec {
            Ok(s) => Error::Singular {
                lambda_min: s.lambda_min(),
                lambda_max: s.lambda_max(),
            },
            Err(e) => e,
        }
    })
}

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
