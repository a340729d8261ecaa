//! Shared data model: panels, weight spaces, method descriptors and solutions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, DVector};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target series plus candidate forecasts.
///
/// Row `t` of `f` holds the S candidate forecasts of `y[t]`; `loo` holds their
/// leave-one-out counterparts when available.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastPanel {
    pub y: DVector<f64>,
    pub f: DMatrix<f64>,
    pub loo: Option<DMatrix<f64>>,
    /// Effective parameter count per candidate.
    pub q: Option<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl ForecastPanel {
    pub fn new(y: DVector<f64>, f: DMatrix<f64>) -> Result<Self> {
        Self {
            y,
            f,
            loo: None,
            q: None,
            labels: None,
        }
        .validated()
    }

    pub fn with_loo(mut self, loo: DMatrix<f64>) -> Result<Self> {
        self.loo = Some(loo);
        self.validated()
    }

    pub fn with_q(mut self, q: Vec<f64>) -> Result<Self> {
        self.q = Some(q);
        self.validated()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        self.labels = Some(labels);
        self.validated()
    }

    pub fn t(&self) -> usize {
        self.y.len()
    }

    pub fn s(&self) -> usize {
        self.f.ncols()
    }

    pub fn validated(self) -> Result<Self> {
        validate_panel(&self)?;
        Ok(self)
    }
}

/// Checks every panel invariant.
pub fn validate_panel(panel: &ForecastPanel) -> Result<()> {
    let t = panel.y.len();
    if t < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 observations, got {t}"
        )));
    }
    if panel.f.nrows() != t {
        return Err(Error::Dimension(format!(
            "y has {t} rows but F has {}",
            panel.f.nrows()
        )));
    }
    if panel.f.ncols() == 0 {
        return Err(Error::InvalidInput(
            "need at least one candidate forecast".into(),
        ));
    }
    if panel.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("y"));
    }
    if panel.f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("F"));
    }
    if let Some(loo) = &panel.loo {
        if loo.shape() != panel.f.shape() {
            return Err(Error::Dimension(format!(
                "loo is {}x{} but F is {}x{}",
                loo.nrows(),
                loo.ncols(),
                panel.f.nrows(),
                panel.f.ncols()
            )));
        }
        if loo.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("loo"));
        }
    }
    if let Some(q) = &panel.q {
        if q.len() != panel.s() {
            return Err(Error::Dimension(format!(
                "q has {} entries for {} candidates",
                q.len(),
                panel.s()
            )));
        }
        if q.iter().any(|&v| !v.is_finite() || v < 0.0 || v > t as f64) {
            return Err(Error::InvalidInput(format!(
                "q entries must lie in [0, {t}]"
            )));
        }
    }
    if let Some(labels) = &panel.labels {
        if labels.len() != panel.s() {
            return Err(Error::Dimension(format!(
                "{} labels for {} candidates",
                labels.len(),
                panel.s()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum WeightSpace {
    /// All of ℝ^S.
    A,
    /// ℝ^S with a free intercept in the criterion.
    Aprime,
    /// Sum-to-one hyperplane.
    B,
    /// Unit box `[0,1]^S`.
    C,
    /// Probability simplex.
    D,
    /// Unit sphere.
    E,
}

impl WeightSpace {
    pub const ALL: [WeightSpace; 6] = [Self::A, Self::Aprime, Self::B, Self::C, Self::D, Self::E];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::Aprime => "Aprime",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
            Self::E => "E",
        }
    }

    pub fn has_sum_to_one(self) -> bool {
        matches!(self, Self::B | Self::D)
    }

    /// Feasibility at the solution tolerances: 1e-10 on sums and norms,
    /// 1e-12 on bounds.
    pub fn is_feasible(self, w: &[f64]) -> bool {
        if w.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let sum_ok = || (w.iter().sum::<f64>() - 1.0).abs() <= 1e-10;
        let box_ok = || w.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v));
        match self {
            Self::A | Self::Aprime => true,
            Self::B => sum_ok(),
            Self::C => box_ok(),
            Self::D => sum_ok() && box_ok(),
            Self::E => (w.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() <= 1e-10,
        }
    }
}

impl fmt::Display for WeightSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Self::A),
            "Aprime" | "aprime" | "A'" | "a'" => Ok(Self::Aprime),
            "B" | "b" => Ok(Self::B),
            "C" | "c" => Ok(Self::C),
            "D" | "d" => Ok(Self::D),
            "E" | "e" => Ok(Self::E),
            other => Err(Error::InvalidInput(format!(
                "unknown weight space `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum MallowsVariant {
    Mallows,
    #[cfg_attr(feature = "serde", serde(rename = "KL"))]
    Kl,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family"))]
pub enum PerformanceFamily {
    /// `w_s ∝ a^{q_s} (T − q_s)^b (σ̂²_s)^c`.
    General {
        a: f64,
        b: f64,
        c: f64,
    },
    SmoothedAic,
    SmoothedBic,
    /// `w_s ∝ 1/L_s`.
    InverseLoss {
        loss: Vec<f64>,
    },
}

impl PerformanceFamily {
    pub fn bates_granger() -> Self {
        Self::General {
            a: 1.0,
            b: 1.0,
            c: -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum PenaltyFlavor {
    C,
    D,
    E,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind"))]
pub enum MethodSpec {
    Regression,
    GeneralizedMallows {
        variant: MallowsVariant,
        sigma2: f64,
        phi: Option<Vec<f64>>,
    },
    CrossValidation,
    Performance {
        family: PerformanceFamily,
    },
    Eigenvector,
    SoftPenalized {
        lambda: f64,
        mu: Vec<f64>,
        nu: Vec<f64>,
        flavor: PenaltyFlavor,
    },
}

impl MethodSpec {
    /// Short token used in file names and tables.
    pub fn token(&self) -> &'static str {
        match self {
            Self::Regression => "reg",
            Self::GeneralizedMallows {
                variant: MallowsVariant::Mallows,
                ..
            } => "ma",
            Self::GeneralizedMallows {
                variant: MallowsVariant::Kl,
                ..
            } => "kl",
            Self::CrossValidation => "cv",
            Self::Performance {
                family: PerformanceFamily::SmoothedAic,
            } => "pf:saic",
            Self::Performance {
                family: PerformanceFamily::SmoothedBic,
            } => "pf:sbic",
            Self::Performance {
                family: PerformanceFamily::General { .. },
            } => "pf:general",
            Self::Performance {
                family: PerformanceFamily::InverseLoss { .. },
            } => "pf:inverse-loss",
            Self::Eigenvector => "eig",
            Self::SoftPenalized { .. } => "soft",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Multipliers {
    /// Sum-to-one multiplier, signed so that `Gw + ψ + ρ₀1 − ρ + κ = 0`.
    pub rho0: Option<f64>,
    /// Norm multiplier on the sphere, or the smallest eigenvalue for the eigenvector method.
    pub nu: Option<f64>,
    /// Non-negativity multipliers ρ (all ≥ 0).
    #[cfg_attr(feature = "serde", serde(rename = "box"))]
    pub lower: Option<Vec<f64>>,
    /// Multipliers κ of the upper bounds `w ≤ 1` in the box space.
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    pub intercept: Option<f64>,
    pub multipliers: Multipliers,
    /// Zero-based indices of coordinates held at a bound.
    pub active_set: Vec<usize>,
    pub space: WeightSpace,
    pub method: MethodSpec,
    pub converged: bool,
    pub unique_certified: Option<bool>,
}

impl WeightSolution {
    pub fn new(weights: Vec<f64>, space: WeightSpace, method: MethodSpec) -> Self {
        Self {
            weights,
            intercept: None,
            multipliers: Multipliers::default(),
            active_set: Vec::new(),
            space,
            method,
            converged: true,
            unique_certified: None,
        }
    }

    pub fn w(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.weights)
    }

    /// In-sample or out-of-sample combined forecasts `δ̂₀ + Fw`.
    pub fn predict(&self, f: &DMatrix<f64>) -> DVector<f64> {
        let mut yhat = f * self.w();
        if let Some(d) = self.intercept {
            yhat.add_scalar_mut(d);
        }
        yhat
    }
}

/// Evaluation summary attached to a solution.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DiagnosticsReport {
    pub ssr: f64,
    pub empirical_bias: f64,
    pub msfe: Option<f64>,
    pub sparsity_pct: f64,
    pub error_acf: Vec<f64>,
    pub notes: Vec<String>,
}
