//! Split-conformal choice of the weight space.
//!
//! The sample is split three ways: candidates are trained on the first part,
//! combination weights are fitted on the second, and absolute residuals on
//! the third give each space's conformal half-length. The space with the
//! shortest interval wins.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::fit_regression;
use crate::math;
use crate::simulation::{fit_group_ols, GroupFit};
use crate::types::{ForecastPanel, WeightSolution, WeightSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Splits {
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
    pub i3: Vec<usize>,
}

/// Seeded shuffle of `0..t` cut into `⌈t/3⌉`, `⌈(t − |I₁|)/2⌉` and the rest.
pub fn split_indices(t: usize, seed: u64) -> Result<Splits> {
    if t < 6 {
        return Err(Error::InvalidInput(format!(
            "conformal splitting needs T >= 6, got {t}"
        )));
    }
    let mut idx: Vec<usize> = (0..t).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n1 = t.div_ceil(3);
    let n2 = (t - n1).div_ceil(2);
    let i3 = idx.split_off(n1 + n2);
    let i2 = idx.split_off(n1);
    Ok(Splits { i1: idx, i2, i3 })
}

/// The `k`-th smallest residual with `k = ⌈(n+1)(1−α)⌉`; `+∞` when `k > n`.
pub fn conformal_quantile(residuals: &[f64], alpha: f64) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::InvalidInput("no calibration residuals".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let n = residuals.len();
    let k = math::ceil((n + 1) as f64 * (1.0 - alpha)) as usize;
    if k > n {
        return Ok(f64::INFINITY);
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[k.max(1) - 1])
}

/// Position of `space` in the tie-breaking order A, B, C, D, E, A′.
fn tie_rank(space: WeightSpace) -> usize {
    match space {
        WeightSpace::A => 0,
        WeightSpace::B => 1,
        WeightSpace::C => 2,
        WeightSpace::D => 3,
        WeightSpace::E => 4,
        WeightSpace::Aprime => 5,
    }
}

/// Argmin of the half-lengths with fixed-order tie-breaking.
pub fn choose_space(lengths: &BTreeMap<WeightSpace, f64>) -> Option<WeightSpace> {
    lengths
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1).then(tie_rank(*a.0).cmp(&tie_rank(*b.0))))
        .map(|(s, _)| *s)
}

/// Fits candidate models on the first split.
pub trait CandidateTrainer {
    type Model: CandidateModels;

    fn train(&self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self::Model>;
}

/// Trained candidates, queried read-only for every space.
pub trait CandidateModels {
    /// One column of forecasts per candidate.
    fn predict(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
}

/// One least-squares model per group of regressor columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupOlsTrainer {
    pub groups: Vec<Vec<usize>>,
    pub intercept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOlsModels {
    fits: Vec<GroupFit>,
    intercept: bool,
}

fn design(x: &DMatrix<f64>, intercept: bool) -> DMatrix<f64> {
    if !intercept {
        return x.clone();
    }
    DMatrix::from_fn(x.nrows(), x.ncols() + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            x[(r, c - 1)]
        }
    })
}

fn shift_groups(groups: &[Vec<usize>], intercept: bool) -> Vec<Vec<usize>> {
    groups
        .iter()
        .map(|g| {
            if intercept {
                core::iter::once(0)
                    .chain(g.iter().map(|&i| i + 1))
                    .collect()
            } else {
                g.clone()
            }
        })
        .collect()
}

impl CandidateTrainer for GroupOlsTrainer {
    type Model = GroupOlsModels;

    fn train(&self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<GroupOlsModels> {
        let groups = shift_groups(&self.groups, self.intercept);
        let fits = fit_group_ols(&design(x, self.intercept), y, &groups)?;
        Ok(GroupOlsModels {
            fits,
            intercept: self.intercept,
        })
    }
}

impl CandidateModels for GroupOlsModels {
    fn predict(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let xd = design(x, self.intercept);
        let mut f = DMatrix::zeros(x.nrows(), self.fits.len());
        for (s, fit) in self.fits.iter().enumerate() {
            f.set_column(s, &fit.predict(&xd));
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SelectionResult {
    pub chosen: WeightSpace,
    /// Conformal half-length per space; `+∞` when undefined.
    pub lengths: BTreeMap<WeightSpace, f64>,
    pub splits: Splits,
    pub alpha: f64,
    pub seed: u64,
    pub notes: Vec<String>,
}

/// Selection outcome together with what is needed to form new intervals.
pub struct Selection<M> {
    pub result: SelectionResult,
    pub models: M,
    pub solutions: BTreeMap<WeightSpace, WeightSolution>,
}

impl<M: CandidateModels> Selection<M> {
    /// Point forecasts and half-length of the chosen space for new rows.
    pub fn predict_interval(&self, x: &DMatrix<f64>) -> Option<(DVector<f64>, f64)> {
        let chosen = self.result.chosen;
        let sol = self.solutions.get(&chosen)?;
        Some((
            sol.predict(&self.models.predict(x)),
            self.result.lengths[&chosen],
        ))
    }
}

fn rows(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    x.select_rows(idx)
}

pub fn select_space<T: CandidateTrainer>(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    trainer: &T,
    spaces: &[WeightSpace],
    alpha: f64,
    seed: u64,
) -> Result<Selection<T::Model>> {
    if spaces.is_empty() {
        return Err(Error::InvalidInput("no weight spaces requested".into()));
    }
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "x has {} rows, y has {}",
            x.nrows(),
            y.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let splits = split_indices(y.len(), seed)?;
    let y_of = |idx: &[usize]| DVector::from_iterator(idx.len(), idx.iter().map(|&i| y[i]));
    let models = trainer.train(&rows(x, &splits.i1), &y_of(&splits.i1))?;
    let panel2 = ForecastPanel::new(y_of(&splits.i2), models.predict(&rows(x, &splits.i2)))?;
    let f3 = models.predict(&rows(x, &splits.i3));
    let y3 = y_of(&splits.i3);

    let mut lengths = BTreeMap::new();
    let mut solutions = BTreeMap::new();
    let mut notes = Vec::new();
    for &space in spaces {
        match fit_regression(&panel2, space) {
            Ok(sol) => {
                let resid: Vec<f64> = (&y3 - sol.predict(&f3)).iter().map(|r| r.abs()).collect();
                lengths.insert(space, conformal_quantile(&resid, alpha)?);
                solutions.insert(space, sol);
            }
            Err(e) => {
                notes.push(format!("{space}: {e}"));
                lengths.insert(space, f64::INFINITY);
            }
        }
    }
    if solutions.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no weight space could be fitted: {}",
            notes.join("; ")
        )));
    }
    let chosen = choose_space(&lengths).expect("spaces is nonempty");
    Ok(Selection {
        result: SelectionResult {
            chosen,
            lengths,
            splits,
            alpha,
            seed,
            notes,
        },
        models,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn split_sizes_and_determinism() {
        let s = split_indices(6, 1).unwrap();
        assert_eq!((s.i1.len(), s.i2.len(), s.i3.len()), (2, 2, 2));
        let s = split_indices(7, 1).unwrap();
        assert_eq!((s.i1.len(), s.i2.len(), s.i3.len()), (3, 2, 2));
        assert_eq!(
            split_indices(100, 9).unwrap(),
            split_indices(100, 9).unwrap()
        );
        let mut all: Vec<usize> = s.i1.iter().chain(&s.i2).chain(&s.i3).copied().collect();
        all.sort();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        assert!(split_indices(5, 1).is_err());
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(conformal_quantile(&[3.0, 1.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(conformal_quantile(&[5.0], 0.5).unwrap(), 5.0);
        assert_eq!(
            conformal_quantile(&[1.0, 2.0, 3.0], 0.01).unwrap(),
            f64::INFINITY
        );
        assert!(conformal_quantile(&[], 0.5).is_err());
    }

    #[test]
    fn argmin_with_tie_break() {
        let mut l = BTreeMap::new();
        l.insert(
            WeightSpace::A,
            conformal_quantile(&[1.0, 2.0, 3.0], 0.5).unwrap(),
        );
        l.insert(
            WeightSpace::D,
            conformal_quantile(&[0.5, 0.6, 0.7], 0.5).unwrap(),
        );
        assert_eq!(choose_space(&l), Some(WeightSpace::D));
        assert_eq!(l[&WeightSpace::D], 0.6);
        let ties: BTreeMap<_, _> = [
            (WeightSpace::E, 0.0),
            (WeightSpace::Aprime, 0.0),
            (WeightSpace::B, 0.0),
        ]
        .into();
        assert_eq!(choose_space(&ties), Some(WeightSpace::B));
    }

    #[test]
    fn exact_candidate_gives_zero_lengths() {
        let t = 30;
        let x = DMatrix::from_fn(t, 2, |r, c| ((r * 7 + c * 3) % 11) as f64 - 5.0);
        let y = DVector::from_fn(t, |r, _| 2.0 * x[(r, 0)]);
        let trainer = GroupOlsTrainer {
            groups: vec![vec![0], vec![1]],
            intercept: false,
        };
        let spaces = [
            WeightSpace::A,
            WeightSpace::B,
            WeightSpace::C,
            WeightSpace::D,
        ];
        let sel = select_space(&x, &y, &trainer, &spaces, 0.2, 3).unwrap();
        for s in spaces {
            assert!(
                sel.result.lengths[&s] < 1e-10,
                "{s}: {}",
                sel.result.lengths[&s]
            );
        }
        assert_eq!(sel.result.chosen, WeightSpace::A);
    }
}
