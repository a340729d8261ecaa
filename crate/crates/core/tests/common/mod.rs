#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use weightscape_core::{DMatrix, DVector, ForecastPanel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

/// Forecasts that track a noisy target with candidate-specific bias and noise.
pub fn panel(seed: u64, t: usize, s: usize) -> ForecastPanel {
    let mut r = rng(seed);
    let y = DVector::from_fn(t, |_, _| 1.0 + r.sample::<f64, _>(StandardNormal));
    let bias: Vec<f64> = (0..s).map(|_| r.random_range(-0.5..0.5)).collect();
    let scale: Vec<f64> = (0..s).map(|_| r.random_range(0.6..1.4)).collect();
    let noise: Vec<f64> = (0..s).map(|_| r.random_range(0.2..1.5)).collect();
    let f = DMatrix::from_fn(t, s, |i, j| {
        scale[j] * y[i] + bias[j] + noise[j] * r.sample::<f64, _>(StandardNormal)
    });
    ForecastPanel::new(y, f).unwrap()
}

/// Same as `panel` with every forecast column and `y` centered.
pub fn centered_panel(seed: u64, t: usize, s: usize) -> ForecastPanel {
    let p = panel(seed, t, s);
    let y = p.y.add_scalar(-p.y.mean());
    let mut f = p.f.clone();
    for mut c in f.column_iter_mut() {
        let m = c.mean();
        c.add_scalar_mut(-m);
    }
    ForecastPanel::new(y, f).unwrap()
}

pub fn ssr_of(panel: &ForecastPanel, w: &[f64], intercept: Option<f64>) -> f64 {
    let pred = &panel.f * DVector::from_column_slice(w);
    let a = intercept.unwrap_or(0.0);
    panel
        .y
        .iter()
        .zip(pred.iter())
        .map(|(y, p)| {
            let e = y - p - a;
            e * e
        })
        .sum()
}
