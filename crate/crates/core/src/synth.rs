//! Synthetic data with controlled correlation structure, built from a
//! seeded ChaCha8 stream so every run is reproducible.
//!
//! A constructed column is `standardize(x0)*r + standardize(e)*sqrt(1-r^2)`
//! where `e` are the residuals of a simple regression of a second draw on
//! `x0`. Residuals have exactly zero sample correlation with the regressor
//! and both parts are standardized, so the sample Pearson correlation of
//! the result with `x0` equals `r` up to floating-point error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Generator identifier recorded next to emitted datasets; the exactness
/// and byte-stability contracts assume this generator.
pub const GENERATOR: &str = "chacha8";

#[derive(Debug, Clone, Serialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    /// Target correlations, each strictly inside (-1, 1).
    pub r_grid: Vec<f64>,
}

impl SyntheticSpec {
    /// The full grid r = (i/100) - 1 for i in 1..=198, step 0.01.
    pub fn full_grid(n: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n,
            seed,
            r_grid: (1..=198).map(|i| f64::from(i) / 100.0 - 1.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OutcomeSpec {
    pub coef_x0: f64,
    pub coef_y0: f64,
    pub noise_sd: f64,
}

impl Default for OutcomeSpec {
    fn default() -> Self {
        OutcomeSpec {
            coef_x0: 0.3,
            coef_y0: 0.6,
            noise_sd: 1.0,
        }
    }
}

/// `n` iid standard-normal draws from the given stream.
pub fn standard_normal_series(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

/// Sample standard deviation (divisor n - 1).
pub fn sample_sd(series: &[f64]) -> f64 {
    let m = mean(series);
    let ss = series.iter().map(|&x| (x - m) * (x - m)).sum::<f64>();
    (ss / (series.len() - 1) as f64).sqrt()
}

/// Subtract the sample mean, divide by the sample sd.
pub fn standardize(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::TooFewRows {
            n: series.len(),
            min: 2,
        });
    }
    let m = mean(series);
    let sd = sample_sd(series);
    if sd == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok(series.iter().map(|&x| (x - m) / sd).collect())
}

/// Residuals of the simple regression y ~ x, via slope = cov / var.
pub fn ols_residuals(y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    let mx = mean(x);
    let my = mean(y);
    let mut cov = 0.0;
    let mut var = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        cov += (xi - mx) * (yi - my);
        var += (xi - mx) * (xi - mx);
    }
    if var == 0.0 {
        return Err(Error::ConstantSeries);
    }
    let slope = cov / var;
    let intercept = my - slope * mx;
    Ok(y.iter()
        .zip(x)
        .map(|(&yi, &xi)| yi - (intercept + slope * xi))
        .collect())
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    num / (da * db).sqrt()
}

/// Construct a series whose sample correlation with `x0` equals `r`.
///
/// Accepts the closed interval [-1, 1]; at |r| = 1 the residual term
/// vanishes and the result is just the standardized `x0` (negated for -1).
pub fn gen_correlated(x0: &[f64], y0: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r.is_finite() && (-1.0..=1.0).contains(&r)) {
        return Err(Error::BadCorrelation(r));
    }
    if x0.len() != y0.len() {
        return Err(Error::LengthMismatch(x0.len(), y0.len()));
    }
    if x0.len() < 3 {
        return Err(Error::TooFewRows { n: x0.len(), min: 3 });
    }
    let zx = standardize(x0)?;
    let residuals = ols_residuals(y0, x0)?;
    let ze = standardize(&residuals).map_err(|e| match e {
        Error::ConstantSeries => Error::ConstantResiduals,
        other => other,
    })?;
    let w = (1.0 - r * r).sqrt();
    Ok(zx.iter().zip(&ze).map(|(&a, &b)| a * r + b * w).collect())
}

/// The grid dataset: column `x_0` is the raw base draw, then one column
/// per grid entry, named `x_1` onward, realizing its target correlation
/// exactly. All columns share one `y_0` residual source.
pub fn gen_grid(spec: &SyntheticSpec) -> Result<PointCloud> {
    for &r in &spec.r_grid {
        if !(r.is_finite() && r.abs() < 1.0) {
            return Err(Error::BadCorrelation(r));
        }
    }
    if spec.n < 3 {
        return Err(Error::TooFewRows { n: spec.n, min: 3 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x0 = standard_normal_series(spec.n, &mut rng);
    let y0 = standard_normal_series(spec.n, &mut rng);

    let mut names = vec!["x_0".to_string()];
    let mut columns = vec![x0.clone()];
    for (i, &r) in spec.r_grid.iter().enumerate() {
        names.push(format!("x_{}", i + 1));
        columns.push(gen_correlated(&x0, &y0, r)?);
    }
    columns_to_cloud(names, &columns)
}

/// Outcome series M = coef_x0 * x0 + coef_y0 * y0 + noise, with the noise
/// drawn iid normal at the configured sd.
///
/// The noise comes from ChaCha stream 1 under the given seed, while the
/// series generators use stream 0, so passing the same seed here and to
/// the series construction cannot alias the two draws.
pub fn gen_outcome(x0: &[f64], y0: &[f64], spec: &OutcomeSpec, seed: u64) -> Result<Vec<f64>> {
    if x0.len() != y0.len() {
        return Err(Error::LengthMismatch(x0.len(), y0.len()));
    }
    if !(spec.coef_x0.is_finite() && spec.coef_y0.is_finite() && spec.noise_sd.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let noise = standard_normal_series(x0.len(), &mut rng);
    Ok(x0
        .iter()
        .zip(y0)
        .zip(&noise)
        .map(|((&a, &b), &w)| spec.coef_x0 * a + spec.coef_y0 * b + spec.noise_sd * w)
        .collect())
}

/// A `d`-column normal cloud: column 0 is the base draw, every further
/// column hits its target correlation with the base exactly (each against
/// an independent fresh draw, so cross-correlations between constructed
/// columns are one random realization).
pub fn gen_normal_cloud(n: usize, d: usize, targets: &[f64], seed: u64) -> Result<PointCloud> {
    if d == 0 || targets.len() != d - 1 {
        return Err(Error::LengthMismatch(targets.len(), d.saturating_sub(1)));
    }
    if n < 3 {
        return Err(Error::TooFewRows { n, min: 3 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = standard_normal_series(n, &mut rng);
    let mut names = vec!["x_0".to_string()];
    let mut columns = vec![x0.clone()];
    for (i, &r) in targets.iter().enumerate() {
        let y = standard_normal_series(n, &mut rng);
        names.push(format!("x_{}", i + 1));
        columns.push(gen_correlated(&x0, &y, r)?);
    }
    columns_to_cloud(names, &columns)
}

fn columns_to_cloud(names: Vec<String>, columns: &[Vec<f64>]) -> Result<PointCloud> {
    let n = columns[0].len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    PointCloud::new(names, rows, vec![], (0..n).collect())
}
