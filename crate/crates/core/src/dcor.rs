//! Sample distance covariance and distance correlation for univariate samples.
//!
//! Two routes are provided. The definitional route materializes the n×n
//! distance matrix, double-centers it and sums the cell-wise products. The
//! streaming route ([`dcor_fast`]) keeps only per-observation distance means
//! and visits each unordered pair once, using the symmetry of the centered
//! matrices to replace the full double sum by the diagonal plus twice the
//! strict upper triangle.
//!
//! All sums run row-major (over `k`, then `l`), so results are bitwise
//! reproducible for a given input.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance (scaled by the statistic's natural magnitude) below
/// which a negative squared distance covariance is treated as round-off.
const NEGATIVE_ROUNDOFF: f64 = 1e-12;

/// One variable's observations. Borrowed, validated: length ≥ 2, all finite.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    values: &'a [f64],
}

impl<'a> Sample<'a> {
    pub fn new(values: &'a [f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "sample must contain at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Pairwise absolute differences `|x_k - x_l|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: Array2<f64>,
}

impl DistanceMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }
}

/// Double-centered distances together with the means used to center them.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDistances {
    entries: Array2<f64>,
    row_means: Vec<f64>,
    grand_mean: f64,
}

impl CenteredDistances {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Row means of the uncentered distances. Equal to the column means.
    pub fn row_means(&self) -> &[f64] {
        &self.row_means
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }
}

/// Squared distance covariance, both squared distance variances, and the
/// distance correlation `sqrt(dcov2 / sqrt(dvar_x2 * dvar_y2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DCovResult {
    pub dcov2: f64,
    pub dvar_x2: f64,
    pub dvar_y2: f64,
    pub dcor: f64,
}

impl DCovResult {
    /// The squared distance correlation `R²`.
    pub fn dcor2(&self) -> f64 {
        self.dcor * self.dcor
    }

    fn from_moments(dcov2: f64, dvar_x2: f64, dvar_y2: f64) -> Self {
        let denom = dvar_x2 * dvar_y2;
        let dcor = if denom > 0.0 {
            (dcov2 / denom.sqrt()).clamp(0.0, 1.0).sqrt()
        } else {
            0.0
        };
        Self {
            dcov2,
            dvar_x2,
            dvar_y2,
            dcor,
        }
    }
}

pub fn pairwise_distances(x: Sample<'_>) -> DistanceMatrix {
    let v = x.values();
    let n = v.len();
    let entries = Array2::from_shape_fn((n, n), |(k, l)| (v[k] - v[l]).abs());
    DistanceMatrix { entries }
}

pub fn double_center(d: &DistanceMatrix) -> CenteredDistances {
    let n = d.n();
    let nf = n as f64;
    let row_means: Vec<f64> = d
        .entries
        .rows()
        .into_iter()
        .map(|row| row.iter().sum::<f64>() / nf)
        .collect();
    let grand_mean = row_means.iter().sum::<f64>() / nf;
    let entries = Array2::from_shape_fn((n, n), |(k, l)| {
        d.entries[[k, l]] - row_means[k] - row_means[l] + grand_mean
    });
    CenteredDistances {
        entries,
        row_means,
        grand_mean,
    }
}

/// `(1/n²) Σ_{k,l} A_kl B_kl`. With `a == b` this is the squared distance
/// variance. Tiny negative round-off is clamped to zero.
pub fn dcov2(a: &CenteredDistances, b: &CenteredDistances) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    let n = a.n() as f64;
    let sum: f64 = a
        .entries
        .iter()
        .zip(b.entries.iter())
        .map(|(p, q)| p * q)
        .sum();
    clamp_nonnegative(sum / (n * n), a.grand_mean * b.grand_mean)
}

/// Distance correlation through the definitional double-centering route.
pub fn dcor(x: Sample<'_>, y: Sample<'_>) -> Result<DCovResult> {
    check_lengths(x, y)?;
    let a = double_center(&pairwise_distances(x));
    let b = double_center(&pairwise_distances(y));
    let dcov2_xy = dcov2(&a, &b)?;
    let dvar_x2 = dcov2(&a, &a)?;
    let dvar_y2 = dcov2(&b, &b)?;
    Ok(DCovResult::from_moments(dcov2_xy, dvar_x2, dvar_y2))
}

/// Per-sample quantities for the streaming route: distance row means, their
/// grand mean, and the squared distance variance.
///
/// Computing this once per variable lets a p×p matrix of correlations reuse
/// it across all pairs that involve the variable.
#[derive(Debug, Clone)]
pub struct DistanceSummary {
    row_means: Vec<f64>,
    grand_mean: f64,
    dvar2: f64,
}

impl DistanceSummary {
    pub fn new(x: Sample<'_>) -> Result<Self> {
        let v = x.values();
        let n = v.len();
        let nf = n as f64;
        let mut row_means = vec![0.0; n];
        for k in 0..n {
            for l in (k + 1)..n {
                let w = (v[k] - v[l]).abs();
                row_means[k] += w;
                row_means[l] += w;
            }
        }
        for m in &mut row_means {
            *m /= nf;
        }
        let grand_mean = row_means.iter().sum::<f64>() / nf;
        let partial = Self {
            row_means,
            grand_mean,
            dvar2: 0.0,
        };
        let dvar2 = clamp_nonnegative(
            centered_product_sum(v, &partial, v, &partial) / (nf * nf),
            grand_mean * grand_mean,
        )?;
        Ok(Self { dvar2, ..partial })
    }

    pub fn row_means(&self) -> &[f64] {
        &self.row_means
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    pub fn dvar2(&self) -> f64 {
        self.dvar2
    }
}

/// Streaming distance correlation over precomputed summaries.
pub fn dcor_from_summaries(
    x: Sample<'_>,
    sx: &DistanceSummary,
    y: Sample<'_>,
    sy: &DistanceSummary,
) -> Result<DCovResult> {
    check_lengths(x, y)?;
    if sx.row_means.len() != x.len() || sy.row_means.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: sx.row_means.len(),
        });
    }
    let nf = x.len() as f64;
    let cross = centered_product_sum(x.values(), sx, y.values(), sy) / (nf * nf);
    let dcov2 = clamp_nonnegative(cross, sx.grand_mean * sy.grand_mean)?;
    Ok(DCovResult::from_moments(dcov2, sx.dvar2, sy.dvar2))
}

/// Distance correlation without materializing any n×n matrix.
pub fn dcor_fast(x: Sample<'_>, y: Sample<'_>) -> Result<DCovResult> {
    check_lengths(x, y)?;
    let sx = DistanceSummary::new(x)?;
    let sy = DistanceSummary::new(y)?;
    dcor_from_summaries(x, &sx, y, &sy)
}

/// `Σ_{k,l} A_kl B_kl` as the diagonal plus twice the strict upper triangle.
fn centered_product_sum(x: &[f64], sx: &DistanceSummary, y: &[f64], sy: &DistanceSummary) -> f64 {
    let n = x.len();
    let (ux, gx) = (&sx.row_means, sx.grand_mean);
    let (uy, gy) = (&sy.row_means, sy.grand_mean);
    let mut diag = 0.0;
    let mut upper = 0.0;
    for k in 0..n {
        let a_kk = gx - 2.0 * ux[k];
        let b_kk = gy - 2.0 * uy[k];
        diag += a_kk * b_kk;
        for l in (k + 1)..n {
            let a = (x[k] - x[l]).abs() - ux[k] - ux[l] + gx;
            let b = (y[k] - y[l]).abs() - uy[k] - uy[l] + gy;
            upper += a * b;
        }
    }
    diag + 2.0 * upper
}

fn check_lengths(x: Sample<'_>, y: Sample<'_>) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// `scale` is the product of mean distances, the natural magnitude of ν².
fn clamp_nonnegative(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        return Ok(value);
    }
    let tol = NEGATIVE_ROUNDOFF * scale.abs().max(1.0);
    if value > -tol {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!(
            "squared distance covariance {value:e} is negative beyond round-off"
        )))
    }
}
