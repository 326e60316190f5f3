//! Graph estimation: distance-correlation matrix, inversion with ridge
//! fallback, partial correlations, and thresholding into adjacency
//! matrices and nested estimation paths.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::dcor::{dcor_from_summaries, DistanceSummary, Sample};
use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::linalg::{square_dim, Lu};

/// Pairwise distance correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DCorMatrix {
    entries: Array2<f64>,
    constant_columns: Vec<usize>,
}

impl DCorMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    /// Columns with zero distance variance; their off-diagonal entries are 0.
    pub fn constant_columns(&self) -> &[usize] {
        &self.constant_columns
    }
}

/// Compute `R[i][j] = dcor(X_i, X_j)` once per unordered pair and mirror it.
///
/// Pairs are evaluated in parallel; each entry depends only on its own two
/// columns so the result does not depend on the thread count.
pub fn dcor_matrix(data: &Dataset) -> Result<DCorMatrix> {
    let p = data.p();
    let columns = data.columns();
    let summaries = columns
        .par_iter()
        .map(|c| DistanceSummary::new(Sample::new(c)?))
        .collect::<Result<Vec<_>>>()?;

    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| {
            let r = dcor_from_summaries(
                Sample::new(&columns[i])?,
                &summaries[i],
                Sample::new(&columns[j])?,
                &summaries[j],
            )?;
            Ok(r.dcor)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut entries = Array2::eye(p);
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        entries[[i, j]] = v;
        entries[[j, i]] = v;
    }
    let constant_columns = summaries
        .iter()
        .enumerate()
        .filter(|(_, s)| s.dvar2() == 0.0)
        .map(|(j, _)| j)
        .collect();
    Ok(DCorMatrix {
        entries,
        constant_columns,
    })
}

/// Ridge fallback schedule: `step, 2·step, 4·step, ...` while `≤ max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgeConfig {
    pub step: f64,
    pub max: f64,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            step: 1e-8,
            max: 1e-2,
        }
    }
}

impl RidgeConfig {
    pub fn new(step: f64, max: f64) -> Result<Self> {
        let cfg = Self { step, max };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.step.is_finite()
            && self.max.is_finite()
            && 0.0 < self.step
            && self.step < self.max)
        {
            return Err(Error::InvalidParameter(format!(
                "ridge parameters must satisfy 0 < step < max, got step={} max={}",
                self.step, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inverse {
    pub matrix: Array2<f64>,
    /// The ε added to the diagonal before inversion, 0 when none was needed.
    pub ridge_applied: f64,
    pub smallest_pivot: f64,
}

/// Invert a symmetric matrix, falling back to `(R + εI)⁻¹` for the smallest
/// ε on the ridge schedule that makes it numerically invertible.
pub fn invert(r: &Array2<f64>, ridge: RidgeConfig) -> Result<Inverse> {
    ridge.validate()?;
    let p = square_dim(r)?;
    let lu = Lu::factor(r)?;
    if let Some(inv) = lu.inverse() {
        return Ok(Inverse {
            matrix: symmetrize(inv),
            ridge_applied: 0.0,
            smallest_pivot: lu.smallest_pivot(),
        });
    }
    let mut smallest_pivot = lu.smallest_pivot();
    let mut eps = ridge.step;
    while eps <= ridge.max {
        let mut shifted = r.to_owned();
        for i in 0..p {
            shifted[[i, i]] += eps;
        }
        let lu = Lu::factor(&shifted)?;
        smallest_pivot = lu.smallest_pivot();
        if let Some(inv) = lu.inverse() {
            return Ok(Inverse {
                matrix: symmetrize(inv),
                ridge_applied: eps,
                smallest_pivot,
            });
        }
        eps *= 2.0;
    }
    Err(Error::Singular {
        smallest_pivot,
        max_ridge: ridge.max,
    })
}

fn symmetrize(m: Array2<f64>) -> Array2<f64> {
    let t = m.t().to_owned();
    (m + t) * 0.5
}

/// `ρ_ij = −inv_ij / sqrt(inv_ii · inv_jj)` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCorrMatrix {
    entries: Array2<f64>,
    ridge_applied: f64,
}

impl PartialCorrMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn ridge_applied(&self) -> f64 {
        self.ridge_applied
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn partial_correlations(inv: &Array2<f64>, ridge_applied: f64) -> Result<PartialCorrMatrix> {
    let p = square_dim(inv)?;
    let scale = inv.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    for i in 0..p {
        for j in (i + 1)..p {
            if (inv[[i, j]] - inv[[j, i]]).abs() > 1e-9 * scale {
                return Err(Error::InvalidInput(format!(
                    "inverse is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    if let Some(i) = (0..p).find(|&i| !(inv[[i, i]] > 0.0)) {
        return Err(Error::Consistency(format!(
            "inverse has nonpositive diagonal entry {} at index {i}",
            inv[[i, i]]
        )));
    }
    let mut entries = Array2::zeros((p, p));
    for i in 0..p {
        for j in (i + 1)..p {
            let v = -inv[[i, j]] / (inv[[i, i]] * inv[[j, j]]).sqrt();
            entries[[i, j]] = v;
            entries[[j, i]] = v;
        }
    }
    Ok(PartialCorrMatrix {
        entries,
        ridge_applied,
    })
}

/// Edge `(i, j)` iff `|scores[i][j]| > tp`. Works on any symmetric score
/// matrix; the diagonal is ignored.
pub fn threshold_graph(scores: &Array2<f64>, tp: f64) -> Result<Adjacency> {
    let p = square_dim(scores)?;
    if !(tp >= 0.0) || !tp.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite and ≥ 0, got {tp}"
        )));
    }
    let mut g = Adjacency::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if scores[[i, j]].abs() > tp {
                g.insert_unchecked(i, j);
            }
        }
    }
    Ok(g)
}

/// Unordered pairs sorted by descending magnitude, ties by ascending `(i, j)`.
fn ranked_pairs(scores: &Array2<f64>) -> Vec<(f64, usize, usize)> {
    let p = scores.nrows();
    let mut pairs: Vec<(f64, usize, usize)> = (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (scores[[i, j]].abs(), i, j)))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    pairs
}

/// Keep the `k` strongest pairs. Returns the magnitude of the weakest kept
/// edge as `tp` (the largest magnitude when `k = 0`).
pub fn threshold_for_edge_count(scores: &Array2<f64>, k: usize) -> Result<(f64, Adjacency)> {
    let p = square_dim(scores)?;
    let max_edges = p * p.saturating_sub(1) / 2;
    if k > max_edges {
        return Err(Error::InvalidParameter(format!(
            "edge count {k} exceeds the {max_edges} possible pairs"
        )));
    }
    let ranked = ranked_pairs(scores);
    let mut g = Adjacency::empty(p);
    for &(_, i, j) in &ranked[..k] {
        g.insert_unchecked(i, j);
    }
    let tp = match k {
        0 => ranked.first().map_or(0.0, |r| r.0),
        _ => ranked[k - 1].0,
    };
    Ok((tp, g))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdPath {
    pub thresholds: Vec<f64>,
    pub graphs: Vec<Adjacency>,
    pub edge_counts: Vec<usize>,
}

pub fn estimation_path(scores: &Array2<f64>, thresholds: &[f64]) -> Result<ThresholdPath> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("empty threshold list".into()));
    }
    if let Some(w) = thresholds.windows(2).find(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidParameter(format!(
            "thresholds must be strictly decreasing, found {} then {}",
            w[0], w[1]
        )));
    }
    let graphs = thresholds
        .iter()
        .map(|&t| threshold_graph(scores, t))
        .collect::<Result<Vec<_>>>()?;
    let edge_counts = graphs.iter().map(Adjacency::edge_count).collect();
    Ok(ThresholdPath {
        thresholds: thresholds.to_vec(),
        graphs,
        edge_counts,
    })
}

/// `count` geometrically spaced thresholds from the largest off-diagonal
/// magnitude down to `min_ratio` times it.
pub fn auto_thresholds(scores: &Array2<f64>, count: usize, min_ratio: f64) -> Result<Vec<f64>> {
    let p = square_dim(scores)?;
    if count < 2 || !(min_ratio > 0.0 && min_ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need count ≥ 2 and 0 < min_ratio < 1, got {count} and {min_ratio}"
        )));
    }
    let top = (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
        .map(|(i, j)| scores[[i, j]].abs())
        .fold(0.0_f64, f64::max);
    if top <= 0.0 {
        return Err(Error::InvalidInput(
            "all off-diagonal entries are zero; no threshold path".into(),
        ));
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| top * min_ratio.powf(i as f64 / last))
        .collect())
}

/// Everything the default pipeline produces from one dataset.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub dcor: DCorMatrix,
    pub inverse: Inverse,
    pub partial: PartialCorrMatrix,
}

pub fn estimate(data: &Dataset, ridge: RidgeConfig) -> Result<Estimate> {
    let dcor = dcor_matrix(data)?;
    let inverse = invert(dcor.entries(), ridge)?;
    let partial = partial_correlations(&inverse.matrix, inverse.ridge_applied)?;
    Ok(Estimate {
        dcor,
        inverse,
        partial,
    })
}
