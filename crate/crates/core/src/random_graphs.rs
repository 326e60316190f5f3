//! Erdős–Rényi ground truths, linear-Gaussian style data along graph edges,
//! structure-recovery scoring and the log-determinant experiment.
//!
//! Randomness: every generator is a ChaCha8 stream keyed by an explicit
//! 64-bit seed. Independent sub-streams use the ChaCha stream id
//! ([`rng_for`]); independent replicate seeds are derived from a master seed
//! by chaining SplitMix64 over a list of tags ([`derive_seed`]). No global
//! RNG state is used anywhere.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{dcor_matrix, estimate, threshold_for_edge_count, RidgeConfig};
use crate::graph::{hamming_distance, Adjacency};
use crate::linalg::log_det;
use crate::pipeline::standardize;

const STREAM_ER: u64 = 0;
const STREAM_ORDER: u64 = 1;
// per-variable streams start here: variable j uses STREAM_VARIABLE_BASE + j
const STREAM_VARIABLE_BASE: u64 = 16;

/// ChaCha8 generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a replicate identified by `tags` under `master`.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(master), |acc, &t| {
        splitmix64(acc ^ splitmix64(t))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErdosRenyiSpec {
    pub p: usize,
    /// Target average degree; the edge probability is `c / p`.
    pub c: f64,
    pub seed: u64,
}

impl ErdosRenyiSpec {
    pub fn new(p: usize, c: f64, seed: u64) -> Result<Self> {
        let spec = Self { p, c, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn edge_probability(&self) -> f64 {
        self.c / self.p as f64
    }

    fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph needs at least 2 nodes, got {}",
                self.p
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "average degree must be positive, got {}",
                self.c
            )));
        }
        if self.edge_probability() > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "edge probability c/p = {}/{} exceeds 1",
                self.c, self.p
            )));
        }
        Ok(())
    }
}

/// Each pair `(i, j)`, `i < j`, in ascending lexicographic order, is an edge
/// with probability `c / p`.
pub fn erdos_renyi(spec: &ErdosRenyiSpec) -> Result<Adjacency> {
    spec.validate()?;
    let prob = spec.edge_probability();
    let mut rng = rng_for(spec.seed, STREAM_ER);
    let mut g = Adjacency::empty(spec.p);
    for i in 0..spec.p {
        for j in (i + 1)..spec.p {
            if rng.random::<f64>() < prob {
                g.insert_unchecked(i, j);
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    /// Uniform with the same standard deviation as the Gaussian option.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearDataSpec {
    pub n: usize,
    pub coef_low: f64,
    pub coef_high: f64,
    pub noise_sd: f64,
    pub noise: NoiseKind,
    pub seed: u64,
}

impl LinearDataSpec {
    /// Defaults: coefficients in [0.3, 0.9], unit Gaussian noise.
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            coef_low: 0.3,
            coef_high: 0.9,
            noise_sd: 1.0,
            noise: NoiseKind::Gaussian,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 samples, got {}",
                self.n
            )));
        }
        if !(self.coef_low > 0.0 && self.coef_low <= self.coef_high && self.coef_high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coefficient bounds must satisfy 0 < low ≤ high, got [{}, {}]",
                self.coef_low, self.coef_high
            )));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise sd must be positive, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }

    fn draw_noise(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.noise {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.noise_sd * z
            }
            NoiseKind::Uniform => {
                let half_width = self.noise_sd * 3.0_f64.sqrt();
                rng.random_range(-half_width..half_width)
            }
        }
    }
}

/// Generate `n` rows with dependence along the edges of `g`.
///
/// Variables are visited in a seeded random order. Each one is a signed
/// random linear combination of its already-visited neighbours plus white
/// noise; coefficient and noise draws for variable `j` come from its own
/// stream, so they do not depend on visiting order. Columns are
/// standardized at the end.
pub fn sample_linear_data(g: &Adjacency, spec: &LinearDataSpec) -> Result<Dataset> {
    spec.validate()?;
    let p = g.nodes();
    let n = spec.n;
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut rng_for(spec.seed, STREAM_ORDER));

    let mut visited = vec![false; p];
    let mut values = Array2::<f64>::zeros((n, p));
    for &j in &order {
        let mut rng = rng_for(spec.seed, STREAM_VARIABLE_BASE + j as u64);
        let parents: Vec<(usize, f64)> = (0..p)
            .filter(|&i| visited[i] && g.has_edge(i, j))
            .map(|i| {
                let b = rng.random_range(spec.coef_low..=spec.coef_high);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (i, sign * b)
            })
            .collect();
        for t in 0..n {
            let signal: f64 = parents.iter().map(|&(i, w)| w * values[[t, i]]).sum();
            values[[t, j]] = signal + spec.draw_noise(&mut rng);
        }
        visited[j] = true;
    }
    standardize(&Dataset::new(values, None)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub true_graph: Adjacency,
    pub estimated_graph: Adjacency,
    pub hamming: usize,
    pub true_edge_count: usize,
    pub estimated_edge_count: usize,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub data_seed: u64,
    pub avg_degree: f64,
    pub ridge_applied: f64,
    pub threshold: f64,
    pub data: LinearDataSpec,
}

/// Simulate, estimate with the true edge count, and score by Hamming distance.
pub fn recovery_experiment(
    er: &ErdosRenyiSpec,
    data: &LinearDataSpec,
    ridge: RidgeConfig,
) -> Result<RecoveryReport> {
    let truth = erdos_renyi(er)?;
    let dataset = sample_linear_data(&truth, data)?;
    let est = estimate(&dataset, ridge)?;
    let k = truth.edge_count();
    let (threshold, estimated) = threshold_for_edge_count(est.partial.entries(), k)?;
    let hamming = hamming_distance(&truth, &estimated)?;
    Ok(RecoveryReport {
        hamming,
        true_edge_count: k,
        estimated_edge_count: estimated.edge_count(),
        n: data.n,
        p: er.p,
        seed: er.seed,
        data_seed: data.seed,
        avg_degree: er.c,
        ridge_applied: est.partial.ridge_applied(),
        threshold,
        data: *data,
        true_graph: truth,
        estimated_graph: estimated,
    })
}

/// Run [`recovery_experiment`] once per seed. The graph uses the seed itself;
/// the data uses `derive_seed(seed, [1])`. Results are in seed order.
pub fn recovery_sweep(
    p: usize,
    c: f64,
    template: &LinearDataSpec,
    seeds: &[u64],
    ridge: RidgeConfig,
) -> Result<Vec<RecoveryReport>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let er = ErdosRenyiSpec::new(p, c, seed)?;
            let data = LinearDataSpec {
                seed: derive_seed(seed, &[1]),
                ..*template
            };
            recovery_experiment(&er, &data, ridge)
        })
        .collect()
}

/// Expected Hamming distance between a fixed graph with `k` edges and a
/// uniformly random graph with `k` edges on `p` nodes: `2k(1 − k/M)`.
pub fn random_baseline_hamming(p: usize, k: usize) -> f64 {
    let m = (p * p.saturating_sub(1) / 2) as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = k as f64;
    2.0 * k * (1.0 - k / m)
}

/// Sample Pearson correlation matrix of the columns.
pub fn pearson_correlation(data: &Dataset) -> Result<Array2<f64>> {
    let (n, p) = (data.n(), data.p());
    let mut centered = data.values().to_owned();
    for j in 0..p {
        let mut col = centered.column_mut(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        col.mapv_inplace(|v| v - mean);
        let ss: f64 = col.iter().map(|v| v * v).sum();
        if ss == 0.0 {
            return Err(Error::InvalidInput(format!(
                "column {} is constant; correlation undefined",
                data.column_label(j)
            )));
        }
        let norm = ss.sqrt();
        col.mapv_inplace(|v| v / norm);
    }
    let mut r = centered.t().dot(&centered);
    for i in 0..p {
        r[[i, i]] = 1.0;
        for j in (i + 1)..p {
            let v = 0.5 * (r[[i, j]] + r[[j, i]]);
            r[[i, j]] = v;
            r[[j, i]] = v;
        }
    }
    Ok(r)
}

/// Column generators for the log-determinant experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnDistribution {
    Gaussian,
    Uniform,
    Exponential,
}

impl ColumnDistribution {
    pub const ALL: [ColumnDistribution; 3] = [
        ColumnDistribution::Gaussian,
        ColumnDistribution::Uniform,
        ColumnDistribution::Exponential,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ColumnDistribution::Gaussian => "gaussian",
            ColumnDistribution::Uniform => "uniform",
            ColumnDistribution::Exponential => "exponential",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            ColumnDistribution::Gaussian => 0,
            ColumnDistribution::Uniform => 1,
            ColumnDistribution::Exponential => 2,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ColumnDistribution::Gaussian => StandardNormal.sample(rng),
            ColumnDistribution::Uniform => rng.random::<f64>(),
            ColumnDistribution::Exponential => Exp1.sample(rng),
        }
    }

    /// `n × p` matrix of i.i.d. draws, row-major from one stream.
    pub fn sample(&self, n: usize, p: usize, seed: u64) -> Result<Dataset> {
        let mut rng = rng_for(seed, 0);
        let values = Array2::from_shape_simple_fn((n, p), || self.draw(&mut rng));
        Dataset::new(values, None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminantConfig {
    pub dims: Vec<usize>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub distributions: Vec<ColumnDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminantRow {
    pub distribution: ColumnDistribution,
    pub p: usize,
    pub reps: usize,
    /// Mean over reps with a finite log-determinant; `None` if there were none.
    pub mean_log_det_pearson: Option<f64>,
    pub mean_log_det_dcor: Option<f64>,
    pub pearson_singular: usize,
    pub dcor_singular: usize,
}

/// Log-determinants of one replicate: `(pearson, dcor)`, `None` = singular.
pub fn determinant_replicate(
    dist: ColumnDistribution,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<(Option<f64>, Option<f64>)> {
    let data = dist.sample(n, p, seed)?;
    let pearson = log_det(&pearson_correlation(&data)?)?;
    let dcor = log_det(dcor_matrix(&data)?.entries())?;
    Ok((pearson.finite(), dcor.finite()))
}

/// For each distribution and dimension, `reps` datasets are drawn with seeds
/// `derive_seed(seed, [distribution, p, rep])`; singular results are counted
/// and left out of the means.
pub fn determinant_experiment(cfg: &DeterminantConfig) -> Result<Vec<DeterminantRow>> {
    if cfg.reps == 0 || cfg.dims.is_empty() || cfg.distributions.is_empty() {
        return Err(Error::InvalidParameter(
            "determinant experiment needs reps ≥ 1, dims and distributions".into(),
        ));
    }
    if let Some(&p) = cfg.dims.iter().find(|&&p| p < 2) {
        return Err(Error::InvalidParameter(format!("dimension {p} is below 2")));
    }
    let cells: Vec<(ColumnDistribution, usize)> = cfg
        .distributions
        .iter()
        .flat_map(|&d| cfg.dims.iter().map(move |&p| (d, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(dist, p)| {
            let reps = (0..cfg.reps)
                .into_par_iter()
                .map(|rep| {
                    let seed = derive_seed(cfg.seed, &[dist.tag(), p as u64, rep as u64]);
                    determinant_replicate(dist, cfg.n, p, seed)
                })
                .collect::<Result<Vec<_>>>()?;
            let (pearson, pearson_singular) = finite_mean(reps.iter().map(|r| r.0));
            let (dcor, dcor_singular) = finite_mean(reps.iter().map(|r| r.1));
            Ok(DeterminantRow {
                distribution: dist,
                p,
                reps: cfg.reps,
                mean_log_det_pearson: pearson,
                mean_log_det_dcor: dcor,
                pearson_singular,
                dcor_singular,
            })
        })
        .collect()
}

fn finite_mean(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut missing = 0usize;
    for v in values {
        match v {
            Some(x) => {
                sum += x;
                count += 1;
            }
            None => missing += 1,
        }
    }
    ((count > 0).then(|| sum / count as f64), missing)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_when_probability_one() {
        for seed in 0..5 {
            let g = erdos_renyi(&ErdosRenyiSpec::new(6, 6.0, seed).unwrap()).unwrap();
            assert_eq!(g, Adjacency::complete(6));
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(ErdosRenyiSpec::new(5, 6.0, 0).is_err());
        assert!(ErdosRenyiSpec::new(1, 0.5, 0).is_err());
        assert!(ErdosRenyiSpec::new(5, 0.0, 0).is_err());
        let g = Adjacency::empty(3);
        let mut spec = LinearDataSpec::new(10, 0);
        spec.coef_low = 1.0;
        spec.coef_high = 0.5;
        assert!(sample_linear_data(&g, &spec).is_err());
        assert!(sample_linear_data(&g, &LinearDataSpec::new(1, 0)).is_err());
    }

    #[test]
    fn deterministic_generation() {
        let spec = ErdosRenyiSpec::new(200, 4.0, 99).unwrap();
        let a = erdos_renyi(&spec).unwrap();
        assert_eq!(a, erdos_renyi(&spec).unwrap());
        let other = erdos_renyi(&ErdosRenyiSpec::new(200, 4.0, 100).unwrap()).unwrap();
        assert_ne!(a, other);

        let g = erdos_renyi(&ErdosRenyiSpec::new(10, 2.0, 3).unwrap()).unwrap();
        let d = LinearDataSpec::new(50, 11);
        assert_eq!(
            sample_linear_data(&g, &d).unwrap(),
            sample_linear_data(&g, &d).unwrap()
        );
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, &[0, 2, 0]);
        assert_ne!(a, derive_seed(1, &[0, 2, 1]));
        assert_ne!(a, derive_seed(2, &[0, 2, 0]));
        assert_eq!(a, derive_seed(1, &[0, 2, 0]));
    }

    #[test]
    fn baseline_formula() {
        assert_eq!(random_baseline_hamming(10, 0), 0.0);
        assert_eq!(random_baseline_hamming(10, 45), 0.0);
        // k = M/2 gives expected overlap k/2, so disagreement k
        assert!((random_baseline_hamming(5, 5) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_direct_formula() {
        let d = ColumnDistribution::Gaussian.sample(30, 3, 5).unwrap();
        let r = pearson_correlation(&d).unwrap();
        let cols = d.columns();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (m0, m1) = (mean(&cols[0]), mean(&cols[1]));
        let sxy: f64 = cols[0]
            .iter()
            .zip(&cols[1])
            .map(|(a, b)| (a - m0) * (b - m1))
            .sum();
        let sxx: f64 = cols[0].iter().map(|a| (a - m0).powi(2)).sum();
        let syy: f64 = cols[1].iter().map(|b| (b - m1).powi(2)).sum();
        assert!((r[[0, 1]] - sxy / (sxx * syy).sqrt()).abs() < 1e-12);
        assert_eq!(r[[2, 2]], 1.0);
    }

    #[test]
    fn determinant_rows_ordered() {
        let cfg = DeterminantConfig {
            dims: vec![2, 3],
            n: 20,
            reps: 2,
            seed: 1,
            distributions: ColumnDistribution::ALL.to_vec(),
        };
        let rows = determinant_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].distribution, ColumnDistribution::Gaussian);
        assert_eq!(rows[1].p, 3);
        assert_eq!(rows[5].distribution, ColumnDistribution::Exponential);
        assert_eq!(rows, determinant_experiment(&cfg).unwrap());
    }
}
