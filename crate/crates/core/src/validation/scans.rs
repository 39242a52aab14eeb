//! Ensemble scans: bin-to-bin fluctuations, average TVD against a reference
//! Gram matrix, distinguishability sweeps, TVD histograms and bunching
//! probability differences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{binned_distribution_exact, generalized_bunching_probability, BinnedDistribution, ModePartition};
use crate::error::{Error, Result};
use crate::haar_stats::MeanEstimate;
use crate::interference::{gram_uniform, GramMatrix};
use crate::linalg::{apply_noise, NoiseModel, UnitaryMatrix};
use crate::rng::child_seed;
use crate::validation::{tvd, tvd_across_bins};

/// Pairwise TVDs between the binned distributions of partitions with equal
/// bin sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationScan {
    pub partitions: Vec<String>,
    pub tvd: Vec<Vec<f64>>,
    pub off_diagonal_mean: f64,
}

pub fn bin_fluctuation_scan(u: &UnitaryMatrix, x: &GramMatrix, partitions: &[ModePartition]) -> Result<FluctuationScan> {
    let first = partitions.first().ok_or_else(|| Error::arg("no partitions"))?;
    if partitions.iter().any(|p| p.bin_sizes() != first.bin_sizes()) {
        return Err(Error::arg("fluctuation scans need partitions with equal bin sizes"));
    }
    let dists: Vec<BinnedDistribution> = partitions
        .par_iter()
        .map(|p| binned_distribution_exact(u, x, p))
        .collect::<Result<_>>()?;
    let len = dists.len();
    let mut table = vec![vec![0.0; len]; len];
    let (mut sum, mut pairs) = (0.0, 0usize);
    for i in 0..len {
        for j in i + 1..len {
            let d = tvd_across_bins(&dists[i], &dists[j])?;
            table[i][j] = d;
            table[j][i] = d;
            sum += d;
            pairs += 1;
        }
    }
    Ok(FluctuationScan {
        partitions: partitions.iter().map(|p| p.to_string()).collect(),
        tvd: table,
        off_diagonal_mean: if pairs > 0 { sum / pairs as f64 } else { 0.0 },
    })
}

/// Per-unitary TVD between the binned distributions for `x_exp` and `x_ref`.
pub fn ensemble_tvds(
    ensemble: &[UnitaryMatrix],
    x_exp: &GramMatrix,
    partition: &ModePartition,
    x_ref: &GramMatrix,
) -> Result<Vec<f64>> {
    if ensemble.is_empty() {
        return Err(Error::arg("empty ensemble"));
    }
    ensemble
        .par_iter()
        .map(|u| {
            let a = binned_distribution_exact(u, x_exp, partition)?;
            let b = binned_distribution_exact(u, x_ref, partition)?;
            tvd(&a, &b)
        })
        .collect()
}

/// Ensemble mean of [`ensemble_tvds`].
pub fn ensemble_avg_tvd(
    ensemble: &[UnitaryMatrix],
    x_exp: &GramMatrix,
    partition: &ModePartition,
    x_ref: &GramMatrix,
) -> Result<MeanEstimate> {
    MeanEstimate::from_values(&ensemble_tvds(ensemble, x_exp, partition, x_ref)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub partition: String,
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Average TVD to the fully indistinguishable reference as the uniform
/// pairwise overlap `x` runs over `grid`.
pub fn distinguishability_sweep(
    ensemble: &[UnitaryMatrix],
    n: usize,
    partition: &ModePartition,
    grid: &[f64],
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::arg("empty sweep grid"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("sweep grid must be strictly increasing"));
    }
    let reference = GramMatrix::ones(n);
    let mut mean = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for &x in grid {
        let est = ensemble_avg_tvd(ensemble, &gram_uniform(n, x)?, partition, &reference)?;
        mean.push(est.mean);
        stderr.push(est.stderr);
    }
    Ok(SweepResult {
        partition: partition.to_string(),
        grid: grid.to_vec(),
        mean,
        stderr,
    })
}

/// Equal-width bucket counts over `[lo, hi]`; values outside are clamped to
/// the end buckets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, buckets: usize) -> Result<Self> {
        if buckets == 0 || !(hi > lo) {
            return Err(Error::arg(format!("bad histogram range [{lo}, {hi}] with {buckets} buckets")));
        }
        let mut counts = vec![0u64; buckets];
        let width = (hi - lo) / buckets as f64;
        for &v in values {
            let b = ((v - lo) / width).floor();
            let b = if b < 0.0 { 0 } else { (b as usize).min(buckets - 1) };
            counts[b] += 1;
        }
        Ok(Histogram { lo, hi, counts })
    }

    pub fn edges(&self) -> Vec<f64> {
        let b = self.counts.len();
        (0..=b).map(|i| self.lo + (self.hi - self.lo) * i as f64 / b as f64).collect()
    }
}

/// One row of a bunching scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbpPoint {
    pub unitary: usize,
    pub gram: usize,
    /// `Perm(X) / n!`.
    pub abscissa: f64,
    /// `P_bos - P_X`.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbpSummary {
    pub gram: usize,
    pub abscissa: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub negatives: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbpScan {
    pub subset: Vec<usize>,
    pub points: Vec<GbpPoint>,
    pub summaries: Vec<GbpSummary>,
}

impl GbpScan {
    pub fn negative_fraction(&self, tol: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|p| p.delta < -tol).count() as f64 / self.points.len() as f64
    }
}

/// Noise applied to the interferometer that produces the partially
/// distinguishable side of a bunching scan. Unitary `i` gets a noise draw
/// seeded with `child_seed(seed, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanNoise {
    pub epsilon: f64,
    pub seed: u64,
}

/// `P_bos - P_X` for every unitary and Gram matrix, the bosonic side always
/// computed on the noiseless unitary.
pub fn gbp_difference_scan(
    ensemble: &[UnitaryMatrix],
    subset: &[usize],
    grams: &[GramMatrix],
    noise: Option<ScanNoise>,
) -> Result<GbpScan> {
    if ensemble.is_empty() || grams.is_empty() {
        return Err(Error::arg("bunching scans need unitaries and Gram matrices"));
    }
    let n = grams[0].n();
    if grams.iter().any(|g| g.n() != n) {
        return Err(Error::dim("Gram matrices of different sizes"));
    }
    let ones = GramMatrix::ones(n);
    let abscissae: Vec<f64> = grams.iter().map(GramMatrix::permanent_score).collect();
    let rows: Vec<Vec<GbpPoint>> = ensemble
        .par_iter()
        .enumerate()
        .map(|(ui, u)| {
            let bos = generalized_bunching_probability(u, &ones, subset)?;
            let exp_u = match noise {
                Some(ns) => apply_noise(u, &NoiseModel::haar(u.dim(), ns.epsilon, child_seed(ns.seed, ui as u64))?)?,
                None => u.clone(),
            };
            grams
                .iter()
                .enumerate()
                .map(|(gi, g)| {
                    Ok(GbpPoint {
                        unitary: ui,
                        gram: gi,
                        abscissa: abscissae[gi],
                        delta: bos - generalized_bunching_probability(&exp_u, g, subset)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let points: Vec<GbpPoint> = rows.into_iter().flatten().collect();
    let summaries = (0..grams.len())
        .map(|gi| {
            let d: Vec<f64> = points.iter().filter(|p| p.gram == gi).map(|p| p.delta).collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let var = if d.len() > 1 {
                d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64
            } else {
                0.0
            };
            GbpSummary {
                gram: gi,
                abscissa: abscissae[gi],
                mean,
                std_dev: var.sqrt(),
                min: d.iter().copied().fold(f64::INFINITY, f64::min),
                negatives: d.iter().filter(|&&v| v < 0.0).count(),
            }
        })
        .collect();
    Ok(GbpScan {
        subset: subset.to_vec(),
        points,
        summaries,
    })
}
