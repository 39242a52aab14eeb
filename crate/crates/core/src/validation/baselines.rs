use rayon::prelude::*;

use crate::binning::{binned_distribution_exact, coarse_grain, BinnedDistribution, ModePartition};
use crate::error::{Error, Result};
use crate::interference::{FullDistribution, GramMatrix};
use crate::linalg::UnitaryMatrix;
use crate::validation::tvd_across_bins;

/// Binned distribution of a sampler that outputs every `n`-photon pattern
/// with equal probability.
pub fn uniform_sampler_baseline(n: usize, m: usize, partition: &ModePartition) -> Result<BinnedDistribution> {
    coarse_grain(&FullDistribution::uniform(n, m)?, partition)
}

/// Mean TVD of one fixed distribution against each target. Targets may use
/// different bins of the same sizes as the reference.
pub fn fixed_distribution_baseline(reference: &BinnedDistribution, targets: &[BinnedDistribution]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::arg("no target distributions"));
    }
    let mut total = 0.0;
    for t in targets {
        if t.partition().bin_sizes() != reference.partition().bin_sizes() {
            return Err(Error::dim(format!(
                "bin sizes {:?} differ from the reference's {:?}",
                t.partition().bin_sizes(),
                reference.partition().bin_sizes()
            )));
        }
        total += tvd_across_bins(reference, t)?;
    }
    Ok(total / targets.len() as f64)
}

/// Entrywise mean of exact binned distributions over an ensemble.
pub fn ensemble_mean_distribution(
    ensemble: &[UnitaryMatrix],
    x: &GramMatrix,
    partition: &ModePartition,
) -> Result<BinnedDistribution> {
    if ensemble.is_empty() {
        return Err(Error::arg("empty ensemble"));
    }
    let dists: Vec<BinnedDistribution> = ensemble
        .par_iter()
        .map(|u| binned_distribution_exact(u, x, partition))
        .collect::<Result<_>>()?;
    mean_distribution(&dists)
}

/// Entrywise mean of distributions over the same outcome space.
pub fn mean_distribution(dists: &[BinnedDistribution]) -> Result<BinnedDistribution> {
    let first = dists.first().ok_or_else(|| Error::arg("no distributions to average"))?;
    let mut probs = first.probs().clone();
    for d in &dists[1..] {
        if d.partition() != first.partition() || d.n() != first.n() {
            return Err(Error::dim("averaged distributions must share partition and photon number"));
        }
        for (k, p) in d.probs() {
            *probs.get_mut(k).expect("same support") += p;
        }
    }
    let len = dists.len() as f64;
    for p in probs.values_mut() {
        *p /= len;
    }
    BinnedDistribution::new(first.partition().clone(), first.n(), probs)
}
