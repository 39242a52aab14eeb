use std::collections::BTreeMap;

use crate::binning::{binned_support, BinnedDistribution, BinnedOutcome, ModePartition};
use crate::error::{Error, Result};
use crate::interference::{FullDistribution, SampleSet};

/// Sums full-pattern probabilities into bin counts.
pub fn coarse_grain(dist: &FullDistribution, partition: &ModePartition) -> Result<BinnedDistribution> {
    if dist.m() != partition.m() {
        return Err(Error::dim(format!(
            "distribution has {} modes, partition is over {}",
            dist.m(),
            partition.m()
        )));
    }
    let mut probs: BTreeMap<BinnedOutcome, f64> =
        binned_support(partition, dist.n()).into_iter().map(|k| (k, 0.0)).collect();
    for (s, p) in dist.probs() {
        *probs.get_mut(&partition.bin_counts(s.counts())).expect("bin counts lie in the support") += p;
    }
    BinnedDistribution::new(partition.clone(), dist.n(), probs)
}

/// Empirical binned distribution of a sample set.
pub fn bin_samples(samples: &SampleSet, partition: &ModePartition) -> Result<BinnedDistribution> {
    if samples.m() != partition.m() {
        return Err(Error::dim(format!(
            "samples have {} modes, partition is over {}",
            samples.m(),
            partition.m()
        )));
    }
    if samples.total() == 0 {
        return Err(Error::arg("empty sample set"));
    }
    let mut probs: BTreeMap<BinnedOutcome, f64> =
        binned_support(partition, samples.n()).into_iter().map(|k| (k, 0.0)).collect();
    let total = samples.total() as f64;
    for (s, &c) in samples.counts() {
        *probs.get_mut(&partition.bin_counts(s.counts())).expect("bin counts lie in the support") += c as f64 / total;
    }
    BinnedDistribution::new(partition.clone(), samples.n(), probs)
}

impl BinnedDistribution {
    /// Merges bins into those of `coarser`. Each bin of `coarser` must be a
    /// union of bins of `self`; bins of `self` outside `coarser` are dropped.
    pub fn coarsen(&self, coarser: &ModePartition) -> Result<BinnedDistribution> {
        let fine = self.partition();
        if fine.m() != coarser.m() {
            return Err(Error::dim(format!("partitions over {} and {} modes", fine.m(), coarser.m())));
        }
        let outer = coarser.bin_of_mode();
        let mut target = Vec::with_capacity(fine.k());
        for bin in fine.bins() {
            let t = outer[bin[0] - 1];
            if bin.iter().any(|&mode| outer[mode - 1] != t) {
                return Err(Error::arg(format!("partition {fine} does not refine {coarser}")));
            }
            target.push(t);
        }
        let inner = fine.bin_of_mode();
        if outer.iter().zip(&inner).any(|(o, i)| o.is_some() && i.is_none()) {
            return Err(Error::arg(format!("partition {coarser} uses modes outside {fine}")));
        }
        let mut probs: BTreeMap<BinnedOutcome, f64> =
            binned_support(coarser, self.n()).into_iter().map(|k| (k, 0.0)).collect();
        for (k, p) in self.probs() {
            let mut merged = vec![0; coarser.k()];
            for (z, &c) in k.counts().iter().enumerate() {
                if let Some(w) = target[z] {
                    merged[w] += c;
                }
            }
            *probs.get_mut(&BinnedOutcome(merged)).expect("merged counts lie in the support") += p;
        }
        BinnedDistribution::new(coarser.clone(), self.n(), probs)
    }
}
