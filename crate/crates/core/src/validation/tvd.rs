use std::collections::BTreeMap;

use crate::binning::{bin_samples, coarse_grain, BinnedDistribution, ModePartition};
use crate::error::{Error, Result};
use crate::interference::{FullDistribution, OutcomePattern, SampleSet};

/// Normalization slack allowed for empirical inputs.
const NORM_TOL: f64 = 1e-6;

/// A normalized table over a discrete outcome space.
pub trait OutcomeDistribution {
    type Outcome: Ord + std::fmt::Display;

    fn probabilities(&self) -> &BTreeMap<Self::Outcome, f64>;

    /// Short description of the outcome space, compared for equality.
    fn space(&self) -> String;
}

impl OutcomeDistribution for FullDistribution {
    type Outcome = OutcomePattern;

    fn probabilities(&self) -> &BTreeMap<OutcomePattern, f64> {
        self.probs()
    }

    fn space(&self) -> String {
        format!("n={} m={}", self.n(), self.m())
    }
}

impl OutcomeDistribution for BinnedDistribution {
    type Outcome = crate::binning::BinnedOutcome;

    fn probabilities(&self) -> &BTreeMap<Self::Outcome, f64> {
        self.probs()
    }

    fn space(&self) -> String {
        format!("n={} m={} bins={}", self.n(), self.partition().m(), self.partition())
    }
}

/// Half the L1 distance between tables on the same outcome set.
pub fn tvd_maps<K: Ord + std::fmt::Display>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> Result<f64> {
    if p.len() != q.len() || p.keys().zip(q.keys()).any(|(a, b)| a != b) {
        return Err(Error::dim("distributions are over different outcome sets"));
    }
    for (name, d) in [("first", p), ("second", q)] {
        let total: f64 = d.values().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::invariant(format!("{name} distribution sums to {total}")));
        }
    }
    let l1: f64 = p.values().zip(q.values()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

pub fn tvd<D: OutcomeDistribution>(p: &D, q: &D) -> Result<f64> {
    if p.space() != q.space() {
        return Err(Error::dim(format!(
            "outcome spaces differ: {} vs {}",
            p.space(),
            q.space()
        )));
    }
    tvd_maps(p.probabilities(), q.probabilities())
}

/// TVD between two binned distributions whose partitions have the same bin
/// sizes, matching outcomes bin by bin.
pub fn tvd_across_bins(p: &BinnedDistribution, q: &BinnedDistribution) -> Result<f64> {
    tvd(&p.relabel(q.partition().clone())?, q)
}

/// Anything that reduces to a binned distribution on a partition.
pub trait Coarsen {
    fn coarsen_to(&self, partition: &ModePartition) -> Result<BinnedDistribution>;
}

impl Coarsen for FullDistribution {
    fn coarsen_to(&self, partition: &ModePartition) -> Result<BinnedDistribution> {
        coarse_grain(self, partition)
    }
}

impl Coarsen for SampleSet {
    fn coarsen_to(&self, partition: &ModePartition) -> Result<BinnedDistribution> {
        bin_samples(self, partition)
    }
}

impl Coarsen for BinnedDistribution {
    fn coarsen_to(&self, partition: &ModePartition) -> Result<BinnedDistribution> {
        if self.partition() == partition {
            Ok(self.clone())
        } else {
            self.coarsen(partition)
        }
    }
}

/// TVD after reducing both inputs to `partition`.
pub fn binned_tvd<A: Coarsen + ?Sized, B: Coarsen + ?Sized>(a: &A, b: &B, partition: &ModePartition) -> Result<f64> {
    tvd(&a.coarsen_to(partition)?, &b.coarsen_to(partition)?)
}
