use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Disjoint, nonempty bins of output modes. Mode labels are 1-based; the
/// bins need not cover every mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModePartition {
    m: usize,
    bins: Vec<Vec<usize>>,
}

impl ModePartition {
    pub fn new(m: usize, bins: Vec<Vec<usize>>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::arg("a partition needs at least one bin"));
        }
        let mut seen = vec![false; m + 1];
        let mut sorted = Vec::with_capacity(bins.len());
        for bin in bins {
            if bin.is_empty() {
                return Err(Error::arg("bins must be nonempty"));
            }
            let mut bin = bin;
            bin.sort_unstable();
            for &mode in &bin {
                if mode == 0 || mode > m {
                    return Err(Error::arg(format!("mode {mode} outside 1..={m}")));
                }
                if seen[mode] {
                    return Err(Error::arg(format!("mode {mode} appears in more than one bin")));
                }
                seen[mode] = true;
            }
            sorted.push(bin);
        }
        Ok(ModePartition { m, bins: sorted })
    }

    /// One bin holding `subset`.
    pub fn single(m: usize, subset: &[usize]) -> Result<Self> {
        Self::new(m, vec![subset.to_vec()])
    }

    /// Every mode in its own bin.
    pub fn singletons(m: usize) -> Self {
        ModePartition {
            m,
            bins: (1..=m).map(|k| vec![k]).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of bins `K`.
    pub fn k(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[Vec<usize>] {
        &self.bins
    }

    pub fn bin_sizes(&self) -> Vec<usize> {
        self.bins.iter().map(Vec::len).collect()
    }

    pub fn covers_all(&self) -> bool {
        self.bins.iter().map(Vec::len).sum::<usize>() == self.m
    }

    /// For each 0-based mode, the index of its bin.
    pub fn bin_of_mode(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.m];
        for (z, bin) in self.bins.iter().enumerate() {
            for &mode in bin {
                out[mode - 1] = Some(z);
            }
        }
        out
    }

    /// True when every bin of `self` lies inside a bin of `coarser`, and both
    /// cover the same modes.
    pub fn refines(&self, coarser: &ModePartition) -> bool {
        if self.m != coarser.m {
            return false;
        }
        let outer = coarser.bin_of_mode();
        let inner = self.bin_of_mode();
        if inner.iter().zip(&outer).any(|(a, b)| a.is_some() != b.is_some()) {
            return false;
        }
        self.bins.iter().all(|bin| {
            let target = outer[bin[0] - 1];
            bin.iter().all(|&mode| outer[mode - 1] == target)
        })
    }

    /// Coarse-grains a pattern `s` into bin counts.
    pub fn bin_counts(&self, s: &[usize]) -> BinnedOutcome {
        BinnedOutcome(self.bins.iter().map(|bin| bin.iter().map(|&mode| s[mode - 1]).sum()).collect())
    }
}

impl fmt::Display for ModePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .bins
            .iter()
            .map(|b| b.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        f.write_str(&parts.join("|"))
    }
}

/// Photon count per bin.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinnedOutcome(pub Vec<usize>);

impl BinnedOutcome {
    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for BinnedOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl std::str::FromStr for BinnedOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::arg(format!("bad bin count {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(BinnedOutcome)
    }
}

/// The outcomes a binned distribution is defined on: `k ∈ {0..n}^K` with
/// `Σ k ≤ n`, tightened to `Σ k = n` when the bins cover all modes.
pub fn binned_support(partition: &ModePartition, n: usize) -> Vec<BinnedOutcome> {
    let k = partition.k();
    let exact = partition.covers_all();
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        let total: usize = cur.iter().sum();
        if total <= n && (!exact || total == n) {
            out.push(BinnedOutcome(cur.clone()));
        }
        // odometer, last axis fastest
        let mut axis = k;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if cur[axis] < n {
                cur[axis] += 1;
                break;
            }
            cur[axis] = 0;
        }
    }
}

/// Probability table over binned outcomes for a fixed partition and photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedDistribution {
    partition: ModePartition,
    n: usize,
    probs: BTreeMap<BinnedOutcome, f64>,
}

impl BinnedDistribution {
    /// Fills the canonical support from `f`; values must already be clean.
    pub fn from_fn(partition: ModePartition, n: usize, mut f: impl FnMut(&BinnedOutcome) -> f64) -> Result<Self> {
        let probs = binned_support(&partition, n)
            .into_iter()
            .map(|k| {
                let p = f(&k);
                (k, p)
            })
            .collect();
        Self::new(partition, n, probs)
    }

    pub fn new(partition: ModePartition, n: usize, probs: BTreeMap<BinnedOutcome, f64>) -> Result<Self> {
        let support = binned_support(&partition, n);
        if support.len() != probs.len() || support.iter().any(|k| !probs.contains_key(k)) {
            return Err(Error::dim(format!(
                "probabilities do not match the outcome space of partition {partition} with n={n}"
            )));
        }
        for (k, &p) in &probs {
            if !p.is_finite() || p < -1e-10 {
                return Err(Error::invariant(format!("probability {p} for outcome {k}")));
            }
        }
        let total: f64 = probs.values().sum();
        if partition.covers_all() && (total - 1.0).abs() > 1e-8 {
            return Err(Error::invariant(format!("probabilities sum to {total}")));
        }
        if total > 1.0 + 1e-8 {
            return Err(Error::invariant(format!("probabilities sum to {total}")));
        }
        let probs = probs.into_iter().map(|(k, p)| (k, p.max(0.0))).collect();
        Ok(BinnedDistribution { partition, n, probs })
    }

    pub fn partition(&self) -> &ModePartition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &BTreeMap<BinnedOutcome, f64> {
        &self.probs
    }

    pub fn prob(&self, k: &[usize]) -> f64 {
        self.probs.get(&BinnedOutcome(k.to_vec())).copied().unwrap_or(0.0)
    }

    /// Probabilities in support order.
    pub fn values(&self) -> Vec<f64> {
        self.probs.values().copied().collect()
    }

    /// Same probabilities attached to another partition with identical bin sizes.
    pub fn relabel(&self, partition: ModePartition) -> Result<Self> {
        if partition.bin_sizes() != self.partition.bin_sizes() || partition.m() != self.partition.m() {
            return Err(Error::dim(format!(
                "cannot relabel partition {} as {partition}",
                self.partition
            )));
        }
        Self::new(partition, self.n, self.probs.clone())
    }
}
