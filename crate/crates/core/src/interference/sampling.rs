use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{FullDistribution, OutcomePattern};
use crate::rng::rng_from_seed;

/// Provenance carried alongside a sample set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Detected click patterns with their counts.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    m: usize,
    n: usize,
    counts: BTreeMap<OutcomePattern, u64>,
    total: u64,
    pub metadata: SampleMetadata,
}

impl SampleSet {
    pub fn new(m: usize, n: usize, counts: BTreeMap<OutcomePattern, u64>) -> Result<Self> {
        for s in counts.keys() {
            if s.m() != m {
                return Err(Error::dim(format!("pattern {s} does not have {m} modes")));
            }
            if s.photons() != n {
                return Err(Error::invariant(format!("pattern {s} does not hold {n} photons")));
            }
        }
        let counts: BTreeMap<_, _> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total = counts.values().sum();
        Ok(SampleSet {
            m,
            n,
            counts,
            total,
            metadata: SampleMetadata::default(),
        })
    }

    pub fn empty(m: usize, n: usize) -> Self {
        SampleSet {
            m,
            n,
            counts: BTreeMap::new(),
            total: 0,
            metadata: SampleMetadata::default(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<OutcomePattern, u64> {
        &self.counts
    }

    pub fn count(&self, s: &OutcomePattern) -> u64 {
        self.counts.get(s).copied().unwrap_or(0)
    }

    /// Relative frequencies over every pattern of the distribution's space.
    pub fn empirical(&self) -> Result<FullDistribution> {
        if self.total == 0 {
            return Err(Error::arg("empty sample set"));
        }
        let mut probs: BTreeMap<OutcomePattern, f64> = crate::interference::enumerate_patterns(self.n, self.m)
            .into_iter()
            .map(|s| (s, 0.0))
            .collect();
        for (s, &c) in &self.counts {
            probs.insert(s.clone(), c as f64 / self.total as f64);
        }
        FullDistribution::new(self.m, self.n, probs)
    }
}

/// `count` i.i.d. draws by inverse CDF over the lexicographic pattern order.
pub fn draw_samples(dist: &FullDistribution, count: u64, seed: u64) -> Result<SampleSet> {
    let total: f64 = dist.probs().values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invariant(format!("distribution sums to {total}")));
    }
    let patterns: Vec<&OutcomePattern> = dist.probs().keys().collect();
    let mut cdf = Vec::with_capacity(patterns.len());
    let mut acc = 0.0;
    for p in dist.probs().values() {
        acc += p;
        cdf.push(acc);
    }
    // Last pattern with positive mass absorbs round-off at the top of the CDF.
    let last = dist
        .probs()
        .values()
        .rposition(|&p| p > 0.0)
        .ok_or_else(|| Error::invariant("distribution has no mass"))?;

    let mut rng = rng_from_seed(seed);
    let mut hits = vec![0u64; patterns.len()];
    for _ in 0..count {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        hits[idx] += 1;
    }
    let counts = patterns
        .into_iter()
        .zip(hits)
        .filter(|(_, c)| *c > 0)
        .map(|(s, c)| (s.clone(), c))
        .collect();
    let mut set = SampleSet::new(dist.m(), dist.n(), counts)?;
    set.metadata.seed = Some(seed);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::{full_distribution, GramMatrix, InputConfig};
    use crate::linalg::{haar_unitary, UnitaryMatrix};

    fn hom() -> FullDistribution {
        full_distribution(
            &UnitaryMatrix::beamsplitter(),
            &GramMatrix::ones(2),
            &InputConfig::new(2, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_draws() {
        let s = draw_samples(&hom(), 0, 1).unwrap();
        assert_eq!(s.total(), 0);
        assert!(s.counts().is_empty());
        assert!(s.empirical().is_err());
    }

    #[test]
    fn point_mass() {
        let pm = full_distribution(
            &UnitaryMatrix::identity(3),
            &GramMatrix::ones(2),
            &InputConfig::new(2, 3).unwrap(),
        )
        .unwrap();
        let s = draw_samples(&pm, 100, 9).unwrap();
        assert_eq!(s.count(&OutcomePattern::new(vec![1, 1, 0])), 100);
    }

    #[test]
    fn hom_frequencies() {
        let n = 1_000_000u64;
        let s = draw_samples(&hom(), n, 2).unwrap();
        let f = |v: &[usize]| s.count(&OutcomePattern::new(v.to_vec())) as f64 / n as f64;
        assert!(f(&[1, 1]) <= 1e-5);
        assert!((f(&[2, 0]) - 0.5).abs() <= 0.002);
        assert!((f(&[0, 2]) - 0.5).abs() <= 0.002);
    }

    #[test]
    fn deterministic_per_seed() {
        let u = haar_unitary(4, 3).unwrap();
        let d = full_distribution(&u, &GramMatrix::ones(3), &InputConfig::new(3, 4).unwrap()).unwrap();
        assert_eq!(draw_samples(&d, 500, 4).unwrap(), draw_samples(&d, 500, 4).unwrap());
        assert_ne!(draw_samples(&d, 500, 4).unwrap(), draw_samples(&d, 500, 5).unwrap());
    }

    #[test]
    fn rejects_unnormalized() {
        let mut probs = hom().probs().clone();
        for p in probs.values_mut() {
            *p *= 0.5;
        }
        assert!(FullDistribution::new(2, 2, probs).is_err());
    }

    #[test]
    fn tvd_shrinks_like_inverse_sqrt() {
        let u = haar_unitary(4, 8).unwrap();
        let d = full_distribution(&u, &GramMatrix::ones(3), &InputConfig::new(3, 4).unwrap()).unwrap();
        let tvd = |n: u64, seed: u64| {
            let e = draw_samples(&d, n, seed).unwrap().empirical().unwrap();
            0.5 * d.probs().iter().map(|(s, p)| (p - e.prob(s)).abs()).sum::<f64>()
        };
        let seeds = 20;
        let small: f64 = (0..seeds).map(|s| tvd(2_000, s)).sum::<f64>() / seeds as f64;
        let large: f64 = (0..seeds).map(|s| tvd(8_000, 100 + s)).sum::<f64>() / seeds as f64;
        let ratio = small / large;
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }
}
