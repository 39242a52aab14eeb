use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{bin_samples, binned_distribution_exact, ModePartition};
use crate::error::{Error, Result};
use crate::interference::{GramMatrix, SampleMetadata, SampleSet};
use crate::linalg::UnitaryMatrix;
use crate::validation::{fixed_distribution_baseline, mean_distribution, tvd, uniform_sampler_baseline};

/// One binned outcome of one partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub k: String,
    pub empirical: f64,
    /// Multinomial standard error `sqrt(p(1-p)/N)` of the empirical value.
    pub stderr: f64,
    pub bosonic: f64,
    pub model: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub partition: String,
    pub tvd_bosonic: f64,
    pub tvd_model: f64,
    /// TVD of a uniform sampler to the bosonic reference.
    pub tvd_uniform_bosonic: Option<f64>,
    /// `0.5 Σ_k sqrt(p_k(1-p_k)/N)`, the TVD scale expected from sampling alone.
    pub sampling_floor: f64,
    pub outcomes: Vec<OutcomeRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub partition: String,
    pub tvd: f64,
}

/// Mean TVD of a single distribution, the average of the bosonic references
/// over partitions of one bin-size signature, against each reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedBaseline {
    pub bin_sizes: Vec<usize>,
    pub partitions: usize,
    pub mean_tvd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub m: usize,
    pub n: usize,
    pub total_samples: u64,
    pub partitions: Vec<PartitionReport>,
    /// Largest per-partition TVD, each a lower bound on the full TVD.
    pub worst_case_bosonic: WorstCase,
    pub worst_case_model: WorstCase,
    pub fixed_baselines: Vec<FixedBaseline>,
    pub metadata: SampleMetadata,
}

/// Compares binned sample frequencies with exact binned distributions for
/// indistinguishable photons and for `x_model`.
pub fn validation_report(
    samples: &SampleSet,
    u_set: &UnitaryMatrix,
    x_model: &GramMatrix,
    partitions: &[ModePartition],
) -> Result<ValidationReport> {
    if samples.total() == 0 {
        return Err(Error::arg("empty sample set"));
    }
    if partitions.is_empty() {
        return Err(Error::arg("no partitions to validate"));
    }
    if samples.m() != u_set.dim() || samples.n() != x_model.n() {
        return Err(Error::dim(format!(
            "samples are n={} m={}, model is n={} m={}",
            samples.n(),
            samples.m(),
            x_model.n(),
            u_set.dim()
        )));
    }
    let n = samples.n();
    let ones = GramMatrix::ones(n);
    let total = samples.total() as f64;

    let per: Vec<(PartitionReport, crate::binning::BinnedDistribution)> = partitions
        .par_iter()
        .map(|p| {
            let emp = bin_samples(samples, p)?;
            let bos = binned_distribution_exact(u_set, &ones, p)?;
            let model = binned_distribution_exact(u_set, x_model, p)?;
            // Enumeration caps bound the uniform baseline; beyond them it is omitted.
            let tvd_uniform_bosonic = match uniform_sampler_baseline(n, u_set.dim(), p) {
                Ok(uni) => Some(tvd(&uni, &bos)?),
                Err(Error::Size(_)) => None,
                Err(e) => return Err(e),
            };
            let outcomes: Vec<OutcomeRow> = emp
                .probs()
                .iter()
                .map(|(k, &e)| OutcomeRow {
                    k: k.to_string(),
                    empirical: e,
                    stderr: (e * (1.0 - e) / total).max(0.0).sqrt(),
                    bosonic: bos.prob(k.counts()),
                    model: model.prob(k.counts()),
                })
                .collect();
            let sampling_floor = 0.5 * outcomes.iter().map(|o| o.stderr).sum::<f64>();
            Ok((
                PartitionReport {
                    partition: p.to_string(),
                    tvd_bosonic: tvd(&emp, &bos)?,
                    tvd_model: tvd(&emp, &model)?,
                    tvd_uniform_bosonic,
                    sampling_floor,
                    outcomes,
                },
                bos,
            ))
        })
        .collect::<Result<_>>()?;

    let worst = |f: fn(&PartitionReport) -> f64| {
        let best = per
            .iter()
            .map(|(r, _)| r)
            .fold(None::<&PartitionReport>, |acc, r| match acc {
                Some(a) if f(a) >= f(r) => Some(a),
                _ => Some(r),
            })
            .expect("at least one partition");
        WorstCase {
            partition: best.partition.clone(),
            tvd: f(best),
        }
    };
    let worst_case_bosonic = worst(|r| r.tvd_bosonic);
    let worst_case_model = worst(|r| r.tvd_model);

    let mut groups: BTreeMap<Vec<usize>, Vec<crate::binning::BinnedDistribution>> = BTreeMap::new();
    for (_, bos) in &per {
        groups.entry(bos.partition().bin_sizes()).or_default().push(bos.clone());
    }
    let mut fixed_baselines = Vec::new();
    for (bin_sizes, dists) in groups {
        if dists.len() < 2 {
            continue;
        }
        let relabeled: Vec<_> = dists
            .iter()
            .map(|d| d.relabel(dists[0].partition().clone()))
            .collect::<Result<_>>()?;
        let reference = mean_distribution(&relabeled)?;
        fixed_baselines.push(FixedBaseline {
            bin_sizes,
            partitions: dists.len(),
            mean_tvd: fixed_distribution_baseline(&reference, &dists)?,
        });
    }

    Ok(ValidationReport {
        m: samples.m(),
        n,
        total_samples: samples.total(),
        partitions: per.into_iter().map(|(r, _)| r).collect(),
        worst_case_bosonic,
        worst_case_model,
        fixed_baselines,
        metadata: samples.metadata.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::{draw_samples, full_distribution, gram_uniform, InputConfig};
    use crate::linalg::haar_unitary;
    use crate::validation::single_and_two_mode_bins;

    fn report(x_true: &GramMatrix, count: u64, seed: u64) -> ValidationReport {
        let u = haar_unitary(4, 17).unwrap();
        let d = full_distribution(&u, x_true, &InputConfig::new(3, 4).unwrap()).unwrap();
        let s = draw_samples(&d, count, seed).unwrap();
        validation_report(&s, &u, &gram_uniform(3, 0.5).unwrap(), &single_and_two_mode_bins(4)).unwrap()
    }

    #[test]
    fn honest_bosonic_samples() {
        let r = report(&GramMatrix::ones(3), 1_000_000, 1);
        assert!(r.worst_case_bosonic.tvd <= 0.01);
        assert_eq!(r.partitions.len(), 10);
        let max = r.partitions.iter().map(|p| p.tvd_bosonic).fold(0.0, f64::max);
        assert_eq!(r.worst_case_bosonic.tvd, max);
        for p in &r.partitions {
            assert!((0.0..=1.0).contains(&p.tvd_bosonic) && (0.0..=1.0).contains(&p.tvd_model));
        }
        assert_eq!(r.fixed_baselines.len(), 2);
    }

    #[test]
    fn partially_distinguishable_samples_are_detected() {
        let r = report(&gram_uniform(3, 0.5).unwrap(), 100_000, 2);
        let worst = r.partitions.iter().find(|p| p.partition == r.worst_case_bosonic.partition).unwrap();
        assert!(r.worst_case_bosonic.tvd >= 5.0 * worst.sampling_floor, "{r:?}");
        assert!(r.worst_case_model.tvd < r.worst_case_bosonic.tvd);
    }

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&report(&GramMatrix::ones(3), 5000, 3)).unwrap();
        let b = serde_json::to_string(&report(&GramMatrix::ones(3), 5000, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_mismatches() {
        let u = haar_unitary(4, 17).unwrap();
        let s = SampleSet::empty(4, 3);
        let p = single_and_two_mode_bins(4);
        assert!(validation_report(&s, &u, &GramMatrix::ones(3), &p).is_err());
        let d = full_distribution(&u, &GramMatrix::ones(3), &InputConfig::new(3, 4).unwrap()).unwrap();
        let s = draw_samples(&d, 10, 0).unwrap();
        assert!(validation_report(&s, &u, &GramMatrix::ones(2), &p).is_err());
        assert!(validation_report(&s, &u, &GramMatrix::ones(3), &[]).is_err());
    }
}
