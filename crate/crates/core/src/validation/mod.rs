//! Total variation distances between sampler output and theory, baselines,
//! and scans over interferometer ensembles.

mod baselines;
mod phase;
mod report;
mod scans;
mod tvd;

pub use baselines::{ensemble_mean_distribution, fixed_distribution_baseline, mean_distribution, uniform_sampler_baseline};
pub use phase::{modulus_twin, phase_sensitivity_probe, random_dressing, ModulusTwin, PhaseProbe};
pub use report::{validation_report, FixedBaseline, OutcomeRow, PartitionReport, ValidationReport, WorstCase};
pub use scans::{
    bin_fluctuation_scan, distinguishability_sweep, ensemble_avg_tvd, ensemble_tvds, gbp_difference_scan,
    FluctuationScan, GbpPoint, GbpScan, GbpSummary, Histogram, ScanNoise, SweepResult,
};
pub use tvd::{binned_tvd, tvd, tvd_across_bins, tvd_maps, Coarsen, OutcomeDistribution};

use crate::binning::ModePartition;

/// Every one-mode bin followed by every two-mode bin, each as a single-bin
/// partition.
pub fn single_and_two_mode_bins(m: usize) -> Vec<ModePartition> {
    let mut out: Vec<ModePartition> = (1..=m).map(|a| ModePartition::single(m, &[a]).expect("mode in range")).collect();
    for a in 1..=m {
        for b in a + 1..=m {
            out.push(ModePartition::single(m, &[a, b]).expect("modes in range"));
        }
    }
    out
}
