//! Partially distinguishable photons in a linear interferometer: Gram
//! matrices, brute-force outcome probabilities and synthetic samples.

mod gram;
mod outcome;
mod sampling;

pub use gram::{gram_from_delays, gram_uniform, hom_visibility, quad_mean_overlap, DelayConfig, GramMatrix};
pub use outcome::{
    enumerate_patterns, full_distribution, outcome_probability, FullDistribution, InputConfig, OutcomePattern,
    BRUTE_FORCE_PHOTON_CAP, ENUMERATION_MODE_CAP,
};
pub use sampling::{draw_samples, SampleMetadata, SampleSet};
