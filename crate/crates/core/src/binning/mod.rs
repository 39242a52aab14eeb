//! Photon-number distributions over bins of output modes.

mod bunching;
mod characteristic;
mod coarse;
mod partition;

pub use bunching::{
    bunching_matrix, char_poly_coefficients, generalized_bunching_probability, BunchingPolynomial,
    COEFFICIENT_PHOTON_CAP,
};
pub use characteristic::{
    binned_distribution_exact, binned_distribution_gurvits, characteristic_grid, characteristic_value,
    gurvits_samples_for, virtual_interferometer, EstimatedBinnedDistribution, GRID_POINT_CAP,
};
pub use coarse::{bin_samples, coarse_grain};
pub use partition::{binned_support, BinnedDistribution, BinnedOutcome, ModePartition};
