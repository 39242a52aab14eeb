//! Dense complex linear algebra: matrices, permanents, Haar sampling and the
//! interferometer noise model.

mod haar;
mod matrix;
mod noise;
mod permanent;

pub use haar::{haar_unitary, haar_unitary_with_rng};
pub use matrix::{ComplexMatrix, UnitaryMatrix, DEFAULT_UNITARITY_TOLERANCE};
pub use noise::{amplitude_fidelity, apply_noise, unitary_log, unitary_power, NoiseModel, UnitaryEigen};
pub use permanent::{
    permanent, permanent_gurvits, permanent_gurvits_with_rng, permanent_with_cap, PermanentEstimate,
    DEFAULT_PERMANENT_CAP,
};

pub(crate) use permanent::glynn;
