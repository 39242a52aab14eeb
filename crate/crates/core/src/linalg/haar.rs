use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, UnitaryMatrix};
use crate::rng::rng_from_seed;

/// Haar-random `m x m` unitary, deterministic in `seed`.
pub fn haar_unitary(m: usize, seed: u64) -> Result<UnitaryMatrix> {
    if m == 0 {
        return Err(Error::arg("Haar unitary dimension must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    Ok(haar_unitary_with_rng(m, &mut rng))
}

/// Ginibre matrix, QR, then the phases of `diag(R)` pushed into `Q` so the
/// result is Haar distributed rather than biased by the QR sign convention.
pub fn haar_unitary_with_rng<R: Rng + ?Sized>(m: usize, rng: &mut R) -> UnitaryMatrix {
    assert!(m > 0, "Haar unitary dimension must be at least 1");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ginibre = DMatrix::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    });
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    UnitaryMatrix::new_unchecked(ComplexMatrix::from_dmatrix(q).expect("QR of a finite matrix is finite"))
}
