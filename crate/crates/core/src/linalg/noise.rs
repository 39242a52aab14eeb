//! Principal matrix logarithm of unitaries and the interpolated-noise model
//! `U_get = exp(ε · log U_noise) · U_set`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, ComplexMatrix, UnitaryMatrix};
use crate::rng::child_seed;

/// Eigenvalues of a unitary must have unit modulus to this tolerance.
const EIGEN_MODULUS_TOL: f64 = 1e-8;

/// `U = W diag(e^{iθ}) W†` with `θ ∈ (-π, π]`.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub vectors: DMatrix<Complex64>,
    pub phases: Vec<f64>,
}

impl UnitaryEigen {
    pub fn new(u: &UnitaryMatrix) -> Result<Self> {
        let m = u.dim();
        let schur = u
            .matrix()
            .as_dmatrix()
            .clone()
            .try_schur(1e-15, 10_000)
            .ok_or_else(|| Error::invariant("Schur iteration did not converge"))?;
        let (vectors, t) = schur.unpack();
        // A normal matrix has a diagonal Schur form.
        let mut off = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    off = off.max(t[(i, j)].norm());
                }
            }
        }
        if off > EIGEN_MODULUS_TOL {
            return Err(Error::invariant(format!(
                "Schur form is not diagonal (off-diagonal {off:.2e}); matrix is not normal"
            )));
        }
        let mut phases = Vec::with_capacity(m);
        for i in 0..m {
            let lambda = t[(i, i)];
            if (lambda.norm() - 1.0).abs() > EIGEN_MODULUS_TOL {
                return Err(Error::invariant(format!(
                    "eigenvalue {lambda} is not of unit modulus"
                )));
            }
            let mut theta = lambda.arg();
            if theta <= -PI {
                theta += 2.0 * PI;
            }
            phases.push(theta);
        }
        Ok(UnitaryEigen { vectors, phases })
    }

    /// `W diag(f(θ_j)) W†`.
    pub fn map_phases(&self, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
        let m = self.phases.len();
        let mut scaled = self.vectors.clone();
        for j in 0..m {
            let s = f(self.phases[j]);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Principal logarithm: the skew-Hermitian `L` with `exp(L) = U` and spectrum
/// in `i(-π, π]`.
pub fn unitary_log(u: &UnitaryMatrix) -> Result<ComplexMatrix> {
    let eig = UnitaryEigen::new(u)?;
    ComplexMatrix::from_dmatrix(eig.map_phases(|t| Complex64::new(0.0, t)))
}

/// `exp(ε · log U)`, computed on the eigenbasis so the result stays unitary.
pub fn unitary_power(u: &UnitaryMatrix, epsilon: f64) -> Result<UnitaryMatrix> {
    let eig = UnitaryEigen::new(u)?;
    let m = eig.map_phases(|t| Complex64::from_polar(1.0, epsilon * t));
    UnitaryMatrix::new(ComplexMatrix::from_dmatrix(m)?)
}

/// Programming-noise model for an interferometer.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    epsilon: f64,
    noise_unitary: UnitaryMatrix,
    seed: u64,
}

impl NoiseModel {
    pub fn new(epsilon: f64, noise_unitary: UnitaryMatrix, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::arg(format!("epsilon {epsilon} outside [0, 1]")));
        }
        Ok(NoiseModel {
            epsilon,
            noise_unitary,
            seed,
        })
    }

    /// Noise unitary drawn from the Haar measure with `seed`.
    pub fn haar(m: usize, epsilon: f64, seed: u64) -> Result<Self> {
        let noise = haar_unitary(m, child_seed(seed, 0x6e6f697365))?;
        Self::new(epsilon, noise, seed)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn noise_unitary(&self) -> &UnitaryMatrix {
        &self.noise_unitary
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `exp(ε log U_noise) · U_set`.
pub fn apply_noise(u_set: &UnitaryMatrix, model: &NoiseModel) -> Result<UnitaryMatrix> {
    if u_set.dim() != model.noise_unitary.dim() {
        return Err(Error::dim(format!(
            "noise unitary is {}x{}, target is {}x{}",
            model.noise_unitary.dim(),
            model.noise_unitary.dim(),
            u_set.dim(),
            u_set.dim()
        )));
    }
    let step = unitary_power(&model.noise_unitary, model.epsilon)?;
    step.compose(u_set)
}

/// `(1/m) Tr(|U_set|ᵀ |U_get|)` with `|·|` taken entrywise.
pub fn amplitude_fidelity(u_set: &UnitaryMatrix, u_get: &UnitaryMatrix) -> Result<f64> {
    if u_set.dim() != u_get.dim() {
        return Err(Error::dim(format!(
            "fidelity between {}-mode and {}-mode unitaries",
            u_set.dim(),
            u_get.dim()
        )));
    }
    let a = u_set.matrix().moduli();
    let b = u_get.matrix().moduli();
    Ok(a.component_mul(&b).sum() / u_set.dim() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = unitary_log(&UnitaryMatrix::identity(4)).unwrap();
        assert!(l.max_abs() < 1e-14);
    }

    #[test]
    fn log_of_diagonal() {
        let d = ComplexMatrix::from_row_major(
            2,
            2,
            vec![Complex64::from_polar(1.0, FRAC_PI_2), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let l = unitary_log(&UnitaryMatrix::new(d).unwrap()).unwrap();
        let want = ComplexMatrix::from_row_major(
            2,
            2,
            vec![c(0.0, FRAC_PI_2), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(l.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn principal_branch_at_minus_one() {
        let d = ComplexMatrix::from_real(1, 1, |_, _| -1.0);
        let l = unitary_log(&UnitaryMatrix::new(d).unwrap()).unwrap();
        assert!((l.get(0, 0) - c(0.0, PI)).norm() < 1e-12);
    }

    #[test]
    fn log_round_trips_through_exp() {
        for seed in 0..10 {
            let u = haar_unitary(5, seed).unwrap();
            let l = unitary_log(&u).unwrap();
            let skew = l.as_dmatrix() + l.as_dmatrix().adjoint();
            assert!(skew.iter().all(|z| z.norm() < 1e-10));
            let e = ComplexMatrix::from_dmatrix(l.as_dmatrix().clone().exp()).unwrap();
            assert!(e.max_abs_diff(u.matrix()) < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn noise_endpoints() {
        let u = haar_unitary(4, 1).unwrap();
        let zero = NoiseModel::haar(4, 0.0, 7).unwrap();
        assert!(apply_noise(&u, &zero).unwrap().matrix().max_abs_diff(u.matrix()) < 1e-12);
        let full = NoiseModel::haar(4, 1.0, 7).unwrap();
        let want = full.noise_unitary().compose(&u).unwrap();
        assert!(apply_noise(&u, &full).unwrap().matrix().max_abs_diff(want.matrix()) < 1e-10);
    }

    #[test]
    fn noisy_output_is_unitary() {
        let u = haar_unitary(6, 3).unwrap();
        for k in 0..=10 {
            let model = NoiseModel::haar(6, k as f64 / 10.0, 100 + k).unwrap();
            let got = apply_noise(&u, &model).unwrap();
            assert!(got.matrix().unitarity_defect() < 1e-10);
        }
    }

    #[test]
    fn noise_errors() {
        assert!(matches!(
            NoiseModel::haar(3, 1.5, 0),
            Err(Error::Argument(_))
        ));
        let model = NoiseModel::haar(3, 0.5, 0).unwrap();
        assert!(matches!(
            apply_noise(&UnitaryMatrix::identity(4), &model),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn fidelity_cases() {
        let u = haar_unitary(5, 8).unwrap();
        assert!((amplitude_fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let swap = UnitaryMatrix::permutation(&[1, 0]).unwrap();
        assert_eq!(amplitude_fidelity(&UnitaryMatrix::identity(2), &swap).unwrap(), 0.0);
        assert!(amplitude_fidelity(&u, &UnitaryMatrix::identity(4)).is_err());
    }
}
