//! Matrix permanents: exact evaluation by Glynn's formula in Gray-code order,
//! and the randomized Gurvits estimator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::rng_from_seed;

/// Largest matrix size accepted by [`permanent`].
pub const DEFAULT_PERMANENT_CAP: usize = 20;

/// Exact permanent with the default size cap.
pub fn permanent(a: &ComplexMatrix) -> Result<Complex64> {
    permanent_with_cap(a, DEFAULT_PERMANENT_CAP)
}

pub fn permanent_with_cap(a: &ComplexMatrix, cap: usize) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::dim(format!(
            "permanent of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() > cap {
        return Err(Error::size(format!(
            "permanent of a {}x{} matrix exceeds the cap of {cap}",
            a.rows(),
            a.rows()
        )));
    }
    Ok(glynn(a.as_dmatrix()))
}

/// Glynn's formula
/// `perm(A) = 2^{1-n} Σ_δ (Π_k δ_k) Π_j Σ_i δ_i a_ij` with `δ_0 = +1`,
/// visiting the sign vectors in Gray-code order so each step is `O(n)`.
pub(crate) fn glynn(a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut sums: Vec<Complex64> = (0..n).map(|j| a.column(j).sum()).collect();
    let mut delta = vec![1.0f64; n];
    let mut sign = 1.0f64;
    let mut total: Complex64 = sums.iter().product();
    let count = 1u64 << (n - 1);
    for g in 1..count {
        let k = g.trailing_zeros() as usize + 1;
        delta[k] = -delta[k];
        sign = -sign;
        let step = 2.0 * delta[k];
        for (j, s) in sums.iter_mut().enumerate() {
            *s += a[(k, j)] * step;
        }
        let p: Complex64 = sums.iter().product();
        total += p * sign;
    }
    total / count as f64
}

/// Result of a randomized permanent estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermanentEstimate {
    pub estimate: Complex64,
    /// Standard error of the sample mean (complex modulus).
    pub stderr: f64,
    pub num_samples: usize,
    /// Set when some entry exceeds 1 in modulus, where the additive-error
    /// guarantee no longer applies.
    pub bound_violated: bool,
}

/// Gurvits' estimator with Rademacher vectors: the sample mean of
/// `(Π_j x_j) · Π_i (Σ_j a_ij x_j)`.
pub fn permanent_gurvits(a: &ComplexMatrix, num_samples: usize, seed: u64) -> Result<PermanentEstimate> {
    let mut rng = rng_from_seed(seed);
    permanent_gurvits_with_rng(a, num_samples, &mut rng)
}

pub fn permanent_gurvits_with_rng<R: Rng + ?Sized>(
    a: &ComplexMatrix,
    num_samples: usize,
    rng: &mut R,
) -> Result<PermanentEstimate> {
    if !a.is_square() {
        return Err(Error::dim(format!(
            "permanent of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if num_samples == 0 {
        return Err(Error::arg("num_samples must be positive"));
    }
    let n = a.rows();
    let bound_violated = a.max_abs() > 1.0 + 1e-12;
    let m = a.as_dmatrix();

    let mut x = vec![0.0f64; n];
    let mut mean = Complex64::new(0.0, 0.0);
    let mut m2 = 0.0f64;
    for t in 0..num_samples {
        let mut parity = 1.0;
        for xj in x.iter_mut() {
            *xj = if rng.random::<bool>() { 1.0 } else { -1.0 };
            parity *= *xj;
        }
        let mut term = Complex64::new(parity, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                row += m[(i, j)] * *xj;
            }
            term *= row;
        }
        // Welford update on the complex mean, tracking |z - mean|^2.
        let k = (t + 1) as f64;
        let d = term - mean;
        mean += d / k;
        m2 += d.re * (term - mean).re + d.im * (term - mean).im;
    }
    let stderr = if num_samples > 1 {
        (m2 / (num_samples as f64 - 1.0) / num_samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(PermanentEstimate {
        estimate: mean,
        stderr,
        num_samples,
        bound_violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{naive_permanent, random_complex_matrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_cases() {
        let one = ComplexMatrix::from_row_major(1, 1, vec![c(7.0, 0.0)]).unwrap();
        assert_eq!(permanent(&one).unwrap(), c(7.0, 0.0));

        let (a, b, cc, d) = (c(1.0, 2.0), c(-0.5, 0.3), c(0.2, -1.0), c(3.0, 0.5));
        let two = ComplexMatrix::from_row_major(2, 2, vec![a, b, cc, d]).unwrap();
        let p = permanent(&two).unwrap();
        assert!((p - (a * d + b * cc)).norm() < 1e-14);

        let empty = ComplexMatrix::zeros(0, 0);
        assert_eq!(permanent(&empty).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn all_ones_gives_factorial() {
        let mut fact = 1.0;
        for n in 1..=8 {
            fact *= n as f64;
            let j = ComplexMatrix::from_real(n, n, |_, _| 1.0);
            let p = permanent(&j).unwrap();
            assert!((p.re - fact).abs() < 1e-9 * fact && p.im.abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn matches_permutation_sum() {
        for n in 1..=5 {
            for seed in 0..5 {
                let a = random_complex_matrix(n, n, 100 * n as u64 + seed);
                let fast = permanent(&a).unwrap();
                let slow = naive_permanent(&a);
                assert!(
                    (fast - slow).norm() <= 1e-10 * slow.norm().max(1.0),
                    "n={n}: {fast} vs {slow}"
                );
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            permanent(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            permanent_with_cap(&ComplexMatrix::identity(5), 4),
            Err(Error::Size(_))
        ));
        assert!(matches!(
            permanent_gurvits(&ComplexMatrix::identity(2), 0, 1),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn gurvits_identity_and_flat() {
        let est = permanent_gurvits(&ComplexMatrix::identity(3), 10_000, 3).unwrap();
        assert!((est.estimate - c(1.0, 0.0)).norm() <= 3.0 * est.stderr + 1e-12);

        let flat = ComplexMatrix::from_real(3, 3, |_, _| 1.0 / 3.0);
        let est = permanent_gurvits(&flat, 100_000, 4).unwrap();
        let target = 6.0 / 27.0;
        assert!((est.estimate.re - target).abs() <= 3.0 * est.stderr);
        assert!(!est.bound_violated);
    }

    #[test]
    fn gurvits_is_deterministic_and_flags_large_entries() {
        let a = random_complex_matrix(3, 3, 9);
        let x = permanent_gurvits(&a, 500, 11).unwrap();
        let y = permanent_gurvits(&a, 500, 11).unwrap();
        assert_eq!(x, y);
        let big = ComplexMatrix::from_real(2, 2, |_, _| 2.0);
        assert!(permanent_gurvits(&big, 10, 0).unwrap().bound_violated);
    }

    #[test]
    fn gurvits_additive_error() {
        // n^2/eps^2 samples, eps = 0.05: the error exceeds eps in at most 5 of 100 seeds.
        let eps = 0.05;
        let n = 3;
        let samples = ((n * n) as f64 / (eps * eps)).ceil() as usize;
        let a = crate::testutil::random_contraction(n, 77);
        let exact = permanent(&a).unwrap();
        let hits = (0..100)
            .filter(|&s| {
                let est = permanent_gurvits(&a, samples, 1000 + s).unwrap();
                (est.estimate - exact).norm() <= eps
            })
            .count();
        assert!(hits >= 95, "{hits}/100 within eps");
    }

    #[test]
    fn gurvits_unbiased_over_seeds() {
        let a = crate::testutil::random_contraction(3, 5);
        let exact = permanent(&a).unwrap();
        let runs: Vec<PermanentEstimate> = (0..200).map(|s| permanent_gurvits(&a, 200, s).unwrap()).collect();
        let grand: Complex64 = runs.iter().map(|r| r.estimate).sum::<Complex64>() / 200.0;
        let pooled = (runs.iter().map(|r| r.stderr * r.stderr).sum::<f64>()).sqrt() / 200.0;
        assert!((grand - exact).norm() <= 3.0 * pooled, "{grand} vs {exact} (pooled {pooled})");
    }
}
