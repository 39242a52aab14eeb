//! Multimode bunching in a single output bin.

use num_complex::Complex64;

use crate::binning::ModePartition;
use crate::error::{Error, Result};
use crate::interference::GramMatrix;
use crate::linalg::{glynn, ComplexMatrix, UnitaryMatrix, DEFAULT_PERMANENT_CAP};

/// Largest photon number for the coefficient expansion, which visits every
/// subset of photons.
pub const COEFFICIENT_PHOTON_CAP: usize = 10;

/// Imaginary residue tolerated on quantities that are real in exact arithmetic.
const REAL_TOL: f64 = 1e-9;

/// `H_ij = Σ_{k∈K} U*_{ki} U_{kj}` over the first `n` inputs; `subset` is 1-based.
pub fn bunching_matrix(u: &UnitaryMatrix, n: usize, subset: &[usize]) -> Result<ComplexMatrix> {
    let bin = ModePartition::single(u.dim(), subset)?;
    if n > u.dim() {
        return Err(Error::dim(format!("{n} photons in {} modes", u.dim())));
    }
    let rows: Vec<usize> = bin.bins()[0].iter().map(|k| k - 1).collect();
    let cols: Vec<usize> = (0..n).collect();
    let w = u.matrix().select(&rows, &cols);
    w.adjoint().matmul(&w)
}

fn weighted_bunching(u: &UnitaryMatrix, x: &GramMatrix, subset: &[usize]) -> Result<ComplexMatrix> {
    let h = bunching_matrix(u, x.n(), subset)?;
    h.hadamard(&x.to_complex())
}

fn real_part(v: Complex64, what: &str) -> Result<f64> {
    if v.im.abs() > REAL_TOL {
        return Err(Error::invariant(format!("{what} has imaginary part {}", v.im)));
    }
    Ok(v.re)
}

/// Probability that all `n` photons land in `subset`: `perm(H ⊙ X)`.
pub fn generalized_bunching_probability(u: &UnitaryMatrix, x: &GramMatrix, subset: &[usize]) -> Result<f64> {
    if x.n() > DEFAULT_PERMANENT_CAP {
        return Err(Error::size(format!(
            "{} photons exceed the permanent cap of {DEFAULT_PERMANENT_CAP}",
            x.n()
        )));
    }
    let m = weighted_bunching(u, x, subset)?;
    Ok(real_part(glynn(m.as_dmatrix()), "bunching probability")?.max(0.0))
}

/// Coefficients of `x(y) = 1 + Σ_a c_a (e^{iy} - 1)^a` for a single bin, with
/// `c_a` the sum of permanents of the `a x a` principal submatrices of `H ⊙ X`.
#[derive(Clone, Debug, PartialEq)]
pub struct BunchingPolynomial {
    /// `c_0 = 1, c_1, ..., c_n`.
    pub coefficients: Vec<f64>,
}

impl BunchingPolynomial {
    pub fn n(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `c_n`, the bunching probability.
    pub fn bunching_probability(&self) -> f64 {
        self.coefficients[self.n()]
    }

    pub fn characteristic(&self, y: f64) -> Complex64 {
        let t = Complex64::from_polar(1.0, y) - 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for &c in &self.coefficients {
            acc += power * c;
            power *= t;
        }
        acc
    }
}

pub fn char_poly_coefficients(u: &UnitaryMatrix, x: &GramMatrix, subset: &[usize]) -> Result<BunchingPolynomial> {
    let n = x.n();
    if n > COEFFICIENT_PHOTON_CAP {
        return Err(Error::size(format!(
            "{n} photons exceed the coefficient cap of {COEFFICIENT_PHOTON_CAP}"
        )));
    }
    let m = weighted_bunching(u, x, subset)?;
    let mut sums = vec![Complex64::new(0.0, 0.0); n + 1];
    for mask in 0u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        sums[idx.len()] += glynn(m.select(&idx, &idx).as_dmatrix());
    }
    let coefficients = sums
        .into_iter()
        .map(|c| real_part(c, "bunching coefficient"))
        .collect::<Result<_>>()?;
    Ok(BunchingPolynomial { coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::{binned_distribution_exact, characteristic_value};
    use crate::linalg::haar_unitary;

    #[test]
    fn first_coefficient_is_trace() {
        let u = haar_unitary(6, 3).unwrap();
        let x = GramMatrix::random_real(4, 3);
        let poly = char_poly_coefficients(&u, &x, &[2, 5]).unwrap();
        let h = bunching_matrix(&u, 4, &[2, 5]).unwrap();
        assert_eq!(poly.coefficients[0], 1.0);
        assert!((poly.coefficients[1] - h.trace().re).abs() < 1e-12);
    }

    #[test]
    fn full_bin_gives_binomials() {
        let u = haar_unitary(5, 1).unwrap();
        let x = GramMatrix::random_real(4, 1);
        let poly = char_poly_coefficients(&u, &x, &[1, 2, 3, 4, 5]).unwrap();
        let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
        for (c, b) in poly.coefficients.iter().zip(binom) {
            assert!((c - b).abs() < 1e-10);
        }
    }

    #[test]
    fn agrees_with_characteristic_function() {
        let u = haar_unitary(5, 7).unwrap();
        let x = GramMatrix::random_real(3, 7);
        let subset = [1, 3];
        let poly = char_poly_coefficients(&u, &x, &subset).unwrap();
        let part = ModePartition::single(5, &subset).unwrap();
        for y in [0.3, 1.7, -2.2, 3.0] {
            let want = characteristic_value(&u, &x, &part, &[y]).unwrap();
            assert!((poly.characteristic(y) - want).norm() < 1e-12);
        }
        let gbp = generalized_bunching_probability(&u, &x, &subset).unwrap();
        assert!((poly.bunching_probability() - gbp).abs() < 1e-12);
        let dist = binned_distribution_exact(&u, &x, &part).unwrap();
        assert!((dist.prob(&[3]) - gbp).abs() < 1e-12);
    }

    #[test]
    fn bosons_bunch_more_than_distinguishable_particles() {
        let u = UnitaryMatrix::beamsplitter();
        let b = generalized_bunching_probability(&u, &GramMatrix::ones(2), &[1]).unwrap();
        let d = generalized_bunching_probability(&u, &GramMatrix::identity(2), &[1]).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        assert!((d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let u = haar_unitary(4, 0).unwrap();
        assert!(bunching_matrix(&u, 3, &[5]).is_err());
        assert!(bunching_matrix(&u, 5, &[1]).is_err());
        let big = haar_unitary(12, 0).unwrap();
        assert!(matches!(
            char_poly_coefficients(&big, &GramMatrix::ones(11), &[1]),
            Err(Error::Size(_))
        ));
    }
}
