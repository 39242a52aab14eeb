//! Haar-averaged statistics of single-bin photon-number distributions:
//! the closed-form variance, its Monte Carlo counterpart over random
//! interferometers, and numerical checks of low-order Weingarten integrals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{binned_distribution_exact, BinnedDistribution, ModePartition};
use crate::error::{Error, Result};
use crate::interference::GramMatrix;
use crate::linalg::{haar_unitary, UnitaryMatrix};
use crate::rng::child_seed;

/// Mean of independent values with the standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("mean of an empty set"));
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Ok(MeanEstimate { mean, stderr, count })
    }

    /// `|mean - target| ≤ k · stderr`, with a floor for exact agreement.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + 1e-12
    }
}

/// `σ² = Σ k² P(k) - (Σ k P(k))²` of a single-bin distribution.
pub fn distribution_variance(dist: &BinnedDistribution) -> Result<f64> {
    if dist.partition().k() != 1 {
        return Err(Error::arg(format!(
            "variance needs a single bin, got {} bins; coarsen first",
            dist.partition().k()
        )));
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for (k, p) in dist.probs() {
        let k = k.counts()[0] as f64;
        m1 += k * p;
        m2 += k * k * p;
    }
    Ok((m2 - m1 * m1).max(0.0))
}

/// Haar average of the single-bin variance:
/// `|K| n (m-|K|)(m²-n) / (m²(m²-1)) + (m|K| - |K|²) / (m(m²-1)) · Σ_{i≠j} |x_ij|²`.
pub fn haar_variance_formula(n: usize, m: usize, bin_size: usize, sum_sq_overlaps: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::arg("the Haar variance is undefined for m < 2"));
    }
    if bin_size > m {
        return Err(Error::arg(format!("bin of size {bin_size} in {m} modes")));
    }
    let max_sq = (n * n.saturating_sub(1)) as f64;
    if !(0.0..=max_sq + 1e-9).contains(&sum_sq_overlaps) {
        return Err(Error::arg(format!(
            "sum of squared overlaps {sum_sq_overlaps} outside [0, {max_sq}]"
        )));
    }
    let (n, m, k) = (n as f64, m as f64, bin_size as f64);
    let m2 = m * m;
    let first = k * n * (m - k) * (m2 - n) / (m2 * (m2 - 1.0));
    let second = (m * k - k * k) / (m * (m2 - 1.0)) * sum_sq_overlaps;
    Ok(first + second)
}

/// Haar average of the single-bin variance derived from Dirichlet moments of a
/// Haar column and the second-order Weingarten integral:
/// `n |K| (m-|K|) / (m(m+1)) + |K| (m-|K|) / (m(m²-1)) · Σ_{i≠j} |x_ij|²`.
///
/// Agrees with [`haar_variance_formula`] only when `n = m`; the first term of
/// the latter carries `m² - n` where the moments give `m² - m`.
pub fn haar_variance_exact(n: usize, m: usize, bin_size: usize, sum_sq_overlaps: f64) -> Result<f64> {
    // Same argument checks.
    haar_variance_formula(n, m, bin_size, sum_sq_overlaps)?;
    let (n, m, k) = (n as f64, m as f64, bin_size as f64);
    Ok(n * k * (m - k) / (m * (m + 1.0)) + k * (m - k) / (m * (m * m - 1.0)) * sum_sq_overlaps)
}

/// Inputs and prediction of the Haar-averaged variance formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub n: usize,
    pub m: usize,
    pub bin_size: usize,
    pub sum_sq_overlaps: f64,
    pub predicted_variance: f64,
    pub exact_variance: f64,
}

impl VarianceResult {
    pub fn predict(m: usize, bin_size: usize, x: &GramMatrix) -> Result<Self> {
        let sum_sq_overlaps = x.sum_sq_overlaps();
        Ok(VarianceResult {
            n: x.n(),
            m,
            bin_size,
            sum_sq_overlaps,
            predicted_variance: haar_variance_formula(x.n(), m, bin_size, sum_sq_overlaps)?,
            exact_variance: haar_variance_exact(x.n(), m, bin_size, sum_sq_overlaps)?,
        })
    }
}

/// A reproducible set of Haar unitaries: member `i` is drawn with
/// `child_seed(seed, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub num_unitaries: usize,
    pub m: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(num_unitaries: usize, m: usize, seed: u64) -> Result<Self> {
        if num_unitaries == 0 {
            return Err(Error::arg("an ensemble needs at least one unitary"));
        }
        if m == 0 {
            return Err(Error::arg("an ensemble needs at least one mode"));
        }
        Ok(EnsembleSpec { num_unitaries, m, seed })
    }

    pub fn unitary(&self, index: usize) -> Result<UnitaryMatrix> {
        haar_unitary(self.m, child_seed(self.seed, index as u64))
    }

    pub fn unitaries(&self) -> Result<Vec<UnitaryMatrix>> {
        (0..self.num_unitaries).into_par_iter().map(|i| self.unitary(i)).collect()
    }
}

/// Mean single-bin variance over the ensemble for the bin `{1..bin_size}`.
pub fn ensemble_variance_mc(spec: &EnsembleSpec, x: &GramMatrix, bin_size: usize) -> Result<MeanEstimate> {
    if bin_size == 0 || bin_size > spec.m {
        return Err(Error::arg(format!("bin of size {bin_size} in {} modes", spec.m)));
    }
    let subset: Vec<usize> = (1..=bin_size).collect();
    ensemble_variance_mc_for_bin(spec, x, &subset)
}

/// As [`ensemble_variance_mc`] for an explicit 1-based bin.
pub fn ensemble_variance_mc_for_bin(spec: &EnsembleSpec, x: &GramMatrix, subset: &[usize]) -> Result<MeanEstimate> {
    let bin = ModePartition::single(spec.m, subset)?;
    let values: Vec<f64> = (0..spec.num_unitaries)
        .into_par_iter()
        .map(|i| {
            let u = spec.unitary(i)?;
            distribution_variance(&binned_distribution_exact(&u, x, &bin)?)
        })
        .collect::<Result<_>>()?;
    MeanEstimate::from_values(&values)
}

/// Mean single-bin variance over given unitaries.
pub fn variance_over_unitaries(unitaries: &[UnitaryMatrix], x: &GramMatrix, subset: &[usize]) -> Result<MeanEstimate> {
    if unitaries.is_empty() {
        return Err(Error::arg("empty ensemble"));
    }
    let values: Vec<f64> = unitaries
        .par_iter()
        .map(|u| {
            let bin = ModePartition::single(u.dim(), subset)?;
            distribution_variance(&binned_distribution_exact(u, x, &bin)?)
        })
        .collect::<Result<_>>()?;
    MeanEstimate::from_values(&values)
}

/// Haar moment of unitary entries, indices 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSpec {
    /// `∫ U_ij U*_kl`.
    Degree1 { i: usize, j: usize, k: usize, l: usize },
    /// `∫ U_ij U_kl U*_i'j' U*_k'l'`.
    Degree2 {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        ip: usize,
        jp: usize,
        kp: usize,
        lp: usize,
    },
}

impl MomentSpec {
    /// Four indices `(i,j,k,l)` or eight `(i,j,k,l,i',j',k',l')`.
    pub fn from_indices(idx: &[usize]) -> Result<Self> {
        match *idx {
            [i, j, k, l] => Ok(MomentSpec::Degree1 { i, j, k, l }),
            [i, j, k, l, ip, jp, kp, lp] => Ok(MomentSpec::Degree2 { i, j, k, l, ip, jp, kp, lp }),
            _ => Err(Error::arg(format!(
                "moments of degree 1 or 2 take 4 or 8 indices, got {}",
                idx.len()
            ))),
        }
    }

    fn indices(&self) -> Vec<usize> {
        match *self {
            MomentSpec::Degree1 { i, j, k, l } => vec![i, j, k, l],
            MomentSpec::Degree2 { i, j, k, l, ip, jp, kp, lp } => vec![i, j, k, l, ip, jp, kp, lp],
        }
    }

    fn check(&self, m: usize) -> Result<()> {
        if self.indices().iter().any(|&v| v == 0 || v > m) {
            return Err(Error::arg(format!("moment indices {:?} outside 1..={m}", self.indices())));
        }
        Ok(())
    }

    /// Closed form from the Weingarten function.
    pub fn analytic(&self, m: usize) -> Result<f64> {
        self.check(m)?;
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mf = m as f64;
        Ok(match *self {
            MomentSpec::Degree1 { i, j, k, l } => d(i, k) * d(j, l) / mf,
            MomentSpec::Degree2 { i, j, k, l, ip, jp, kp, lp } => {
                if m < 2 {
                    return Err(Error::arg("degree-2 moments need m ≥ 2"));
                }
                let same = d(i, ip) * d(j, jp) * d(k, kp) * d(l, lp) + d(i, kp) * d(j, lp) * d(k, ip) * d(l, jp);
                let cross = d(i, ip) * d(j, lp) * d(k, kp) * d(l, jp) + d(i, kp) * d(j, jp) * d(k, ip) * d(l, lp);
                same / (mf * mf - 1.0) - cross / (mf * (mf * mf - 1.0))
            }
        })
    }

    fn evaluate(&self, u: &UnitaryMatrix) -> Complex64 {
        let e = |a: usize, b: usize| u.entry(a - 1, b - 1);
        match *self {
            MomentSpec::Degree1 { i, j, k, l } => e(i, j) * e(k, l).conj(),
            MomentSpec::Degree2 { i, j, k, l, ip, jp, kp, lp } => {
                e(i, j) * e(k, l) * e(ip, jp).conj() * e(kp, lp).conj()
            }
        }
    }
}

/// Monte Carlo estimate of a Haar moment next to its closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentCheck {
    pub mc_value: Complex64,
    pub analytic: Complex64,
    /// Standard error of `mc_value` (complex modulus).
    pub sigma: f64,
}

impl MomentCheck {
    pub fn within(&self, k: f64) -> bool {
        (self.mc_value - self.analytic).norm() <= k * self.sigma + 1e-12
    }
}

pub fn weingarten_moment_oracle(m: usize, spec: &MomentSpec, num_draws: usize, seed: u64) -> Result<MomentCheck> {
    if num_draws < 2 {
        return Err(Error::arg("at least two draws are needed for an error estimate"));
    }
    let analytic = Complex64::new(spec.analytic(m)?, 0.0);
    let values: Vec<Complex64> = (0..num_draws)
        .into_par_iter()
        .map(|d| haar_unitary(m, child_seed(seed, d as u64)).map(|u| spec.evaluate(&u)))
        .collect::<Result<_>>()?;
    let nf = num_draws as f64;
    let mean = values.iter().sum::<Complex64>() / nf;
    let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (nf - 1.0);
    Ok(MomentCheck {
        mc_value: mean,
        analytic,
        sigma: (var / nf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::char_poly_coefficients;
    use crate::interference::gram_uniform;

    #[test]
    fn variance_examples() {
        let u = UnitaryMatrix::beamsplitter();
        let bin = ModePartition::single(2, &[1]).unwrap();
        let bos = binned_distribution_exact(&u, &GramMatrix::ones(2), &bin).unwrap();
        assert!((distribution_variance(&bos).unwrap() - 1.0).abs() < 1e-12);
        let dis = binned_distribution_exact(&u, &GramMatrix::identity(2), &bin).unwrap();
        assert!((distribution_variance(&dis).unwrap() - 0.5).abs() < 1e-12);
        let two = ModePartition::new(2, vec![vec![1], vec![2]]).unwrap();
        let d2 = binned_distribution_exact(&u, &GramMatrix::ones(2), &two).unwrap();
        assert!(distribution_variance(&d2).is_err());
    }

    #[test]
    fn variance_from_coefficients() {
        // E[k] = c1, E[k²] = c1 + 2 c2.
        let u = haar_unitary(5, 6).unwrap();
        let x = GramMatrix::random_real(4, 6);
        let poly = char_poly_coefficients(&u, &x, &[2, 4]).unwrap();
        let (c1, c2) = (poly.coefficients[1], poly.coefficients[2]);
        let d = binned_distribution_exact(&u, &x, &ModePartition::single(5, &[2, 4]).unwrap()).unwrap();
        assert!((distribution_variance(&d).unwrap() - (c1 + 2.0 * c2 - c1 * c1)).abs() < 1e-12);
    }

    #[test]
    fn formula_values() {
        assert!((haar_variance_formula(3, 4, 1, 0.0).unwrap() - 0.4875).abs() < 1e-15);
        assert!((haar_variance_formula(3, 4, 1, 6.0).unwrap() - 0.7875).abs() < 1e-15);
        assert_eq!(haar_variance_formula(3, 4, 4, 6.0).unwrap(), 0.0);
        assert_eq!(haar_variance_formula(3, 4, 0, 6.0).unwrap(), 0.0);
        assert!(haar_variance_formula(3, 1, 1, 0.0).is_err());
        assert!(haar_variance_formula(3, 4, 5, 0.0).is_err());
        assert!(haar_variance_formula(3, 4, 1, 6.5).is_err());
    }

    #[test]
    fn formula_symmetry_and_slope() {
        for m in 2..9 {
            for n in 1..=m.min(6) {
                for k in 0..=m {
                    for s in [0.0, 0.5 * (n * (n - 1)) as f64, (n * (n - 1)) as f64] {
                        for f in [haar_variance_formula, haar_variance_exact] {
                            let a = f(n, m, k, s).unwrap();
                            let b = f(n, m, m - k, s).unwrap();
                            assert!((a - b).abs() < 1e-14);
                            assert!(a >= 0.0);
                        }
                    }
                    let lo = haar_variance_formula(n, m, k, 0.0).unwrap();
                    let hi = haar_variance_formula(n, m, k, (n * (n - 1)) as f64).unwrap();
                    assert!(hi >= lo);
                }
            }
        }
    }

    #[test]
    fn exact_formula_matches_independent_photons() {
        // X = I: photons land in the bin independently with p ~ Beta(|K|, m-|K|).
        for (n, m, k) in [(3, 4, 1), (3, 4, 2), (2, 7, 3), (5, 5, 2)] {
            let (kf, mf) = (k as f64, m as f64);
            let ep = kf / mf;
            let ep2 = kf * (kf + 1.0) / (mf * (mf + 1.0));
            let want = n as f64 * (ep - ep2);
            assert!((haar_variance_exact(n, m, k, 0.0).unwrap() - want).abs() < 1e-14);
        }
        // The two expressions coincide at n = m.
        for m in 2..7 {
            for k in 0..=m {
                let s = (m * (m - 1)) as f64 / 3.0;
                let a = haar_variance_formula(m, m, k, s).unwrap();
                let b = haar_variance_exact(m, m, k, s).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
        assert!((haar_variance_exact(3, 4, 1, 0.0).unwrap() - 0.45).abs() < 1e-15);
        assert!((haar_variance_exact(3, 4, 1, 6.0).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ensemble_reproduces_exact_formula() {
        let spec = EnsembleSpec::new(2000, 4, 11).unwrap();
        for x in [GramMatrix::ones(3), GramMatrix::identity(3)] {
            let est = ensemble_variance_mc(&spec, &x, 1).unwrap();
            let want = VarianceResult::predict(4, 1, &x).unwrap().exact_variance;
            assert!(est.within(want, 3.0), "{est:?} vs {want}");
        }
    }

    #[test]
    fn ensemble_grid_converges() {
        let mut misses = Vec::new();
        for (n, seed) in [(2usize, 1u64), (3, 2), (4, 3)] {
            for m in [4usize, 5] {
                for k in [1usize, 2] {
                    for x in [0.0, 0.5, 1.0] {
                        let spec = EnsembleSpec::new(2000, m, seed * 100 + m as u64 * 10 + k as u64).unwrap();
                        let g = gram_uniform(n, x).unwrap();
                        let est = ensemble_variance_mc(&spec, &g, k).unwrap();
                        let want = VarianceResult::predict(m, k, &g).unwrap().exact_variance;
                        if !est.within(want, 3.0) {
                            misses.push((n, m, k, x, est.mean, want));
                        }
                    }
                }
            }
        }
        // 36 checks at 3σ: allow one statistical excursion.
        assert!(misses.len() <= 1, "{misses:?}");
    }

    #[test]
    fn ensemble_bin_choice_is_irrelevant() {
        let spec = EnsembleSpec::new(1000, 4, 21).unwrap();
        let x = gram_uniform(3, 0.5).unwrap();
        let a = ensemble_variance_mc_for_bin(&spec, &x, &[1, 2]).unwrap();
        let b = ensemble_variance_mc_for_bin(&spec, &x, &[2, 4]).unwrap();
        let s = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * s);
    }

    #[test]
    fn moment_examples() {
        let one = MomentSpec::from_indices(&[1, 1, 1, 1]).unwrap();
        assert_eq!(one.analytic(4).unwrap(), 0.25);
        assert_eq!(MomentSpec::from_indices(&[1, 1, 1, 2]).unwrap().analytic(4).unwrap(), 0.0);
        let four = MomentSpec::from_indices(&[1, 1, 1, 1, 1, 1, 1, 1]).unwrap();
        assert!((four.analytic(4).unwrap() - 0.1).abs() < 1e-15);
        assert!(MomentSpec::from_indices(&[1, 2, 3]).is_err());
        assert!(one.analytic(0).is_err());
        let check = weingarten_moment_oracle(4, &four, 20_000, 3).unwrap();
        assert!(check.within(3.0), "{check:?}");
        let check = weingarten_moment_oracle(4, &one, 20_000, 4).unwrap();
        assert!(check.within(3.0), "{check:?}");
    }

    #[test]
    fn mean_estimate() {
        let e = MeanEstimate::from_values(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(MeanEstimate::from_values(&[]).is_err());
        assert!(EnsembleSpec::new(0, 4, 0).is_err());
    }
}
