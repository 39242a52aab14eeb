//! Sensitivity of binned distributions to the phases of the interferometer.
//!
//! Diagonal dressings `D₁ U D₂` leave every binned distribution unchanged, so
//! the probe instead builds an isometry with the same moduli as the input
//! columns of `U` that is not related to them by dressings or complex
//! conjugation. Such isometries are found as roots of the column
//! orthogonality equations in the free phases, by Levenberg-Marquardt from
//! random starts.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binning::{binned_distribution_exact, char_poly_coefficients, ModePartition};
use crate::error::{Error, Result};
use crate::interference::GramMatrix;
use crate::linalg::{ComplexMatrix, UnitaryMatrix};
use crate::rng::rng_from_seed;
use crate::validation::tvd;

const STARTS: usize = 64;
const MAX_ITERS: usize = 400;
/// Largest orthogonality residual accepted as a root.
const ROOT_TOL: f64 = 1e-13;
/// Quartet distance below which two isometries count as equivalent.
const EQUIV_TOL: f64 = 1e-6;

/// `diag(e^{iα}) · U · diag(e^{iβ})` with uniform random phases.
pub fn random_dressing(u: &UnitaryMatrix, seed: u64) -> Result<UnitaryMatrix> {
    let mut rng = rng_from_seed(seed);
    let m = u.dim();
    let left: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
    let right: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
    u.dress(&left, &right)
}

/// Phases of an `m x n` isometry with fixed moduli `a`; row 0 and column 0
/// stay real.
struct ModulusProblem<'a> {
    a: &'a DMatrix<f64>,
}

impl ModulusProblem<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.a.nrows(), self.a.ncols())
    }

    fn unknowns(&self) -> usize {
        let (m, n) = self.dims();
        (m - 1) * (n - 1)
    }

    fn phase(&self, p: &[f64], k: usize, j: usize) -> f64 {
        let (_, n) = self.dims();
        if k == 0 || j == 0 {
            0.0
        } else {
            p[(k - 1) * (n - 1) + (j - 1)]
        }
    }

    fn build(&self, p: &[f64]) -> DMatrix<Complex64> {
        let (m, n) = self.dims();
        DMatrix::from_fn(m, n, |k, j| Complex64::from_polar(self.a[(k, j)], self.phase(p, k, j)))
    }

    /// Real and imaginary parts of `(W†W)_ij` for `i < j`, with the Jacobian.
    fn residual(&self, p: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (m, n) = self.dims();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut r = DVector::zeros(2 * pairs.len());
        let mut jac = DMatrix::zeros(2 * pairs.len(), self.unknowns());
        for (row, &(i, j)) in pairs.iter().enumerate() {
            let mut g = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let term = Complex64::from_polar(
                    self.a[(k, i)] * self.a[(k, j)],
                    self.phase(p, k, j) - self.phase(p, k, i),
                );
                g += term;
                if k == 0 {
                    continue;
                }
                // d/dφ of e^{iφ} is i·term.
                let d = Complex64::new(-term.im, term.re);
                if j > 0 {
                    let c = (k - 1) * (n - 1) + (j - 1);
                    jac[(2 * row, c)] += d.re;
                    jac[(2 * row + 1, c)] += d.im;
                }
                if i > 0 {
                    let c = (k - 1) * (n - 1) + (i - 1);
                    jac[(2 * row, c)] -= d.re;
                    jac[(2 * row + 1, c)] -= d.im;
                }
            }
            r[2 * row] = g.re;
            r[2 * row + 1] = g.im;
        }
        (r, jac)
    }

    fn solve_from(&self, start: Vec<f64>) -> Option<Vec<f64>> {
        let mut p = start;
        let (mut r, mut jac) = self.residual(&p);
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        for _ in 0..MAX_ITERS {
            if r.amax() < ROOT_TOL {
                return Some(p);
            }
            let jtj = jac.transpose() * &jac;
            let grad = jac.transpose() * &r;
            let mut damped = jtj.clone();
            for d in 0..damped.nrows() {
                damped[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let Some(step) = damped.lu().solve(&(-grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let (tr, tj) = self.residual(&trial);
            let tc = tr.norm_squared();
            if tc < cost {
                p = trial;
                r = tr;
                jac = tj;
                cost = tc;
                lambda = (lambda / 3.0).max(1e-15);
            } else {
                lambda *= 4.0;
                if lambda > 1e12 {
                    break;
                }
            }
        }
        (r.amax() < ROOT_TOL).then_some(p)
    }
}

/// Rephasing invariants `W_ij W_kl W*_il W*_kj` over row pairs `i<k` and
/// column pairs `j<l`.
fn quartets(w: &DMatrix<Complex64>) -> Vec<Complex64> {
    let (m, n) = (w.nrows(), w.ncols());
    let mut out = Vec::new();
    for i in 0..m {
        for k in i + 1..m {
            for j in 0..n {
                for l in j + 1..n {
                    out.push(w[(i, j)] * w[(k, l)] * w[(i, l)].conj() * w[(k, j)].conj());
                }
            }
        }
    }
    out
}

/// Distance of `b` from the dressing class of `a` and of its conjugate.
fn class_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let same = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let conj = a.iter().zip(b).map(|(x, y)| (x.conj() - y).norm()).fold(0.0, f64::max);
    same.min(conj)
}

/// Extends orthonormal columns to a unitary with standard basis vectors.
fn complete_to_unitary(w: &DMatrix<Complex64>) -> Result<UnitaryMatrix> {
    let m = w.nrows();
    let mut cols: Vec<DVector<Complex64>> = w.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = DVector::from_fn(m, |r, _| Complex64::new(if r == e { 1.0 } else { 0.0 }, 0.0));
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
    }
    UnitaryMatrix::new(ComplexMatrix::from_dmatrix(DMatrix::from_columns(&cols))?)
}

/// A unitary whose first `n` columns have the moduli of `U`'s but are not
/// related to them by dressings or conjugation.
#[derive(Clone, Debug)]
pub struct ModulusTwin {
    pub unitary: UnitaryMatrix,
    /// Smallest quartet distance to the dressing classes of `U` and `U*`;
    /// zero when no inequivalent isometry was found.
    pub distance: f64,
}

pub fn modulus_twin(u: &UnitaryMatrix, n: usize, seed: u64) -> Result<ModulusTwin> {
    if n == 0 || n > u.dim() {
        return Err(Error::arg(format!("{n} input columns of a {}-mode unitary", u.dim())));
    }
    let w = u.input_columns(n).into_dmatrix();
    let a = w.map(|z| z.norm());
    let problem = ModulusProblem { a: &a };
    let reference = quartets(&w);
    let mut rng = rng_from_seed(seed);
    let mut best: Option<(f64, DMatrix<Complex64>)> = None;
    if problem.unknowns() > 0 {
        for _ in 0..STARTS {
            let start: Vec<f64> = (0..problem.unknowns()).map(|_| rng.random_range(-PI..PI)).collect();
            if let Some(p) = problem.solve_from(start) {
                let cand = problem.build(&p);
                let d = class_distance(&reference, &quartets(&cand));
                if d > EQUIV_TOL && best.as_ref().is_none_or(|(bd, _)| d > *bd) {
                    best = Some((d, cand));
                }
            }
        }
    }
    match best {
        Some((distance, w)) => Ok(ModulusTwin {
            unitary: complete_to_unitary(&w)?,
            distance,
        }),
        None => Ok(ModulusTwin {
            unitary: UnitaryMatrix::new(u.matrix().conjugate())?,
            distance: 0.0,
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseProbe {
    /// Largest TVD over the `m` one-mode bins.
    pub tvd_single_mode_bins: f64,
    /// TVD for the probed partition.
    pub tvd_multi_mode_bins: f64,
    /// `c_a(H) - c_a(H̃)` for `a = 1..n`, one row per bin of the partition.
    pub c_diffs: Vec<Vec<f64>>,
    /// False when no inequivalent twin exists and the conjugate was used.
    pub inequivalent: bool,
}

/// Compares binned distributions of `U` with those of its modulus twin.
pub fn phase_sensitivity_probe(
    u: &UnitaryMatrix,
    x: &GramMatrix,
    partition: &ModePartition,
    phase_seed: u64,
) -> Result<PhaseProbe> {
    let twin = modulus_twin(u, x.n(), phase_seed)?;
    let v = &twin.unitary;
    let mut single = 0.0f64;
    for k in 1..=u.dim() {
        let bin = ModePartition::single(u.dim(), &[k])?;
        single = single.max(tvd(
            &binned_distribution_exact(u, x, &bin)?,
            &binned_distribution_exact(v, x, &bin)?,
        )?);
    }
    let multi = tvd(
        &binned_distribution_exact(u, x, partition)?,
        &binned_distribution_exact(v, x, partition)?,
    )?;
    let c_diffs = partition
        .bins()
        .iter()
        .map(|bin| {
            let a = char_poly_coefficients(u, x, bin)?;
            let b = char_poly_coefficients(v, x, bin)?;
            Ok(a.coefficients[1..].iter().zip(&b.coefficients[1..]).map(|(p, q)| p - q).collect())
        })
        .collect::<Result<_>>()?;
    Ok(PhaseProbe {
        tvd_single_mode_bins: single,
        tvd_multi_mode_bins: multi,
        c_diffs,
        inequivalent: twin.distance > 0.0,
    })
}
