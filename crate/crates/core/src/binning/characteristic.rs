//! Binned output distributions from the characteristic function
//! `x(η) = perm(X ⊙ V_n(η))`, sampled on the grid `ν_l = 2π l / (n+1)` and
//! inverted by a discrete Fourier transform.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::binning::{binned_support, BinnedDistribution, BinnedOutcome, ModePartition};
use crate::error::{Error, Result};
use crate::interference::GramMatrix;
use crate::linalg::{glynn, permanent_gurvits, ComplexMatrix, UnitaryMatrix, DEFAULT_PERMANENT_CAP};
use crate::rng::child_seed;

/// Largest number of grid points `(n+1)^K` evaluated.
pub const GRID_POINT_CAP: usize = 1_000_000;

/// Residues above this after inversion mean the input was inconsistent.
const RESIDUE_TOL: f64 = 1e-6;

/// Cleaned probabilities below this are set to zero.
const SNAP_TOL: f64 = 1e-14;

/// `V(η) = U† Λ(η) U` with `Λ = diag(e^{iη_z})` on the modes of bin `z` and 1 elsewhere.
pub fn virtual_interferometer(u: &UnitaryMatrix, partition: &ModePartition, eta: &[f64]) -> Result<UnitaryMatrix> {
    check_partition(u, partition)?;
    check_eta(partition, eta)?;
    let bin_of = partition.bin_of_mode();
    let m = u.dim();
    let lambda = ComplexMatrix::from_fn(m, m, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else {
            match bin_of[i] {
                Some(z) => Complex64::from_polar(1.0, eta[z]),
                None => Complex64::new(1.0, 0.0),
            }
        }
    });
    let v = u.matrix().adjoint().matmul(&lambda)?.matmul(u.matrix())?;
    UnitaryMatrix::new(v)
}

/// `x(η) = perm(X ⊙ V_n(η))`.
pub fn characteristic_value(
    u: &UnitaryMatrix,
    x: &GramMatrix,
    partition: &ModePartition,
    eta: &[f64],
) -> Result<Complex64> {
    check_eta(partition, eta)?;
    let kernel = Kernel::new(u, x, partition)?;
    Ok(glynn(&kernel.matrix_at(eta)))
}

/// `X ⊙ (W†W + Σ_z (e^{iη_z} - 1) H_z)` with `W` the first `n` columns of `U`
/// and `H_z = W_z† W_z` restricted to the rows of bin `z`.
struct Kernel {
    base: DMatrix<Complex64>,
    bins: Vec<DMatrix<Complex64>>,
    n: usize,
}

impl Kernel {
    fn new(u: &UnitaryMatrix, x: &GramMatrix, partition: &ModePartition) -> Result<Self> {
        check_partition(u, partition)?;
        let n = x.n();
        if n > u.dim() {
            return Err(Error::dim(format!("{n} photons in {} modes", u.dim())));
        }
        if n > DEFAULT_PERMANENT_CAP {
            return Err(Error::size(format!(
                "{n} photons exceed the permanent cap of {DEFAULT_PERMANENT_CAP}"
            )));
        }
        let w = u.input_columns(n);
        let w = w.as_dmatrix();
        let xc = x.to_complex();
        let xc = xc.as_dmatrix();
        let base = (w.adjoint() * w).component_mul(xc);
        let bins = partition
            .bins()
            .iter()
            .map(|bin| {
                let rows: Vec<usize> = bin.iter().map(|k| k - 1).collect();
                let wz = w.select_rows(&rows);
                (wz.adjoint() * wz).component_mul(xc)
            })
            .collect();
        Ok(Kernel { base, bins, n })
    }

    fn matrix_at(&self, eta: &[f64]) -> DMatrix<Complex64> {
        let mut m = self.base.clone();
        for (h, &e) in self.bins.iter().zip(eta) {
            let t = Complex64::from_polar(1.0, e) - 1.0;
            m += h * t;
        }
        m
    }
}

fn check_partition(u: &UnitaryMatrix, partition: &ModePartition) -> Result<()> {
    if partition.m() != u.dim() {
        return Err(Error::dim(format!(
            "partition is over {} modes, unitary has {}",
            partition.m(),
            u.dim()
        )));
    }
    Ok(())
}

fn check_eta(partition: &ModePartition, eta: &[f64]) -> Result<()> {
    if eta.len() != partition.k() {
        return Err(Error::dim(format!(
            "{} phases for {} bins",
            eta.len(),
            partition.k()
        )));
    }
    Ok(())
}

fn grid_size(n: usize, k: usize) -> Result<usize> {
    let side = n + 1;
    let mut g: usize = 1;
    for _ in 0..k {
        g = g
            .checked_mul(side)
            .filter(|&g| g <= GRID_POINT_CAP)
            .ok_or_else(|| Error::size(format!("grid (n+1)^K = {side}^{k} exceeds {GRID_POINT_CAP}")))?;
    }
    Ok(g)
}

/// Multi-index of flat grid index `g`, last axis fastest.
fn unflatten(mut g: usize, side: usize, k: usize) -> Vec<usize> {
    let mut l = vec![0; k];
    for axis in (0..k).rev() {
        l[axis] = g % side;
        g /= side;
    }
    l
}

fn flatten(l: &[usize], side: usize) -> usize {
    l.iter().fold(0, |acc, &v| acc * side + v)
}

fn grid_phases(l: &[usize], side: usize) -> Vec<f64> {
    l.iter().map(|&v| 2.0 * PI * v as f64 / side as f64).collect()
}

/// The characteristic function on every grid point, flat index last axis fastest.
pub fn characteristic_grid(u: &UnitaryMatrix, x: &GramMatrix, partition: &ModePartition) -> Result<Vec<Complex64>> {
    let kernel = Kernel::new(u, x, partition)?;
    let side = kernel.n + 1;
    let k = partition.k();
    let g = grid_size(kernel.n, k)?;
    Ok((0..g)
        .into_par_iter()
        .map(|idx| {
            if idx == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let eta = grid_phases(&unflatten(idx, side, k), side);
            glynn(&kernel.matrix_at(&eta))
        })
        .collect())
}

/// In place `y_k = (1/N) Σ_l x_l e^{-2πi lk/N}` along every axis.
pub(crate) fn inverse_grid_transform(values: &mut [Complex64], side: usize, k: usize) {
    let twiddle: Vec<Complex64> = (0..side)
        .map(|j| Complex64::from_polar(1.0 / side as f64, -2.0 * PI * j as f64 / side as f64))
        .collect();
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    let mut stride = 1;
    for _ in 0..k {
        let block = stride * side;
        for start in (0..values.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (l, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + l * stride];
                }
                for kk in 0..side {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, v) in line.iter().enumerate() {
                        acc += v * twiddle[(l * kk) % side];
                    }
                    values[base + kk * stride] = acc;
                }
            }
        }
        stride = block;
    }
}

/// Reads the support out of the inverted grid. Residues larger than `tol`
/// off the support, in imaginary parts or below zero are errors.
fn extract(
    grid: &[Complex64],
    partition: &ModePartition,
    n: usize,
    tol: f64,
) -> Result<Vec<(BinnedOutcome, f64)>> {
    let side = n + 1;
    let support = binned_support(partition, n);
    let mut on_support = vec![false; grid.len()];
    for k in &support {
        on_support[flatten(k.counts(), side)] = true;
    }
    for (idx, v) in grid.iter().enumerate() {
        if !on_support[idx] && v.norm() > tol {
            let k = BinnedOutcome(unflatten(idx, side, partition.k()));
            return Err(Error::invariant(format!(
                "mass {v} on impossible outcome {k}"
            )));
        }
    }
    support
        .into_iter()
        .map(|k| {
            let v = grid[flatten(k.counts(), side)];
            if v.im.abs() > tol || v.re < -tol {
                return Err(Error::invariant(format!("probability {v} for outcome {k}")));
            }
            Ok((k, v.re))
        })
        .collect()
}

/// Exact binned distribution. Cost is `(n+1)^K` permanents of size `n`.
pub fn binned_distribution_exact(
    u: &UnitaryMatrix,
    x: &GramMatrix,
    partition: &ModePartition,
) -> Result<BinnedDistribution> {
    let n = x.n();
    let mut grid = characteristic_grid(u, x, partition)?;
    inverse_grid_transform(&mut grid, n + 1, partition.k());
    let probs = extract(&grid, partition, n, RESIDUE_TOL)?
        .into_iter()
        .map(|(k, p)| (k, if p.abs() <= SNAP_TOL { 0.0 } else { p.max(0.0) }))
        .collect();
    BinnedDistribution::new(partition.clone(), n, probs)
}

/// Binned distribution from randomized permanents.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatedBinnedDistribution {
    pub distribution: BinnedDistribution,
    /// Bound on the total variation distance to the exact distribution built
    /// from three standard errors per grid point.
    pub error_estimate: f64,
    pub samples_per_point: usize,
}

/// Rademacher samples per permanent for additive error `eps` with the usual
/// `n² / eps²` rule.
pub fn gurvits_samples_for(n: usize, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::arg(format!("eps {eps} must be positive")));
    }
    Ok((((n * n) as f64) / (eps * eps)).ceil().max(1.0) as usize)
}

/// Estimates each grid value with the Gurvits estimator, seeded per flat grid
/// index so the result does not depend on the thread count. Values at
/// mirrored points are conjugates, so only half the grid is sampled.
pub fn binned_distribution_gurvits(
    u: &UnitaryMatrix,
    x: &GramMatrix,
    partition: &ModePartition,
    samples_per_point: usize,
    seed: u64,
) -> Result<EstimatedBinnedDistribution> {
    if samples_per_point == 0 {
        return Err(Error::arg("samples_per_point must be positive"));
    }
    let kernel = Kernel::new(u, x, partition)?;
    let n = kernel.n;
    let side = n + 1;
    let k = partition.k();
    let g = grid_size(n, k)?;
    let mirror = |idx: usize| {
        let l: Vec<usize> = unflatten(idx, side, k).iter().map(|&v| (side - v) % side).collect();
        flatten(&l, side)
    };

    let sampled: Vec<(usize, Complex64, f64)> = (0..g)
        .into_par_iter()
        .filter(|&idx| idx != 0 && mirror(idx) >= idx)
        .map(|idx| {
            let eta = grid_phases(&unflatten(idx, side, k), side);
            let a = ComplexMatrix::from_dmatrix(kernel.matrix_at(&eta))?;
            let est = permanent_gurvits(&a, samples_per_point, child_seed(seed, idx as u64))?;
            Ok((idx, est.estimate, est.stderr))
        })
        .collect::<Result<_>>()?;

    let mut grid = vec![Complex64::new(0.0, 0.0); g];
    grid[0] = Complex64::new(1.0, 0.0);
    let mut err_sum = 0.0;
    for (idx, v, se) in sampled {
        let mi = mirror(idx);
        if mi == idx {
            grid[idx] = Complex64::new(v.re, 0.0);
            err_sum += 3.0 * se;
        } else {
            grid[idx] = v;
            grid[mi] = v.conj();
            err_sum += 6.0 * se;
        }
    }
    inverse_grid_transform(&mut grid, side, k);

    // Project onto the probability simplex over the support.
    let support = binned_support(partition, n);
    let mut probs: Vec<(BinnedOutcome, f64)> = support
        .into_iter()
        .map(|kk| {
            let p = grid[flatten(kk.counts(), side)].re.max(0.0);
            (kk, p)
        })
        .collect();
    let total: f64 = probs.iter().map(|(_, p)| p).sum();
    if total <= 0.0 {
        return Err(Error::invariant("estimated distribution has no positive mass"));
    }
    for (_, p) in probs.iter_mut() {
        *p /= total;
    }
    Ok(EstimatedBinnedDistribution {
        distribution: BinnedDistribution::new(partition.clone(), n, probs.into_iter().collect())?,
        error_estimate: 0.5 * err_sum,
        samples_per_point,
    })
}
