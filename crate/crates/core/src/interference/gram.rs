use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::rng_from_seed;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Real distinguishability matrix `x_ij = <φ_i|φ_j>`: symmetric, unit
/// diagonal, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::dim(format!(
                "Gram matrix must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::arg("Gram matrix needs at least one photon"));
        }
        for i in 0..n {
            if !entries[(i, i)].is_finite() || (entries[(i, i)] - 1.0).abs() > SYMMETRY_TOL {
                return Err(Error::invariant(format!(
                    "diagonal entry x_{i}{i} = {} is not 1",
                    entries[(i, i)]
                )));
            }
            for j in 0..n {
                let x = entries[(i, j)];
                if !x.is_finite() || x.abs() > 1.0 + SYMMETRY_TOL {
                    return Err(Error::invariant(format!("|x_{i}{j}| = {x} exceeds 1")));
                }
                if (x - entries[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::invariant(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        let min_eig = entries.clone().symmetric_eigenvalues().min();
        if min_eig < -PSD_TOL {
            return Err(Error::invariant(format!(
                "Gram matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(GramMatrix { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::dim("Gram matrix rows have inconsistent lengths"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Fully indistinguishable photons.
    pub fn ones(n: usize) -> Self {
        GramMatrix {
            entries: DMatrix::from_element(n, n, 1.0),
        }
    }

    /// Fully distinguishable photons.
    pub fn identity(n: usize) -> Self {
        GramMatrix {
            entries: DMatrix::identity(n, n),
        }
    }

    /// Gram matrix of `n` random real unit vectors in `R^n`.
    pub fn random_real(n: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        Self::random_real_with_rng(n, &mut rng)
    }

    pub fn random_real_with_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        for mut row in v.row_iter_mut() {
            let norm = row.norm();
            row /= norm;
        }
        let mut entries = &v * v.transpose();
        for i in 0..n {
            entries[(i, i)] = 1.0;
            for j in 0..i {
                let x = entries[(i, j)].clamp(-1.0, 1.0);
                entries[(i, j)] = x;
                entries[(j, i)] = x;
            }
        }
        GramMatrix { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.entries[(i, j)]).collect())
            .collect()
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_real(self.n(), self.n(), |i, j| self.entries[(i, j)])
    }

    /// `Σ_{i≠j} |x_ij|²` over ordered pairs.
    pub fn sum_sq_overlaps(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i != j {
                    s += self.entries[(i, j)].powi(2);
                }
            }
        }
        s
    }

    /// `Perm(X) / n!`, an indistinguishability score in `[0, 1]` for
    /// nonnegative overlaps.
    pub fn permanent_score(&self) -> f64 {
        let p = crate::linalg::glynn(self.to_complex().as_dmatrix());
        let fact: f64 = (1..=self.n()).map(|k| k as f64).product();
        p.re / fact
    }

    pub(crate) fn complex_entry(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.entries[(i, j)], 0.0)
    }
}

/// Uniform partial distinguishability: every off-diagonal overlap equals `x`.
pub fn gram_uniform(n: usize, x: f64) -> Result<GramMatrix> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::arg(format!("overlap {x} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::arg("Gram matrix needs at least one photon"));
    }
    Ok(GramMatrix {
        entries: DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { x }),
    })
}

/// Photon arrival delays relative to a common reference.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayConfig {
    pub delays: Vec<f64>,
    pub coherence_time: f64,
}

impl DelayConfig {
    pub fn new(delays: Vec<f64>, coherence_time: f64) -> Result<Self> {
        if !(coherence_time > 0.0) || !coherence_time.is_finite() {
            return Err(Error::arg(format!(
                "coherence time must be positive, got {coherence_time}"
            )));
        }
        if delays.is_empty() {
            return Err(Error::arg("at least one delay is required"));
        }
        if delays.iter().any(|d| !d.is_finite()) {
            return Err(Error::arg("delays must be finite"));
        }
        Ok(DelayConfig {
            delays,
            coherence_time,
        })
    }
}

/// Gaussian wavepacket overlaps `x_ij = exp(-(δt_i - δt_j)² / (4σ_t²))`.
pub fn gram_from_delays(cfg: &DelayConfig) -> Result<GramMatrix> {
    if !(cfg.coherence_time > 0.0) {
        return Err(Error::arg(format!(
            "coherence time must be positive, got {}",
            cfg.coherence_time
        )));
    }
    let n = cfg.delays.len();
    let s2 = 4.0 * cfg.coherence_time * cfg.coherence_time;
    let entries = DMatrix::from_fn(n, n, |i, j| {
        let d = cfg.delays[i] - cfg.delays[j];
        (-d * d / s2).exp()
    });
    GramMatrix::new(entries)
}

/// Root mean square of the pairwise overlaps `x_ij`, `i < j`.
pub fn quad_mean_overlap(x: &GramMatrix) -> f64 {
    let n = x.n();
    if n < 2 {
        return 1.0;
    }
    let pairs = n * (n - 1) / 2;
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += x.get(i, j).powi(2);
        }
    }
    (s / pairs as f64).sqrt()
}

/// Hong-Ou-Mandel dip visibility for overlap `x`: `V = x²`.
pub fn hom_visibility(x: f64) -> f64 {
    x * x
}
