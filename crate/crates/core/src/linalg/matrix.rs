use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance on `max |U†U - I|` for accepting a matrix as unitary.
pub const DEFAULT_UNITARITY_TOLERANCE: f64 = 1e-10;

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dim(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if let Some(pos) = inner.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            let r = pos % inner.nrows();
            let c = pos / inner.nrows();
            return Err(Error::invariant(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(ComplexMatrix(inner))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn from_real(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_fn(rows, cols, |i, j| Complex64::new(f(i, j), 0.0))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn conjugate(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(ComplexMatrix(&self.0 * &rhs.0))
    }

    /// Elementwise product.
    pub fn hadamard(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::dim(format!(
                "hadamard product of {}x{} and {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(ComplexMatrix(self.0.component_mul(&rhs.0)))
    }

    pub fn scale_row(&self, row: usize, c: Complex64) -> Self {
        let mut m = self.0.clone();
        m.row_mut(row).iter_mut().for_each(|z| *z *= c);
        ComplexMatrix(m)
    }

    /// Submatrix picking the given rows and columns, in order, repeats allowed.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])])
    }

    /// Leading `n x n` block.
    pub fn leading(&self, n: usize) -> Self {
        ComplexMatrix(self.0.view((0, 0), (n, n)).into_owned())
    }

    /// Entrywise modulus.
    pub fn moduli(&self) -> DMatrix<f64> {
        self.0.map(|z| z.norm())
    }

    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()));
        self.0
            .iter()
            .zip(rhs.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A†A - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.0.adjoint() * &self.0;
        let id = DMatrix::<Complex64>::identity(self.rows(), self.rows());
        gram.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Square matrix that passed the unitarity check.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_UNITARITY_TOLERANCE)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dim(format!(
                "unitary must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.rows() == 0 {
            return Err(Error::arg("unitary dimension must be at least 1"));
        }
        let defect = matrix.unitarity_defect();
        if defect > tol {
            return Err(Error::invariant(format!(
                "matrix is not unitary: max|U†U - I| = {defect:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(UnitaryMatrix { matrix })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.unitarity_defect() < 1e-8);
        UnitaryMatrix { matrix }
    }

    pub fn identity(m: usize) -> Self {
        UnitaryMatrix {
            matrix: ComplexMatrix::identity(m),
        }
    }

    /// 50:50 beamsplitter `(1/√2)[[1, 1], [1, -1]]`.
    pub fn beamsplitter() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        UnitaryMatrix {
            matrix: ComplexMatrix::from_real(2, 2, |i, j| if i == 1 && j == 1 { -h } else { h }),
        }
    }

    /// Permutation matrix sending input mode `j` to output mode `perm[j]` (0-based).
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let m = perm.len();
        let mut seen = vec![false; m];
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::arg(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(UnitaryMatrix {
            matrix: ComplexMatrix::from_real(m, m, |i, j| if perm[j] == i { 1.0 } else { 0.0 }),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        Ok(UnitaryMatrix {
            matrix: self.matrix.matmul(&rhs.matrix)?,
        })
    }

    /// `diag(e^{i left}) · U · diag(e^{i right})`.
    pub fn dress(&self, left: &[f64], right: &[f64]) -> Result<Self> {
        let m = self.dim();
        if left.len() != m || right.len() != m {
            return Err(Error::dim(format!(
                "phase vectors of length {} and {} for dimension {m}",
                left.len(),
                right.len()
            )));
        }
        let matrix = ComplexMatrix::from_fn(m, m, |i, j| {
            Complex64::from_polar(1.0, left[i] + right[j]) * self.matrix.get(i, j)
        });
        Ok(UnitaryMatrix { matrix })
    }

    /// First `n` columns as an `m x n` isometry.
    pub fn input_columns(&self, n: usize) -> ComplexMatrix {
        let rows: Vec<usize> = (0..self.dim()).collect();
        let cols: Vec<usize> = (0..n).collect();
        self.matrix.select(&rows, &cols)
    }
}

impl AsRef<ComplexMatrix> for UnitaryMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_round_trip() {
        let entries: Vec<Complex64> = (0..6).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        let m = ComplexMatrix::from_row_major(2, 3, entries.clone()).unwrap();
        assert_eq!(m.get(0, 2), entries[2]);
        assert_eq!(m.get(1, 0), entries[3]);
        assert_eq!(m.to_row_major(), entries);
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        assert!(matches!(
            ComplexMatrix::from_row_major(2, 2, vec![Complex64::new(1.0, 0.0); 3]),
            Err(Error::Dimension(_))
        ));
        let mut e = vec![Complex64::new(1.0, 0.0); 4];
        e[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexMatrix::from_row_major(2, 2, e),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn unitary_check() {
        assert!(UnitaryMatrix::new(UnitaryMatrix::beamsplitter().matrix().clone()).is_ok());
        let m = ComplexMatrix::from_real(2, 2, |_, _| 1.0);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::Invariant(_))));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(UnitaryMatrix::new(rect), Err(Error::Dimension(_))));
    }

    #[test]
    fn permutation_matrix_moves_modes() {
        let p = UnitaryMatrix::permutation(&[1, 0, 2]).unwrap();
        assert_eq!(p.entry(1, 0), Complex64::new(1.0, 0.0));
        assert_eq!(p.entry(0, 0), Complex64::new(0.0, 0.0));
        assert!(UnitaryMatrix::permutation(&[0, 0]).is_err());
    }
}
