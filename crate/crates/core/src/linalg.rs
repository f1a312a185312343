//! Dense Hermitian operators and the small set of helpers shared by every
//! module: Hermiticity checks, real/complex conversions and the
//! real-matrix-times-complex-vector products used on the propagation path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_RTOL: f64 = 1e-12;

/// Dense complex Hermitian matrix.
///
/// Every Hamiltonian, coupling operator and density matrix in the crate is
/// carried in this form. Real symmetric input is flagged so that the
/// eigensolver and the propagator can take the cheaper real path.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
    real: bool,
}

impl HermitianMatrix {
    /// Wraps `data` after checking `max |H_ij - conj(H_ji)| <= 1e-12 * max |H|`.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::InvalidDimension(format!(
                "matrix is {}x{}, expected square",
                data.nrows(),
                data.ncols()
            )));
        }
        let asym = max_asymmetry(&data);
        let tol = HERMITIAN_RTOL * max_abs(&data);
        if asym > tol {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
                tolerance: tol,
            });
        }
        let real = data.iter().all(|z| z.im == 0.0);
        Ok(Self { data, real })
    }

    /// Wraps a real symmetric matrix.
    pub fn from_real(data: &DMatrix<f64>) -> Result<Self> {
        Self::new(data.map(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: DMatrix::zeros(n, n),
            real: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: DMatrix::identity(n, n),
            real: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    /// True when every entry has exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Real part of the matrix; exact when [`is_real`](Self::is_real).
    pub fn real_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.re)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn max_asymmetry(&self) -> f64 {
        max_asymmetry(&self.data)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data + &other.data,
            real: self.real && other.real,
        })
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data - &other.data,
            real: self.real && other.real,
        })
    }

    pub fn scale(&self, factor: f64) -> HermitianMatrix {
        Self {
            data: self.data.map(|z| z * factor),
            real: self.real,
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self {
            data: self.data.kronecker(&other.data),
            real: self.real && other.real,
        }
    }

    /// Trace as a real number (the imaginary part of a Hermitian trace is zero).
    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        check_dim(self.dim(), v.len())?;
        Ok(&self.data * v)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_asymmetry(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Pauli matrices as 2x2 Hermitian matrices.
pub fn sigma_x() -> HermitianMatrix {
    HermitianMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
}

pub fn sigma_z() -> HermitianMatrix {
    HermitianMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap()
}

/// `y = A x` for real `A` and complex `x`.
pub(crate) fn real_mul_complex(a: &DMatrix<f64>, x: &DVector<C64>) -> DVector<C64> {
    let re = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
    let im = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
    let yr = a * re;
    let yi = a * im;
    DVector::from_iterator(
        yr.len(),
        yr.iter().zip(yi.iter()).map(|(r, i)| C64::new(*r, *i)),
    )
}

/// `y = A^T x` for real `A` and complex `x`.
pub(crate) fn real_tr_mul_complex(a: &DMatrix<f64>, x: &DVector<C64>) -> DVector<C64> {
    let re = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
    let im = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
    let yr = a.tr_mul(&re);
    let yi = a.tr_mul(&im);
    DVector::from_iterator(
        yr.len(),
        yr.iter().zip(yi.iter()).map(|(r, i)| C64::new(*r, *i)),
    )
}

/// Eigenvalues of a small Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    if n == 2 {
        // closed form avoids the iterative solver in hot loops
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean - half, mean + half];
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        match HermitianMatrix::new(m) {
            Err(Error::NotHermitian { max_asymmetry, .. }) => {
                assert!((max_asymmetry - 1.0).abs() < 1e-15)
            }
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            HermitianMatrix::new(DMatrix::zeros(2, 3)),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn accepts_complex_hermitian() {
        let i = C64::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[ONE, i, -i, -ONE]);
        let h = HermitianMatrix::new(m).unwrap();
        assert!(!h.is_real());
        assert_eq!(h.trace(), 0.0);
    }

    #[test]
    fn two_by_two_closed_form_matches_solver() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.3, 0.0),
                C64::new(0.2, -0.7),
                C64::new(0.2, 0.7),
                C64::new(-1.1, 0.0),
            ],
        );
        let closed = hermitian_eigenvalues(&m);
        let mut solver: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        solver.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in closed.iter().zip(&solver) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
