use nalgebra::Matrix4;

use super::rdm::{ReducedDensityMatrix, EIGEN_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, C64};

/// `½ Σ |eig(ρ − ρ′)|`.
pub fn trace_distance(rho: &ReducedDensityMatrix, rho_p: &ReducedDensityMatrix) -> Result<f64> {
    if rho.dim() != rho_p.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: rho_p.dim(),
        });
    }
    let (a, b) = canonical_pair(rho.entries(), rho_p.entries());
    Ok(trace_distance_raw(&(a - b)))
}

/// Orders a pair by a fixed total order on the entries so that swapping the
/// arguments yields bitwise identical results.
fn canonical_pair<'a, T>(a: &'a T, b: &'a T) -> (&'a T, &'a T)
where
    &'a T: IntoIterator<Item = &'a C64>,
{
    for (x, y) in a.into_iter().zip(b) {
        match (x.re, x.im).partial_cmp(&(y.re, y.im)) {
            Some(std::cmp::Ordering::Less) => return (a, b),
            Some(std::cmp::Ordering::Greater) => return (b, a),
            _ => {}
        }
    }
    (a, b)
}

/// Half the trace norm of a Hermitian difference matrix.
pub fn trace_distance_raw(diff: &nalgebra::DMatrix<C64>) -> f64 {
    0.5 * hermitian_eigenvalues(diff)
        .iter()
        .map(|e| e.abs())
        .sum::<f64>()
}

pub(crate) fn trace_distance4(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    let (a, b) = canonical_pair(a, b);
    let d = a - b;
    trace_distance_raw(&nalgebra::DMatrix::from_fn(4, 4, |i, j| d[(i, j)]))
}

/// Base-2 von Neumann entropy `−Σ λ log₂ λ`.
pub fn von_neumann_entropy(rho: &ReducedDensityMatrix) -> Result<f64> {
    entropy_of_eigenvalues(&rho.eigenvalues())
}

pub(crate) fn entropy_of_eigenvalues(eigs: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigs {
        if l < -EIGEN_FLOOR {
            return Err(Error::InvalidState(format!(
                "density matrix eigenvalue {l:e} below floor"
            )));
        }
        let l = l.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::rdm::RdmLabel;
    use nalgebra::DMatrix;

    fn diag(v: &[f64]) -> ReducedDensityMatrix {
        let n = v.len();
        ReducedDensityMatrix::new(
            DMatrix::from_fn(n, n, |i, j| C64::new(if i == j { v[i] } else { 0.0 }, 0.0)),
            RdmLabel::Other,
        )
        .unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        assert_eq!(
            trace_distance(&diag(&[0.3, 0.7]), &diag(&[0.3, 0.7])).unwrap(),
            0.0
        );
        assert!(
            (trace_distance(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap() - 1.0).abs() < 1e-15
        );
        assert!(
            (trace_distance(&diag(&[0.75, 0.25]), &diag(&[0.25, 0.75])).unwrap() - 0.5).abs()
                < 1e-15
        );
    }

    #[test]
    fn trace_distance_dimension_mismatch() {
        assert!(trace_distance(&diag(&[1.0, 0.0]), &diag(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(von_neumann_entropy(&diag(&[1.0, 0.0])).unwrap(), 0.0);
        assert!((von_neumann_entropy(&diag(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-15);
        assert!((von_neumann_entropy(&diag(&[0.25; 4])).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_floor() {
        assert!(entropy_of_eigenvalues(&[-1e-10, 1.0]).is_ok());
        assert!(matches!(
            entropy_of_eigenvalues(&[-1e-6, 1.0]),
            Err(Error::InvalidState(_))
        ));
    }
}
