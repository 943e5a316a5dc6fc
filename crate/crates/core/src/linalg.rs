//! Dense eigenvalue helpers shared by the spectral and Lax modules.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SCHUR_ITERATIONS: usize = 200_000;

fn dump<T: std::fmt::Display + nalgebra::Scalar>(m: &DMatrix<T>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// All eigenvalues of a complex square matrix via the complex Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok(Vec::new());
    }
    if dim == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    // deflation stalls on zero diagonals, so work on a shifted copy
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let shift = Complex64::new(0.61803398875, 0.41421356237) * scale;
    let shifted = m + DMatrix::from_diagonal_element(dim, dim, shift);
    let schur = Schur::try_new(shifted, f64::EPSILON, MAX_SCHUR_ITERATIONS)
        .ok_or_else(|| Error::Eigensolver { dim, dump: dump(m) })?;
    let (_, t) = schur.unpack();
    Ok((0..dim).map(|i| t[(i, i)] - shift).collect())
}

/// Eigenvalues of a real square matrix, as complex numbers.
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok(Vec::new());
    }
    if let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, MAX_SCHUR_ITERATIONS) {
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    eigenvalues(&m.map(|v| Complex64::new(v, 0.0)))
}

/// Hausdorff distance between two finite point sets in the complex plane.
/// Two empty sets are at distance zero; an empty and a nonempty set are at
/// infinite distance.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let directed = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_rotation_generator() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let mut ev = real_eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -2.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_triangular_eigenvalues() {
        let z = |a: f64, b: f64| Complex64::new(a, b);
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                z(1.0, 1.0),
                z(2.0, 0.0),
                z(0.0, 3.0),
                z(0.0, 0.0),
                z(-1.0, 0.5),
                z(1.0, 1.0),
                z(0.0, 0.0),
                z(0.0, 0.0),
                z(0.25, 0.0),
            ],
        );
        let ev = eigenvalues(&m).unwrap();
        for target in [z(1.0, 1.0), z(-1.0, 0.5), z(0.25, 0.0)] {
            assert!(ev.iter().any(|e| (e - target).norm() < 1e-13));
        }
    }

    #[test]
    fn hausdorff_basics() {
        let a = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let b = [Complex64::new(0.0, 0.1)];
        assert!((hausdorff(&a, &b) - (1.0f64 + 0.01).sqrt()).abs() < 1e-15);
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert!(hausdorff(&a, &[]).is_infinite());
    }
}
