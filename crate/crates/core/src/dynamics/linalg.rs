use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CrnError, Result};

/// Eigenvalues of a small dense real matrix via the real Schur form, sorted
/// by (real part, imaginary part). Non-convergence is an error.
pub fn eig(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(CrnError::Invalid(format!(
            "eig of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CrnError::Invalid(
            "eig of a matrix with non-finite entries".into(),
        ));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| CrnError::Invalid("eigenvalue iteration did not converge".into()))?;
    let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

pub(crate) fn as_pairs(ev: &[Complex64]) -> Vec<(f64, f64)> {
    ev.iter().map(|z| (z.re, z.im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let ev = eig(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            3.0, 1.0, 2.0,
        ])))
        .unwrap();
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rotation() {
        let ev = eig(&DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn companion_of_quadratic() {
        // x² − kx + (3/4 − 3k/2): roots (k ± √(k²+6k−3))/2.
        for k in [-0.3, 0.0, 0.1, 0.45] {
            let c = DMatrix::from_row_slice(2, 2, &[k, -(0.75 - 1.5 * k), 1.0, 0.0]);
            let ev = eig(&c).unwrap();
            let disc = Complex64::new(k * k + 6.0 * k - 3.0, 0.0).sqrt();
            let want = [
                (Complex64::new(k, 0.0) - disc) / 2.0,
                (Complex64::new(k, 0.0) + disc) / 2.0,
            ];
            for w in want {
                assert!(ev.iter().any(|z| (z - w).norm() < 1e-10), "k={k}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eig(&DMatrix::zeros(2, 3)).is_err());
        assert!(eig(&DMatrix::from_element(2, 2, f64::NAN)).is_err());
        assert!(eig(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }
}
