use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, psd_sqrt};
use crate::model::SuperspinState;

const PSD_TOL: f64 = 1e-9;
/// Eigenvalues of `√ρ₁ρ₂√ρ₁` below this fraction of the largest are roundoff.
const EIGEN_FLOOR: f64 = 1e-14;

fn check_psd(rho: &DMatrix<C64>, which: &str) -> Result<()> {
    let min = hermitian_eigenvalues(rho).first().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NumericalState(format!(
            "{which} has a negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// `tr√(√ρ₁ ρ₂ √ρ₁)` with `√ρ₁` supplied.
pub(crate) fn root_fidelity(sqrt1: &DMatrix<C64>, rho2: &DMatrix<C64>) -> f64 {
    if sqrt1.nrows() == 0 {
        return 0.0;
    }
    let eig = hermitian_eigenvalues(&(sqrt1 * rho2 * sqrt1));
    let floor = EIGEN_FLOOR * eig.last().copied().unwrap_or(0.0).max(0.0);
    eig.iter().filter(|&&l| l > floor).map(|l| l.sqrt()).sum()
}

/// Uhlmann fidelity `(tr√(√ρ₁ ρ₂ √ρ₁))²`.
pub fn fidelity(rho1: &DMatrix<C64>, rho2: &DMatrix<C64>) -> Result<f64> {
    if rho1.shape() != rho2.shape() || rho1.nrows() != rho1.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho1.nrows(),
            found: rho2.nrows(),
        });
    }
    check_psd(rho1, "first state")?;
    check_psd(rho2, "second state")?;
    Ok(root_fidelity(&psd_sqrt(rho1), rho2).powi(2).clamp(0.0, 1.0))
}

/// Uhlmann fidelity of two manifold-block-diagonal states; `√ρ₁` is block
/// diagonal, so the trace splits over manifolds.
pub fn fidelity_blocks(rho1: &SuperspinState, rho2: &SuperspinState) -> Result<f64> {
    if rho1.basis().sizes() != rho2.basis().sizes() {
        return Err(Error::DimensionMismatch {
            expected: rho1.basis().dim(),
            found: rho2.basis().dim(),
        });
    }
    let mut root = 0.0;
    for (a, b) in rho1.blocks().iter().zip(rho2.blocks()) {
        check_psd(a, "first state")?;
        check_psd(b, "second state")?;
        root += root_fidelity(&psd_sqrt(a), b);
    }
    Ok((root * root).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn textbook_values() {
        let pure = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0)]));
        let mixed = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5), c(0.5)]));
        assert!((fidelity(&pure, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&mixed, &pure).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
        let other = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0), c(1.0)]));
        assert!(fidelity(&pure, &other).unwrap() < 1e-12);
    }

    #[test]
    fn pure_overlap() {
        let a = DVector::from_vec(vec![c(0.6), C64::new(0.0, 0.8)]);
        let b = DVector::from_vec(vec![c(1.0 / 2f64.sqrt()), c(1.0 / 2f64.sqrt())]);
        let f = fidelity(&(&a * a.adjoint()), &(&b * b.adjoint())).unwrap();
        assert!((f - a.dotc(&b).norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_psd() {
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(fidelity(&bad, &bad).is_err());
    }
}
