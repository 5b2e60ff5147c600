use nalgebra::DMatrix;

use super::spacing::Spacing;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Dissipative (and optionally coherent) couplings between sites, in units of
/// the single-qubit decay rate `gamma_1d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingModel {
    gamma: DMatrix<f64>,
    coherent: Option<DMatrix<f64>>,
    reduced: Option<DMatrix<f64>>,
    gamma_1d: f64,
    spacing: Spacing,
}

/// `Γ^{ij} = γ cos(kd |x_i - x_j|)` with `x_j = j + ε_j`.
///
/// A reduced `p×p` matrix is attached only when no disorder is present.
pub fn build_gamma_waveguide(
    n_sites: usize,
    spacing: Spacing,
    gamma_1d: f64,
    disorder: Option<&[f64]>,
) -> Result<CouplingModel> {
    if let Some(eps) = disorder {
        if eps.len() != n_sites {
            return Err(Error::DimensionMismatch {
                expected: n_sites,
                found: eps.len(),
            });
        }
    }
    let kd = spacing.kd();
    let pos = |j: usize| j as f64 + disorder.map_or(0.0, |e| e[j]);
    let gamma = DMatrix::from_fn(n_sites, n_sites, |i, j| {
        if i == j {
            gamma_1d
        } else {
            gamma_1d * (kd * (pos(i) - pos(j)).abs()).cos()
        }
    });
    let ordered = disorder.is_none_or(|e| e.iter().all(|&x| x == 0.0));
    let reduced = ordered.then(|| reduced_gamma(spacing, gamma_1d));
    Ok(CouplingModel {
        gamma,
        coherent: None,
        reduced,
        gamma_1d,
        spacing,
    })
}

/// `J^{ij} = (γ/2) sin(kd |i - j|)`, the coherent exchange of an open waveguide.
pub fn build_hcoh_waveguide(n_sites: usize, spacing: Spacing, gamma_1d: f64) -> DMatrix<f64> {
    let kd = spacing.kd();
    DMatrix::from_fn(n_sites, n_sites, |i, j| {
        0.5 * gamma_1d * (kd * i.abs_diff(j) as f64).sin()
    })
}

/// `Γ̃^{ab} = γ cos(kd |a - b|)` for `a, b < p`; equals the leading block of
/// `Γ` whenever `N >= p`.
pub fn reduced_gamma(spacing: Spacing, gamma_1d: f64) -> DMatrix<f64> {
    let p = spacing.p() as usize;
    let kd = spacing.kd();
    DMatrix::from_fn(p, p, |a, b| gamma_1d * (kd * a.abs_diff(b) as f64).cos())
}

impl CouplingModel {
    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn gamma_1d(&self) -> f64 {
        self.gamma_1d
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn n_sites(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn coherent(&self) -> Option<&DMatrix<f64>> {
        self.coherent.as_ref()
    }

    pub fn with_coherent(mut self, j: DMatrix<f64>) -> Self {
        self.coherent = Some(j);
        self
    }

    /// Reduced superspin coupling `Γ̃`; fails once disorder broke the symmetry.
    pub fn reduced(&self) -> Result<&DMatrix<f64>> {
        self.reduced.as_ref().ok_or_else(|| {
            Error::SymmetryBroken("positional disorder removes the superspin reduction of Γ".into())
        })
    }

    /// Smallest eigenvalue of `Γ̃`, in units of `gamma_1d`.
    pub fn reduced_min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = symmetric_eigen(self.reduced()?);
        Ok(vals.last().copied().unwrap_or(0.0) / self.gamma_1d)
    }

    /// Errors when `Γ̃` has an eigenvalue below `-1e-12 γ`.
    pub fn check_reduced_positivity(&self) -> Result<()> {
        let min = self.reduced_min_eigenvalue()?;
        if min < -1e-12 {
            return Err(Error::InvalidModel(format!(
                "reduced coupling has negative eigenvalue {min:e} γ"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: u32, p: u32) -> Spacing {
        Spacing::new(n, p).unwrap()
    }

    #[test]
    fn two_pi_thirds_reduced_matrix() {
        let c = build_gamma_waveguide(9, sp(2, 3), 2.0, None).unwrap();
        let expect =
            DMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0])
                * 2.0;
        assert!((c.reduced().unwrap() - expect).abs().max() < 1e-12);
        assert!(
            (c.gamma().view((0, 0), (3, 3)) - c.reduced().unwrap())
                .abs()
                .max()
                < 1e-15
        );
    }

    #[test]
    fn kd_pi_alternates_and_has_rank_one() {
        let c = build_gamma_waveguide(5, sp(1, 1), 1.0, None).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((c.gamma()[(i, j)] - expect).abs() < 1e-12);
            }
        }
        let sv = c.gamma().clone().singular_values();
        assert_eq!(sv.iter().filter(|&&s| s > 1e-10).count(), 1);
    }

    #[test]
    fn disorder_blocks_reduction() {
        let eps = vec![0.0, 0.01, -0.02, 0.0];
        let c = build_gamma_waveguide(4, sp(2, 3), 1.0, Some(&eps)).unwrap();
        assert!(matches!(c.reduced(), Err(Error::SymmetryBroken(_))));
        assert!(build_gamma_waveguide(4, sp(2, 3), 1.0, Some(&eps[..3])).is_err());
        let zero = vec![0.0; 4];
        assert!(build_gamma_waveguide(4, sp(2, 3), 1.0, Some(&zero))
            .unwrap()
            .reduced()
            .is_ok());
    }

    #[test]
    fn coherent_exchange_values() {
        assert!(build_hcoh_waveguide(4, sp(1, 1), 1.0).abs().max() < 1e-15);
        let j = build_hcoh_waveguide(3, sp(1, 2), 1.0);
        assert!((j[(0, 1)] - 0.5).abs() < 1e-15 && (j[(1, 2)] - 0.5).abs() < 1e-15);
        assert!(j[(0, 2)].abs() < 1e-15 && j[(1, 1)] == 0.0);
        let j = build_hcoh_waveguide(2, sp(2, 3), 1.0);
        assert!((j[(0, 1)] - 3f64.sqrt() / 4.0).abs() < 1e-15);
    }
}
