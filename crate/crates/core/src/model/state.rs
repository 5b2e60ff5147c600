use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::basis::ProductBasis;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitize};

/// Density matrix in the superspin product basis, stored as one dense block
/// per excitation manifold.
///
/// The dissipator maps manifold-diagonal states to manifold-diagonal states
/// and every recorded observable commutes with the total excitation number,
/// so coherences between different manifolds are never stored. States that
/// carry such coherences are rejected at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperspinState {
    basis: Arc<ProductBasis>,
    blocks: Vec<DMatrix<C64>>,
}

impl SuperspinState {
    pub fn zeros(basis: Arc<ProductBasis>) -> Self {
        let blocks = basis
            .manifold_dims()
            .into_iter()
            .map(|d| DMatrix::zeros(d, d))
            .collect();
        Self { basis, blocks }
    }

    /// `|e…e⟩⟨e…e|`, every superspin at `m_a = j_a`.
    pub fn fully_inverted(basis: Arc<ProductBasis>) -> Self {
        let mut s = Self::zeros(basis);
        let top = s.blocks.len() - 1;
        s.blocks[top][(0, 0)] = C64::new(1.0, 0.0);
        s
    }

    pub fn ground(basis: Arc<ProductBasis>) -> Self {
        let mut s = Self::zeros(basis);
        s.blocks[0][(0, 0)] = C64::new(1.0, 0.0);
        s
    }

    /// `|ψ⟩⟨ψ|` for a normalised vector supported on a single manifold.
    pub fn from_pure(basis: Arc<ProductBasis>, psi: &DVector<C64>) -> Result<Self> {
        if psi.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: psi.len(),
            });
        }
        let rho = psi * psi.adjoint();
        Self::from_dense(basis, &rho, 1e-12)
    }

    /// Splits a dense `D×D` matrix into manifold blocks. Coherences between
    /// different manifolds larger than `tol` are an error.
    pub fn from_dense(basis: Arc<ProductBasis>, rho: &DMatrix<C64>, tol: f64) -> Result<Self> {
        let d = basis.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        for j in 0..d {
            for i in 0..d {
                if basis.excitation(i) != basis.excitation(j) && rho[(i, j)].norm() > tol {
                    return Err(Error::Precondition(format!(
                        "state couples excitation manifolds {} and {}; only manifold-diagonal states are supported",
                        basis.excitation(i),
                        basis.excitation(j)
                    )));
                }
            }
        }
        let blocks = (0..basis.manifold_dims().len())
            .map(|m| {
                rho.select_rows(basis.manifold(m))
                    .select_columns(basis.manifold(m))
            })
            .collect();
        Ok(Self { basis, blocks })
    }

    pub fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    pub fn n_sites(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, m: usize) -> &DMatrix<C64> {
        &self.blocks[m]
    }

    pub fn block_mut(&mut self, m: usize) -> &mut DMatrix<C64> {
        &mut self.blocks[m]
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [DMatrix<C64>] {
        &mut self.blocks
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.basis.dim();
        let mut rho = DMatrix::zeros(d, d);
        for (m, block) in self.blocks.iter().enumerate() {
            let idx = self.basis.manifold(m);
            for (cj, &gj) in idx.iter().enumerate() {
                for (ci, &gi) in idx.iter().enumerate() {
                    rho[(gi, gj)] = block[(ci, cj)];
                }
            }
        }
        rho
    }

    /// Populations `Tr(P_m ρ)` of every excitation manifold.
    pub fn manifold_populations(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.trace().re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.manifold_populations().iter().sum()
    }

    pub fn hermitize(&mut self) {
        self.blocks.iter_mut().for_each(hermitize);
    }

    /// Sets entries with both parts below `floor` in magnitude to zero.
    ///
    /// Populations trickling into low manifolds start out many orders of
    /// magnitude below unity, and subnormal floats make the dense kernels
    /// an order of magnitude slower.
    pub(crate) fn flush_below(&mut self, floor: f64) {
        for b in &mut self.blocks {
            for z in b.as_mut_slice() {
                if z.re.abs() < floor {
                    z.re = 0.0;
                }
                if z.im.abs() < floor {
                    z.im = 0.0;
                }
            }
        }
    }

    pub fn min_diagonal(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.diagonal().iter().map(|z| z.re).collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.nrows() > 0)
            .flat_map(hermitian_eigenvalues)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|ρ - ρ†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.adjoint()).camax())
            .fold(0.0, f64::max)
    }

    /// Checks unit trace, Hermiticity, and positivity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::NumericalState(format!("trace {tr} deviates from 1")));
        }
        let herm = self.hermiticity_defect();
        if herm > tol {
            return Err(Error::NumericalState(format!("non-Hermitian by {herm:e}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::NumericalState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// `½‖ρ − σ‖₁`, evaluated block by block.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: other.basis.dim(),
            });
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .filter(|(a, _)| a.nrows() > 0)
            .map(|(a, b)| {
                hermitian_eigenvalues(&(a - b))
                    .iter()
                    .map(|l| l.abs())
                    .sum::<f64>()
            })
            .sum::<f64>()
            * 0.5)
    }

    pub(crate) fn same_shape(&self, other: &Self) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.shape() == b.shape())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_and_coherence_rejection() {
        let basis = Arc::new(ProductBasis::new(&[1, 2]));
        let d = basis.dim();
        let mut psi = DVector::zeros(d);
        psi[basis.index(&[1, 0])] = C64::new(0.6, 0.0);
        psi[basis.index(&[0, 1])] = C64::new(0.0, 0.8);
        let s = SuperspinState::from_pure(basis.clone(), &psi).unwrap();
        assert!((s.to_dense() - &psi * psi.adjoint()).norm() < 1e-15);
        assert!((s.manifold_populations()[1] - 1.0).abs() < 1e-15);
        s.validate(1e-12).unwrap();

        psi[basis.index(&[1, 1])] = C64::new(0.1, 0.0);
        assert!(SuperspinState::from_pure(basis, &psi.normalize()).is_err());
    }

    #[test]
    fn poles() {
        let basis = Arc::new(ProductBasis::new(&[2, 2]));
        let top = SuperspinState::fully_inverted(basis.clone());
        assert_eq!(top.to_dense()[(8, 8)], C64::new(1.0, 0.0));
        let g = SuperspinState::ground(basis);
        assert_eq!(g.manifold_populations()[0], 1.0);
    }
}
