//! Brute-force reference solver on the full `2^N`-dimensional Hilbert space.
//!
//! Site `j` (0-based) is bit `N−1−j` of a basis index, so site 1 in the
//! physics numbering is the most significant bit. Density matrices are kept
//! in excitation-manifold blocks: every generator handled here conserves the
//! excitation number up to downward jumps, so a state that starts without
//! inter-manifold coherences never acquires them. The blocked state is the
//! same type as a superspin state over `N` superspins of size one.

mod density;
mod disorder;
mod embed;
mod fidelity;
mod trajectories;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::SuperspinObservables;
use crate::linalg::symmetric_eigen;
use crate::model::{lowering_operator, CouplingModel, Lindbladian, ProductBasis};
use crate::sparse::Csr;

pub use density::{evolve_full, evolve_full_with, FullEvolution};
pub use disorder::{disorder_scan, DisorderConfig, DisorderReport, DisorderRow};
pub use embed::{embed_state, embed_vector, embedding, restrict};
pub use fidelity::{fidelity, fidelity_blocks};
pub use trajectories::{evolve_trajectories, TrajectoryConfig, TrajectoryRecord};

/// Eigenvalues of `Γ` down to `−NEGATIVE_RATE_TOL·γ·N` are accepted as
/// roundoff and clamped to zero.
pub const NEGATIVE_RATE_TOL: f64 = 1e-12;

/// Largest `N` accepted by each oracle mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleLimits {
    pub density: usize,
    pub trajectories: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            density: 10,
            trajectories: 16,
        }
    }
}

impl OracleLimits {
    pub(crate) fn check_density(&self, n_sites: usize) -> Result<()> {
        Self::check(
            n_sites,
            self.density,
            Self::default().density,
            "density-matrix",
            "use trajectory mode instead",
        )
    }

    pub(crate) fn check_trajectories(&self, n_sites: usize) -> Result<()> {
        Self::check(
            n_sites,
            self.trajectories,
            Self::default().trajectories,
            "trajectory",
            "use the superspin solver for commensurate dissipation-only models",
        )
    }

    fn check(
        n_sites: usize,
        limit: usize,
        default: usize,
        mode: &'static str,
        hint: &'static str,
    ) -> Result<()> {
        if n_sites > limit {
            return Err(Error::DimensionGuard {
                n_sites,
                limit,
                mode,
                hint,
            });
        }
        if n_sites > default {
            log::warn!(
                "{mode} oracle running at N = {n_sites}, above the default guard of {default}"
            );
        }
        Ok(())
    }
}

/// Site-resolved model: dissipative matrix `Γ`, optional coherent matrix
/// `J`, and a uniform local loss `Γ'` into modes other than the waveguide.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleModel {
    gamma: DMatrix<f64>,
    coherent: Option<DMatrix<f64>>,
    gamma_local: f64,
}

impl OracleModel {
    pub fn new(
        gamma: DMatrix<f64>,
        coherent: Option<DMatrix<f64>>,
        gamma_local: f64,
    ) -> Result<Self> {
        let n = gamma.nrows();
        if n == 0 || gamma.ncols() != n {
            return Err(Error::InvalidModel(
                "Γ must be a non-empty square matrix".into(),
            ));
        }
        let asym = |m: &DMatrix<f64>| (m - m.transpose()).amax();
        if asym(&gamma) > 1e-12 * gamma.amax().max(1.0) {
            return Err(Error::InvalidModel("Γ is not symmetric".into()));
        }
        if let Some(j) = &coherent {
            if j.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: j.nrows(),
                });
            }
            if asym(j) > 1e-12 * j.amax().max(1.0) {
                return Err(Error::InvalidModel(
                    "coherent coupling matrix is not symmetric".into(),
                ));
            }
        }
        if !(gamma_local >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "local decay rate must be non-negative, got {gamma_local}"
            )));
        }
        Ok(Self {
            gamma,
            coherent,
            gamma_local,
        })
    }

    /// Takes `Γ` and, if present, `J` from a coupling model.
    pub fn from_coupling(coupling: &CouplingModel, gamma_local: f64) -> Result<Self> {
        Self::new(
            coupling.gamma().clone(),
            coupling.coherent().cloned(),
            gamma_local,
        )
    }

    pub fn n_sites(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn coherent(&self) -> Option<&DMatrix<f64>> {
        self.coherent.as_ref()
    }

    pub fn gamma_local(&self) -> f64 {
        self.gamma_local
    }

    /// Basis of `N` single-site superspins, which is the computational basis
    /// ordered with site 0 as the most significant bit.
    pub fn site_basis(&self) -> Arc<ProductBasis> {
        site_basis(self.n_sites())
    }

    /// Eigen-channels `(Γ_μ, v_μ)` of `Γ`, with roundoff-negative rates
    /// clamped to zero and dropped.
    pub fn channels(&self) -> Result<Vec<(f64, Vec<f64>)>> {
        let (vals, vecs) = symmetric_eigen(&self.gamma);
        let scale = self.gamma.diagonal().amax().max(f64::MIN_POSITIVE) * self.n_sites() as f64;
        if let Some(&worst) = vals.last() {
            if worst < -NEGATIVE_RATE_TOL * scale {
                return Err(Error::InvalidModel(format!(
                    "Γ has a negative eigenvalue {worst:e}"
                )));
            }
        }
        Ok(vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > NEGATIVE_RATE_TOL * scale)
            .map(|(mu, &v)| (v, vecs.column(mu).iter().copied().collect()))
            .collect())
    }

    /// The master-equation generator on manifold blocks.
    pub fn lindbladian(&self) -> Result<Lindbladian> {
        let n = self.n_sites();
        let mut rates = DMatrix::zeros(n, n);
        for (rate, v) in self.channels()? {
            for a in 0..n {
                for b in 0..n {
                    rates[(a, b)] += rate * v[a] * v[b];
                }
            }
        }
        for a in 0..n {
            rates[(a, a)] += self.gamma_local;
        }
        let lind = Lindbladian::new(self.site_basis(), rates)?;
        match &self.coherent {
            Some(j) => lind.with_coherent(j.clone()),
            None => Ok(lind),
        }
    }

    /// Observables with the waveguide emission rate `Σ_ij Γ^{ij}⟨σ_+^i σ_-^j⟩`
    /// (local loss excluded) and `S_- = Σ_j s_j σ_-^j`.
    pub fn observables(&self, signs: &[f64]) -> Result<SuperspinObservables> {
        if signs.len() != self.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites(),
                found: signs.len(),
            });
        }
        Ok(SuperspinObservables::with_rates(
            &self.site_basis(),
            &self.gamma,
            signs,
        ))
    }

    /// Site lowering operators `σ_-^j` on the full space.
    pub(crate) fn site_lowering(&self) -> Vec<Csr> {
        let basis = self.site_basis();
        (0..self.n_sites())
            .map(|j| lowering_operator(&basis, j))
            .collect()
    }

    /// Jump operators `√Γ_μ O_μ` followed by `√Γ' σ_-^j`, and the effective
    /// non-Hermitian Hamiltonian `H − (i/2) Σ_k C_k† C_k`.
    pub(crate) fn unraveling(&self) -> Result<(Vec<Csr>, Csr)> {
        let n = self.n_sites();
        let d = 1usize << n;
        let lowers = self.site_lowering();
        let mut jumps: Vec<Csr> = self
            .channels()?
            .into_iter()
            .map(|(rate, v)| {
                let s = rate.sqrt();
                Csr::linear_combination(
                    d,
                    d,
                    v.iter()
                        .zip(&lowers)
                        .map(|(&c, l)| (C64::new(s * c, 0.0), l)),
                )
            })
            .collect();
        if self.gamma_local > 0.0 {
            let s = C64::new(self.gamma_local.sqrt(), 0.0);
            jumps.extend(lowers.iter().map(|l| l.scale(s)));
        }
        let mut terms: Vec<(C64, Csr)> = jumps
            .iter()
            .map(|c| (C64::new(0.0, -0.5), c.adjoint().mul(c)))
            .collect();
        if let Some(j) = &self.coherent {
            let raises: Vec<Csr> = lowers.iter().map(Csr::adjoint).collect();
            for a in 0..n {
                for b in 0..n {
                    if j[(a, b)] != 0.0 {
                        terms.push((C64::new(j[(a, b)], 0.0), raises[a].mul(&lowers[b])));
                    }
                }
            }
        }
        let h_eff = Csr::linear_combination(d, d, terms.iter().map(|(c, m)| (*c, m)));
        Ok((jumps, h_eff))
    }
}

/// Computational basis of `n` qubits as `n` single-site superspins.
pub fn site_basis(n_sites: usize) -> Arc<ProductBasis> {
    Arc::new(ProductBasis::new(&vec![1; n_sites]))
}
