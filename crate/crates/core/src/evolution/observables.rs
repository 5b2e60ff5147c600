//! Scalar observables shared by the superspin and full-space solvers.
//!
//! Everything recorded is built from three excitation-conserving moments:
//! manifold populations `p_m`, the per-manifold collective correlator
//! `Tr(S₊S₋ P_m ρ)`, and the emission rate. `S_z` is `m - N/2` on manifold `m`,
//! and `S_x² + S_y² = S₊S₋ - S_z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Excitation-conserving moments of a state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpinMoments {
    pub n_sites: usize,
    /// `Tr(P_m ρ)` for `m = 0..=N`.
    pub populations: Vec<f64>,
    /// `Tr(S₊S₋ P_m ρ)` for `m = 0..=N`.
    pub spsm: Vec<f64>,
    /// `R = Σ Γ Tr(J₊ J₋ ρ)`, units of `γ`.
    pub emission_rate: f64,
}

/// Dicke squeezing `ξ_D = N((ΔS_z)² + 1/4) / ⟨S_x² + S_y²⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Squeezing {
    pub xi: f64,
    /// `⌈1/ξ_D⌉ - 2`.
    pub depth_bound: i64,
}

impl Squeezing {
    pub fn inverse(&self) -> f64 {
        1.0 / self.xi
    }
}

/// Denominators below this are treated as a vanishing transverse spin.
pub const SQUEEZING_DENOMINATOR_TOL: f64 = 1e-12;

impl SpinMoments {
    pub fn zeros(n_sites: usize) -> Self {
        Self {
            n_sites,
            populations: vec![0.0; n_sites + 1],
            spsm: vec![0.0; n_sites + 1],
            emission_rate: 0.0,
        }
    }

    /// `self += w·other`, for ensemble averages.
    pub fn accumulate(&mut self, w: f64, other: &SpinMoments) {
        for (a, b) in self.populations.iter_mut().zip(&other.populations) {
            *a += w * b;
        }
        for (a, b) in self.spsm.iter_mut().zip(&other.spsm) {
            *a += w * b;
        }
        self.emission_rate += w * other.emission_rate;
    }

    fn half(&self) -> f64 {
        self.n_sites as f64 / 2.0
    }

    pub fn trace(&self) -> f64 {
        self.populations.iter().sum()
    }

    pub fn sz_mean(&self) -> f64 {
        self.populations
            .iter()
            .enumerate()
            .map(|(m, p)| p * (m as f64 - self.half()))
            .sum()
    }

    pub fn sz2_mean(&self) -> f64 {
        self.populations
            .iter()
            .enumerate()
            .map(|(m, p)| p * (m as f64 - self.half()).powi(2))
            .sum()
    }

    pub fn var_sz(&self) -> f64 {
        self.sz2_mean() - self.sz_mean().powi(2)
    }

    /// `⟨S_x² + S_y²⟩`.
    pub fn transverse(&self) -> f64 {
        self.spsm.iter().sum::<f64>() - self.sz_mean()
    }

    pub fn s2_mean(&self) -> f64 {
        self.transverse() + self.sz2_mean()
    }

    /// `(s, m_s)` with `⟨S²⟩ = s(s+1)`.
    pub fn spin_length(&self) -> Result<(f64, f64)> {
        let s2 = self.s2_mean();
        if s2 < -1e-10 {
            return Err(Error::NumericalState(format!("⟨S²⟩ = {s2:e} is negative")));
        }
        let s = (-1.0 + (1.0 + 4.0 * s2.max(0.0)).sqrt()) / 2.0;
        Ok((s, self.sz_mean()))
    }

    pub fn dicke_squeezing(&self) -> Result<Squeezing> {
        squeezing_from(self.n_sites, self.var_sz(), self.transverse())
    }

    /// `Σ_{m=1}^{⌊N/3⌋} p_m ξ_{D,m}⁻¹`, each `ξ_{D,m}` evaluated on the
    /// normalised manifold-`m` part of the state.
    pub fn manifold_inverse_squeezing(&self) -> f64 {
        let n = self.n_sites as f64;
        (1..=self.n_sites / 3)
            .map(|m| {
                // p_m ξ_m⁻¹ = (Tr(S₊S₋ρ_m) - p_m (m - N/2)) / (N/4); ΔS_z = 0 within a manifold
                let transverse = self.spsm[m] - self.populations[m] * (m as f64 - self.half());
                transverse * 4.0 / n
            })
            .sum()
    }
}

pub(crate) fn squeezing_from(n_sites: usize, var_sz: f64, transverse: f64) -> Result<Squeezing> {
    if transverse <= SQUEEZING_DENOMINATOR_TOL {
        return Err(Error::NumericalState(format!(
            "Dicke squeezing undefined: ⟨S_x² + S_y²⟩ = {transverse:e}"
        )));
    }
    let xi = n_sites as f64 * (var_sz.max(0.0) + 0.25) / transverse;
    Ok(Squeezing {
        xi,
        depth_bound: (1.0 / xi).ceil() as i64 - 2,
    })
}

/// One time-stamped row of observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    /// Photon emission rate `R`, units of `γ`.
    pub emission_rate: f64,
    pub sz_mean: f64,
    pub s2_mean: f64,
    pub spin_length: f64,
    pub var_sz: f64,
    /// `None` when `⟨S_x² + S_y²⟩` vanishes.
    pub xi_d: Option<f64>,
    pub manifold_populations: Vec<f64>,
}

impl ObservableRecord {
    pub fn from_moments(t: f64, m: &SpinMoments) -> Result<Self> {
        let (s, sz) = m.spin_length()?;
        Ok(Self {
            t,
            emission_rate: m.emission_rate,
            sz_mean: sz,
            s2_mean: m.s2_mean(),
            spin_length: s,
            var_sz: m.var_sz(),
            xi_d: m.dicke_squeezing().ok().map(|q| q.xi),
            manifold_populations: m.populations.clone(),
        })
    }

    /// Checks `R ≥ -tol`, `0 ≤ s ≤ N/2 + tol`, `Σ p_m = 1 ± tol`.
    pub fn validate(&self, n_sites: usize, tol: f64) -> Result<()> {
        let fail = |what: String| {
            Err(Error::NumericalState(format!(
                "record at t = {}: {what}",
                self.t
            )))
        };
        if !(self.emission_rate >= -tol) {
            return fail(format!("emission rate {} < 0", self.emission_rate));
        }
        if !(self.spin_length >= -tol && self.spin_length <= n_sites as f64 / 2.0 + tol) {
            return fail(format!("spin length {} outside [0, N/2]", self.spin_length));
        }
        let total: f64 = self.manifold_populations.iter().sum();
        if !((total - 1.0).abs() <= tol) {
            return fail(format!("populations sum to {total}"));
        }
        Ok(())
    }
}
