use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Lossy ring resonator treated as a 1D periodic channel near one of its
/// resonances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingResonator {
    /// Circumference `L`.
    pub length: f64,
    /// Resonance frequency `ω_r`; `k_r = ω_r / c`.
    pub omega_r: f64,
    /// Cavity linewidth `κ_c`.
    pub kappa_c: f64,
    /// Effective mode area `A`.
    pub mode_area: f64,
    /// Phase velocity in the medium.
    pub speed: f64,
}

/// Size of the small parameters the ring Green's function expansion assumes
/// (`δk L ≪ 1` and `Δ L ≪ 1`). Not enforced; callers decide.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingValidity {
    pub loss_per_round_trip: f64,
    pub detuning_phase: f64,
}

impl RingValidity {
    pub fn holds(&self, threshold: f64) -> bool {
        self.loss_per_round_trip < threshold && self.detuning_phase < threshold
    }
}

impl RingResonator {
    pub fn new(
        length: f64,
        omega_r: f64,
        kappa_c: f64,
        mode_area: f64,
        speed: f64,
    ) -> Result<Self> {
        if !(length > 0.0 && kappa_c > 0.0 && speed > 0.0 && omega_r > 0.0) {
            return Err(Error::Precondition(
                "ring resonator needs L, κ_c, ω_r, c > 0".into(),
            ));
        }
        let ring = Self {
            length,
            omega_r,
            kappa_c,
            mode_area,
            speed,
        };
        if ring.round_trip_transmission() <= 0.0 {
            return Err(Error::Precondition("κ_c L / 2c must stay below 1".into()));
        }
        Ok(ring)
    }

    /// `r̄² = 1 - κ_c L / 2c`.
    pub fn round_trip_transmission(&self) -> f64 {
        1.0 - self.kappa_c * self.length / (2.0 * self.speed)
    }

    pub fn k_r(&self) -> f64 {
        self.omega_r / self.speed
    }

    /// `Δ_ω = r̄² (ω - ω_r)`.
    pub fn detuning(&self, omega: f64) -> f64 {
        self.round_trip_transmission() * (omega - self.omega_r)
    }

    /// Frequency at which the effective detuning equals `delta_omega`.
    pub fn omega_for_detuning(&self, delta_omega: f64) -> f64 {
        self.omega_r + delta_omega / self.round_trip_transmission()
    }

    /// `G = -(A c² / ω L) cos(k_r (z - z_src)) / (Δ_ω + i κ_c / 2)`.
    pub fn greens(&self, z: f64, z_src: f64, omega: f64) -> C64 {
        let prefactor = -self.mode_area * self.speed * self.speed / (omega * self.length);
        let lorentz = C64::new(self.detuning(omega), 0.5 * self.kappa_c).inv();
        lorentz * prefactor * (self.k_r() * (z - z_src)).cos()
    }

    pub fn validity(&self, omega: f64) -> RingValidity {
        RingValidity {
            loss_per_round_trip: -self.round_trip_transmission().ln(),
            detuning_phase: ((omega - self.omega_r) / self.speed * self.length).abs(),
        }
    }

    /// `Γ^{ij} ∝ Im G(z_i, z_j, ω_r)`, normalised so the diagonal equals `gamma_1d`.
    pub fn dissipative_coupling(&self, positions: &[f64], gamma_1d: f64) -> DMatrix<f64> {
        let self_term = self.greens(0.0, 0.0, self.omega_r).im;
        DMatrix::from_fn(positions.len(), positions.len(), |i, j| {
            gamma_1d * self.greens(positions[i], positions[j], self.omega_r).im / self_term
        })
    }
}
