use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::integrator::{integrate, IntegratorConfig, OdeState, OdeSystem};
use super::observables::{ObservableRecord, SpinMoments, Squeezing};
use crate::error::{Error, Result};
use crate::model::{lowering_operator, Lindbladian, ProductBasis, SuperspinState};
use crate::sparse::Csr;

/// A state counts as dark once `R < DARKNESS_THRESHOLD · N · γ`.
pub const DARKNESS_THRESHOLD: f64 = 1e-8;

/// Matrix elements smaller than this are dropped after every step.
pub const FLUSH_FLOOR: f64 = 1e-200;

impl OdeState for SuperspinState {
    fn set_zero(&mut self) {
        self.blocks_mut()
            .iter_mut()
            .for_each(|b| b.fill(C64::new(0.0, 0.0)));
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, x) in self.blocks_mut().iter_mut().zip(x.blocks()) {
            for (s, x) in s.as_mut_slice().iter_mut().zip(x.as_slice()) {
                *s += x * a;
            }
        }
    }

    fn assign_axpy(&mut self, y: &Self, a: f64, x: &Self) {
        debug_assert!(self.same_shape(y) && self.same_shape(x));
        for ((s, y), x) in self.blocks_mut().iter_mut().zip(y.blocks()).zip(x.blocks()) {
            for ((s, y), x) in s
                .as_mut_slice()
                .iter_mut()
                .zip(y.as_slice())
                .zip(x.as_slice())
            {
                *s = y + x * a;
            }
        }
    }

    fn error_ratio(&self, other: &Self, err: &Self, atol: f64, rtol: f64) -> f64 {
        let mut worst = 0.0_f64;
        for ((a, b), e) in self.blocks().iter().zip(other.blocks()).zip(err.blocks()) {
            for ((a, b), e) in a.as_slice().iter().zip(b.as_slice()).zip(e.as_slice()) {
                worst = worst.max(e.norm() / (atol + rtol * a.norm().max(b.norm())));
            }
        }
        worst
    }
}

/// Per-manifold operators needed to record observables of superspin states.
#[derive(Clone, Debug)]
pub struct SuperspinObservables {
    n_sites: usize,
    spsm_blocks: Vec<Csr>,
    decay_blocks: Vec<Csr>,
    gamma_scale: f64,
}

impl SuperspinObservables {
    pub fn new(lind: &Lindbladian) -> Self {
        let weights = vec![1.0; lind.basis().sizes().len()];
        Self::with_rates(lind.basis(), lind.reduced(), &weights)
    }

    /// Observables with emission rate `Σ_ab rates^{ab} ⟨J_{a+}J_{b-}⟩` and
    /// collective lowering operator `S_- = Σ_a w_a J_{a-}`.
    ///
    /// When every superspin is a single site, `w` carries the site signs of a
    /// partition so that full-space results are read in the same frame as the
    /// superspin ones.
    pub fn with_rates(basis: &ProductBasis, rates: &DMatrix<f64>, weights: &[f64]) -> Self {
        let d = basis.dim();
        let p = basis.sizes().len();
        assert_eq!(
            rates.shape(),
            (p, p),
            "rate matrix does not match the basis"
        );
        assert_eq!(weights.len(), p, "one weight per superspin expected");
        let lowering: Vec<Csr> = (0..p).map(|a| lowering_operator(basis, a)).collect();
        let raising: Vec<Csr> = lowering.iter().map(Csr::adjoint).collect();
        let s_minus = Csr::linear_combination(
            d,
            d,
            weights
                .iter()
                .zip(&lowering)
                .map(|(&w, l)| (C64::new(w, 0.0), l)),
        );
        let spsm = s_minus.adjoint().mul(&s_minus);
        let mut terms = Vec::new();
        for a in 0..p {
            for b in 0..p {
                if rates[(a, b)] != 0.0 {
                    terms.push((C64::new(rates[(a, b)], 0.0), raising[a].mul(&lowering[b])));
                }
            }
        }
        let decay = Csr::linear_combination(d, d, terms.iter().map(|(c, m)| (*c, m)));
        let n_sites = basis.n_sites();
        let block = |op: &Csr, m: usize| op.submatrix(basis.manifold(m), basis.manifold(m));
        let spsm_blocks = (0..=n_sites).map(|m| block(&spsm, m)).collect();
        let decay_blocks = (0..=n_sites).map(|m| block(&decay, m)).collect();
        let gamma_scale = rates
            .diagonal()
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b.abs()));
        Self {
            n_sites,
            spsm_blocks,
            decay_blocks,
            gamma_scale,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn moments(&self, state: &SuperspinState) -> SpinMoments {
        let trace = |op: &Csr, m: usize| {
            if op.nrows() == 0 {
                0.0
            } else {
                op.trace_product(state.block(m)).re
            }
        };
        SpinMoments {
            n_sites: self.n_sites,
            populations: state.manifold_populations(),
            spsm: (0..=self.n_sites)
                .map(|m| trace(&self.spsm_blocks[m], m))
                .collect(),
            emission_rate: (0..=self.n_sites)
                .map(|m| trace(&self.decay_blocks[m], m))
                .sum(),
        }
    }

    pub fn record(&self, t: f64, state: &SuperspinState) -> Result<ObservableRecord> {
        ObservableRecord::from_moments(t, &self.moments(state))
    }

    /// Emission rate below which a state of this size counts as dark.
    pub fn darkness_threshold(&self) -> f64 {
        DARKNESS_THRESHOLD * self.n_sites as f64 * self.gamma_scale
    }
}

/// `R = Σ_ab Γ̃^{ab} Tr(J_{a+} J_{b-} ρ)`.
pub fn emission_rate(state: &SuperspinState, lind: &Lindbladian) -> f64 {
    (0..=state.n_sites())
        .map(|m| lind.decay_block(m).trace_product(state.block(m)).re)
        .sum()
}

/// `(s, m_s)` from `⟨S²⟩ = s(s+1)` and `m_s = ⟨S_z⟩`.
pub fn spin_length(state: &SuperspinState, obs: &SuperspinObservables) -> Result<(f64, f64)> {
    obs.moments(state).spin_length()
}

pub fn dicke_squeezing(state: &SuperspinState, obs: &SuperspinObservables) -> Result<Squeezing> {
    obs.moments(state).dicke_squeezing()
}

/// `ξ⁻¹_{D,ave} = Σ_{m=1}^{⌊N/3⌋} p_m ξ⁻¹_{D,m}` of a stationary state.
pub fn average_inverse_squeezing(
    state: &SuperspinState,
    obs: &SuperspinObservables,
) -> Result<f64> {
    let moments = obs.moments(state);
    let threshold = obs.darkness_threshold();
    if moments.emission_rate >= threshold {
        return Err(Error::Precondition(format!(
            "state is not stationary: emission rate {:e} exceeds the darkness threshold {threshold:e}",
            moments.emission_rate
        )));
    }
    Ok(moments.manifold_inverse_squeezing())
}

struct SuperspinFlow<'a> {
    lind: &'a Lindbladian,
}

impl OdeSystem for SuperspinFlow<'_> {
    type State = SuperspinState;

    fn rhs(&self, _t: f64, y: &SuperspinState, dy: &mut SuperspinState) {
        self.lind.apply_blocks(y.blocks(), dy.blocks_mut());
    }

    fn post_step(&self, y: &mut SuperspinState) {
        y.hermitize();
        y.flush_below(FLUSH_FLOOR);
    }

    fn step_check(
        &self,
        y: &SuperspinState,
        cfg: &IntegratorConfig,
    ) -> std::result::Result<(), String> {
        let tr = y.trace();
        if !((tr - 1.0).abs() <= cfg.tol_trace) {
            return Err(format!("trace drifted to {tr}"));
        }
        let d = y.min_diagonal();
        if !(d >= -cfg.tol_pos) {
            return Err(format!("negative population {d:e}"));
        }
        Ok(())
    }

    fn sample_check(
        &self,
        y: &SuperspinState,
        cfg: &IntegratorConfig,
    ) -> std::result::Result<(), String> {
        if cfg.full_positivity_check {
            let ev = y.min_eigenvalue();
            if !(ev >= -cfg.tol_pos) {
                return Err(format!("negative eigenvalue {ev:e}"));
            }
        }
        Ok(())
    }
}

/// Result of a superspin run.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub records: Vec<ObservableRecord>,
    pub final_state: SuperspinState,
}

/// Integrates the superspin master equation, passing the state at every
/// sample time to `observer`.
pub fn evolve_with<F>(
    state0: &SuperspinState,
    lind: &Lindbladian,
    config: &IntegratorConfig,
    mut observer: F,
) -> Result<SuperspinState>
where
    F: FnMut(f64, &SuperspinState) -> Result<()>,
{
    if state0.basis().sizes() != lind.basis().sizes() {
        return Err(Error::DimensionMismatch {
            expected: lind.basis().dim(),
            found: state0.basis().dim(),
        });
    }
    state0.validate(1e-9)?;
    integrate(&SuperspinFlow { lind }, state0, config, |t, y| {
        observer(t, y)
    })
}

/// Integrates and records [`ObservableRecord`]s on the sampling grid.
pub fn evolve(
    state0: &SuperspinState,
    lind: &Lindbladian,
    config: &IntegratorConfig,
) -> Result<Evolution> {
    let obs = SuperspinObservables::new(lind);
    let mut records = Vec::with_capacity(config.n_samples);
    let final_state = evolve_with(state0, lind, config, |t, y| {
        records.push(obs.record(t, y)?);
        Ok(())
    })?;
    Ok(Evolution {
        records,
        final_state,
    })
}
