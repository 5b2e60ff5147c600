use super::{OracleLimits, OracleModel};
use crate::error::{Error, Result};
use crate::evolution::{evolve_with, IntegratorConfig, ObservableRecord};
use crate::model::SuperspinState;

#[derive(Clone, Debug)]
pub struct FullEvolution {
    pub records: Vec<ObservableRecord>,
    pub final_state: SuperspinState,
}

fn check_state(model: &OracleModel, rho0: &SuperspinState) -> Result<()> {
    let n = model.n_sites();
    if rho0.basis().sizes() != vec![1; n].as_slice() {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: rho0.basis().dim(),
        });
    }
    Ok(())
}

/// Exact master-equation evolution on the full Hilbert space, handing every
/// sampled state to `observer`.
pub fn evolve_full_with<F>(
    model: &OracleModel,
    rho0: &SuperspinState,
    config: &IntegratorConfig,
    limits: &OracleLimits,
    observer: F,
) -> Result<SuperspinState>
where
    F: FnMut(f64, &SuperspinState) -> Result<()>,
{
    limits.check_density(model.n_sites())?;
    check_state(model, rho0)?;
    evolve_with(rho0, &model.lindbladian()?, config, observer)
}

/// Exact evolution recording observables, with `S_±` built from the site
/// signs `signs` so that results line up with a superspin run.
pub fn evolve_full(
    model: &OracleModel,
    rho0: &SuperspinState,
    config: &IntegratorConfig,
    limits: &OracleLimits,
    signs: &[f64],
) -> Result<FullEvolution> {
    let obs = model.observables(signs)?;
    let mut records = Vec::with_capacity(config.n_samples);
    let final_state = evolve_full_with(model, rho0, config, limits, |t, y| {
        records.push(obs.record(t, y)?);
        Ok(())
    })?;
    Ok(FullEvolution {
        records,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_gamma_waveguide, Spacing};

    #[test]
    fn two_atom_cascade() {
        // kd = π, N = 2: |ee⟩ → bright state → ground with rate 2γ each step
        let c = build_gamma_waveguide(2, Spacing::new(1, 1).unwrap(), 1.0, None).unwrap();
        let model = OracleModel::from_coupling(&c, 0.0).unwrap();
        let rho0 = SuperspinState::fully_inverted(model.site_basis());
        let cfg = IntegratorConfig::default().with_t_max(3.0).with_samples(31);
        let out = evolve_full(&model, &rho0, &cfg, &OracleLimits::default(), &[1.0, -1.0]).unwrap();
        for r in &out.records {
            let t = r.t;
            let p2 = (-2.0 * t).exp();
            let p1 = 2.0 * t * (-2.0 * t).exp();
            assert!((r.manifold_populations[2] - p2).abs() < 1e-8);
            assert!((r.manifold_populations[1] - p1).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn local_loss_speeds_decay() {
        let c = build_gamma_waveguide(4, Spacing::new(1, 2).unwrap(), 1.0, None).unwrap();
        let model = OracleModel::from_coupling(&c, 0.5).unwrap();
        let rho0 = SuperspinState::fully_inverted(model.site_basis());
        let cfg = IntegratorConfig::default().with_t_max(4.0).with_samples(21);
        let out = evolve_full(&model, &rho0, &cfg, &OracleLimits::default(), &[1.0; 4]).unwrap();
        for r in &out.records {
            let excitations = r.sz_mean + 2.0;
            assert!(excitations <= 4.0 * (-0.5 * r.t).exp() + 1e-9);
        }
    }

    #[test]
    fn guard_and_shape() {
        let c = build_gamma_waveguide(11, Spacing::new(1, 1).unwrap(), 1.0, None).unwrap();
        let model = OracleModel::from_coupling(&c, 0.0).unwrap();
        let rho0 = SuperspinState::ground(model.site_basis());
        let err = evolve_full_with(
            &model,
            &rho0,
            &IntegratorConfig::default(),
            &OracleLimits::default(),
            |_, _| Ok(()),
        );
        assert!(matches!(err, Err(Error::DimensionGuard { .. })));
    }
}
