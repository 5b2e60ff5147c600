use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::evolve_full_with;
use super::fidelity::root_fidelity;
use super::{OracleLimits, OracleModel};
use crate::error::{Error, Result};
use crate::evolution::IntegratorConfig;
use crate::linalg::psd_sqrt;
use crate::model::{build_gamma_waveguide, build_partition, Spacing, SuperspinState};
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub n_sites: usize,
    pub spacing: Spacing,
    /// Standard deviations of the position offsets `ε_j`, in lattice units.
    pub sigmas: Vec<f64>,
    pub n_realizations: usize,
    pub seed: u64,
    pub integrator: IntegratorConfig,
    pub workers: usize,
}

/// Realization averages for one disorder strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRow {
    pub sigma: f64,
    /// Minimum over time of the fidelity with the ordered evolution.
    pub min_fidelity_mean: f64,
    pub min_fidelity_stderr: f64,
    /// `R_max,σ / R_max,0`.
    pub peak_ratio_mean: f64,
    pub peak_ratio_stderr: f64,
    /// `ξ⁻¹_{D,ave}` of the final state.
    pub inverse_squeezing_mean: f64,
    pub inverse_squeezing_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderReport {
    pub n_sites: usize,
    pub spacing: Spacing,
    pub n_realizations: usize,
    pub seed: u64,
    pub t_max: f64,
    pub reference_peak_rate: f64,
    pub reference_inverse_squeezing: f64,
    pub rows: Vec<DisorderRow>,
}

struct Outcome {
    min_fidelity: f64,
    peak: f64,
    inverse_squeezing: f64,
}

/// Runs the ordered reference and `n_realizations` disordered copies per
/// `σ`, all dissipation-only from full inversion.
///
/// Realization `r` of strength index `s` uses random stream
/// `(seed, s·n_realizations + r)`; averages are summed in realization order.
pub fn disorder_scan(config: &DisorderConfig, limits: &OracleLimits) -> Result<DisorderReport> {
    let n = config.n_sites;
    limits.check_density(n)?;
    if config.n_realizations == 0 || config.workers == 0 {
        return Err(Error::Precondition(
            "disorder scan needs n_realizations >= 1 and workers >= 1".into(),
        ));
    }
    if let Some(s) = config
        .sigmas
        .iter()
        .find(|s| !(**s >= 0.0 && s.is_finite()))
    {
        return Err(Error::Precondition(format!(
            "disorder strength must be finite and non-negative, got {s}"
        )));
    }
    let signs = build_partition(n, config.spacing)?.signs().to_vec();
    let cfg = &config.integrator;

    let ordered = OracleModel::new(
        build_gamma_waveguide(n, config.spacing, 1.0, None)?
            .gamma()
            .clone(),
        None,
        0.0,
    )?;
    let rho0 = SuperspinState::fully_inverted(ordered.site_basis());
    let obs = ordered.observables(&signs)?;
    let mut reference_roots: Vec<Vec<DMatrix<C64>>> = Vec::with_capacity(cfg.n_samples);
    let mut reference_peak = 0.0_f64;
    let reference_final = evolve_full_with(&ordered, &rho0, cfg, limits, |_, y| {
        reference_roots.push(y.blocks().iter().map(psd_sqrt).collect());
        reference_peak = reference_peak.max(obs.moments(y).emission_rate);
        Ok(())
    })?;
    let reference_inverse_squeezing = obs.moments(&reference_final).manifold_inverse_squeezing();

    let realization = |sigma: f64, index: u64| -> Result<Outcome> {
        let mut rng = stream(config.seed, index);
        let offsets: Vec<f64> = if sigma == 0.0 {
            vec![0.0; n]
        } else {
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::Precondition(e.to_string()))?;
            (0..n).map(|_| normal.sample(&mut rng)).collect()
        };
        let gamma = build_gamma_waveguide(n, config.spacing, 1.0, Some(&offsets))?
            .gamma()
            .clone();
        let model = OracleModel::new(gamma, None, 0.0)?;
        let obs = model.observables(&signs)?;
        let mut sample = 0;
        let mut min_fidelity = f64::INFINITY;
        let mut peak = 0.0_f64;
        let last = evolve_full_with(&model, &rho0, cfg, limits, |_, y| {
            let root: f64 = reference_roots[sample]
                .iter()
                .zip(y.blocks())
                .map(|(s, b)| root_fidelity(s, b))
                .sum();
            min_fidelity = min_fidelity.min((root * root).min(1.0));
            peak = peak.max(obs.moments(y).emission_rate);
            sample += 1;
            Ok(())
        })?;
        Ok(Outcome {
            min_fidelity,
            peak: peak / reference_peak,
            inverse_squeezing: obs.moments(&last).manifold_inverse_squeezing(),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let nr = config.n_realizations;
    let mut rows = Vec::with_capacity(config.sigmas.len());
    for (s_idx, &sigma) in config.sigmas.iter().enumerate() {
        let outcomes: Vec<Outcome> = pool.install(|| {
            (0..nr)
                .into_par_iter()
                .map(|r| realization(sigma, (s_idx * nr + r) as u64))
                .collect::<Result<_>>()
        })?;
        let stats = |f: &dyn Fn(&Outcome) -> f64| mean_and_stderr(outcomes.iter().map(f));
        let (min_fidelity_mean, min_fidelity_stderr) = stats(&|o| o.min_fidelity);
        let (peak_ratio_mean, peak_ratio_stderr) = stats(&|o| o.peak);
        let (inverse_squeezing_mean, inverse_squeezing_stderr) = stats(&|o| o.inverse_squeezing);
        rows.push(DisorderRow {
            sigma,
            min_fidelity_mean,
            min_fidelity_stderr,
            peak_ratio_mean,
            peak_ratio_stderr,
            inverse_squeezing_mean,
            inverse_squeezing_stderr,
        });
    }
    Ok(DisorderReport {
        n_sites: n,
        spacing: config.spacing,
        n_realizations: nr,
        seed: config.seed,
        t_max: cfg.t_max,
        reference_peak_rate: reference_peak,
        reference_inverse_squeezing,
        rows,
    })
}

/// Sample mean and standard error of the mean, accumulated in order.
fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut sum, mut sum_sq) = (0.0, 0.0, 0.0);
    for v in values {
        n += 1.0;
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}
