//! Built-in scenario sets that regenerate the reference data.

use nalgebra::DVector;
use serde::Serialize;
use superspin::darkstates::{dicke_state, find_dark_states};
use superspin::evolution::{dicke_squeezing, ObservableRecord, SuperspinObservables};
use superspin::{
    build_gamma_waveguide, build_lindbladian, build_partition, Spacing, SuperspinState, C64,
};

use crate::config::{MethodName, Mode, ScenarioConfig};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::run::{run, simulate};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: [Preset; 3] = [
    Preset {
        name: "fig2a",
        description: "emission-rate bursts for N = 15, 30, 90 at kd = 2π/3 (dissipation only), \
                      plus N = 15 with the waveguide Hamiltonian in trajectory mode",
    },
    Preset {
        name: "fig2b",
        description: "spin length s against m_s for N = 36 at kd = π, 2π/3, π/2, π/3",
    },
    Preset {
        name: "fig3",
        description: "late-time (γt = 40) dark-state fidelities, ground-state population and \
                      average inverse Dicke squeezing for N = 6 … 36 at kd = 2π/3",
    },
];

/// Applies command-line overrides to every scenario of a preset.
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl Overrides {
    fn apply(&self, mut cfg: ScenarioConfig) -> ScenarioConfig {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        cfg
    }
}

fn base(n_sites: usize, spacing: &str) -> ScenarioConfig {
    ScenarioConfig::minimal(n_sites, spacing.parse().expect("preset spacings are valid"))
}

/// Runs a preset and returns the resolved configurations it used.
pub fn run_preset(
    name: &str,
    ov: &Overrides,
    out: &mut OutputDir,
) -> Result<Vec<ScenarioConfig>, CliError> {
    match name {
        "fig2a" => fig2a(ov, out),
        "fig2b" => fig2b(ov, out),
        "fig3" => fig3(ov, out),
        _ => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            Err(CliError::Config(format!(
                "unknown preset {name:?}; available: {}",
                names.join(", ")
            )))
        }
    }
}

fn in_subdir(
    out: &mut OutputDir,
    name: &str,
    cfg: &ScenarioConfig,
    f: impl FnOnce(&ScenarioConfig, &mut OutputDir) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut sub = out.subdir(name)?;
    log::info!("running {name}");
    f(cfg, &mut sub)?;
    out.absorb(sub);
    Ok(())
}

fn fig2a(ov: &Overrides, out: &mut OutputDir) -> Result<Vec<ScenarioConfig>, CliError> {
    let mut used = Vec::new();
    for n in [15, 30, 90] {
        let mut cfg = ov.apply(base(n, "2/3"));
        cfg.t_max = 0.3;
        cfg.integrator.n_samples = 301;
        // A full eigen-decomposition per sample dominates the run at N = 90.
        cfg.integrator.full_positivity_check = n < 90;
        in_subdir(out, &format!("N{n}"), &cfg, |c, o| {
            let evolution = simulate(c, o)?;
            o.write_table(
                "normalized.csv",
                NORMALIZED_HEADER,
                &normalized_rates(n, &evolution.records),
            )?;
            Ok(())
        })?;
        used.push(cfg);
    }
    let mut cfg = ov.apply(base(15, "2/3"));
    cfg.mode = Some(Mode::Trajectories);
    cfg.t_max = 0.3;
    cfg.integrator.n_samples = 61;
    cfg.oracle.include_hamiltonian = true;
    cfg.trajectories.n_traj = 100;
    in_subdir(out, "N15_hamiltonian", &cfg, |c, o| {
        run(c, Mode::Trajectories, o)
    })?;
    used.push(cfg);
    Ok(used)
}

const NORMALIZED_HEADER: &[&str] = &["t", "R_over_N", "R_over_R0", "R_over_Rmax"];

/// The emission rate per emitter, relative to its initial value and relative
/// to its maximum.
fn normalized_rates(n_sites: usize, records: &[ObservableRecord]) -> Vec<Vec<f64>> {
    let r0 = records.first().map_or(f64::NAN, |r| r.emission_rate);
    let r_max = records
        .iter()
        .map(|r| r.emission_rate)
        .fold(f64::NEG_INFINITY, f64::max);
    records
        .iter()
        .map(|r| {
            vec![
                r.t,
                r.emission_rate / n_sites as f64,
                r.emission_rate / r0,
                r.emission_rate / r_max,
            ]
        })
        .collect()
}

fn fig2b(ov: &Overrides, out: &mut OutputDir) -> Result<Vec<ScenarioConfig>, CliError> {
    let mut used = Vec::new();
    for spacing in ["1/1", "2/3", "1/2", "1/3"] {
        let mut cfg = ov.apply(base(36, spacing));
        cfg.t_max = 10.0;
        cfg.integrator.method = MethodName::Adaptive;
        cfg.integrator.n_samples = 401;
        cfg.integrator.full_positivity_check = false;
        in_subdir(
            out,
            &format!("kd_{}", spacing.replace('/', "_")),
            &cfg,
            |c, o| run(c, Mode::Superspin, o),
        )?;
        used.push(cfg);
    }
    Ok(used)
}

#[derive(Serialize)]
struct Fig3Row {
    n_sites: usize,
    fidelity_m2: f64,
    fidelity_m3: Option<f64>,
    inverse_xi_dark_m2: f64,
    inverse_xi_dicke_m2: f64,
    inverse_xi_dark_m3: Option<f64>,
    inverse_xi_dicke_m3: Option<f64>,
    ground_population: f64,
    /// Population of manifolds with at least `N/6` excitations.
    population_above_sixth: f64,
    inverse_squeezing_ave: f64,
    depth_bound_ave: i64,
    /// Emission rate left at `t_max`, a measure of how dark the state is.
    final_emission_rate: f64,
}

fn fig3(ov: &Overrides, out: &mut OutputDir) -> Result<Vec<ScenarioConfig>, CliError> {
    let mut used = Vec::new();
    let mut rows = Vec::new();
    for n in (6..=36).step_by(6) {
        let mut cfg = ov.apply(base(n, "2/3"));
        cfg.t_max = 40.0;
        cfg.integrator.method = MethodName::Adaptive;
        cfg.integrator.n_samples = 161;
        cfg.integrator.full_positivity_check = false;
        let mut sub = out.subdir(&format!("N{n}"))?;
        log::info!("running N{n}");
        let evolution = simulate(&cfg, &mut sub)?;
        out.absorb(sub);

        let spacing = Spacing::new(2, 3).expect("valid");
        let part = build_partition(n, spacing)?;
        let lind = build_lindbladian(
            &part,
            &build_gamma_waveguide(n, spacing, cfg.gamma_1d, None)?,
        )?;
        let obs = SuperspinObservables::new(&lind);
        let pure_inverse_xi = |v: &DVector<C64>| -> Result<f64, CliError> {
            let rho = SuperspinState::from_pure(lind.basis().clone(), v)?;
            Ok(dicke_squeezing(&rho, &obs)?.inverse())
        };
        let dark = |m: usize| -> Result<Option<(f64, f64, f64)>, CliError> {
            if m > n / 3 {
                return Ok(None);
            }
            let states = find_dark_states(&part, m)?;
            let d = states
                .first()
                .ok_or_else(|| CliError::Numerical(format!("no dark state at N = {n}, m = {m}")))?;
            let dicke = dicke_state(&part, m)?;
            Ok(Some((
                d.fidelity_vs_dicke,
                pure_inverse_xi(&d.vector)?,
                pure_inverse_xi(&dicke)?,
            )))
        };
        let m2 = dark(2)?.expect("N >= 6 has a two-excitation dark state");
        let m3 = dark(3)?;
        let moments = obs.moments(&evolution.final_state);
        let xi_ave = moments.manifold_inverse_squeezing();
        rows.push(Fig3Row {
            n_sites: n,
            fidelity_m2: m2.0,
            fidelity_m3: m3.map(|x| x.0),
            inverse_xi_dark_m2: m2.1,
            inverse_xi_dicke_m2: m2.2,
            inverse_xi_dark_m3: m3.map(|x| x.1),
            inverse_xi_dicke_m3: m3.map(|x| x.2),
            ground_population: moments.populations[0],
            population_above_sixth: moments.populations[n.div_ceil(6)..].iter().sum(),
            inverse_squeezing_ave: xi_ave,
            depth_bound_ave: xi_ave.ceil() as i64 - 2,
            final_emission_rate: moments.emission_rate,
        });
        used.push(cfg);
    }
    out.write_json("fig3.json", &rows)?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_sites as f64,
                r.fidelity_m2,
                r.fidelity_m3.unwrap_or(f64::NAN),
                r.ground_population,
                r.population_above_sixth,
                r.inverse_squeezing_ave,
                r.depth_bound_ave as f64,
                r.final_emission_rate,
            ]
        })
        .collect();
    out.write_table(
        "fig3.csv",
        &[
            "N",
            "F_m2",
            "F_m3",
            "p_ground",
            "p_above_sixth",
            "inv_xi_ave",
            "depth_bound_ave",
            "R_final",
        ],
        &table,
    )?;
    Ok(used)
}
