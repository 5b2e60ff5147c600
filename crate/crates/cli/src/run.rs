//! One runner per mode. Each writes its files into an [`OutputDir`].

use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;
use superspin::darkstates::{
    dicke_decay_bound_check, dicke_state, find_dark_states, general_dark_states, DarkStateReport,
    DecayBound,
};
use superspin::evolution::{evolve, evolve_with, Evolution, SuperspinObservables};
use superspin::liealg::{
    canonical_decomposition, close_algebra, default_max_dim, directional_ops, RecoveredPartition,
};
use superspin::oracle::{
    disorder_scan, embed_state, embed_vector, evolve_full_with, evolve_trajectories,
    DisorderConfig, OracleModel, TrajectoryConfig,
};
use superspin::{
    build_gamma_waveguide, build_hcoh_waveguide, build_lindbladian, build_partition, CouplingModel,
    Lindbladian, ProductBasis, SuperspinPartition, SuperspinState, C64,
};

use crate::config::{InitialState, Mode, ScenarioConfig};
use crate::error::CliError;
use crate::output::OutputDir;

pub fn run(cfg: &ScenarioConfig, mode: Mode, out: &mut OutputDir) -> Result<(), CliError> {
    cfg.validate()?;
    match mode {
        Mode::Superspin => simulate(cfg, out).map(|_| ()),
        Mode::Oracle => oracle_compare(cfg, out),
        Mode::Trajectories => trajectories(cfg, out),
        Mode::Liealg => liealg(cfg, out),
        Mode::Darkstates => darkstates(cfg, out),
        Mode::Disorder => disorder(cfg, out),
    }
}

fn model(cfg: &ScenarioConfig) -> Result<(SuperspinPartition, CouplingModel), CliError> {
    let spacing = cfg.spacing()?;
    let part = build_partition(cfg.n_sites, spacing)?;
    let coupling = build_gamma_waveguide(cfg.n_sites, spacing, cfg.gamma_1d, None)?;
    Ok((part, coupling))
}

fn superspin_lindbladian(
    cfg: &ScenarioConfig,
) -> Result<(SuperspinPartition, Lindbladian), CliError> {
    let (part, coupling) = model(cfg)?;
    Ok((part.clone(), build_lindbladian(&part, &coupling)?))
}

fn initial_state(
    cfg: &ScenarioConfig,
    part: &SuperspinPartition,
    basis: Arc<ProductBasis>,
) -> Result<SuperspinState, CliError> {
    Ok(match cfg.initial_state {
        InitialState::FullyInverted => SuperspinState::fully_inverted(basis),
        InitialState::Ground => SuperspinState::ground(basis),
        InitialState::Dicke(m) => SuperspinState::from_pure(basis, &dicke_state(part, m)?)?,
    })
}

fn require_dissipative(cfg: &ScenarioConfig, mode: &str) -> Result<(), CliError> {
    if cfg.oracle.include_hamiltonian || cfg.oracle.gamma_local > 0.0 {
        return Err(CliError::Config(format!(
            "{mode} mode is dissipation-only; include_hamiltonian and gamma_local need the oracle or trajectory modes"
        )));
    }
    Ok(())
}

pub fn simulate(cfg: &ScenarioConfig, out: &mut OutputDir) -> Result<Evolution, CliError> {
    require_dissipative(cfg, "superspin")?;
    let (part, lind) = superspin_lindbladian(cfg)?;
    let rho0 = initial_state(cfg, &part, lind.basis().clone())?;
    let run = evolve(&rho0, &lind, &cfg.integrator()?)?;
    out.write_series("timeseries.csv", &run.records, cfg)?;
    Ok(run)
}

fn oracle_model(cfg: &ScenarioConfig, coupling: &CouplingModel) -> Result<OracleModel, CliError> {
    let mut coupling = coupling.clone();
    if cfg.oracle.include_hamiltonian {
        coupling = coupling.with_coherent(build_hcoh_waveguide(
            cfg.n_sites,
            cfg.spacing()?,
            cfg.gamma_1d,
        ));
    }
    Ok(OracleModel::from_coupling(
        &coupling,
        cfg.oracle.gamma_local,
    )?)
}

#[derive(Serialize)]
struct Comparison {
    n_sites: usize,
    spacing: String,
    include_hamiltonian: bool,
    gamma_local: f64,
    max_trace_distance: f64,
    /// `(t, ‖ρ_superspin − ρ_oracle‖₁/2)` at every sample.
    trace_distance: Vec<(f64, f64)>,
}

/// Superspin run next to the full-space oracle. The superspin side is always
/// the ideal dissipation-only model; Hamiltonian and local loss enter only
/// the oracle, so the comparison measures how far they break the symmetry.
fn oracle_compare(cfg: &ScenarioConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (part, coupling) = model(cfg)?;
    let oracle = oracle_model(cfg, &coupling)?;
    let lind = build_lindbladian(&part, &coupling)?;
    let integrator = cfg.integrator()?;
    let obs = SuperspinObservables::new(&lind);
    let rho0 = initial_state(cfg, &part, lind.basis().clone())?;

    let mut reduced = Vec::with_capacity(integrator.n_samples);
    let mut records = Vec::with_capacity(integrator.n_samples);
    evolve_with(&rho0, &lind, &integrator, |t, y| {
        records.push(obs.record(t, y)?);
        reduced.push(y.clone());
        Ok(())
    })?;
    out.write_series("superspin.csv", &records, cfg)?;

    let full_obs = oracle.observables(part.signs())?;
    let full0 = embed_state(&rho0, &part)?;
    let mut full_records = Vec::with_capacity(integrator.n_samples);
    let mut distances = Vec::with_capacity(integrator.n_samples);
    evolve_full_with(&oracle, &full0, &integrator, &cfg.oracle.limits, |t, y| {
        full_records.push(full_obs.record(t, y)?);
        distances.push((
            t,
            embed_state(&reduced[distances.len()], &part)?.trace_distance(y)?,
        ));
        Ok(())
    })?;
    out.write_series("oracle.csv", &full_records, cfg)?;
    let max_trace_distance = distances.iter().map(|d| d.1).fold(0.0, f64::max);
    out.write_json(
        "comparison.json",
        &Comparison {
            n_sites: cfg.n_sites,
            spacing: cfg.spacing()?.to_string(),
            include_hamiltonian: cfg.oracle.include_hamiltonian,
            gamma_local: cfg.oracle.gamma_local,
            max_trace_distance,
            trace_distance: distances,
        },
    )?;
    Ok(())
}

fn trajectories(cfg: &ScenarioConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (part, coupling) = model(cfg)?;
    let oracle = oracle_model(cfg, &coupling)?;
    let basis = Arc::new(ProductBasis::for_partition(&part));
    let psi = match cfg.initial_state {
        InitialState::FullyInverted => unit(basis.dim(), basis.fully_inverted_index()),
        InitialState::Ground => unit(basis.dim(), 0),
        InitialState::Dicke(m) => dicke_state(&part, m)?,
    };
    let psi0 = embed_vector(&part, &psi)?;
    let tc = TrajectoryConfig {
        t_max: cfg.t_max,
        dt: cfg.dt,
        n_samples: cfg.integrator.n_samples,
        n_traj: cfg.trajectories.n_traj,
        seed: cfg.seed,
        workers: cfg.workers,
    };
    let recs = evolve_trajectories(&oracle, &psi0, &tc, &cfg.oracle.limits, part.signs())?;
    let records: Vec<_> = recs.iter().map(|r| r.record.clone()).collect();
    out.write_series("timeseries.csv", &records, cfg)?;
    let rows: Vec<Vec<f64>> = recs
        .iter()
        .map(|r| vec![r.record.t, r.emission_rate_stderr, r.sz_stderr, r.s2_stderr])
        .collect();
    out.write_table(
        "stderr.csv",
        &["t", "R_stderr", "Sz_stderr", "S2_stderr"],
        &rows,
    )?;
    Ok(())
}

fn unit(dim: usize, k: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

fn pairs(v: &DVector<C64>) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

#[derive(Serialize)]
struct ClosureReport {
    n_sites: usize,
    kd: f64,
    max_dim: usize,
    closed: bool,
    dimension: usize,
    iterations: usize,
    lowering_basis: Vec<Vec<[f64; 2]>>,
    zed_basis: Vec<Vec<[f64; 2]>>,
    recovered_partition: Option<RecoveredPartition>,
    /// Whether the recovered sets and signs equal the superspin partition of
    /// `spacing`; absent when no rational spacing was given.
    matches_partition: Option<bool>,
}

fn liealg(cfg: &ScenarioConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let kd = match (cfg.liealg.kd, cfg.spacing) {
        (Some(kd), _) => kd,
        (None, Some(sp)) => sp.kd(),
        (None, None) => {
            return Err(CliError::Config(
                "liealg mode needs `spacing` or `liealg.kd`".into(),
            ))
        }
    };
    if !kd.is_finite() {
        return Err(CliError::Config(format!(
            "liealg.kd must be finite, got {kd}"
        )));
    }
    let max_dim = cfg
        .liealg
        .max_dim
        .unwrap_or_else(|| default_max_dim(cfg.n_sites));
    let (l, r) = directional_ops(cfg.n_sites, kd)?;
    let closure = close_algebra(&[l, r], max_dim)?;
    let recovered = if closure.closed {
        Some(canonical_decomposition(&closure)?)
    } else {
        None
    };
    let matches_partition = match (&recovered, cfg.spacing, cfg.liealg.kd) {
        (Some(rec), Some(sp), None) => {
            let part = build_partition(cfg.n_sites, sp)?;
            let sets: Vec<Vec<usize>> = (0..part.n_superspins())
                .map(|a| part.sites(a).to_vec())
                .filter(|s| !s.is_empty())
                .collect();
            Some(rec.sets == sets && rec.signs == part.signs())
        }
        _ => None,
    };
    out.write_json(
        "closure.json",
        &ClosureReport {
            n_sites: cfg.n_sites,
            kd,
            max_dim,
            closed: closure.closed,
            dimension: closure.dimension,
            iterations: closure.iterations,
            lowering_basis: closure.lowering_basis.iter().map(pairs).collect(),
            zed_basis: closure.zed_basis.iter().map(pairs).collect(),
            recovered_partition: recovered,
            matches_partition,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ManifoldCount {
    m: usize,
    count: usize,
}

#[derive(Serialize)]
struct DarkStatesReport {
    n_sites: usize,
    spacing: String,
    /// Exchange-symmetric dark states (only at `kd = 2π/3`).
    symmetric: Option<Vec<DarkStateReport>>,
    /// Dimension of the joint nullspace of all jump operators per manifold.
    nullspace_dimensions: Vec<ManifoldCount>,
    /// Directional Dicke-state rates, where the bound applies.
    decay_bounds: Vec<DecayBound>,
}

fn darkstates(cfg: &ScenarioConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (part, lind) = superspin_lindbladian(cfg)?;
    let spacing = cfg.spacing()?;
    let manifolds = cfg
        .darkstates
        .manifolds
        .clone()
        .unwrap_or_else(|| (0..=cfg.n_sites).collect());
    if let Some(m) = manifolds.iter().find(|&&m| m > cfg.n_sites) {
        return Err(CliError::Config(format!(
            "manifold {m} exceeds n_sites = {}",
            cfg.n_sites
        )));
    }
    let two_thirds = spacing.n() == 2 && spacing.p() == 3 && cfg.n_sites.is_multiple_of(3);
    let symmetric = if two_thirds {
        let mut all = Vec::new();
        for &m in &manifolds {
            all.extend(find_dark_states(&part, m)?);
        }
        Some(all)
    } else {
        None
    };
    let mut nullspace_dimensions = Vec::with_capacity(manifolds.len());
    for &m in &manifolds {
        nullspace_dimensions.push(ManifoldCount {
            m,
            count: general_dark_states(&lind, m)?.len(),
        });
    }
    let decay_bounds = manifolds
        .iter()
        .filter(|&&m| m >= 1)
        .filter_map(|&m| dicke_decay_bound_check(cfg.n_sites, m, spacing).ok())
        .collect();
    out.write_json(
        "darkstates.json",
        &DarkStatesReport {
            n_sites: cfg.n_sites,
            spacing: spacing.to_string(),
            symmetric,
            nullspace_dimensions,
            decay_bounds,
        },
    )?;
    Ok(())
}

fn disorder(cfg: &ScenarioConfig, out: &mut OutputDir) -> Result<(), CliError> {
    require_dissipative(cfg, "disorder")?;
    let dc = DisorderConfig {
        n_sites: cfg.n_sites,
        spacing: cfg.spacing()?,
        sigmas: cfg.disorder.sigmas.clone(),
        n_realizations: cfg.disorder.n_realizations,
        seed: cfg.seed,
        integrator: cfg.integrator()?,
        workers: cfg.workers,
    };
    let report = disorder_scan(&dc, &cfg.oracle.limits)?;
    out.write_json("disorder.json", &report)?;
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.sigma,
                r.min_fidelity_mean,
                r.min_fidelity_stderr,
                r.peak_ratio_mean,
                r.peak_ratio_stderr,
                r.inverse_squeezing_mean,
                r.inverse_squeezing_stderr,
            ]
        })
        .collect();
    out.write_table(
        "disorder.csv",
        &[
            "sigma",
            "min_fidelity",
            "min_fidelity_stderr",
            "peak_ratio",
            "peak_ratio_stderr",
            "inverse_squeezing",
            "inverse_squeezing_stderr",
        ],
        &rows,
    )?;
    Ok(())
}
