//! Scenario configuration files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use superspin::evolution::{IntegratorConfig, Method};
use superspin::oracle::OracleLimits;
use superspin::Spacing;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Superspin,
    Oracle,
    Trajectories,
    Liealg,
    Darkstates,
    Disorder,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Superspin => "superspin",
            Mode::Oracle => "oracle",
            Mode::Trajectories => "trajectories",
            Mode::Liealg => "liealg",
            Mode::Darkstates => "darkstates",
            Mode::Disorder => "disorder",
        };
        f.write_str(s)
    }
}

/// `fully_inverted`, `ground`, or `dicke:m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialState {
    #[default]
    FullyInverted,
    Ground,
    Dicke(usize),
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fully_inverted" => Ok(Self::FullyInverted),
            "ground" => Ok(Self::Ground),
            _ => s
                .strip_prefix("dicke:")
                .and_then(|m| m.parse().ok())
                .map(Self::Dicke)
                .ok_or_else(|| {
                    format!("initial_state {s:?} is not fully_inverted, ground or dicke:<m>")
                }),
        }
    }
}

impl TryFrom<String> for InitialState {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> String {
        match s {
            InitialState::FullyInverted => "fully_inverted".into(),
            InitialState::Ground => "ground".into(),
            InitialState::Dicke(m) => format!("dicke:{m}"),
        }
    }
}

/// Columns that may be listed under `observables`; `t` is always written.
pub const OBSERVABLES: [&str; 7] = ["R", "Sz", "S2", "s", "var_Sz", "xi_D", "populations"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub n_sites: usize,
    /// `kd` as a rational multiple of π, `"n/p"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[serde(default = "one")]
    pub gamma_1d: f64,
    #[serde(default = "ten")]
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default = "all_observables")]
    pub observables: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_worker")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub trajectories: TrajectorySection,
    #[serde(default)]
    pub disorder: DisorderSection,
    #[serde(default)]
    pub liealg: LiealgSection,
    #[serde(default)]
    pub darkstates: DarkstatesSection,
}

fn one() -> f64 {
    1.0
}

fn ten() -> f64 {
    10.0
}

fn default_dt() -> f64 {
    1e-3
}

fn one_worker() -> usize {
    1
}

fn all_observables() -> Vec<String> {
    OBSERVABLES.iter().map(|s| s.to_string()).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Rk4,
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub method: MethodName,
    pub rtol: f64,
    pub atol: f64,
    pub n_samples: usize,
    pub tol_trace: f64,
    pub tol_pos: f64,
    pub full_positivity_check: bool,
    pub min_dt: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let base = IntegratorConfig::default();
        Self {
            method: MethodName::Rk4,
            rtol: 1e-8,
            atol: 1e-11,
            n_samples: 201,
            tol_trace: base.tol_trace,
            tol_pos: base.tol_pos,
            full_positivity_check: base.full_positivity_check,
            min_dt: base.min_dt,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// Add the waveguide exchange Hamiltonian (oracle modes only).
    pub include_hamiltonian: bool,
    /// Local loss rate `Γ'` into non-guided modes, units of `γ`.
    pub gamma_local: f64,
    pub limits: OracleLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    pub n_traj: usize,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self { n_traj: 500 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSection {
    /// Standard deviations of the position offsets, in lattice units.
    pub sigmas: Vec<f64>,
    pub n_realizations: usize,
}

impl Default for DisorderSection {
    fn default() -> Self {
        Self {
            sigmas: (1..=9).map(|k| k as f64 / 100.0).collect(),
            n_realizations: 200,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiealgSection {
    /// Spacing in radians; overrides `spacing` so incommensurate values can
    /// be probed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
    /// Dimension cutoff; defaults to `3⌈N/2⌉ + 3`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DarkstatesSection {
    /// Manifolds to search; defaults to every `0 ≤ m ≤ N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifolds: Option<Vec<usize>>,
}

impl ScenarioConfig {
    pub fn minimal(n_sites: usize, spacing: Spacing) -> Self {
        toml::from_str(&format!("n_sites = {n_sites}\nspacing = \"{spacing}\""))
            .expect("minimal config parses")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize to TOML")
    }

    pub fn spacing(&self) -> Result<Spacing, CliError> {
        self.spacing.ok_or_else(|| {
            CliError::Config("`spacing` (\"n/p\", a rational multiple of π) is required".into())
        })
    }

    /// Checks every field that does not need a model to be built.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.n_sites == 0 {
            return bad("n_sites must be at least 1".into());
        }
        for (name, v) in [
            ("gamma_1d", self.gamma_1d),
            ("t_max", self.t_max),
            ("dt", self.dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if let InitialState::Dicke(m) = self.initial_state {
            if m > self.n_sites {
                return bad(format!(
                    "initial_state dicke:{m} exceeds n_sites = {}",
                    self.n_sites
                ));
            }
        }
        if let Some(o) = self
            .observables
            .iter()
            .find(|o| !OBSERVABLES.contains(&o.as_str()))
        {
            return bad(format!(
                "unknown observable {o:?}; expected one of {OBSERVABLES:?}"
            ));
        }
        if !(self.oracle.gamma_local >= 0.0 && self.oracle.gamma_local.is_finite()) {
            return bad("oracle.gamma_local must be non-negative".into());
        }
        if self.mode != Some(Mode::Liealg) && self.liealg.kd.is_some() {
            return bad("a floating-point liealg.kd is only accepted in liealg mode".into());
        }
        self.integrator()?
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let s = &self.integrator;
        let method = match s.method {
            MethodName::Rk4 => Method::Rk4,
            MethodName::Adaptive => Method::Adaptive {
                rtol: s.rtol,
                atol: s.atol,
            },
        };
        Ok(IntegratorConfig {
            dt: self.dt,
            t_max: self.t_max,
            method,
            tol_trace: s.tol_trace,
            tol_pos: s.tol_pos,
            n_samples: s.n_samples,
            full_positivity_check: s.full_positivity_check,
            min_dt: s.min_dt,
        })
    }

    pub fn wants(&self, column: &str) -> bool {
        self.observables.iter().any(|o| o == column)
    }
}
