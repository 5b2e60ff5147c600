//! Time evolution of superspin states and the observables recorded along it.

mod evolve;
pub mod integrator;
pub(crate) mod observables;

pub use evolve::{
    average_inverse_squeezing, dicke_squeezing, emission_rate, evolve, evolve_with, spin_length,
    Evolution, SuperspinObservables, DARKNESS_THRESHOLD,
};
pub use integrator::{integrate, IntegratorConfig, Method, OdeState, OdeSystem};
pub use observables::{ObservableRecord, SpinMoments, Squeezing, SQUEEZING_DENOMINATOR_TOL};
