//! Partitions, couplings, collective operators, and the superspin generator.

mod basis;
mod coupling;
mod lindblad;
mod operators;
mod partition;
mod ring;
mod spacing;
mod state;

pub use basis::ProductBasis;
pub use coupling::{build_gamma_waveguide, build_hcoh_waveguide, reduced_gamma, CouplingModel};
pub use lindblad::{build_lindbladian, Channel, Lindbladian};
pub use operators::{
    build_collective_ops, lowering_operator, zed_operator, CollectiveOps, OpLabel,
};
pub use partition::{build_partition, SuperspinPartition};
pub use ring::{RingResonator, RingValidity};
pub use spacing::Spacing;
pub use state::SuperspinState;
