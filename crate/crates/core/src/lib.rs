//! Exact dissipative dynamics of qubit arrays coupled to one-dimensional
//! baths, using the partial permutational symmetry of commensurate lattices.
//!
//! For `kd = nπ/p` every `p`-th qubit is exchange-symmetric, so the array
//! collapses onto `p` collective "superspins" and the state space shrinks from
//! `2^N` to `Π_a (n_a + 1)`. The crate is organised as:
//!
//! * [`model`]: partitions, coupling matrices, collective operators, and the
//!   superspin Lindbladian.
//! * [`evolution`]: time integration and observables (emission rate, spin
//!   length, Dicke squeezing).
//! * [`darkstates`]: dark-state search, Dicke states, and decay bounds.
//! * [`liealg`]: closure of the jump-operator Lie algebra and recovery of the
//!   superspin partition from it.
//! * [`oracle`]: brute-force full-Hilbert-space reference solver.

// `!(x >= bound)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod darkstates;
pub mod error;
pub mod evolution;
pub mod liealg;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod sparse;

pub use error::{Error, Result};
pub use model::{
    build_collective_ops, build_gamma_waveguide, build_hcoh_waveguide, build_lindbladian,
    build_partition, CollectiveOps, CouplingModel, Lindbladian, ProductBasis, Spacing,
    SuperspinPartition, SuperspinState,
};
pub use num_complex::Complex64 as C64;

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
