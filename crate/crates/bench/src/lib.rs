//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use superspin::{
    build_gamma_waveguide, build_lindbladian, build_partition, Lindbladian, ProductBasis, Spacing,
    SuperspinState,
};

/// Superspin generator at spacing `n/p` and the fully inverted state.
pub fn inverted(n_sites: usize, n: u32, p: u32) -> (Lindbladian, SuperspinState) {
    let spacing = Spacing::new(n, p).expect("valid spacing");
    let part = build_partition(n_sites, spacing).expect("valid partition");
    let coupling = build_gamma_waveguide(n_sites, spacing, 1.0, None).expect("valid coupling");
    let lind = build_lindbladian(&part, &coupling).expect("valid generator");
    let rho = SuperspinState::fully_inverted(Arc::new(ProductBasis::for_partition(&part)));
    (lind, rho)
}
