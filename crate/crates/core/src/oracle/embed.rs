use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::site_basis;
use crate::darkstates::binomial;
use crate::error::{Error, Result};
use crate::model::{ProductBasis, SuperspinPartition, SuperspinState};
use crate::sparse::Csr;

/// Isometry `V` from the superspin product basis into the `2^N` computational
/// basis. `|k_1, …, k_p⟩` maps to the signed symmetric combination of all site
/// configurations with `k_a` excitations in superspin `a`, each weighted by
/// the product of the excited sites' signs.
pub fn embedding(part: &SuperspinPartition) -> Csr {
    let n = part.n_sites();
    let basis = ProductBasis::for_partition(part);
    let sizes = part.sizes();
    let signs = part.signs();
    let norms: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&s| (0..=s).map(|k| binomial(s, k).sqrt()).collect())
        .collect();
    let entries = (0..1usize << n).map(|b| {
        let mut occ = vec![0; sizes.len()];
        let mut amp = 1.0;
        for site in 0..n {
            if b >> (n - 1 - site) & 1 == 1 {
                occ[part.owner(site)] += 1;
                amp *= signs[site];
            }
        }
        for (a, &k) in occ.iter().enumerate() {
            amp /= norms[a][k];
        }
        (b, basis.index(&occ), C64::new(amp, 0.0))
    });
    Csr::from_triplets(1 << n, basis.dim(), entries)
}

/// `V v` for a superspin-basis vector.
pub fn embed_vector(part: &SuperspinPartition, v: &DVector<C64>) -> Result<DVector<C64>> {
    let d = part.hilbert_dim();
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    Ok(embedding(part).matvec(v))
}

fn manifold_blocks(part: &SuperspinPartition) -> (std::sync::Arc<ProductBasis>, Vec<Csr>) {
    let v = embedding(part);
    let full = site_basis(part.n_sites());
    let ss = ProductBasis::for_partition(part);
    let blocks = (0..=part.n_sites())
        .map(|m| v.submatrix(full.manifold(m), ss.manifold(m)))
        .collect();
    (full, blocks)
}

/// `V ρ V†` as a full-space state.
pub fn embed_state(state: &SuperspinState, part: &SuperspinPartition) -> Result<SuperspinState> {
    if state.basis().sizes() != part.sizes() {
        return Err(Error::DimensionMismatch {
            expected: part.hilbert_dim(),
            found: state.basis().dim(),
        });
    }
    let (full, vblocks) = manifold_blocks(part);
    let mut out = SuperspinState::zeros(full);
    let one = C64::new(1.0, 0.0);
    for (m, vm) in vblocks.iter().enumerate() {
        let mut x = DMatrix::zeros(vm.nrows(), vm.ncols());
        vm.mul_dense_acc(one, state.block(m), &mut x);
        vm.dense_mul_adjoint_acc(one, &x, out.block_mut(m));
    }
    Ok(out)
}

/// `V† ρ V` for a full-space state supported on the maximal-Casimir sector
/// of `part`. Weight outside the sector above `tol` is an
/// [`Error::UnsupportedSector`].
pub fn restrict(
    full: &SuperspinState,
    part: &SuperspinPartition,
    tol: f64,
) -> Result<SuperspinState> {
    if full.basis().sizes() != vec![1; part.n_sites()].as_slice() {
        return Err(Error::DimensionMismatch {
            expected: 1 << part.n_sites(),
            found: full.basis().dim(),
        });
    }
    let (_, vblocks) = manifold_blocks(part);
    let mut out = SuperspinState::zeros(std::sync::Arc::new(ProductBasis::for_partition(part)));
    let one = C64::new(1.0, 0.0);
    for (m, vm) in vblocks.iter().enumerate() {
        let vt = vm.adjoint();
        let mut x = DMatrix::zeros(vt.nrows(), vt.ncols());
        vt.mul_dense_acc(one, full.block(m), &mut x);
        vt.dense_mul_adjoint_acc(one, &x, out.block_mut(m));
    }
    let lost = full.trace() - out.trace();
    if lost > tol {
        return Err(Error::UnsupportedSector(format!(
            "state has weight {lost:e} outside the maximal-Casimir sector of the {}-superspin partition",
            part.n_superspins()
        )));
    }
    Ok(out)
}
