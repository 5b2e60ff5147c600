//! Closure of the Lie algebra generated by collective jump operators.
//!
//! Every operator reachable from collective lowering operators by commutation
//! is a sitewise sum `Σ_j c_j σ^j` with `σ ∈ {σ_-, σ_+, σ_z}`, so the algebra is
//! tracked through two coefficient subspaces of `C^N`:
//!
//! * `[A†, B] = Σ_j a_j* b_j σ_z^j` maps two lowering vectors to a zed vector;
//! * `[Z, B] = -2 Σ_j d_j b_j σ_-^j` maps a zed and a lowering vector to a
//!   lowering vector.
//!
//! Raising operators mirror the lowering space, so the algebra dimension is
//! `2·dim L + dim Z`. For `kd = nπ/p` the zed space is spanned by the
//! indicator vectors of the `p` residue classes, which is how the superspin
//! partition is read back from the closure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Relative rank tolerance of the subspace arithmetic.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpClass {
    Lowering,
    Raising,
    Zed,
}

/// `Σ_j c_j σ^j` with `σ` fixed by the class.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteOperator {
    class: OpClass,
    coeffs: DVector<C64>,
}

impl SiteOperator {
    pub fn new(class: OpClass, coeffs: DVector<C64>) -> Result<Self> {
        if coeffs.iter().all(|c| *c == C64::new(0.0, 0.0)) {
            return Err(Error::Precondition(
                "site operator with all coefficients zero".into(),
            ));
        }
        Ok(Self { class, coeffs })
    }

    pub fn class(&self) -> OpClass {
        self.class
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn n_sites(&self) -> usize {
        self.coeffs.len()
    }

    /// Hermitian conjugate: lowering and raising swap with conjugated
    /// coefficients, zed operators conjugate in place.
    pub fn adjoint(&self) -> Self {
        let class = match self.class {
            OpClass::Lowering => OpClass::Raising,
            OpClass::Raising => OpClass::Lowering,
            OpClass::Zed => OpClass::Zed,
        };
        Self {
            class,
            coeffs: self.coeffs.conjugate(),
        }
    }
}

/// Left and right propagating emission operators with coefficients
/// `e^{±ikd·j}/√N` on site `j = 1..N`.
pub fn directional_ops(n_sites: usize, kd: f64) -> Result<(SiteOperator, SiteOperator)> {
    if n_sites == 0 {
        return Err(Error::Precondition(
            "directional operators need N >= 1".into(),
        ));
    }
    let norm = 1.0 / (n_sites as f64).sqrt();
    let make = |sign: f64| {
        DVector::from_fn(n_sites, |j, _| {
            C64::from_polar(norm, sign * kd * (j + 1) as f64)
        })
    };
    Ok((
        SiteOperator::new(OpClass::Lowering, make(1.0))?,
        SiteOperator::new(OpClass::Lowering, make(-1.0))?,
    ))
}

/// Lowering operators `Σ_j v_j σ_-^j` along the eigenvectors of a dissipative
/// matrix whose eigenvalues exceed `tol` times the largest one.
pub fn jump_generators(gamma: &DMatrix<f64>, tol: f64) -> Result<Vec<SiteOperator>> {
    let (vals, vecs) = symmetric_eigen(gamma);
    let top = vals.first().copied().unwrap_or(0.0).abs();
    vals.iter()
        .enumerate()
        .filter(|(_, &v)| v > tol * top)
        .map(|(k, _)| {
            SiteOperator::new(OpClass::Lowering, vecs.column(k).map(|x| C64::new(x, 0.0)))
        })
        .collect()
}

/// Default cutoff `3⌈N/2⌉ + 3`.
pub fn default_max_dim(n_sites: usize) -> usize {
    3 * n_sites.div_ceil(2) + 3
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub closed: bool,
    /// `2·dim L + dim Z`; a lower bound when the run was cut off.
    pub dimension: usize,
    pub lowering_basis: Vec<DVector<C64>>,
    pub zed_basis: Vec<DVector<C64>>,
    pub iterations: usize,
    pub n_sites: usize,
}

impl ClosureResult {
    /// Whether both coefficient subspaces coincide with those of `other`,
    /// compared through their orthogonal projectors.
    pub fn same_subspaces(&self, other: &ClosureResult, tol: f64) -> bool {
        let proj = |basis: &[DVector<C64>], n: usize| {
            basis
                .iter()
                .fold(DMatrix::<C64>::zeros(n, n), |acc, v| acc + v * v.adjoint())
        };
        let n = self.n_sites;
        n == other.n_sites
            && (proj(&self.lowering_basis, n) - proj(&other.lowering_basis, n)).norm() < tol
            && (proj(&self.zed_basis, n) - proj(&other.zed_basis, n)).norm() < tol
    }
}

/// Orthonormal basis grown by modified Gram–Schmidt with one
/// re-orthogonalization pass.
#[derive(Default)]
struct Subspace {
    basis: Vec<DVector<C64>>,
}

impl Subspace {
    /// Adds the component of `v` outside the span, returning whether the
    /// dimension grew.
    fn insert(&mut self, v: &DVector<C64>) -> bool {
        // Products of unit coefficient vectors are at most unit norm, so a
        // tiny raw norm is roundoff of an exact zero.
        let scale = v.norm();
        if scale <= RANK_TOL {
            return false;
        }
        let mut w = v / C64::new(scale, 0.0);
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.dotc(&w);
                w.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
        let r = w.norm();
        if r <= RANK_TOL {
            return false;
        }
        self.basis.push(w / C64::new(r, 0.0));
        true
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Grows the lowering and zed coefficient spaces until both are invariant
/// under the two commutation rules, or until `2·dim L + dim Z` exceeds
/// `max_dim`.
pub fn close_algebra(generators: &[SiteOperator], max_dim: usize) -> Result<ClosureResult> {
    let Some(first) = generators.first() else {
        return Err(Error::Precondition(
            "close_algebra needs at least one generator".into(),
        ));
    };
    if max_dim < 3 {
        return Err(Error::Precondition(format!(
            "max_dim must be at least 3, got {max_dim}"
        )));
    }
    let n = first.n_sites();
    if let Some(g) = generators.iter().find(|g| g.n_sites() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.n_sites(),
        });
    }
    let mut lower = Subspace::default();
    let mut zed = Subspace::default();
    for g in generators {
        match g.class {
            OpClass::Lowering => lower.insert(&g.coeffs),
            OpClass::Raising => lower.insert(&g.coeffs.conjugate()),
            OpClass::Zed => zed.insert(&g.coeffs),
        };
    }
    let dimension = |l: &Subspace, z: &Subspace| 2 * l.dim() + z.dim();
    let mut iterations = 0;
    let mut closed = false;
    while dimension(&lower, &zed) <= max_dim {
        iterations += 1;
        let mut grew = false;
        let lb = lower.basis.clone();
        'zeds: for (i, a) in lb.iter().enumerate() {
            for b in &lb[i..] {
                let prod = a.conjugate().component_mul(b);
                grew |= zed.insert(&prod);
                grew |= zed.insert(&prod.conjugate());
                if dimension(&lower, &zed) > max_dim {
                    break 'zeds;
                }
            }
        }
        let zb = zed.basis.clone();
        'lowers: for d in &zb {
            for b in &lb {
                grew |= lower.insert(&d.component_mul(b));
                if dimension(&lower, &zed) > max_dim {
                    break 'lowers;
                }
            }
        }
        if !grew {
            closed = true;
            break;
        }
    }
    Ok(ClosureResult {
        closed: closed && dimension(&lower, &zed) <= max_dim,
        dimension: dimension(&lower, &zed),
        lowering_basis: lower.basis,
        zed_basis: zed.basis,
        iterations,
        n_sites: n,
    })
}

/// Site sets and relative signs read back from a closed algebra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveredPartition {
    /// 0-based site indices of each superspin, ordered by their first site.
    pub sets: Vec<Vec<usize>>,
    /// Sign of every site relative to the first site of its superspin.
    pub signs: Vec<f64>,
}

/// Splits the sites into the supports of the primitive idempotents of the
/// zed algebra (elementwise product), then reads the sign pattern of each
/// support from the lowering space.
pub fn canonical_decomposition(closure: &ClosureResult) -> Result<RecoveredPartition> {
    if !closure.closed {
        return Err(Error::Precondition(
            "canonical decomposition needs a closed algebra".into(),
        ));
    }
    let n = closure.n_sites;
    let k = closure.zed_basis.len();
    let tol = 1e-8;
    // Two sites share an idempotent exactly when their rows in the zed basis
    // agree.
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for site in 0..n {
        let same = |other: usize| {
            closure
                .zed_basis
                .iter()
                .all(|z| (z[site] - z[other]).norm() < tol)
        };
        match sets.iter_mut().find(|s| same(s[0])) {
            Some(s) => s.push(site),
            None => sets.push(vec![site]),
        }
    }
    if sets.len() != k {
        return Err(Error::Internal(format!(
            "zed algebra of dimension {k} has {} idempotent supports; the sitewise structure is not a direct sum",
            sets.len()
        )));
    }
    let in_span = |v: &DVector<C64>, basis: &[DVector<C64>]| {
        let resid = basis.iter().fold(v.clone(), |acc, b| {
            let c = b.dotc(&acc);
            acc - b * c
        });
        resid.norm() <= tol * v.norm().max(1.0)
    };
    let indicator = |set: &[usize]| {
        let mut v = DVector::zeros(n);
        set.iter().for_each(|&s| v[s] = C64::new(1.0, 0.0));
        v
    };
    let mut signs = vec![0.0; n];
    for set in &sets {
        let e = indicator(set);
        if !in_span(&e, &closure.zed_basis) {
            return Err(Error::Internal("idempotent outside the zed span".into()));
        }
        let restricted = closure
            .lowering_basis
            .iter()
            .map(|b| b.component_mul(&e))
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .ok_or_else(|| Error::Internal("empty lowering basis".into()))?;
        if !in_span(&restricted, &closure.lowering_basis) {
            return Err(Error::Internal(
                "lowering space is not a module over the zed algebra".into(),
            ));
        }
        let anchor = restricted[set[0]];
        if anchor.norm() < tol {
            return Err(Error::Internal(format!(
                "lowering space vanishes on site {}",
                set[0]
            )));
        }
        for &s in set {
            let r = restricted[s] / anchor;
            if (r.norm() - 1.0).abs() > tol || r.im.abs() > tol {
                return Err(Error::Internal(format!(
                    "site {s} carries a non-real relative phase {r}"
                )));
            }
            signs[s] = r.re.signum();
        }
    }
    Ok(RecoveredPartition { sets, signs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn closure(n: usize, kd: f64) -> ClosureResult {
        let (l, r) = directional_ops(n, kd).unwrap();
        close_algebra(&[l, r], default_max_dim(n)).unwrap()
    }

    #[test]
    fn directional_coefficients_at_quarter_wave() {
        let (l, r) = directional_ops(4, PI / 2.0).unwrap();
        let expect = [
            C64::new(0.0, 0.5),
            C64::new(-0.5, 0.0),
            C64::new(0.0, -0.5),
            C64::new(0.5, 0.0),
        ];
        for (j, e) in expect.iter().enumerate() {
            assert!((l.coeffs()[j] - e).norm() < 1e-15);
            assert!((r.coeffs()[j] - e.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn kd_zero_is_dicke() {
        let (l, r) = directional_ops(5, 0.0).unwrap();
        assert_eq!(l, r);
        let c = close_algebra(&[l], default_max_dim(5)).unwrap();
        assert!(c.closed);
        assert_eq!(c.dimension, 3);
    }

    #[test]
    fn known_dimensions() {
        assert_eq!(closure(6, 2.0 * PI / 3.0).dimension, 9);
        assert_eq!(closure(4, PI / 2.0).dimension, 6);
        assert!(!closure(12, 1.0).closed);
    }

    #[test]
    fn quarter_wave_golden_partition() {
        let rec = canonical_decomposition(&closure(6, PI / 2.0)).unwrap();
        assert_eq!(rec.sets, vec![vec![0, 2, 4], vec![1, 3, 5]]);
        assert_eq!(rec.signs, vec![1.0, 1.0, -1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_empty_and_zero() {
        assert!(close_algebra(&[], 10).is_err());
        assert!(SiteOperator::new(OpClass::Zed, DVector::zeros(3)).is_err());
        assert!(canonical_decomposition(&closure(12, 1.0)).is_err());
    }
}
