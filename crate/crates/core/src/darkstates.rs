//! Dark states: exact nullspace construction at `kd = 2π/3`, symmetric
//! Dicke states in the superspin basis, and Dicke-state decay bounds.

use std::sync::Arc;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::observables::squeezing_from;
use crate::linalg::nullspace;
use crate::model::{
    lowering_operator, CollectiveOps, Lindbladian, OpLabel, ProductBasis, Spacing,
    SuperspinPartition,
};
use crate::sparse::Csr;

/// Relative singular-value cutoff of the nullspace searches.
pub const NULLSPACE_TOL: f64 = 1e-10;

/// `C(n, k)` in floating point.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn require_two_thirds(part: &SuperspinPartition) -> Result<()> {
    let sp = part.spacing();
    if sp.p() != 3 || !sp.n().is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "symmetric dark-state construction needs kd = 2π/3 (p = 3, even n), got kd = {sp}π"
        )));
    }
    if !part.n_sites().is_multiple_of(3) {
        return Err(Error::Precondition(format!(
            "symmetric dark-state construction needs N divisible by 3, got N = {}",
            part.n_sites()
        )));
    }
    Ok(())
}

/// The two decay channels at `kd = 2π/3`, both with rate `3γ/2`:
/// `O_+ = (−J_{1-} + 2J_{2-} − J_{3-})/√6` and `O_- = (J_{1-} − J_{3-})/√2`.
pub fn symmetric_jump_ops(part: &SuperspinPartition) -> Result<(Csr, Csr)> {
    require_two_thirds(part)?;
    let basis = ProductBasis::for_partition(part);
    let j: Vec<Csr> = (0..3).map(|a| lowering_operator(&basis, a)).collect();
    let d = basis.dim();
    let r = |x: f64| C64::new(x, 0.0);
    let s6 = (1.0_f64 / 6.0).sqrt();
    let s2 = 0.5_f64.sqrt();
    let plus = Csr::linear_combination(
        d,
        d,
        [(r(-s6), &j[0]), (r(2.0 * s6), &j[1]), (r(-s6), &j[2])],
    );
    let minus = Csr::linear_combination(d, d, [(r(s2), &j[0]), (r(-s2), &j[2])]);
    Ok((plus, minus))
}

/// Exchange-symmetric vectors `P(|n1,n2,n3⟩)`, `n1 ≥ n2 ≥ n3`, of one
/// excitation manifold.
#[derive(Clone, Debug)]
pub struct SymmetricBasis {
    pub m: usize,
    pub multisets: Vec<[usize; 3]>,
    /// Columns are the symmetrized vectors in manifold-local coordinates.
    pub vectors: DMatrix<C64>,
}

impl SymmetricBasis {
    pub fn new(basis: &ProductBasis, m: usize) -> Result<Self> {
        let sizes = basis.sizes();
        if sizes.len() != 3 || sizes.iter().any(|&s| s != sizes[0]) {
            return Err(Error::Precondition(
                "symmetric basis needs three superspins of equal size".into(),
            ));
        }
        if m > basis.n_sites() {
            return Err(Error::Precondition(format!(
                "manifold {m} exceeds N = {}",
                basis.n_sites()
            )));
        }
        let cap = sizes[0];
        let manifold = basis.manifold(m);
        let local = |idx: usize| {
            manifold
                .iter()
                .position(|&x| x == idx)
                .expect("index lies in its manifold")
        };
        let mut multisets = Vec::new();
        for n1 in (0..=cap.min(m)).rev() {
            for n2 in (0..=n1.min(m - n1)).rev() {
                let n3 = m - n1 - n2;
                if n3 <= n2 {
                    multisets.push([n1, n2, n3]);
                }
            }
        }
        let mut vectors = DMatrix::zeros(manifold.len(), multisets.len());
        for (c, ms) in multisets.iter().enumerate() {
            let perms: Vec<Vec<usize>> = ms.iter().copied().permutations(3).unique().collect();
            let amp = C64::new(1.0 / (perms.len() as f64).sqrt(), 0.0);
            for p in perms {
                vectors[(local(basis.index(&p)), c)] = amp;
            }
        }
        Ok(Self {
            m,
            multisets,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.multisets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multisets.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DarkStateReport {
    pub m: usize,
    /// Amplitudes in the full superspin product basis.
    #[serde(serialize_with = "serialize_amplitudes")]
    pub vector: DVector<C64>,
    /// `max(‖O_+ψ‖, ‖O_-ψ‖)`.
    pub residual: f64,
    /// `⟨ψ|Σ Γ̃^{ab} J_{a+}J_{b-}|ψ⟩` in units of `γ`.
    pub emission_rate: f64,
    pub fidelity_vs_dicke: f64,
    /// `None` where the transverse spin vanishes.
    pub xi_d: Option<f64>,
}

fn serialize_amplitudes<S: serde::Serializer>(
    v: &DVector<C64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v.iter() {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

/// Fixes the global phase so the amplitude on the lexicographically largest
/// occupation tuple with nonzero weight is real and positive.
fn fix_phase(basis: &ProductBasis, v: &mut DVector<C64>) {
    let anchor = (0..v.len())
        .filter(|&i| v[i].norm() > 1e-12)
        .max_by(|&a, &b| basis.occupations(a).cmp(&basis.occupations(b)));
    if let Some(i) = anchor {
        let phase = v[i] / v[i].norm();
        *v /= phase;
    }
}

fn embed_manifold(basis: &ProductBasis, m: usize, local: &DVector<C64>) -> DVector<C64> {
    let mut v = DVector::zeros(basis.dim());
    for (k, &idx) in basis.manifold(m).iter().enumerate() {
        v[idx] = local[k];
    }
    v
}

/// `ξ_D` of a pure state.
fn pure_squeezing(ops: &CollectiveOps, psi: &DVector<C64>) -> Option<f64> {
    let sz = ops.get(OpLabel::Sz).expectation(psi).re;
    let sz2 = ops.get(OpLabel::Sz).matvec(psi).norm_squared();
    let s2 = ops.get(OpLabel::S2).expectation(psi).re;
    squeezing_from(ops.basis().n_sites(), sz2 - sz * sz, s2 - sz2)
        .ok()
        .map(|q| q.xi)
}

/// Joint nullspace of `O_±` within the exchange-symmetric part of manifold
/// `m` at `kd = 2π/3`.
pub fn find_dark_states(part: &SuperspinPartition, m: usize) -> Result<Vec<DarkStateReport>> {
    require_two_thirds(part)?;
    let n = part.n_sites();
    if m > n {
        return Err(Error::Precondition(format!("manifold {m} exceeds N = {n}")));
    }
    let basis = Arc::new(ProductBasis::for_partition(part));
    let sym = SymmetricBasis::new(&basis, m)?;
    let (plus, minus) = symmetric_jump_ops(part)?;
    let ops = CollectiveOps::new(basis.clone());
    let decay = decay_operator_two_thirds(&ops);
    let vectors: Vec<DVector<C64>> = if m == 0 {
        vec![DVector::from_element(1, C64::new(1.0, 0.0))]
    } else {
        let rows = basis.manifold(m - 1);
        let cols = basis.manifold(m);
        let stacked = {
            let a = plus.submatrix(rows, cols).to_dense() * &sym.vectors;
            let b = minus.submatrix(rows, cols).to_dense() * &sym.vectors;
            let mut s = DMatrix::zeros(a.nrows() + b.nrows(), sym.len());
            s.rows_mut(0, a.nrows()).copy_from(&a);
            s.rows_mut(a.nrows(), b.nrows()).copy_from(&b);
            s
        };
        nullspace(&stacked, NULLSPACE_TOL)
            .into_iter()
            .map(|x| &sym.vectors * x)
            .collect()
    };
    let dicke = dicke_state(part, m)?;
    vectors
        .into_iter()
        .map(|local| {
            let mut v = embed_manifold(&basis, m, &local);
            fix_phase(&basis, &mut v);
            let residual = plus.matvec(&v).norm().max(minus.matvec(&v).norm());
            Ok(DarkStateReport {
                m,
                residual,
                emission_rate: decay.expectation(&v).re,
                fidelity_vs_dicke: dicke.dotc(&v).norm_sqr(),
                xi_d: pure_squeezing(&ops, &v),
                vector: v,
            })
        })
        .collect()
}

/// `Σ_ab Γ̃^{ab} J_{a+}J_{b-}` with `Γ̃` of `kd = 2π/3` and `γ = 1`.
fn decay_operator_two_thirds(ops: &CollectiveOps) -> Csr {
    let d = ops.basis().dim();
    let mut terms = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let g = if a == b { 1.0 } else { -0.5 };
            terms.push((C64::new(g, 0.0), ops.raising(a).mul(ops.lowering(b))));
        }
    }
    Csr::linear_combination(d, d, terms.iter().map(|(c, m)| (*c, m)))
}

/// Nullspace of every decay channel of `lind` within manifold `m`, without
/// any symmetry restriction. Vectors are in the full product basis.
pub fn general_dark_states(lind: &Lindbladian, m: usize) -> Result<Vec<DVector<C64>>> {
    let basis = lind.basis();
    if m > basis.n_sites() {
        return Err(Error::Precondition(format!(
            "manifold {m} exceeds N = {}",
            basis.n_sites()
        )));
    }
    let dm = basis.manifold(m).len();
    if m == 0 {
        return Ok(vec![embed_manifold(
            basis,
            0,
            &DVector::from_element(1, C64::new(1.0, 0.0)),
        )]);
    }
    let blocks: Vec<DMatrix<C64>> = (0..lind.channels().len())
        .map(|ch| {
            lind.jump_block(ch, m).to_dense() * C64::new(lind.channels()[ch].rate.sqrt(), 0.0)
        })
        .collect();
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::zeros(total, dm);
    let mut row = 0;
    for b in &blocks {
        stacked.rows_mut(row, b.nrows()).copy_from(b);
        row += b.nrows();
    }
    let null = if total == 0 {
        (0..dm)
            .map(|i| DVector::from_fn(dm, |k, _| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0)))
            .collect()
    } else {
        nullspace(&stacked, NULLSPACE_TOL)
    };
    Ok(null
        .into_iter()
        .map(|x| {
            let mut v = embed_manifold(basis, m, &x);
            fix_phase(basis, &mut v);
            v
        })
        .collect())
}

/// Symmetric `m`-excitation Dicke state in the superspin product basis,
/// `√(Π_a C(n_a, k_a) / C(N, m))` on every `|k_1, …, k_p⟩` with `Σ k_a = m`.
pub fn dicke_state(part: &SuperspinPartition, m: usize) -> Result<DVector<C64>> {
    let n = part.n_sites();
    if m > n {
        return Err(Error::Precondition(format!(
            "Dicke state with m = {m} > N = {n}"
        )));
    }
    let basis = ProductBasis::for_partition(part);
    let norm = binomial(n, m);
    let mut v = DVector::zeros(basis.dim());
    for &idx in basis.manifold(m) {
        let w: f64 = basis
            .occupations(idx)
            .iter()
            .zip(part.sizes())
            .map(|(&k, &na)| binomial(na, k))
            .product();
        v[idx] = C64::new((w / norm).sqrt(), 0.0);
    }
    Ok(v)
}

/// `|⟨ψ|D_m⟩|²`.
pub fn fidelity_vs_dicke(psi: &DVector<C64>, part: &SuperspinPartition, m: usize) -> Result<f64> {
    let dicke = dicke_state(part, m)?;
    if psi.len() != dicke.len() {
        return Err(Error::DimensionMismatch {
            expected: dicke.len(),
            found: psi.len(),
        });
    }
    Ok(dicke.dotc(psi).norm_sqr())
}

/// Closed-form fidelity of the two-excitation dark state with the Dicke
/// state, `1/(1 + 1/(9j(2j−1)))` with `j = N/6`.
pub fn two_excitation_fidelity(n_sites: usize) -> f64 {
    let j = n_sites as f64 / 6.0;
    1.0 / (1.0 + 1.0 / (9.0 * j * (2.0 * j - 1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayBound {
    pub n_sites: usize,
    pub m: usize,
    /// `‖O_L|D_m⟩‖²` from the subset sum over sites, units of `γ`.
    pub rate_left: f64,
    pub rate_right: f64,
    /// The same left rate evaluated with superspin operators.
    pub rate_left_superspin: f64,
    /// `(m−1)² m / (N(N−m+1))`.
    pub bound: f64,
}

impl DecayBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.rate_left <= self.bound + tol && self.rate_right <= self.bound + tol
    }
}

/// Directional emission rates of the `m`-excitation Dicke state and the
/// bound they obey when `nN/p` is an even integer.
pub fn dicke_decay_bound_check(n_sites: usize, m: usize, spacing: Spacing) -> Result<DecayBound> {
    let (n, p) = (spacing.n() as usize, spacing.p() as usize);
    if !(n * n_sites).is_multiple_of(p) || !(n * n_sites / p).is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "decay bound needs nN/p to be an even integer; got n = {n}, N = {n_sites}, p = {p}"
        )));
    }
    if m == 0 || m > n_sites {
        return Err(Error::Precondition(format!(
            "decay bound needs 1 <= m <= N, got m = {m}"
        )));
    }
    let kd = spacing.kd();
    let phase: Vec<C64> = (1..=n_sites)
        .map(|q| C64::from_polar(1.0, kd * q as f64))
        .collect();
    let total: C64 = phase.iter().sum();
    let mut left = 0.0;
    let mut right = 0.0;
    for subset in (0..n_sites).combinations(m - 1) {
        let inside: C64 = subset.iter().map(|&q| phase[q]).sum();
        let s = total - inside;
        left += s.norm_sqr();
        right += s.conj().norm_sqr();
    }
    let norm = n_sites as f64 * binomial(n_sites, m);
    let part = crate::model::build_partition(n_sites, spacing)?;
    let basis = ProductBasis::for_partition(&part);
    // Σ_l e^{ikd(a+lp)} σ_-^{a+lp} = e^{ikd(a+1)} J_{a-} with 1-based sites
    let lowers: Vec<Csr> = (0..p).map(|a| lowering_operator(&basis, a)).collect();
    let o_left = Csr::linear_combination(
        basis.dim(),
        basis.dim(),
        (0..p).map(|a| (phase[a], &lowers[a])),
    );
    let dicke = dicke_state(&part, m)?;
    let rate_left_superspin = o_left.matvec(&dicke).norm_squared() / n_sites as f64;
    let mf = m as f64;
    let nf = n_sites as f64;
    Ok(DecayBound {
        n_sites,
        m,
        rate_left: left / norm,
        rate_right: right / norm,
        rate_left_superspin,
        bound: (mf - 1.0).powi(2) * mf / (nf * (nf - mf + 1.0)),
    })
}
