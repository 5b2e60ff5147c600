use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::basis::ProductBasis;
use super::coupling::CouplingModel;
use super::operators::lowering_operator;
use super::partition::SuperspinPartition;
use super::state::SuperspinState;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::sparse::{Csr, RealCsr};

/// One decay channel `Γ_μ` with jump operator `O_μ = Σ_b v_b J_{b-}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub rate: f64,
    pub coeffs: Vec<f64>,
}

/// Superspin dissipator
/// `L[ρ] = Σ_ab (Γ̃^{ab}/2)(2 J_{b-} ρ J_{a+} - {J_{a+} J_{b-}, ρ})`.
///
/// Two evaluation routes are kept: [`Lindbladian::apply_dense`] follows the
/// double sum literally on a dense `D×D` matrix, while
/// [`Lindbladian::apply`] works manifold by manifold through the eigen-channels
/// of `Γ̃`, which is what time integration uses.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    basis: Arc<ProductBasis>,
    reduced: DMatrix<f64>,
    lowering: Vec<Csr>,
    decay: Csr,
    channels: Vec<Channel>,
    jump_blocks: Vec<Vec<Csr>>,
    decay_blocks: Vec<Csr>,
    real_jumps: Vec<Vec<RealCsr>>,
    real_decay: Vec<RealCsr>,
    coherent: Option<Coherent>,
}

/// `H = Σ_ab J^{ab} J_{a+} J_{b-}`, stored whole and per manifold.
#[derive(Clone, Debug)]
struct Coherent {
    couplings: DMatrix<f64>,
    full: Csr,
    blocks: Vec<RealCsr>,
}

pub fn build_lindbladian(
    part: &SuperspinPartition,
    coupling: &CouplingModel,
) -> Result<Lindbladian> {
    if coupling.n_sites() != part.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: part.n_sites(),
            found: coupling.n_sites(),
        });
    }
    if coupling.spacing() != part.spacing() {
        return Err(Error::Precondition(format!(
            "coupling spacing {} differs from partition spacing {}",
            coupling.spacing(),
            part.spacing()
        )));
    }
    Lindbladian::new(
        Arc::new(ProductBasis::for_partition(part)),
        coupling.reduced()?.clone(),
    )
}

impl Lindbladian {
    pub fn new(basis: Arc<ProductBasis>, reduced: DMatrix<f64>) -> Result<Self> {
        let p = basis.sizes().len();
        if reduced.shape() != (p, p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: reduced.nrows(),
            });
        }
        let d = basis.dim();
        let lowering: Vec<Csr> = (0..p).map(|a| lowering_operator(&basis, a)).collect();
        let raising: Vec<Csr> = lowering.iter().map(Csr::adjoint).collect();

        let mut decay_terms = Vec::new();
        for a in 0..p {
            for b in 0..p {
                if reduced[(a, b)] != 0.0 {
                    decay_terms
                        .push((C64::new(reduced[(a, b)], 0.0), raising[a].mul(&lowering[b])));
                }
            }
        }
        let decay = Csr::linear_combination(d, d, decay_terms.iter().map(|(c, m)| (*c, m)));

        let (vals, vecs) = symmetric_eigen(&reduced);
        let scale = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let channels: Vec<Channel> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v.abs() > 1e-13 * scale.max(f64::MIN_POSITIVE))
            .map(|(mu, &rate)| Channel {
                rate,
                coeffs: vecs.column(mu).iter().copied().collect(),
            })
            .collect();

        let n_total = basis.n_sites();
        let jump_blocks: Vec<Vec<Csr>> = channels
            .iter()
            .map(|ch| {
                let op = Csr::linear_combination(
                    d,
                    d,
                    ch.coeffs
                        .iter()
                        .zip(&lowering)
                        .map(|(&c, l)| (C64::new(c, 0.0), l)),
                );
                (0..=n_total)
                    .map(|m| {
                        if m == 0 {
                            Csr::zeros(0, basis.manifold(0).len())
                        } else {
                            op.submatrix(basis.manifold(m - 1), basis.manifold(m))
                        }
                    })
                    .collect()
            })
            .collect();
        let decay_blocks: Vec<Csr> = (0..=n_total)
            .map(|m| decay.submatrix(basis.manifold(m), basis.manifold(m)))
            .collect();

        let real = |a: &Csr| {
            RealCsr::from_csr(a).ok_or_else(|| Error::Internal("complex superspin operator".into()))
        };
        let real_jumps = jump_blocks
            .iter()
            .map(|bs| bs.iter().map(real).collect())
            .collect::<Result<_>>()?;
        let real_decay = decay_blocks.iter().map(real).collect::<Result<_>>()?;
        Ok(Self {
            basis,
            reduced,
            lowering,
            decay,
            channels,
            jump_blocks,
            decay_blocks,
            real_jumps,
            real_decay,
            coherent: None,
        })
    }

    /// Adds the coherent evolution `-i[H, ρ]` with `H = Σ_ab J^{ab} J_{a+} J_{b-}`
    /// for a real symmetric `J`.
    pub fn with_coherent(mut self, couplings: DMatrix<f64>) -> Result<Self> {
        let p = self.lowering.len();
        if couplings.shape() != (p, p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: couplings.nrows(),
            });
        }
        if (&couplings - couplings.transpose()).amax() > 1e-12 * couplings.amax().max(1.0) {
            return Err(Error::InvalidModel(
                "coherent coupling matrix is not symmetric".into(),
            ));
        }
        let d = self.basis.dim();
        let raising: Vec<Csr> = self.lowering.iter().map(Csr::adjoint).collect();
        let mut terms = Vec::new();
        for a in 0..p {
            for b in 0..p {
                if couplings[(a, b)] != 0.0 {
                    terms.push((
                        C64::new(couplings[(a, b)], 0.0),
                        raising[a].mul(&self.lowering[b]),
                    ));
                }
            }
        }
        let full = Csr::linear_combination(d, d, terms.iter().map(|(c, m)| (*c, m)));
        let blocks = (0..=self.basis.n_sites())
            .map(|m| {
                let sub = full.submatrix(self.basis.manifold(m), self.basis.manifold(m));
                RealCsr::from_csr(&sub)
                    .ok_or_else(|| Error::Internal("complex Hamiltonian block".into()))
            })
            .collect::<Result<_>>()?;
        self.coherent = Some(Coherent {
            couplings,
            full,
            blocks,
        });
        Ok(self)
    }

    /// The coherent coupling matrix, if a Hamiltonian is present.
    pub fn coherent(&self) -> Option<&DMatrix<f64>> {
        self.coherent.as_ref().map(|c| &c.couplings)
    }

    /// `H` on the full product basis, if present.
    pub fn hamiltonian(&self) -> Option<&Csr> {
        self.coherent.as_ref().map(|c| &c.full)
    }

    pub fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    pub fn reduced(&self) -> &DMatrix<f64> {
        &self.reduced
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// `K = Σ_ab Γ̃^{ab} J_{a+} J_{b-}` on the full product basis.
    pub fn decay_operator(&self) -> &Csr {
        &self.decay
    }

    /// Diagonal block of `K` on manifold `m`.
    pub fn decay_block(&self, m: usize) -> &Csr {
        &self.decay_blocks[m]
    }

    /// `O_μ` restricted to manifold `m → m - 1`.
    pub fn jump_block(&self, channel: usize, m: usize) -> &Csr {
        &self.jump_blocks[channel][m]
    }

    /// Literal double-sum evaluation on a dense `D×D` matrix.
    pub fn apply_dense(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let d = self.basis.dim();
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        let p = self.lowering.len();
        let mut out = DMatrix::zeros(d, d);
        let mut tmp = DMatrix::zeros(d, d);
        for b in 0..p {
            tmp.fill(C64::new(0.0, 0.0));
            self.lowering[b].mul_dense_acc(C64::new(1.0, 0.0), rho, &mut tmp);
            for a in 0..p {
                let g = self.reduced[(a, b)];
                if g != 0.0 {
                    // J_{b-} ρ J_{a+} = (J_{b-} ρ)(J_{a-})†
                    self.lowering[a].dense_mul_adjoint_acc(C64::new(g, 0.0), &tmp, &mut out);
                }
            }
        }
        let half = C64::new(-0.5, 0.0);
        self.decay.mul_dense_acc(half, rho, &mut out);
        // ρ K = (K† ρ†)† and K is Hermitian
        let mut right = DMatrix::zeros(d, d);
        self.decay.mul_dense_acc(half, &rho.adjoint(), &mut right);
        out += right.adjoint();
        if let Some(h) = &self.coherent {
            // -i[H, ρ] = -iHρ + (-iHρ)†
            let mut hr = DMatrix::zeros(d, d);
            h.full.mul_dense_acc(C64::new(0.0, -1.0), rho, &mut hr);
            out += &hr + hr.adjoint();
        }
        Ok(out)
    }

    /// `out = L[ρ]` on manifold blocks. Assumes `ρ` Hermitian.
    pub fn apply(&self, rho: &SuperspinState, out: &mut SuperspinState) -> Result<()> {
        for state in [rho, &*out] {
            if state.basis().sizes() != self.basis.sizes() {
                return Err(Error::DimensionMismatch {
                    expected: self.basis.dim(),
                    found: state.basis().dim(),
                });
            }
        }
        self.apply_blocks(rho.blocks(), out.blocks_mut());
        Ok(())
    }

    pub(crate) fn apply_blocks(&self, rho: &[DMatrix<C64>], out: &mut [DMatrix<C64>]) {
        let top = rho.len() - 1;
        let mut scratch = Vec::new();
        let zero = C64::new(0.0, 0.0);
        for m in 0..=top {
            let dm = rho[m].nrows();
            let o = out[m].as_mut_slice();
            // K and H are real symmetric and ρ Hermitian, so with P = ρK and
            // Q = ρH the generator's no-jump part is
            // -(P + P†)/2 + i(Q - Q†).
            o.fill(zero);
            self.real_decay[m].dense_mul_transpose_acc(1.0, rho[m].as_slice(), dm, o);
            match &self.coherent {
                None => {
                    for j in 0..dm {
                        o[j * dm + j] = C64::new(-o[j * dm + j].re, 0.0);
                        for i in j + 1..dm {
                            let v = -0.5 * (o[j * dm + i] + o[i * dm + j].conj());
                            o[j * dm + i] = v;
                            o[i * dm + j] = v.conj();
                        }
                    }
                }
                Some(h) => {
                    scratch.clear();
                    scratch.resize(dm * dm, zero);
                    h.blocks[m].dense_mul_transpose_acc(1.0, rho[m].as_slice(), dm, &mut scratch);
                    let q = &scratch;
                    let i_unit = C64::new(0.0, 1.0);
                    for j in 0..dm {
                        let (jj, qjj) = (o[j * dm + j], q[j * dm + j]);
                        o[j * dm + j] = C64::new(-jj.re, 0.0) + i_unit * (qjj - qjj.conj());
                        for i in j + 1..dm {
                            let (a, b) = (j * dm + i, i * dm + j);
                            let v = -0.5 * (o[a] + o[b].conj()) + i_unit * (q[a] - q[b].conj());
                            o[a] = v;
                            o[b] = v.conj();
                        }
                    }
                }
            }
            if m < top {
                let src = &rho[m + 1];
                let dn = src.nrows();
                scratch.clear();
                scratch.resize(dm * dn, zero);
                for (ch, blocks) in self.channels.iter().zip(&self.real_jumps) {
                    let op = &blocks[m + 1];
                    op.mul_dense_into(src.as_slice(), dn, &mut scratch);
                    op.dense_mul_transpose_acc(ch.rate, &scratch, dm, o);
                }
            }
        }
    }
}
