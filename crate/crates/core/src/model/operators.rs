use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::basis::ProductBasis;
use super::partition::SuperspinPartition;
use crate::sparse::Csr;

/// Name of a collective operator in the superspin product basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpLabel {
    Raise(usize),
    Lower(usize),
    Zed(usize),
    Sz,
    Sx,
    Sy,
    S2,
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpLabel::Raise(a) => write!(f, "J{}+", a + 1),
            OpLabel::Lower(a) => write!(f, "J{}-", a + 1),
            OpLabel::Zed(a) => write!(f, "J{}z", a + 1),
            OpLabel::Sz => f.write_str("Sz"),
            OpLabel::Sx => f.write_str("Sx"),
            OpLabel::Sy => f.write_str("Sy"),
            OpLabel::S2 => f.write_str("S2"),
        }
    }
}

/// Ladder and total-spin operators of every superspin.
#[derive(Clone, Debug)]
pub struct CollectiveOps {
    basis: Arc<ProductBasis>,
    raising: Vec<Csr>,
    lowering: Vec<Csr>,
    zed: Vec<Csr>,
    s_z: Csr,
    s_x: Csr,
    s_y: Csr,
    s_squared: Csr,
}

/// `J_{a-}` on the product basis: `|k_a⟩ → √(k_a (n_a - k_a + 1)) |k_a - 1⟩`.
pub fn lowering_operator(basis: &ProductBasis, a: usize) -> Csr {
    let n = basis.sizes()[a];
    let stride = basis.stride(a);
    let entries = (0..basis.dim()).filter_map(|idx| {
        let k = basis.occupation(idx, a);
        (k > 0).then(|| {
            (
                idx - stride,
                idx,
                C64::new(((k * (n - k + 1)) as f64).sqrt(), 0.0),
            )
        })
    });
    Csr::from_triplets(basis.dim(), basis.dim(), entries.collect::<Vec<_>>())
}

pub fn zed_operator(basis: &ProductBasis, a: usize) -> Csr {
    let half = basis.sizes()[a] as f64 / 2.0;
    let diag: Vec<C64> = (0..basis.dim())
        .map(|idx| C64::new(basis.occupation(idx, a) as f64 - half, 0.0))
        .collect();
    Csr::from_diagonal(&diag)
}

pub fn build_collective_ops(part: &SuperspinPartition) -> CollectiveOps {
    CollectiveOps::new(Arc::new(ProductBasis::for_partition(part)))
}

impl CollectiveOps {
    pub fn new(basis: Arc<ProductBasis>) -> Self {
        let p = basis.sizes().len();
        let d = basis.dim();
        let lowering: Vec<Csr> = (0..p).map(|a| lowering_operator(&basis, a)).collect();
        let raising: Vec<Csr> = lowering.iter().map(Csr::adjoint).collect();
        let zed: Vec<Csr> = (0..p).map(|a| zed_operator(&basis, a)).collect();
        let one = C64::new(1.0, 0.0);
        let sum = |ops: &[Csr]| Csr::linear_combination(d, d, ops.iter().map(|o| (one, o)));
        let s_plus = sum(&raising);
        let s_minus = sum(&lowering);
        let s_z = sum(&zed);
        let s_x = Csr::linear_combination(
            d,
            d,
            [
                (C64::new(0.5, 0.0), &s_plus),
                (C64::new(0.5, 0.0), &s_minus),
            ],
        );
        let s_y = Csr::linear_combination(
            d,
            d,
            [
                (C64::new(0.0, -0.5), &s_plus),
                (C64::new(0.0, 0.5), &s_minus),
            ],
        );
        let s_squared = s_x.mul(&s_x).add(&s_y.mul(&s_y)).add(&s_z.mul(&s_z));
        Self {
            basis,
            raising,
            lowering,
            zed,
            s_z,
            s_x,
            s_y,
            s_squared,
        }
    }

    pub fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    pub fn n_superspins(&self) -> usize {
        self.lowering.len()
    }

    pub fn get(&self, label: OpLabel) -> &Csr {
        match label {
            OpLabel::Raise(a) => &self.raising[a],
            OpLabel::Lower(a) => &self.lowering[a],
            OpLabel::Zed(a) => &self.zed[a],
            OpLabel::Sz => &self.s_z,
            OpLabel::Sx => &self.s_x,
            OpLabel::Sy => &self.s_y,
            OpLabel::S2 => &self.s_squared,
        }
    }

    pub fn raising(&self, a: usize) -> &Csr {
        &self.raising[a]
    }

    pub fn lowering(&self, a: usize) -> &Csr {
        &self.lowering[a]
    }

    pub fn zed(&self, a: usize) -> &Csr {
        &self.zed[a]
    }

    /// Single-superspin Casimir `J_az² + (J_a+ J_a- + J_a- J_a+)/2`.
    pub fn casimir(&self, a: usize) -> Csr {
        let (up, down, z) = (&self.raising[a], &self.lowering[a], &self.zed[a]);
        let half = C64::new(0.5, 0.0);
        let one = C64::new(1.0, 0.0);
        let d = self.basis.dim();
        let (zz, ud, du) = (z.mul(z), up.mul(down), down.mul(up));
        Csr::linear_combination(d, d, [(one, &zz), (half, &ud), (half, &du)])
    }
}
