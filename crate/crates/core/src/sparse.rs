//! Compressed-row sparse matrices over `C64`.
//!
//! Only the handful of kernels the simulators need are provided: products
//! with column-major dense matrices from either side and traces against a
//! dense operand. Every collective operator in this crate has a bounded
//! number of entries per row, so these kernels are linear in the dense size.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Csr {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    /// Builds a matrix from `(row, col, value)` entries. Duplicates are summed
    /// and exact zeros dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in entries {
            assert!(
                r < nrows && c < ncols,
                "triplet ({r}, {c}) out of bounds for {nrows}x{ncols}"
            );
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `Σ_k α_k A_k` over matrices of equal shape.
    pub fn linear_combination<'a, I>(nrows: usize, ncols: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (C64, &'a Csr)>,
    {
        let mut entries = Vec::new();
        for (alpha, m) in terms {
            assert_eq!(
                (m.nrows, m.ncols),
                (nrows, ncols),
                "shape mismatch in linear combination"
            );
            entries.extend(m.triplets().map(|(r, c, v)| (r, c, alpha * v)));
        }
        Self::from_triplets(nrows, ncols, entries)
    }

    pub fn add(&self, other: &Csr) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::linear_combination(self.nrows, self.ncols, [(one, self), (one, other)])
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &Csr) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut entries = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    entries.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, entries)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            out[(r, c)] += v;
        }
        out
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.nrows);
        self.matvec_acc(C64::new(1.0, 0.0), x.as_slice(), y.as_mut_slice());
        y
    }

    /// `y += α A x`.
    pub fn matvec_acc(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for idx in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[idx] * x[self.indices[idx]];
            }
            *yr += alpha * acc;
        }
    }

    /// `out += α A X` for a column-major dense `X`.
    pub fn mul_dense_acc(&self, alpha: C64, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        assert_eq!(x.nrows(), self.ncols);
        assert_eq!(out.nrows(), self.nrows);
        assert_eq!(out.ncols(), x.ncols());
        let (xr, orows) = (x.nrows(), self.nrows);
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for c in 0..x.ncols() {
            let xcol = &xs[c * xr..(c + 1) * xr];
            let ocol = &mut os[c * orows..(c + 1) * orows];
            self.matvec_acc(alpha, xcol, ocol);
        }
    }

    /// `out += α X A†` for a column-major dense `X`.
    pub fn dense_mul_adjoint_acc(&self, alpha: C64, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        assert_eq!(x.ncols(), self.ncols);
        assert_eq!(out.ncols(), self.nrows);
        assert_eq!(out.nrows(), x.nrows());
        let n = x.nrows();
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for r in 0..self.nrows {
            let ocol = &mut os[r * n..(r + 1) * n];
            for idx in self.indptr[r]..self.indptr[r + 1] {
                let coef = alpha * self.values[idx].conj();
                let k = self.indices[idx];
                let xcol = &xs[k * n..(k + 1) * n];
                for (o, &xv) in ocol.iter_mut().zip(xcol) {
                    *o += coef * xv;
                }
            }
        }
    }

    /// `Tr(A ρ)` for dense `ρ`.
    pub fn trace_product(&self, rho: &DMatrix<C64>) -> C64 {
        assert_eq!((rho.nrows(), rho.ncols()), (self.ncols, self.nrows));
        self.triplets().map(|(r, c, v)| v * rho[(c, r)]).sum()
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &DVector<C64>) -> C64 {
        self.triplets()
            .map(|(r, c, v)| psi[r].conj() * v * psi[c])
            .sum()
    }

    /// Restriction to the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (p, &c) in cols.iter().enumerate() {
            col_pos[c] = p;
        }
        let entries = rows.iter().enumerate().flat_map(|(rp, &r)| {
            let col_pos = &col_pos;
            self.row(r).filter_map(move |(c, v)| {
                let cp = col_pos[c];
                (cp != usize::MAX).then_some((rp, cp, v))
            })
        });
        Self::from_triplets(rows.len(), cols.len(), entries.collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> Csr {
        Csr::from_triplets(
            3,
            2,
            vec![
                (0, 0, c(1.0, 0.0)),
                (0, 1, c(0.0, 2.0)),
                (2, 1, c(-1.0, 1.0)),
                (2, 1, c(1.0, 0.0)),
            ],
        )
    }

    #[test]
    fn duplicates_summed() {
        let a = sample();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(2, 1), c(0.0, 1.0));
    }

    #[test]
    fn dense_kernels_match_nalgebra() {
        let a = sample();
        let ad = a.to_dense();
        let x = DMatrix::from_fn(2, 4, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let mut out = DMatrix::zeros(3, 4);
        a.mul_dense_acc(c(1.0, 0.0), &x, &mut out);
        assert!((out - &ad * &x).norm() < 1e-14);

        let y = DMatrix::from_fn(4, 2, |i, j| c(j as f64, i as f64));
        let mut out = DMatrix::zeros(4, 3);
        a.dense_mul_adjoint_acc(c(2.0, 0.0), &y, &mut out);
        assert!((out - (&y * ad.adjoint()) * c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn product_and_adjoint() {
        let a = sample();
        let p = a.mul(&a.adjoint());
        assert!((p.to_dense() - a.to_dense() * a.to_dense().adjoint()).norm() < 1e-14);
        let rho = DMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, 0.0));
        assert!((p.trace_product(&rho) - (p.to_dense() * &rho).trace()).norm() < 1e-12);
    }

    #[test]
    fn submatrix_picks_entries() {
        let a = sample();
        let s = a.submatrix(&[2, 0], &[1]);
        assert_eq!(s.get(0, 0), c(0.0, 1.0));
        assert_eq!(s.get(1, 0), c(0.0, 2.0));
    }
}

/// Compressed-row matrix with real entries, used by the hot loops of the
/// superspin generator where every operator is real.
#[derive(Clone, Debug, Default)]
pub(crate) struct RealCsr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl RealCsr {
    /// Returns `None` if any entry has a nonzero imaginary part.
    pub(crate) fn from_csr(a: &Csr) -> Option<Self> {
        if a.values.iter().any(|v| v.im != 0.0) {
            return None;
        }
        Some(Self {
            nrows: a.nrows,
            ncols: a.ncols,
            indptr: a.indptr.clone(),
            indices: a.indices.clone(),
            values: a.values.iter().map(|v| v.re).collect(),
        })
    }

    /// `out = A X` for column-major `X`.
    pub(crate) fn mul_dense_into(&self, x: &[C64], ncols: usize, out: &mut [C64]) {
        assert_eq!(x.len(), self.ncols * ncols);
        assert_eq!(out.len(), self.nrows * ncols);
        if self.ncols == 0 {
            out.fill(C64::new(0.0, 0.0));
            return;
        }
        for (xcol, ocol) in x
            .chunks_exact(self.ncols)
            .zip(out.chunks_exact_mut(self.nrows))
        {
            for (r, o) in ocol.iter_mut().enumerate() {
                let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
                let mut acc = C64::new(0.0, 0.0);
                for (&k, &v) in self.indices[lo..hi].iter().zip(&self.values[lo..hi]) {
                    acc += xcol[k] * v;
                }
                *o = acc;
            }
        }
    }

    /// `out += α X Aᵀ` for column-major `X` with `nrows_x` rows.
    pub(crate) fn dense_mul_transpose_acc(
        &self,
        alpha: f64,
        x: &[C64],
        nrows_x: usize,
        out: &mut [C64],
    ) {
        assert_eq!(x.len(), nrows_x * self.ncols);
        assert_eq!(out.len(), nrows_x * self.nrows);
        if nrows_x == 0 {
            return;
        }
        for (r, ocol) in out.chunks_exact_mut(nrows_x).enumerate() {
            for idx in self.indptr[r]..self.indptr[r + 1] {
                let coef = alpha * self.values[idx];
                let k = self.indices[idx];
                let xcol = &x[k * nrows_x..(k + 1) * nrows_x];
                for (o, &xv) in ocol.iter_mut().zip(xcol) {
                    *o += xv * coef;
                }
            }
        }
    }
}
