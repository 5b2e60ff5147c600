//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// `(A + A†) / 2`, in place.
pub fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut h = m.clone();
    hermitize(&mut h);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues descending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Square root of a Hermitian positive-semidefinite matrix; negative
/// eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let mut h = m.clone();
    hermitize(&mut h);
    let eig = h.symmetric_eigen();
    let vecs = &eig.eigenvectors;
    let roots = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    ));
    vecs * roots * vecs.adjoint()
}

/// `½‖A − B‖₁` for Hermitian `A`, `B`.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|l| l.abs())
        .sum::<f64>()
}

/// Orthonormal basis of the right nullspace of `m`. Singular values below
/// `rel_tol` times the largest one count as zero.
pub fn nullspace(m: &DMatrix<C64>, rel_tol: f64) -> Vec<DVector<C64>> {
    let ncols = m.ncols();
    if ncols == 0 {
        return Vec::new();
    }
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let cutoff = rel_tol * smax;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| smax == 0.0 || s < cutoff)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

pub fn real_to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0)]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0), c(1.0)]));
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a) < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(3.0)],
        );
        let r = psd_sqrt(&m);
        assert!((&r * &r - m).norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let ns = nullspace(&m, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&m * v).norm() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_eigen_sorted_descending() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] + 1.0).abs() < 1e-12);
        let v0 = vecs.column(0);
        assert!((&m * v0 - v0 * 3.0).norm() < 1e-12);
    }
}
