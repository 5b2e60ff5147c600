use super::partition::SuperspinPartition;

/// Mixed-radix product basis `⊗_a {|j_a = n_a/2, m_a⟩}` labelled by the
/// occupations `k_a = m_a + j_a ∈ 0..=n_a`. Superspin 0 is the slowest digit.
///
/// States are also grouped by total excitation `m = Σ_a k_a`; within each
/// manifold indices are kept in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
    manifolds: Vec<Vec<usize>>,
    location: Vec<(usize, usize)>,
}

impl ProductBasis {
    pub fn new(sizes: &[usize]) -> Self {
        let mut strides = vec![1; sizes.len()];
        for a in (0..sizes.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * (sizes[a + 1] + 1);
        }
        let dim = sizes.iter().map(|n| n + 1).product();
        let n_total: usize = sizes.iter().sum();
        let mut manifolds = vec![Vec::new(); n_total + 1];
        let mut location = Vec::with_capacity(dim);
        let mut occ = vec![0; sizes.len()];
        for idx in 0..dim {
            let mut rem = idx;
            for (a, k) in occ.iter_mut().enumerate() {
                *k = rem / strides[a];
                rem %= strides[a];
            }
            let m: usize = occ.iter().sum();
            location.push((m, manifolds[m].len()));
            manifolds[m].push(idx);
        }
        Self {
            sizes: sizes.to_vec(),
            strides,
            dim,
            manifolds,
            location,
        }
    }

    pub fn for_partition(part: &SuperspinPartition) -> Self {
        Self::new(part.sizes())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_sites(&self) -> usize {
        self.manifolds.len() - 1
    }

    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    pub fn index(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.sizes.len());
        occupations
            .iter()
            .zip(&self.strides)
            .map(|(k, s)| k * s)
            .sum()
    }

    pub fn occupation(&self, idx: usize, a: usize) -> usize {
        (idx / self.strides[a]) % (self.sizes[a] + 1)
    }

    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        (0..self.sizes.len())
            .map(|a| self.occupation(idx, a))
            .collect()
    }

    pub fn excitation(&self, idx: usize) -> usize {
        self.location[idx].0
    }

    /// Global indices of the states with `m` excitations.
    pub fn manifold(&self, m: usize) -> &[usize] {
        &self.manifolds[m]
    }

    pub fn manifold_dims(&self) -> Vec<usize> {
        self.manifolds.iter().map(Vec::len).collect()
    }

    /// `(m, position within manifold m)` of a global index.
    pub fn location(&self, idx: usize) -> (usize, usize) {
        self.location[idx]
    }

    pub fn fully_inverted_index(&self) -> usize {
        self.dim - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_superspin_slowest() {
        let b = ProductBasis::new(&[3, 2, 2]);
        assert_eq!(b.dim(), 36);
        assert_eq!(b.index(&[0, 0, 1]), 1);
        assert_eq!(b.index(&[1, 0, 0]), 9);
        assert_eq!(b.occupations(b.index(&[3, 1, 2])), vec![3, 1, 2]);
        assert_eq!(b.fully_inverted_index(), b.index(&[3, 2, 2]));
    }

    #[test]
    fn manifolds_partition_basis() {
        let b = ProductBasis::new(&[2, 2, 2]);
        assert_eq!(b.manifold_dims(), vec![1, 3, 6, 7, 6, 3, 1]);
        for m in 0..=6 {
            for (pos, &idx) in b.manifold(m).iter().enumerate() {
                assert_eq!(b.location(idx), (m, pos));
                assert_eq!(b.occupations(idx).iter().sum::<usize>(), m);
            }
        }
    }
}
