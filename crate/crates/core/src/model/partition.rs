use serde::Serialize;

use super::spacing::Spacing;
use crate::error::{Error, Result};

/// Assignment of `N` sites to `p` superspins.
///
/// Sites are 0-based here: site `s` belongs to superspin `s mod p` and is the
/// `l = s / p`-th member of it, carrying the phase `(-1)^{l n}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperspinPartition {
    n_sites: usize,
    spacing: Spacing,
    sizes: Vec<usize>,
    sites: Vec<Vec<usize>>,
    signs: Vec<f64>,
}

pub fn build_partition(n_sites: usize, spacing: Spacing) -> Result<SuperspinPartition> {
    if n_sites == 0 {
        return Err(Error::Precondition(
            "partition needs at least one site".into(),
        ));
    }
    let p = spacing.p() as usize;
    let sites: Vec<Vec<usize>> = (0..p).map(|a| (a..n_sites).step_by(p).collect()).collect();
    let sizes = sites.iter().map(Vec::len).collect();
    let signs = (0..n_sites).map(|s| spacing.sign(s / p)).collect();
    Ok(SuperspinPartition {
        n_sites,
        spacing,
        sizes,
        sites,
        signs,
    })
}

impl SuperspinPartition {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn n_superspins(&self) -> usize {
        self.sizes.len()
    }

    /// Qubit count `n_a` of each superspin.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn sites(&self, a: usize) -> &[usize] {
        &self.sites[a]
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn owner(&self, site: usize) -> usize {
        site % self.sizes.len()
    }

    /// `Π_a (n_a + 1)`.
    pub fn hilbert_dim(&self) -> usize {
        self.sizes.iter().map(|n| n + 1).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_sites_three_superspins() {
        let part = build_partition(7, Spacing::new(2, 3).unwrap()).unwrap();
        assert_eq!(part.sizes(), &[3, 2, 2]);
        assert_eq!(part.sites(0), &[0, 3, 6]);
        assert_eq!(part.hilbert_dim(), 4 * 3 * 3);
    }

    #[test]
    fn dicke_limit_single_superspin() {
        let part = build_partition(5, Spacing::new(2, 1).unwrap()).unwrap();
        assert_eq!(part.sizes(), &[5]);
        assert!(part.signs().iter().all(|&s| s == 1.0));
    }

    #[test]
    fn odd_n_alternates_signs() {
        let part = build_partition(6, Spacing::new(1, 2).unwrap()).unwrap();
        assert_eq!(part.sizes(), &[3, 3]);
        let s: Vec<f64> = part.sites(0).iter().map(|&i| part.signs()[i]).collect();
        assert_eq!(s, vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn more_superspins_than_sites() {
        let part = build_partition(2, Spacing::new(1, 3).unwrap()).unwrap();
        assert_eq!(part.sizes(), &[1, 1, 0]);
        assert_eq!(part.hilbert_dim(), 4);
        assert!(build_partition(0, Spacing::new(1, 1).unwrap()).is_err());
    }
}
