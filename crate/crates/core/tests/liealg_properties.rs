use proptest::prelude::*;
use superspin::liealg::{
    canonical_decomposition, close_algebra, default_max_dim, directional_ops, jump_generators,
};
use superspin::{build_gamma_waveguide, build_partition, Spacing};

fn commensurate() -> impl Strategy<Value = (Spacing, usize)> {
    (1u32..=6, 1u32..12, 2usize..=4).prop_filter_map(
        "n/p must be in lowest terms",
        |(p, n, mult)| {
            let sp = Spacing::new(n, p).ok()?;
            (sp.p() == p && sp.n() == n).then_some((sp, mult * p as usize))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closes_at_three_p_and_recovers_partition((sp, n_sites) in commensurate()) {
        let (l, r) = directional_ops(n_sites, sp.kd()).unwrap();
        let closure = close_algebra(&[l, r], default_max_dim(n_sites)).unwrap();
        prop_assert!(closure.closed);
        prop_assert_eq!(closure.dimension, 3 * sp.p() as usize);

        let recovered = canonical_decomposition(&closure).unwrap();
        let part = build_partition(n_sites, sp).unwrap();
        let expected: Vec<Vec<usize>> = (0..part.n_superspins()).map(|a| part.sites(a).to_vec()).collect();
        prop_assert_eq!(&recovered.sets, &expected);
        prop_assert_eq!(&recovered.signs[..], part.signs());

        let mut cover = vec![0usize; n_sites];
        recovered.sets.iter().flatten().for_each(|&s| cover[s] += 1);
        prop_assert!(cover.iter().all(|&c| c == 1));
    }

    #[test]
    fn closure_ignores_generator_presentation((sp, n_sites) in commensurate()) {
        let (l, r) = directional_ops(n_sites, sp.kd()).unwrap();
        let directional = close_algebra(&[l, r], default_max_dim(n_sites)).unwrap();
        let gamma = build_gamma_waveguide(n_sites, sp, 1.0, None).unwrap().gamma().clone();
        let from_gamma = close_algebra(&jump_generators(&gamma, 1e-10).unwrap(), default_max_dim(n_sites)).unwrap();
        prop_assert_eq!(directional.dimension, from_gamma.dimension);
        prop_assert!(directional.same_subspaces(&from_gamma, 1e-8));
    }
}

#[test]
fn incommensurate_spacing_does_not_close() {
    let (l, r) = directional_ops(12, 1.0).unwrap();
    let closure = close_algebra(&[l, r], default_max_dim(12)).unwrap();
    assert!(!closure.closed);
    assert!(closure.dimension > default_max_dim(12));
    assert!(canonical_decomposition(&closure).is_err());
}
