use proptest::prelude::*;

use flcount::group::{build_group_order, rand_group_instance, theta_is_involution, theta_matrix};
use flcount::invariants::strong_regularity_exact;
use flcount::kspace::{all_subspaces, gaussian_binomial};
use flcount::local_field::{ExtKind, FieldDesc, ResidueField, TruncSeries};
use flcount::verify::{sample_pair, verify_count_identity, VerifyOptions, OUTSIDE_PROVEN_RANGE};

fn kind() -> impl Strategy<Value = ExtKind> {
    prop_oneof![Just(ExtKind::Split), Just(ExtKind::Inert)]
}

fn config() -> impl Strategy<Value = (usize, u32)> {
    prop_oneof![Just((1, 3)), Just((1, 5)), Just((2, 3)), Just((2, 5)), Just((3, 5)), Just((3, 3))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdict_shape((n, q) in config(), kind in kind(), max_val in 0u32..=5, seed in any::<u64>()) {
        let desc = FieldDesc::new(q, 1, kind).unwrap();
        let pair = sample_pair(n, &desc, max_val, seed).unwrap();
        let val_delta = strong_regularity_exact(&pair).unwrap().val_delta.unwrap();
        let v = verify_count_identity(&pair, &VerifyOptions::default()).unwrap();
        // dim_k Q = val Δ, and Q and 0 are always submodules.
        prop_assert_eq!(v.v, val_delta);
        prop_assert_eq!(v.m.len() as i64, val_delta + 1);
        prop_assert_eq!(v.m[0], 1);
        prop_assert_eq!(v.m[v.m.len() - 1], 1);
        prop_assert!(v.m.iter().eq(v.m.iter().rev()));
        prop_assert_eq!(v.violations().count(), 0);
        if q as usize > n {
            prop_assert!(v.pass);
        } else {
            prop_assert!(v.flags.iter().any(|f| f == OUTSIDE_PROVEN_RANGE));
        }
    }

    #[test]
    fn counts_are_precision_stable((n, q) in config(), kind in kind(), seed in any::<u64>()) {
        let desc = FieldDesc::new(q, 1, kind).unwrap();
        let pair = sample_pair(n, &desc, 4, seed).unwrap();
        let v = verify_count_identity(&pair, &VerifyOptions::default()).unwrap();
        for extra in 1..=3 {
            let opts = VerifyOptions { precision: Some(v.precision + extra), ..VerifyOptions::default() };
            let w = verify_count_identity(&pair, &opts).unwrap();
            prop_assert_eq!(&w.m, &v.m);
            prop_assert_eq!(w.selfdual, v.selfdual);
        }
    }

    #[test]
    fn theta_is_an_involution(n in 1usize..=2, q in prop_oneof![Just(3u32), Just(5)], kind in kind(), seed in any::<u64>()) {
        let desc = FieldDesc::new(q, 1, kind).unwrap();
        let (_, pair) = rand_group_instance(n, &desc, 4, seed).unwrap();
        let lifted = pair.lift(24);
        let ring = lifted.ring();
        prop_assert!(theta_is_involution(&ring, &theta_matrix(&ring, &lifted.a).unwrap()));
        let g = build_group_order(&lifted).unwrap();
        prop_assert!(g.order.check_structure().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_inverse(coeffs in prop::collection::vec(0u32..5, 1..8), lead in 1u32..5) {
        let desc = FieldDesc::new(5, 1, ExtKind::Inert).unwrap();
        let ring = desc.series_ring(12);
        let mut c = coeffs.clone();
        c[0] = lead;
        let x = TruncSeries::from_coeffs(&c, 12);
        let y = ring.inv(&x).unwrap();
        prop_assert!(ring.sub(&ring.mul(&x, &y), &ring.one()).is_zero());
    }

    #[test]
    fn sigma_is_an_involution_and_norm_is_multiplicative(
        a in prop::collection::vec(0u32..3, 4),
        b in prop::collection::vec(0u32..3, 4),
        kind in kind(),
    ) {
        let desc = FieldDesc::new(3, 1, kind).unwrap();
        let ring = desc.ext_ring(8);
        let base = ring.base();
        let x = flcount::local_field::EElem::new(base.from_coeffs(&a[..2]), base.from_coeffs(&a[2..]));
        let y = flcount::local_field::EElem::new(base.from_coeffs(&b[..2]), base.from_coeffs(&b[2..]));
        prop_assert_eq!(ring.sigma(&ring.sigma(&x)), x.clone());
        let lhs = ring.norm(&ring.mul(&x, &y));
        let rhs = base.mul(&ring.norm(&x), &ring.norm(&y));
        prop_assert!(base.sub(&lhs, &rhs).is_zero());
    }

    #[test]
    fn subspace_enumeration_matches_gaussian_binomials(dim in 0usize..=4, r in 0usize..=4) {
        prop_assume!(r <= dim);
        let k = ResidueField::new(3, 1).unwrap();
        let count = all_subspaces(&k, dim, r).count() as u128;
        prop_assert_eq!(count, gaussian_binomial(3, dim as u32, r as u32));
    }
}
