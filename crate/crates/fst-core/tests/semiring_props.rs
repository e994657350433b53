//! Property tests for the tropical semiring laws.

use fst_core::TropicalWeight;
use proptest::prelude::*;

fn finite_weight() -> impl Strategy<Value = TropicalWeight> {
    (-1.0e6f64..1.0e6).prop_map(TropicalWeight::new)
}

fn any_weight() -> impl Strategy<Value = TropicalWeight> {
    prop_oneof![
        9 => finite_weight(),
        1 => Just(TropicalWeight::zero()),
    ]
}

proptest! {
    #[test]
    fn plus_commutative_associative(a in any_weight(), b in any_weight(), c in any_weight()) {
        prop_assert_eq!(a.plus(b), b.plus(a));
        prop_assert_eq!(a.plus(b).plus(c), a.plus(b.plus(c)));
    }

    #[test]
    fn times_associative(a in finite_weight(), b in finite_weight(), c in finite_weight()) {
        let l = a.times(b).times(c).value();
        let r = a.times(b.times(c)).value();
        prop_assert!((l - r).abs() <= 1e-9 * (1.0 + l.abs()));
    }

    #[test]
    fn identities_hold(a in any_weight()) {
        prop_assert_eq!(TropicalWeight::zero().plus(a), a);
        prop_assert_eq!(TropicalWeight::one().times(a), a);
        prop_assert_eq!(a.times(TropicalWeight::one()), a);
    }

    #[test]
    fn zero_annihilates(a in any_weight()) {
        prop_assert!(a.times(TropicalWeight::zero()).is_zero());
        prop_assert!(TropicalWeight::zero().times(a).is_zero());
    }

    #[test]
    fn times_distributes_over_plus(a in finite_weight(), b in finite_weight(), c in finite_weight()) {
        // a*(b+c) == a*b + a*c — exact in tropical: addition against min.
        let left = a.times(b.plus(c));
        let right = a.times(b).plus(a.times(c));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn plus_idempotent(a in any_weight()) {
        prop_assert_eq!(a.plus(a), a);
    }
}
