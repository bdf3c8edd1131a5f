use num_traits::{One, Zero};
use proptest::prelude::*;

use trigwzw::exactnum::cyc::{rat, rat_int, Rat};
use trigwzw::exactnum::{CycNum, Laurent, RatFunc};
use trigwzw::twistalg::{j_indices, weight_tilde, AffineWeight, Side};
use trigwzw::wfun::wmul_q0;

fn cyc(n: u32) -> impl Strategy<Value = CycNum> {
    proptest::collection::vec((-5i64..=5, 1i64..=4), n as usize)
        .prop_map(move |c| CycNum::from_coeffs(n, &c.iter().map(|(p, q)| rat(*p, *q)).collect::<Vec<_>>()))
}

fn laurent(n: u32) -> impl Strategy<Value = Laurent> {
    proptest::collection::vec((-3i64..=3, -2i64..=3), 1..4).prop_map(move |terms| {
        let mut l = Laurent::zero(n);
        for (c, d) in terms {
            l.add_term(d, &CycNum::from_int(n, c));
        }
        l
    })
}

fn ratfunc(n: u32) -> impl Strategy<Value = RatFunc> {
    (laurent(n), laurent(n))
        .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
        .prop_map(|(a, b)| RatFunc::new(a, b).unwrap())
}

fn order() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3), Just(4), Just(5), Just(6)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyclotomic_field_axioms((a, b, c) in order().prop_flat_map(|n| (cyc(n), cyc(n), cyc(n)))) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn complex_embedding_is_a_ring_map((a, b) in order().prop_flat_map(|n| (cyc(n), cyc(n)))) {
        let (x, y) = (a.to_complex(), b.to_complex());
        prop_assert!(((&a * &b).to_complex() - x * y).norm() < 1e-9 * (1.0 + x.norm() * y.norm()));
        prop_assert!(((&a + &b).to_complex() - (x + y)).norm() < 1e-9 * (1.0 + x.norm() + y.norm()));
    }

    #[test]
    fn normalization_is_idempotent(f in ratfunc(3)) {
        prop_assert_eq!(f.normalize().unwrap(), f);
    }

    #[test]
    fn evaluation_is_a_homomorphism(f in ratfunc(3), g in ratfunc(3), p in 2i64..40, q in 1i64..7) {
        let x = CycNum::from_rat(3, rat(p, q));
        if let (Ok(fx), Ok(gx)) = (f.eval(&x), g.eval(&x)) {
            prop_assert_eq!(f.add(&g).unwrap().eval(&x).unwrap(), &fx + &gx);
            prop_assert_eq!(f.mul(&g).unwrap().eval(&x).unwrap(), &fx * &gx);
        }
    }

    #[test]
    fn tilde_pairings_sum_to_the_level(h in proptest::collection::vec((-6i64..=6, 1i64..=3), 2), k in 1i64..4) {
        let level = rat_int(k);
        let lam = AffineWeight::from_h_values(level.clone(), &h.iter().map(|(p, q)| rat(*p, *q)).collect::<Vec<_>>());
        let (lt, ltp) = weight_tilde(&lam, &level).unwrap();
        for w in [&lt, &ltp] {
            for side in [Side::Zero, Side::Infinity] {
                let s = w.coroot_pairings(side).unwrap().into_iter().fold(Rat::zero(), |a, b| a + b);
                prop_assert_eq!(s, level.clone());
            }
        }
    }

    #[test]
    fn partner_weights_are_involutive(v in proptest::collection::vec(-8i64..=8, 3)) {
        let w = AffineWeight::new(Rat::one(), v.iter().map(|x| rat_int(*x)).collect());
        prop_assert_eq!(w.pairing_partner(Side::Zero).pairing_partner(Side::Infinity), w);
    }

    #[test]
    fn trig_limit_is_twist_equivariant(n in 2u32..=4, p in 2i64..30, q in 1i64..5) {
        let u = CycNum::from_rat(n, rat(p, q));
        let eu = &CycNum::eps_pow(n, 1) * &u;
        for (a, b) in j_indices(n) {
            let w = wmul_q0(n, a, b).unwrap();
            if let Ok(wu) = w.eval(&u) {
                prop_assert_eq!(w.eval(&eu).unwrap(), &CycNum::eps_pow(n, a as i64) * &wu);
            }
        }
    }
}
