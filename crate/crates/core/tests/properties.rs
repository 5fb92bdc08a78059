//! Randomized invariants: submeasure axioms, density estimator ordering,
//! closure laws, shift algebra, and enumeration round-trips.

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

use shiftlab_core::cantor::{
    baire_h, delta_check, hat_g_membership, hereditary_closure, BairePoint, BasicClopen,
    FiniteFamily,
};
use shiftlab_core::constructions::targets::{
    cw_index, cw_rational, decode_sequence, encode_sequence, pair, unpair,
};
use shiftlab_core::dyadic::{Dyadic, Rat};
use shiftlab_core::ideals::{
    lower_density_estimate, mu_n, peak_density_estimate, upper_density_estimate, Lscsm,
};
use shiftlab_core::natset::NatSet;
use shiftlab_core::shifts::{
    p_norm_pow_exact, shift_apply_exact, Block, BlockValues, SeqVector, Space, WeightSequence,
};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn arb_subset() -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::btree_set(0u64..40, 0..20).prop_map(|s| s.into_iter().collect())
}

fn arb_natset() -> impl Strategy<Value = NatSet> {
    arb_subset().prop_map(NatSet::explicit)
}

proptest! {
    // --- submeasures -----------------------------------------------------

    #[test]
    fn lscsm_axioms_hold(a in arb_subset(), b in arb_subset()) {
        for phi in [
            Lscsm::counting(),
            Lscsm::sup_density(),
            Lscsm::dyadic_block_sup(),
            Lscsm::harmonic(),
        ] {
            let mut union: Vec<u64> = a.iter().chain(b.iter()).copied().collect();
            union.sort_unstable();
            union.dedup();
            let inter: Vec<u64> = a.iter().copied().filter(|x| b.contains(x)).collect();
            prop_assert_eq!(phi.eval(&[]), 0.0);
            prop_assert!(phi.eval(&union) <= phi.eval(&a) + phi.eval(&b) + 1e-12,
                "{} subadditivity", phi.name);
            prop_assert!(phi.eval(&inter) <= phi.eval(&a) + 1e-12, "{} monotone", phi.name);
        }
    }

    #[test]
    fn mu_is_monotone_and_subadditive(a in arb_subset(), b in arb_subset(), n in 1u64..60) {
        let mut union: Vec<u64> = a.iter().chain(b.iter()).copied().collect();
        union.sort_unstable();
        union.dedup();
        let sa = NatSet::explicit(a.clone());
        let sb = NatSet::explicit(b);
        let su = NatSet::explicit(union);
        let (ma, mb, mu) = (mu_n(&sa, n)?, mu_n(&sb, n)?, mu_n(&su, n)?);
        prop_assert!(mu <= ma.clone() + mb);
        prop_assert!(ma <= mu_n(&su, n)?); // A subset of union
        prop_assert!(mu <= Rat::from(BigInt::from(1)));
    }

    #[test]
    fn density_estimates_are_ordered(s in arb_natset()) {
        let lo = lower_density_estimate(&s, 39)?;
        let hi = upper_density_estimate(&s, 39)?;
        let peak = peak_density_estimate(&s, 39)?;
        prop_assert!(lo <= hi);
        prop_assert!(hi <= peak);
    }

    // --- hereditary families and the hat relaxation ----------------------

    #[test]
    fn closure_is_extensive_idempotent_hereditary(gens in proptest::collection::vec(0u32..256, 1..5)) {
        let fam = FiniteFamily::new(7, gens).unwrap();
        let closed = hereditary_closure(&fam).unwrap();
        for m in fam.members.iter() {
            prop_assert!(closed.contains_mask(*m));
        }
        prop_assert!(closed.is_hereditary());
        let twice = hereditary_closure(&closed).unwrap();
        prop_assert_eq!(twice.members, closed.members);
    }

    #[test]
    fn hat_pieces_are_upward_closed_relaxations(f in arb_subset(), extra in arb_subset()) {
        let clopen = BasicClopen::new(f.clone());
        let s = NatSet::explicit(f.clone());
        // the strict piece's defining set belongs to the relaxation
        prop_assert!(hat_g_membership(&clopen, &s).unwrap());
        // and membership survives adding elements
        let mut sup: Vec<u64> = f.iter().chain(extra.iter()).copied().collect();
        sup.sort_unstable();
        sup.dedup();
        prop_assert!(hat_g_membership(&clopen, &NatSet::explicit(sup)).unwrap());
    }

    #[test]
    fn baire_h_is_a_retraction(prefix in proptest::collection::vec(0u64..100, 0..12)) {
        let x = BairePoint::new(prefix);
        let hx = baire_h(&x);
        prop_assert!(delta_check(&hx));
        prop_assert_eq!(baire_h(&hx).prefix, hx.prefix.clone());
        if delta_check(&x) {
            prop_assert_eq!(hx.prefix, x.prefix);
        }
    }

    // --- shift algebra ----------------------------------------------------

    #[test]
    fn weight_products_telescope(lam in arb_rat(), n in 1u64..30, a in 0u64..20, b in 0u64..20) {
        prop_assume!(lam != Rat::default());
        let w = WeightSequence::constant(lam);
        let k = n + a;
        let l = k + 1 + b;
        let left = w.product_exact(n, k).unwrap().mul(&w.product_exact(k + 1, l).unwrap());
        let right = w.product_exact(n, l).unwrap();
        prop_assert_eq!(left.to_rat(), right.to_rat());
    }

    #[test]
    fn shift_is_linear(vals in proptest::collection::vec(arb_rat(), 1..8),
                       c in arb_rat(), n in 0u64..12, off in 0u64..9) {
        let w = WeightSequence::constant_int(2);
        let horizon = 64;
        let mk = |scale: &Rat| {
            let blocks = vec![Block {
                offset: off,
                values: BlockValues::Exact(
                    vals.iter().map(|v| Dyadic::from_rat(v * scale)).collect(),
                ),
            }];
            SeqVector::new(blocks, Space::Lp { p: 2.0 }, horizon, None).unwrap()
        };
        let x = mk(&Rat::from(BigInt::from(1)));
        let cx = mk(&c);
        let tx = shift_apply_exact(&w, &x, n, 20).unwrap();
        let tcx = shift_apply_exact(&w, &cx, n, 20).unwrap();
        for (a, b) in tx.iter().zip(&tcx) {
            prop_assert_eq!(&a.to_rat() * &c, b.to_rat());
        }
    }

    #[test]
    fn shift_satisfies_semigroup_law(vals in proptest::collection::vec(arb_rat(), 1..8),
                                     n in 0u64..10, m in 0u64..10, off in 0u64..6) {
        let w = WeightSequence::constant_int(2);
        let horizon = 64;
        let x = SeqVector::new(
            vec![Block {
                offset: off,
                values: BlockValues::Exact(vals.iter().cloned().map(Dyadic::from_rat).collect()),
            }],
            Space::Lp { p: 2.0 },
            horizon,
            None,
        )
        .unwrap();
        // materialize T^n x on a prefix, then shift again by m
        let prefix = 30u64;
        let tn: Vec<Dyadic> = shift_apply_exact(&w, &x, n, prefix).unwrap();
        let y = SeqVector::new(
            vec![Block { offset: 0, values: BlockValues::Exact(tn) }],
            Space::Lp { p: 2.0 },
            horizon,
            None,
        )
        .unwrap();
        let lhs = shift_apply_exact(&w, &y, m, 12).unwrap();
        let rhs = shift_apply_exact(&w, &x, n + m, 12).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert_eq!(a.to_rat(), b.to_rat());
        }
    }

    #[test]
    fn restriction_never_grows_the_norm(vals in proptest::collection::vec(arb_rat(), 1..10),
                                        lo in 0u64..12, span in 0u64..12) {
        let x = SeqVector::new(
            vec![Block {
                offset: 3,
                values: BlockValues::Exact(vals.iter().cloned().map(Dyadic::from_rat).collect()),
            }],
            Space::Lp { p: 2.0 },
            64,
            None,
        )
        .unwrap();
        let r = x.restrict_to_intervals(&[(lo, lo + span)]).unwrap();
        prop_assert!(
            p_norm_pow_exact(&r, 2).unwrap().to_rat() <= p_norm_pow_exact(&x, 2).unwrap().to_rat()
        );
    }

    // --- enumeration ------------------------------------------------------

    #[test]
    fn pairing_round_trips(a in 0u64..5000, b in 0u64..5000) {
        let z = pair(&BigUint::from(a), &BigUint::from(b));
        let (x, y) = unpair(&z);
        prop_assert_eq!(x, BigUint::from(a));
        prop_assert_eq!(y, BigUint::from(b));
    }

    #[test]
    fn calkin_wilf_round_trips(n in 1u64..20000) {
        let q = cw_rational(&BigUint::from(n));
        prop_assert!(q > Rat::default());
        prop_assert_eq!(cw_index(&q), BigUint::from(n));
    }

    #[test]
    fn sequence_codes_round_trip(mut vals in proptest::collection::vec(arb_rat(), 0..6)) {
        // canonical form: no trailing zeros
        while vals.last().is_some_and(|v| *v == Rat::default()) {
            vals.pop();
        }
        let code = encode_sequence(&vals);
        prop_assert_eq!(decode_sequence(&code), vals);
    }

    #[test]
    fn random_codes_decode_encode(code in 0u64..30000) {
        let c = BigUint::from(code);
        let vals = decode_sequence(&c);
        prop_assert_eq!(encode_sequence(&vals), c);
    }
}
