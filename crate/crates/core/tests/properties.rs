//! Randomized law checks for the algebraic building blocks: free group
//! words, truncated series arithmetic, presentation round trips, quotient
//! chain maps, and skew-series products.

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prorank::free_series::{FreeCtx, TruncPoly};
use prorank::presentations::{GroupPresentation, GroupWord};
use prorank::presets;
use prorank::quotient::{build_quotient, finite_quotient, FiniteQuotient};
use prorank::skew::{build_skew, SkewStructure};

const NGENS: usize = 3;

fn arb_word() -> impl Strategy<Value = GroupWord> {
    proptest::collection::vec((0usize..NGENS, -3i64..=3), 0..8).prop_map(GroupWord::from_letters)
}

proptest! {
    #[test]
    fn word_concat_is_associative(u in arb_word(), v in arb_word(), w in arb_word()) {
        prop_assert_eq!(u.concat(&v).concat(&w), u.concat(&v.concat(&w)));
    }

    #[test]
    fn word_inverse_cancels(w in arb_word()) {
        prop_assert!(w.concat(&w.inverse()).is_identity());
        prop_assert!(w.inverse().concat(&w).is_identity());
    }

    #[test]
    fn word_inverse_reverses_products(u in arb_word(), v in arb_word()) {
        prop_assert_eq!(u.concat(&v).inverse(), v.inverse().concat(&u.inverse()));
    }

    #[test]
    fn words_stay_freely_reduced(u in arb_word(), v in arb_word()) {
        let w = u.concat(&v);
        prop_assert!(w.letters().iter().all(|&(_, e)| e != 0));
        prop_assert!(w.letters().windows(2).all(|pair| pair[0].0 != pair[1].0));
    }

    #[test]
    fn word_exponent_sums_are_additive(u in arb_word(), v in arb_word()) {
        let sums: Vec<i64> = u
            .exponent_sums(NGENS)
            .iter()
            .zip(v.exponent_sums(NGENS))
            .map(|(a, b)| a + b)
            .collect();
        prop_assert_eq!(u.concat(&v).exponent_sums(NGENS), sums);
    }

    #[test]
    fn word_powers_match_repeated_concat(w in arb_word(), n in 0i64..5) {
        let mut acc = GroupWord::identity();
        for _ in 0..n {
            acc = acc.concat(&w);
        }
        prop_assert_eq!(w.pow(n), acc.clone());
        prop_assert_eq!(w.pow(-n), acc.inverse());
    }
}

fn series_ctx() -> &'static FreeCtx {
    static CTX: OnceLock<FreeCtx> = OnceLock::new();
    CTX.get_or_init(|| FreeCtx::uniform(3, "x", 2, 6).unwrap())
}

fn arb_poly() -> impl Strategy<Value = TruncPoly> {
    proptest::collection::vec(
        (proptest::collection::vec(0u32..2, 0..5), 1u8..3),
        0..5,
    )
    .prop_map(|terms| {
        let ctx = series_ctx();
        let mut f = TruncPoly::zero(ctx.p(), ctx.cutoff());
        for (letters, c) in terms {
            f.add_term(ctx.mono(&letters), c);
        }
        f
    })
}

proptest! {
    #[test]
    fn series_addition_is_commutative_and_associative(
        f in arb_poly(), g in arb_poly(), h in arb_poly()
    ) {
        prop_assert_eq!(f.add(&g), g.add(&f));
        prop_assert_eq!(f.add(&g).add(&h), f.add(&g.add(&h)));
    }

    #[test]
    fn series_multiplication_is_associative(f in arb_poly(), g in arb_poly(), h in arb_poly()) {
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
    }

    #[test]
    fn series_multiplication_distributes(f in arb_poly(), g in arb_poly(), h in arb_poly()) {
        prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
        prop_assert_eq!(f.add(&g).mul(&h), f.mul(&h).add(&g.mul(&h)));
    }

    #[test]
    fn series_one_is_neutral(f in arb_poly()) {
        let one = TruncPoly::one(series_ctx().p(), series_ctx().cutoff());
        prop_assert_eq!(f.mul(&one), f.clone());
        prop_assert_eq!(one.mul(&f), f);
    }

    #[test]
    fn series_products_respect_the_cutoff(f in arb_poly(), g in arb_poly()) {
        let cutoff = series_ctx().cutoff();
        prop_assert!(f.mul(&g).terms().all(|(m, _)| m.weight() < cutoff));
    }

    #[test]
    fn series_units_invert(f in arb_poly()) {
        // 1 + (terms of positive weight) is always a unit.
        let positive: Vec<_> = f
            .terms()
            .filter(|(m, _)| !m.is_one())
            .map(|(m, c)| (m.clone(), c))
            .collect();
        let mut u = TruncPoly::one(series_ctx().p(), series_ctx().cutoff());
        for (m, c) in positive {
            u.add_term(m, c);
        }
        let inv = u.inv_unit().unwrap();
        prop_assert_eq!(u.mul(&inv), TruncPoly::one(series_ctx().p(), series_ctx().cutoff()));
        prop_assert_eq!(inv.mul(&u), TruncPoly::one(series_ctx().p(), series_ctx().cutoff()));
    }
}

fn arb_presentation() -> impl Strategy<Value = GroupPresentation> {
    let names = ["a", "b", "c", "d"];
    (
        prop_oneof![Just(2u16), Just(3), Just(5)],
        1usize..=4,
        proptest::collection::vec(proptest::collection::vec((0usize..4, -3i64..=3), 0..6), 0..3),
    )
        .prop_map(move |(p, ngens, raw_rels)| {
            let generators: Vec<String> =
                names.iter().take(ngens).map(|s| s.to_string()).collect();
            let relators: Vec<GroupWord> = raw_rels
                .into_iter()
                .map(|letters| {
                    GroupWord::from_letters(
                        letters.into_iter().map(|(g, e)| (g % ngens, e)),
                    )
                })
                .filter(|w| !w.is_identity())
                .collect();
            GroupPresentation { p, generators, relators }
        })
}

proptest! {
    #[test]
    fn presentations_round_trip_through_text(pr in arb_presentation()) {
        let parsed = GroupPresentation::parse(&pr.to_string()).unwrap();
        prop_assert_eq!(pr.p, parsed.p);
        prop_assert_eq!(&pr.generators, &parsed.generators);
        prop_assert_eq!(&pr.relators, &parsed.relators);
    }
}

fn chain(name: &'static str) -> &'static (FiniteQuotient, FiniteQuotient, Vec<usize>) {
    static ZP2: OnceLock<(FiniteQuotient, FiniteQuotient, Vec<usize>)> = OnceLock::new();
    static MILD1: OnceLock<(FiniteQuotient, FiniteQuotient, Vec<usize>)> = OnceLock::new();
    static FREE2: OnceLock<(FiniteQuotient, FiniteQuotient, Vec<usize>)> = OnceLock::new();
    let cell = match name {
        "zp2" => &ZP2,
        "mild1" => &MILD1,
        "free2" => &FREE2,
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        let pr = GroupPresentation::parse(presets::preset(name).unwrap()).unwrap();
        let big = finite_quotient(&build_quotient(&pr, 4, 1 << 20).unwrap(), 20_000).unwrap();
        let small = finite_quotient(&build_quotient(&pr, 3, 1 << 20).unwrap(), 20_000).unwrap();
        let map = big.map_onto(&small);
        (big, small, map)
    })
}

proptest! {
    #[test]
    fn quotient_chain_maps_are_onto_homomorphisms(
        name in prop_oneof![Just("zp2"), Just("mild1"), Just("free2")],
        seed in any::<u64>(),
    ) {
        let (big, small, map) = chain(name);
        // Surjective: every element of the smaller quotient is hit.
        let mut hit = vec![false; small.order()];
        for &img in map {
            hit[img] = true;
        }
        prop_assert!(hit.into_iter().all(|h| h));
        // Homomorphism on a random pair, and identity goes to identity.
        prop_assert_eq!(map[0], 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rng.gen_range(0..big.order());
        let b = rng.gen_range(0..big.order());
        prop_assert_eq!(map[big.group_mul(a, b)], small.group_mul(map[a], map[b]));
        prop_assert_eq!(map[big.group_inv(a)], small.group_inv(map[a]));
    }
}

fn mild2_skew() -> &'static SkewStructure {
    static SK: OnceLock<SkewStructure> = OnceLock::new();
    SK.get_or_init(|| {
        let pr = GroupPresentation::parse(presets::preset("mild2").unwrap()).unwrap();
        let info = pr.validate_flag();
        build_skew(build_quotient(&pr, 4, 1 << 20).unwrap(), &info).unwrap()
    })
}

proptest! {
    #[test]
    fn skew_products_are_associative_and_distributive(seed in any::<u64>()) {
        let sk = mild2_skew();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
        let g = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
        let h = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
        prop_assert_eq!(
            sk.skew_mul(&sk.skew_mul(&f, &g), &h),
            sk.skew_mul(&f, &sk.skew_mul(&g, &h))
        );
        prop_assert_eq!(
            sk.skew_mul(&f.add(&g), &h),
            sk.skew_mul(&f, &h).add(&sk.skew_mul(&g, &h))
        );
        prop_assert_eq!(
            sk.skew_mul(&h, &f.add(&g)),
            sk.skew_mul(&h, &f).add(&sk.skew_mul(&h, &g))
        );
    }
}
