mod common;

use coarse_core::relation::{asymptotic_from_inclusion, classify_relation, product_subordinate_scale};
use coarse_core::{BitSet, Relation, Scale, Space};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_relation(rng: &mut ChaCha8Rng, nx: usize, ny: usize, p: f64) -> Relation {
    let mut r = Relation::empty(nx, ny);
    for y in 0..ny {
        for x in 0..nx {
            if rng.gen_bool(p) {
                r.insert(y, x);
            }
        }
    }
    r
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, p: f64) -> BitSet {
    BitSet::from_iter(n, (0..n).filter(|_| rng.gen_bool(p)))
}

/// `min n` with `A ⊆ E_n[B]`, by trying every `n` up to the diameter.
fn subordinate_by_search(x: &Space, a: &BitSet, b: &BitSet) -> Scale {
    for n in 0..=x.finite_diameter() {
        let ball = x.ball(b, Scale::Finite(n));
        if a.is_subset(&ball) {
            return Scale::Finite(n);
        }
    }
    Scale::Infinite
}

fn compose_by_pairs(s: &Relation, r: &Relation) -> Relation {
    let mut out = Relation::empty(r.source_len(), s.target_len());
    for (z, y) in s.pairs() {
        for (y2, x) in r.pairs() {
            if y == y2 {
                out.insert(z, x);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn transpose_is_an_involution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nx, ny) = (rng.gen_range(1..12), rng.gen_range(1..12));
        let r = random_relation(&mut rng, nx, ny, 0.3);
        prop_assert_eq!(r.transpose().transpose(), r.clone());
        let t = r.transpose();
        for (y, x) in r.pairs() {
            prop_assert!(t.contains(x, y));
        }
    }

    #[test]
    fn composition_matches_pairwise_definition(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (rng.gen_range(1..10), rng.gen_range(1..10), rng.gen_range(1..10));
        let r = random_relation(&mut rng, a, b, 0.3);
        let s = random_relation(&mut rng, b, c, 0.3);
        let t = random_relation(&mut rng, c, a, 0.3);
        prop_assert_eq!(Relation::compose(&s, &r).unwrap(), compose_by_pairs(&s, &r));
        let left = Relation::compose(&t, &Relation::compose(&s, &r).unwrap()).unwrap();
        let right = Relation::compose(&Relation::compose(&t, &s).unwrap(), &r).unwrap();
        prop_assert_eq!(left, right);
        let st = Relation::compose(&s, &r).unwrap().transpose();
        prop_assert_eq!(st, Relation::compose(&r.transpose(), &s.transpose()).unwrap());
    }

    #[test]
    fn subordination_matches_ball_search(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_lfcm(&mut rng, 14).base().clone();
        let a = random_set(&mut rng, space.len(), 0.4);
        let b = random_set(&mut rng, space.len(), 0.4);
        prop_assert_eq!(space.subordinate_scale(&a, &b), subordinate_by_search(&space, &a, &b));
    }

    #[test]
    fn entourage_neighbourhoods_compose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_lfcm(&mut rng, 14).base().clone();
        let (m, n) = (rng.gen_range(0..4u64), rng.gen_range(0..4u64));
        let em = Relation::entourage(&space, Scale::Finite(m));
        let en = Relation::entourage(&space, Scale::Finite(n));
        let both = Relation::compose(&em, &en).unwrap();
        prop_assert!(both.is_subset(&Relation::entourage(&space, Scale::Finite(m + n))));
        prop_assert!(space.entourage_scale(&both) <= Scale::Finite(m + n));
        let a = random_set(&mut rng, space.len(), 0.3);
        prop_assert_eq!(both.neighborhood(&a).unwrap(), em.neighborhood(&en.neighborhood(&a).unwrap()).unwrap());
    }

    #[test]
    fn included_relations_are_asymptotic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Space::interval(rng.gen_range(2..12));
        let n = x.len();
        // R2 is a thickened graph, R1 keeps some of its pairs but every source point
        let f: Vec<usize> = (0..n).map(|i| (i + rng.gen_range(0..2)).min(n - 1)).collect();
        let g = Relation::graph(&f, n).unwrap();
        let r2 = Relation::compose(&Relation::entourage(&x, Scale::Finite(1)), &g).unwrap();
        let mut r1 = Relation::empty(n, n);
        for (y, xx) in r2.pairs() {
            if f[xx] == y || rng.gen_bool(0.3) {
                r1.insert(y, xx);
            }
        }
        let w = asymptotic_from_inclusion(&r1, &r2, &x, &x).unwrap();
        prop_assert!(w <= Scale::Finite(1));
        prop_assert_eq!(product_subordinate_scale(&r1, &r2, &x, &x), Scale::ZERO);
        prop_assert!(classify_relation(&r1, &x, &x).unwrap().is_controlled());
    }
}

#[test]
fn profiles_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let space = common::random_lfcm(&mut rng, 12).base().clone();
        let r = random_relation(&mut rng, space.len(), space.len(), 0.2);
        let rep = classify_relation(&r, &space, &space).unwrap();
        assert!(rep.expansion.is_monotone_nondecreasing());
        assert!(rep.co_expansion.is_monotone_nondecreasing());
    }
}
