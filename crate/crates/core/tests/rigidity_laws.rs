mod common;

use std::sync::Arc;

use coarse_core::lfcm::{uniform_module, LfcmSpace};
use coarse_core::rigidity::{
    approximate_relation, domain_invariance_check, extract_embedding, parameter_join, ApproxParams,
    ExtractionConfig, Mode,
};
use coarse_core::{CMatrix, Operator, Relation, Scale, Space, C64};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng, disc: Scale, mode: Mode) -> ApproxParams {
    let bump = |rng: &mut ChaCha8Rng| disc + Scale::Finite(rng.gen_range(0..3));
    ApproxParams::new(rng.gen_range(0.05..0.95), bump(rng), bump(rng), mode).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn join_contains_both(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = common::random_lfcm(&mut rng, 14);
        let c = common::random_module(&mut rng, &sp, 2);
        let d = common::random_module(&mut rng, &sp, 2);
        let t = common::random_sparse_operator(&mut rng, &c, &d, 0.4);
        for mode in [Mode::Blocks, Mode::Windows] {
            let p1 = random_params(&mut rng, sp.disc_gauge_scale(), mode);
            let p2 = random_params(&mut rng, sp.disc_gauge_scale(), mode);
            let j = parameter_join(&p1, &p2).unwrap();
            prop_assert!(p1.is_below(&j) && p2.is_below(&j));
            let rj = approximate_relation(&t, &j).unwrap();
            prop_assert!(approximate_relation(&t, &p1).unwrap().is_subset(&rj));
            prop_assert!(approximate_relation(&t, &p2).unwrap().is_subset(&rj));
        }
        let p = random_params(&mut rng, sp.disc_gauge_scale(), Mode::Blocks);
        let w = ApproxParams { mode: Mode::Windows, ..p };
        prop_assert!(approximate_relation(&t, &p).unwrap().is_subset(&approximate_relation(&t, &w).unwrap()));
    }

    #[test]
    fn adjoint_relation_is_transpose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = common::random_lfcm(&mut rng, 14);
        let c = common::random_module(&mut rng, &sp, 2);
        let d = common::random_module(&mut rng, &sp, 2);
        let t = common::random_sparse_operator(&mut rng, &c, &d, 0.4);
        let p = random_params(&mut rng, sp.disc_gauge_scale(), Mode::Blocks);
        prop_assert_eq!(
            approximate_relation(&t.adjoint(), &p.swapped()).unwrap(),
            approximate_relation(&t, &p).unwrap().transpose()
        );
    }

    #[test]
    fn kappa_one_domain_is_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = common::random_lfcm(&mut rng, 14);
        let c = common::random_module(&mut rng, &sp, 3);
        prop_assume!(c.dim() > 0);
        let move_t = common::random_transport(&mut rng, &c, Scale::Finite(2));
        let noise = common::random_sparse_operator(&mut rng, move_t.source(), move_t.target(), 0.3)
            .truncate(Scale::Finite(2)).unwrap();
        let t = move_t.add(&noise.scaled(C64::new(0.1, 0.0))).unwrap();
        if let Ok(r) = domain_invariance_check(&t, &[1]) {
            prop_assert!(r.per_kappa[0].within, "{:?}", r);
        }
    }
}

fn isometric_swap_space() -> Arc<LfcmSpace> {
    Arc::new(LfcmSpace::singletons(Space::disjoint_union(&[Space::interval(5), Space::interval(5)])))
}

#[test]
fn phased_isometries_are_recovered_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spaces = [Arc::new(LfcmSpace::singletons(Space::interval(12))), isometric_swap_space()];
    let maps: [Box<dyn Fn(usize) -> usize>; 2] = [Box::new(|x| 11 - x), Box::new(|x| (x + 5) % 10)];
    for (sp, f) in spaces.iter().zip(maps.iter()) {
        let c = uniform_module(sp.clone());
        let n = c.dim();
        for _ in 0..20 {
            let phases: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..6.3))).collect();
            let m = CMatrix::from_fn(n, n, |i, j| if i == f(j) { phases[j] } else { C64::new(0.0, 0.0) });
            let u = Operator::new(c.clone(), c.clone(), m).unwrap();
            let d = sp.disc_gauge_scale();
            let ex = extract_embedding(&u, &ExtractionConfig::new(0.5, vec![(d, d)], Mode::Blocks)).unwrap();
            assert!(ex.success);
            let graph: Vec<usize> = (0..n).map(f).collect();
            assert_eq!(ex.relation, Relation::graph(&graph, n).unwrap());
        }
    }
}

#[test]
fn central_invariance_on_random_instances() {
    use coarse_core::rigidity::{central_invariance_check, make_central_unitary};
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let sp = common::random_lfcm(&mut rng, 14);
        let c = common::random_module(&mut rng, &sp, 2);
        let d = common::random_module(&mut rng, &sp, 2);
        let t = common::random_sparse_operator(&mut rng, &c, &d, 0.5);
        let ph = |rng: &mut ChaCha8Rng| (0..sp.component_count()).map(|_| rng.gen_range(0.0..6.3)).collect();
        let u = make_central_unitary(sp.clone(), ph(&mut rng)).unwrap();
        let v = make_central_unitary(sp.clone(), ph(&mut rng)).unwrap();
        let mode = *[Mode::Blocks, Mode::Windows].choose(&mut rng).unwrap();
        let p = random_params(&mut rng, sp.disc_gauge_scale(), mode);
        assert!(central_invariance_check(&t, &u, &v, &p).unwrap());
    }
}
