use std::sync::Arc;

use coarse_core::category::assemble_functor;
use coarse_core::lfcm::{make_module, pushforward};
use coarse_core::operator::{random_controlled_unitary, random_operator};
use coarse_core::rigidity::{extract_embedding, ExtractionConfig, Mode};
use coarse_core::{CMatrix, DimensionVector, LfcmSpace, MeasurableMap, Module, Operator, Relation, Scale, Space};
use coarse_lab::experiment::relation_closeness;
use coarse_lab::gen;
use coarse_lab::json::FunctorDoc;

/// `W · (identity matrix C → f_*C)` with `W` of propagation 1.
fn pair_over(f: &MeasurableMap, c: &Module, seed: u64) -> Operator {
    let image = pushforward(f, c).unwrap();
    let flat = make_module(f.target().clone(), &image.dims()).unwrap();
    let mut used = vec![0; flat.space().block_count()];
    let mut perm = CMatrix::zeros(flat.dim(), c.dim());
    for j in 0..c.dim() {
        let fb = f.block_image(c.coord_block(j));
        perm[(flat.coords_of(fb)[used[fb]], j)] = coarse_core::C64::new(1.0, 0.0);
        used[fb] += 1;
    }
    let p = Operator::new(c.clone(), flat.clone(), perm).unwrap();
    random_controlled_unitary(&flat, Scale::Finite(1), seed).compose(&p).unwrap()
}

#[test]
fn functor_document_round_trip() {
    let sp = Arc::new(LfcmSpace::singletons(Space::interval(10)));
    let f = MeasurableMap::new(sp.clone(), sp.clone(), (0..10).map(|x| 9 - x).collect()).unwrap();
    let mut rng = gen::rng(1);
    let mods = gen::distinct_modules(&mut rng, &sp, 3);
    let pairs = mods.iter().enumerate().map(|(i, c)| pair_over(&f, c, i as u64)).collect();
    let spec = assemble_functor(pairs, f).unwrap();
    let doc = FunctorDoc::from_functor(&spec, &sp, &sp);
    let text = serde_json::to_string(&doc).unwrap();
    assert_eq!(serde_json::to_string(&serde_json::from_str::<FunctorDoc>(&text).unwrap()).unwrap(), text);
    let back = serde_json::from_str::<FunctorDoc>(&text).unwrap().resolve().unwrap();
    // modules are rebuilt over a fresh space, so compare through relabelled copies
    let sp2 = back.entries()[0].source().space().clone();
    let relabel = |c: &Module| make_module(sp2.clone(), &c.dims()).unwrap();
    let mut rng = gen::rng(2);
    for (c, c2) in mods.iter().zip(mods.iter().map(relabel)) {
        let t = random_operator(c, c, &mut rng);
        let t2 = Operator::new(c2.clone(), c2, t.matrix().clone()).unwrap();
        assert_eq!(spec.apply(&t).unwrap().matrix(), back.apply(&t2).unwrap().matrix());
    }

    let mut broken = serde_json::from_str::<FunctorDoc>(&text).unwrap();
    broken.objects[0].unitary = "missing".into();
    assert!(broken.resolve().is_err());
}

#[test]
fn assembled_pairs_over_different_truths_are_not_close() {
    let sp = Arc::new(LfcmSpace::singletons(Space::interval(10)));
    let shift = MeasurableMap::new(sp.clone(), sp.clone(), (0..10).map(|x| (x + 1).min(9)).collect()).unwrap();
    let reversal = MeasurableMap::new(sp.clone(), sp.clone(), (0..10).map(|x| 9 - x).collect()).unwrap();
    let c1 = make_module(sp.clone(), &DimensionVector(vec![1; 10])).unwrap();
    let c2 = make_module(sp.clone(), &DimensionVector(vec![2; 10])).unwrap();
    let u1 = pair_over(&shift, &c1, 5);
    let u2 = pair_over(&reversal, &c2, 6);
    let u3 = pair_over(&shift, &c2, 7);
    let functor = assemble_functor(vec![u1.clone(), u2.clone()], shift).unwrap();
    let extract = |c: &Module| -> Relation {
        let u = functor.unitary(c).unwrap();
        let cfg = ExtractionConfig::new(0.1, coarse_core::rigidity::default_schedule(&u), Mode::Blocks);
        extract_embedding(&u, &cfg).unwrap().relation
    };
    let (r1, r2) = (extract(&c1), extract(&c2));
    let bound = Scale::Finite(1 + 2 + 2);
    assert!(relation_closeness(&r1, &r2, sp.base()) > bound);
    let cfg = ExtractionConfig::new(0.1, coarse_core::rigidity::default_schedule(&u3), Mode::Blocks);
    let r3 = extract_embedding(&u3, &cfg).unwrap().relation;
    assert!(relation_closeness(&r1, &r3, sp.base()) <= bound);
    assert_eq!(u2.target().dims(), c2.dims());
}
