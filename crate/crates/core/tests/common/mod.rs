#![allow(dead_code)]

use std::sync::Arc;

use coarse_core::lfcm::{make_module, DimensionVector, LfcmSpace, Module};
use coarse_core::operator::Operator;
use coarse_core::{CMatrix, Space, C64};
use rand::seq::SliceRandom;
use rand::Rng;

/// Graph metric on up to `max_points` points split over 1..=3 components,
/// partitioned into blocks of diameter at most 2.
pub fn random_lfcm<R: Rng>(rng: &mut R, max_points: usize) -> Arc<LfcmSpace> {
    let n = rng.gen_range(1..=max_points);
    let parts = rng.gen_range(1..=3.min(n));
    let comp: Vec<usize> = (0..n).map(|p| if p < parts { p } else { rng.gen_range(0..parts) }).collect();
    let mut edges = Vec::new();
    for p in 0..n {
        let earlier: Vec<usize> = (0..p).filter(|&q| comp[q] == comp[p]).collect();
        if let Some(&q) = earlier.choose(rng) {
            edges.push((q, p));
        }
        if earlier.len() > 1 && rng.gen_bool(0.3) {
            edges.push((*earlier.choose(rng).unwrap(), p));
        }
    }
    let space = Space::from_edges(n, &edges).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut taken = vec![false; n];
    let mut blocks = Vec::new();
    for &p in &order {
        if taken[p] {
            continue;
        }
        taken[p] = true;
        let mut block = vec![p];
        for q in 0..n {
            if !taken[q] && space.dist(p, q) == coarse_core::Scale::Finite(1) && rng.gen_bool(0.4) {
                taken[q] = true;
                block.push(q);
            }
        }
        blocks.push(block);
    }
    Arc::new(LfcmSpace::new(space, blocks).unwrap())
}

pub fn random_module<R: Rng>(rng: &mut R, space: &Arc<LfcmSpace>, max_rank: usize) -> Module {
    let dims = (0..space.block_count()).map(|_| rng.gen_range(0..=max_rank)).collect();
    make_module(space.clone(), &DimensionVector(dims)).unwrap()
}

/// Entries nonzero on a random subset of block pairs.
pub fn random_sparse_operator<R: Rng>(rng: &mut R, src: &Module, tgt: &Module, density: f64) -> Operator {
    let (nx, ny) = (src.space().block_count(), tgt.space().block_count());
    let on: Vec<bool> = (0..nx * ny).map(|_| rng.gen_bool(density)).collect();
    let m = CMatrix::from_fn(tgt.dim(), src.dim(), |i, j| {
        if on[tgt.coord_block(i) * nx + src.coord_block(j)] {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Operator::new(src.clone(), tgt.clone(), m).unwrap()
}

/// Same Hilbert space with each coordinate moved to a random block whose
/// rectangle with the old one has scale `≤ r`, and the identity matrix
/// between the two modules.
pub fn random_transport<R: Rng>(rng: &mut R, c: &Module, r: coarse_core::Scale) -> Operator {
    let sp = c.space();
    let labels: Vec<usize> = c
        .labels()
        .iter()
        .map(|&b| {
            let near: Vec<usize> = (0..sp.block_count()).filter(|&a| sp.block_pair_scale(a, b) <= r).collect();
            *near.choose(rng).unwrap_or(&b)
        })
        .collect();
    let target = Module::from_labels(sp.clone(), labels).unwrap();
    Operator::new(c.clone(), target, CMatrix::identity(c.dim())).unwrap()
}
