//! Seeded generators for spaces, ground-truth equivalences and scrambled
//! unitaries.

use std::sync::Arc;

use anyhow::{bail, ensure, Context};
use coarse_core::lfcm::{make_module, pushforward, DimensionVector};
use coarse_core::operator::random_controlled_unitary;
use coarse_core::{BitSet, CMatrix, LfcmSpace, MeasurableMap, Module, Operator, Relation, Scale, Space, C64};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SpaceKind {
    /// Path metric on `size` points.
    Interval,
    /// `size × size` grid with the 4-neighbour hop metric.
    Grid2d,
    /// `size` uniform points in the unit square, joined when closer than
    /// `sqrt(8 / (π·size))`, with the hop metric.
    RandomGeometric,
    /// `components` intervals of `size` points at infinite distance.
    MultiComponent,
}

/// Singleton-block LFCM space of the given kind.
pub fn gen_space(kind: SpaceKind, size: usize, components: usize, seed: u64) -> anyhow::Result<LfcmSpace> {
    ensure!(size >= 1, "size must be at least 1");
    let base = match kind {
        SpaceKind::Interval => Space::interval(size),
        SpaceKind::Grid2d => {
            let idx = |r: usize, c: usize| r * size + c;
            let mut edges = Vec::new();
            for r in 0..size {
                for c in 0..size {
                    if c + 1 < size {
                        edges.push((idx(r, c), idx(r, c + 1)));
                    }
                    if r + 1 < size {
                        edges.push((idx(r, c), idx(r + 1, c)));
                    }
                }
            }
            Space::from_edges(size * size, &edges)?
        }
        SpaceKind::RandomGeometric => random_geometric(size, seed)?,
        SpaceKind::MultiComponent => {
            ensure!(components >= 1, "multi_component needs at least one component");
            Space::disjoint_union(&vec![Space::interval(size); components])
        }
    };
    Ok(LfcmSpace::singletons(base))
}

fn random_geometric(n: usize, seed: u64) -> anyhow::Result<Space> {
    let mut rng = rng(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let r2 = 8.0 / (std::f64::consts::PI * n as f64);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            if dx * dx + dy * dy <= r2 {
                edges.push((i, j));
            }
        }
    }
    Ok(Space::from_edges(n, &edges)?)
}

/// Graph metric on up to `max_points` points in 1..=3 components, with
/// blocks of diameter at most 2.
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
    let space = Space::from_edges(n, &edges).expect("edges are in range");
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
        for (q, t) in taken.iter_mut().enumerate() {
            if !*t && space.dist(p, q) == Scale::Finite(1) && rng.gen_bool(0.4) {
                *t = true;
                block.push(q);
            }
        }
        blocks.push(block);
    }
    Arc::new(LfcmSpace::new(space, blocks).expect("blocks partition the points"))
}

pub fn random_module<R: Rng>(rng: &mut R, space: &Arc<LfcmSpace>, max_rank: usize) -> Module {
    let dims = (0..space.block_count()).map(|_| rng.gen_range(0..=max_rank)).collect();
    make_module(space.clone(), &DimensionVector(dims)).expect("one rank per block")
}

/// `k` pairwise different modules over one space.
pub fn distinct_modules<R: Rng>(rng: &mut R, space: &Arc<LfcmSpace>, k: usize) -> Vec<Module> {
    let mut out: Vec<Module> = Vec::new();
    while out.len() < k {
        let c = random_module(rng, space, 2 + out.len());
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Entries nonzero on a random subset of block pairs with the given density.
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
    Operator::new(src.clone(), tgt.clone(), m).expect("shape matches the modules")
}

/// The identity matrix from `c` to the module obtained by moving each
/// coordinate to a random block whose rectangle with its own has scale `≤ r`.
pub fn random_transport<R: Rng>(rng: &mut R, c: &Module, r: Scale) -> Operator {
    let sp = c.space();
    let labels = c
        .labels()
        .iter()
        .map(|&b| {
            let near: Vec<usize> = (0..sp.block_count()).filter(|&a| sp.block_pair_scale(a, b) <= r).collect();
            *near.choose(rng).unwrap_or(&b)
        })
        .collect();
    let target = Module::from_labels(sp.clone(), labels).expect("labels are blocks");
    Operator::new(c.clone(), target, CMatrix::identity(c.dim())).expect("square identity")
}

/// Bijection of the points with its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equivalence {
    pub forward: Vec<usize>,
    pub inverse: Vec<usize>,
}

fn is_isometry(x: &Space, f: &[usize]) -> bool {
    (0..x.len()).all(|i| (0..x.len()).all(|j| x.dist(f[i], f[j]) == x.dist(i, j)))
}

fn within_distortion(x: &Space, f: &[usize], d: u64) -> anyhow::Result<bool> {
    let rho = x.map_expansion(x, f)?;
    Ok((0..=x.finite_diameter()).all(|n| rho.at_finite(n) <= Scale::Finite(d * n + d)))
}

/// Bijection with `ρ(n) ≤ D·n + D` both ways: the reversal when it is an
/// isometry (else the identity), composed for `D ≥ 2` with a random matching
/// of swaps between points at distance `≤ ⌊D/2⌋`.
pub fn gen_equivalence(x: &LfcmSpace, distortion: u64, seed: u64) -> anyhow::Result<Equivalence> {
    ensure!(distortion >= 1, "distortion bound must be at least 1");
    let base = x.base();
    let n = base.len();
    let rev: Vec<usize> = (0..n).rev().collect();
    let mut f: Vec<usize> = if is_isometry(base, &rev) { rev } else { (0..n).collect() };
    let reach = distortion / 2;
    if reach > 0 {
        let mut rng = rng(seed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut swap: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for &p in &order {
            if used[p] || !rng.gen_bool(0.5) {
                continue;
            }
            let near: Vec<usize> = (0..n)
                .filter(|&q| q != p && !used[q] && base.dist(p, q) <= Scale::Finite(reach))
                .collect();
            if let Some(&q) = near.choose(&mut rng) {
                used[p] = true;
                used[q] = true;
                swap.swap(p, q);
            }
        }
        f = f.iter().map(|&y| swap[y]).collect();
    }
    let mut inverse = vec![0; n];
    for (x, &y) in f.iter().enumerate() {
        inverse[y] = x;
    }
    ensure!(within_distortion(base, &f, distortion)?, "generated map exceeds the distortion bound");
    ensure!(within_distortion(base, &inverse, distortion)?, "generated inverse exceeds the distortion bound");
    Ok(Equivalence { forward: f, inverse })
}

/// `C_Y` with the ranks of `C_X` moved along a bijection of singleton-block
/// spaces.
pub fn transported_module(f: &MeasurableMap, cx: &Module) -> anyhow::Result<Module> {
    let moved = pushforward(f, cx)?;
    Ok(make_module(f.target().clone(), &moved.dims())?)
}

/// `U = W_Y · P_f · W_X`, with `P_f` sending the `k`-th coordinate over `b`
/// to the `k`-th coordinate over `f(b)` and `W` random controlled unitaries
/// of propagation `≤ p`.
pub fn build_scrambled_unitary(f: &MeasurableMap, cx: &Module, cy: &Module, p: Scale, seed: u64) -> anyhow::Result<Operator> {
    let sx = f.source();
    for b in 0..sx.block_count() {
        let fb = f.block_image(b);
        if cy.rank(fb) != cx.rank(b) {
            bail!("rank {} over block {b} does not match rank {} over its image {fb}", cx.rank(b), cy.rank(fb));
        }
    }
    ensure!(cx.dim() == cy.dim(), "modules have different dimensions");
    let mut perm = CMatrix::zeros(cy.dim(), cx.dim());
    for b in 0..sx.block_count() {
        for (&j, &i) in cx.coords_of(b).iter().zip(cy.coords_of(f.block_image(b))) {
            perm[(i, j)] = C64::new(1.0, 0.0);
        }
    }
    let pf = Operator::new(cx.clone(), cy.clone(), perm)?;
    let wx = random_controlled_unitary(cx, p, seed.wrapping_mul(2));
    let wy = random_controlled_unitary(cy, p, seed.wrapping_mul(2).wrapping_add(1));
    wy.compose(&pf)?.compose(&wx).context("composing the scrambled unitary")
}

/// `max d(y, f(x))` over the relation, or `∞` when some point of `dom` has
/// no image.
pub fn closeness_to_truth(r: &Relation, f: &[usize], y: &Space, dom: &BitSet) -> Scale {
    if !dom.is_subset(&r.domain()) {
        return Scale::Infinite;
    }
    r.pairs().map(|(b, a)| y.dist(b, f[a])).max().unwrap_or(Scale::ZERO)
}
