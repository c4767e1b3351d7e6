//! LFCM spaces (a metric space with a controlled block partition) and coarse
//! modules over them.
//!
//! A module is a finite-dimensional Hilbert space whose basis vectors are
//! labelled by blocks; the projection `1_A` onto a measurable set `A` is the
//! coordinate projection onto the vectors labelled by blocks of `A`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{CoarseError, Result};
use crate::matrix::{CMatrix, C64};
use crate::operator::Operator;
use crate::relation::Relation;
use crate::scale::Scale;
use crate::space::Space;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LfcmSpace {
    base: Space,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    block_scale: Vec<Scale>,
    disc_gauge_scale: Scale,
    block_component: Vec<usize>,
    component_count: usize,
}

impl LfcmSpace {
    /// Every point must lie in exactly one nonempty block of finite diameter.
    pub fn new(base: Space, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = base.len();
        let mut block_of = vec![usize::MAX; n];
        let mut blocks = blocks;
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(CoarseError::InvalidPartition(format!("block {b} is empty")));
            }
            block.sort_unstable();
            for &p in block.iter() {
                base.check_point(p)?;
                if block_of[p] != usize::MAX {
                    return Err(CoarseError::InvalidPartition(format!(
                        "point {p} lies in blocks {} and {b}",
                        block_of[p]
                    )));
                }
                block_of[p] = b;
            }
        }
        if let Some(p) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(CoarseError::InvalidPartition(format!("point {p} is in no block")));
        }
        let nb = blocks.len();
        let mut block_scale = vec![Scale::ZERO; nb * nb];
        for x in 0..n {
            for y in 0..n {
                let slot = &mut block_scale[block_of[x] * nb + block_of[y]];
                *slot = (*slot).max(base.dist(x, y));
            }
        }
        let disc_gauge_scale = (0..nb).map(|b| block_scale[b * nb + b]).max().unwrap_or(Scale::ZERO);
        if !disc_gauge_scale.is_finite() {
            return Err(CoarseError::InvalidPartition(
                "a block has infinite diameter".into(),
            ));
        }
        let (component_count, comp) = base.component_indices();
        let block_component = blocks.iter().map(|b| comp[b[0]]).collect();
        Ok(LfcmSpace {
            base,
            blocks,
            block_of,
            block_scale,
            disc_gauge_scale,
            block_component,
            component_count,
        })
    }

    /// Partition into singletons (`E_disc = Δ`).
    pub fn singletons(base: Space) -> Self {
        let blocks = (0..base.len()).map(|p| vec![p]).collect();
        LfcmSpace::new(base, blocks).expect("singleton partition is always valid")
    }

    pub fn base(&self) -> &Space {
        &self.base
    }

    pub fn point_count(&self) -> usize {
        self.base.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn block_of(&self, point: usize) -> usize {
        self.block_of[point]
    }

    pub fn check_block(&self, b: usize) -> Result<()> {
        if b < self.blocks.len() {
            Ok(())
        } else {
            Err(CoarseError::UnknownBlock { block: b, count: self.blocks.len() })
        }
    }

    /// Scale of the rectangle `B × A`: `max d(b, a)` over its points.
    #[inline]
    pub fn block_pair_scale(&self, b: usize, a: usize) -> Scale {
        self.block_scale[b * self.blocks.len() + a]
    }

    /// Largest block diameter; the scale of `E_disc = ⊔ A_i × A_i`.
    pub fn disc_gauge_scale(&self) -> Scale {
        self.disc_gauge_scale
    }

    /// The discreteness gauge as a point relation.
    pub fn disc_gauge(&self) -> Relation {
        let n = self.point_count();
        Relation::from_rectangles(n, n, self.blocks.iter().map(|b| (b.as_slice(), b.as_slice())))
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn block_component(&self, b: usize) -> usize {
        self.block_component[b]
    }

    /// Union of the points of the listed blocks.
    pub fn points_of(&self, blocks: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.point_count());
        for b in blocks.iter() {
            for &p in &self.blocks[b] {
                out.insert(p);
            }
        }
        out
    }

    /// Blocks contained in `E_r[block]`.
    pub fn window(&self, block: usize, r: Scale) -> BitSet {
        let seed = BitSet::from_iter(self.point_count(), self.blocks[block].iter().copied());
        let ball = self.base.ball(&seed, r);
        BitSet::from_iter(
            self.block_count(),
            (0..self.block_count()).filter(|&b| self.blocks[b].iter().all(|&p| ball.contains(p))),
        )
    }
}

/// Block-preserving unitary invariant of a module: rank of `1_{A_i}` per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimensionVector(pub Vec<usize>);

impl DimensionVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

pub(crate) fn same_space(a: &Arc<LfcmSpace>, b: &Arc<LfcmSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Coarse module: coordinate `k` of the Hilbert space lives over block
/// `coord_block[k]`.
#[derive(Clone, Debug)]
pub struct Module {
    space: Arc<LfcmSpace>,
    coord_block: Vec<usize>,
    block_coords: Vec<Vec<usize>>,
}

impl PartialEq for Module {
    fn eq(&self, other: &Self) -> bool {
        self.coord_block == other.coord_block && same_space(&self.space, &other.space)
    }
}

impl Module {
    /// Module with an explicit coordinate-to-block labelling.
    pub fn from_labels(space: Arc<LfcmSpace>, coord_block: Vec<usize>) -> Result<Self> {
        let mut block_coords = vec![Vec::new(); space.block_count()];
        for (k, &b) in coord_block.iter().enumerate() {
            space.check_block(b)?;
            block_coords[b].push(k);
        }
        Ok(Module { space, coord_block, block_coords })
    }

    pub fn space(&self) -> &Arc<LfcmSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.coord_block.len()
    }

    pub fn coord_block(&self, k: usize) -> usize {
        self.coord_block[k]
    }

    pub fn labels(&self) -> &[usize] {
        &self.coord_block
    }

    pub fn rank(&self, block: usize) -> usize {
        self.block_coords[block].len()
    }

    pub fn dims(&self) -> DimensionVector {
        DimensionVector(self.block_coords.iter().map(Vec::len).collect())
    }

    /// Coordinates spanning `1_{A_b} H`.
    pub fn coords_of(&self, block: usize) -> &[usize] {
        &self.block_coords[block]
    }

    /// Coordinates spanning `1_A H` for a union of blocks.
    pub fn coords_of_blocks(&self, blocks: &BitSet) -> Vec<usize> {
        let mut out: Vec<usize> = blocks.iter().flat_map(|b| self.block_coords[b].iter().copied()).collect();
        out.sort_unstable();
        out
    }

    /// Blocks with nonzero rank.
    pub fn support_blocks(&self) -> BitSet {
        BitSet::from_iter(
            self.space.block_count(),
            (0..self.space.block_count()).filter(|&b| self.rank(b) > 0),
        )
    }

    pub fn same_space_as(&self, other: &Module) -> bool {
        same_space(&self.space, &other.space)
    }

    /// The coordinate projection `1_A` for a set of blocks.
    pub fn projection(&self, blocks: &BitSet) -> Operator {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for k in self.coords_of_blocks(blocks) {
            m[(k, k)] = C64::new(1.0, 0.0);
        }
        Operator::from_parts(self.clone(), self.clone(), m)
    }
}

/// Module with contiguous coordinates in block order.
pub fn make_module(space: Arc<LfcmSpace>, dims: &DimensionVector) -> Result<Module> {
    if dims.0.len() != space.block_count() {
        return Err(CoarseError::DimensionMismatch {
            expected: space.block_count(),
            got: dims.0.len(),
        });
    }
    let labels = dims.0.iter().enumerate().flat_map(|(b, &d)| core::iter::repeat_n(b, d)).collect();
    Module::from_labels(space, labels)
}

/// One coordinate per block.
pub fn uniform_module(space: Arc<LfcmSpace>) -> Module {
    let labels = (0..space.block_count()).collect();
    Module::from_labels(space, labels).expect("labels are in range")
}

/// `d` coordinates over a single block, nothing elsewhere.
pub fn bounded_module(space: Arc<LfcmSpace>, block: usize, d: usize) -> Result<Module> {
    space.check_block(block)?;
    if d == 0 {
        return Err(CoarseError::InvalidParams("bounded module needs d >= 1".into()));
    }
    Module::from_labels(space, vec![block; d])
}

/// `C0 ⊕ C1` with its canonical inclusions and projections.
#[derive(Clone, Debug)]
pub struct DirectSum {
    pub module: Module,
    pub inclusions: [Operator; 2],
    pub projections: [Operator; 2],
}

pub fn direct_sum(c0: &Module, c1: &Module) -> Result<DirectSum> {
    if !c0.same_space_as(c1) {
        return Err(CoarseError::SpaceMismatch("direct sum of modules over different spaces".into()));
    }
    let mut labels = c0.coord_block.clone();
    labels.extend_from_slice(&c1.coord_block);
    let sum = Module::from_labels(c0.space.clone(), labels)?;
    let (d0, d1) = (c0.dim(), c1.dim());
    let i0 = CMatrix::from_fn(d0 + d1, d0, |i, j| unit(i == j));
    let i1 = CMatrix::from_fn(d0 + d1, d1, |i, j| unit(i == d0 + j));
    let inclusions = [
        Operator::from_parts(c0.clone(), sum.clone(), i0.clone()),
        Operator::from_parts(c1.clone(), sum.clone(), i1.clone()),
    ];
    let projections = [
        Operator::from_parts(sum.clone(), c0.clone(), i0.adjoint()),
        Operator::from_parts(sum.clone(), c1.clone(), i1.adjoint()),
    ];
    Ok(DirectSum { module: sum, inclusions, projections })
}

fn unit(on: bool) -> C64 {
    C64::new(if on { 1.0 } else { 0.0 }, 0.0)
}

/// A point map between LFCM spaces sending every source block into a single
/// target block.
#[derive(Clone, Debug)]
pub struct MeasurableMap {
    source: Arc<LfcmSpace>,
    target: Arc<LfcmSpace>,
    images: Vec<usize>,
    block_images: Vec<usize>,
}

impl MeasurableMap {
    pub fn new(source: Arc<LfcmSpace>, target: Arc<LfcmSpace>, images: Vec<usize>) -> Result<Self> {
        if images.len() != source.point_count() {
            return Err(CoarseError::InvalidMap(format!(
                "map has {} images for {} points",
                images.len(),
                source.point_count()
            )));
        }
        for &y in &images {
            target.base().check_point(y)?;
        }
        let mut block_images = Vec::with_capacity(source.block_count());
        for (b, pts) in source.blocks().iter().enumerate() {
            let tb = target.block_of(images[pts[0]]);
            if pts.iter().any(|&p| target.block_of(images[p]) != tb) {
                return Err(CoarseError::NotMeasurable { block: b });
            }
            block_images.push(tb);
        }
        Ok(MeasurableMap { source, target, images, block_images })
    }

    pub fn identity(space: Arc<LfcmSpace>) -> Self {
        let images = (0..space.point_count()).collect();
        MeasurableMap::new(space.clone(), space, images).expect("identity is measurable")
    }

    pub fn source(&self) -> &Arc<LfcmSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<LfcmSpace> {
        &self.target
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Target block containing the image of a source block.
    pub fn block_image(&self, b: usize) -> usize {
        self.block_images[b]
    }

    /// `g ∘ f`.
    pub fn then(&self, g: &MeasurableMap) -> Result<MeasurableMap> {
        if !same_space(&self.target, &g.source) {
            return Err(CoarseError::SpaceMismatch("maps are not composable".into()));
        }
        let images = self.images.iter().map(|&y| g.images[y]).collect();
        MeasurableMap::new(self.source.clone(), g.target.clone(), images)
    }
}

/// `f_* C`: same Hilbert space, coordinate `k` relabelled by the target block
/// containing the image of its block.
pub fn pushforward(f: &MeasurableMap, c: &Module) -> Result<Module> {
    if !same_space(&f.source, &c.space) {
        return Err(CoarseError::SpaceMismatch("module is not over the map's source".into()));
    }
    let labels = c.coord_block.iter().map(|&b| f.block_image(b)).collect();
    Module::from_labels(f.target.clone(), labels)
}

/// `κ`-domain: the blocks of rank at least `κ`, and the scale at which they
/// are coarsely dense in the whole space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub blocks: BitSet,
    pub faithful_scale: Scale,
}

pub fn domain(c: &Module, kappa: usize) -> Result<Domain> {
    if kappa == 0 {
        return Err(CoarseError::InvalidParams("kappa must be positive".into()));
    }
    let space = c.space();
    let blocks = BitSet::from_iter(
        space.block_count(),
        (0..space.block_count()).filter(|&b| c.rank(b) >= kappa),
    );
    let faithful_scale = space
        .base()
        .subordinate_scale(&space.base().all_points(), &space.points_of(&blocks));
    Ok(Domain { blocks, faithful_scale })
}

/// `C_κ = 1_{dom_κ} H_C` and its inclusion into `C`.
pub fn restrict_to_domain(c: &Module, kappa: usize) -> Result<(Module, Operator)> {
    let dom = domain(c, kappa)?;
    if dom.blocks.is_empty() {
        return Err(CoarseError::EmptyDomain { kappa });
    }
    let kept = c.coords_of_blocks(&dom.blocks);
    let labels = kept.iter().map(|&k| c.coord_block[k]).collect();
    let sub = Module::from_labels(c.space.clone(), labels)?;
    let m = CMatrix::from_fn(c.dim(), kept.len(), |i, j| unit(kept[j] == i));
    let inclusion = Operator::from_parts(sub.clone(), c.clone(), m);
    Ok((sub, inclusion))
}

/// Block-index space with the projection and a section.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub space: Space,
    /// point → block
    pub projection: Vec<usize>,
    /// block → smallest point of the block
    pub section: Vec<usize>,
}

/// Collapses each block to a point. Block distance is the least distance
/// between their points, closed under shortest paths so the result is a
/// metric.
pub fn discretize(space: &LfcmSpace) -> Discretization {
    let nb = space.block_count();
    let base = space.base();
    let mut w = vec![Scale::Infinite; nb * nb];
    for x in 0..base.len() {
        for y in 0..base.len() {
            let (bx, by) = (space.block_of(x), space.block_of(y));
            let slot = &mut w[bx * nb + by];
            *slot = (*slot).min(base.dist(x, y));
        }
    }
    Discretization {
        space: Space::path_closure(nb, w),
        projection: (0..base.len()).map(|p| space.block_of(p)).collect(),
        section: space.blocks().iter().map(|b| b[0]).collect(),
    }
}
