use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{CoarseError, Result};
use crate::profile::Profile;
use crate::scale::Scale;
use crate::space::Space;

/// A relation from `X` to `Y`: a subset of `Y × X`, stored as one row of
/// source points per target point. Pairs are written `(y, x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    source_len: usize,
    rows: Vec<BitSet>,
}

impl Relation {
    pub fn empty(source_len: usize, target_len: usize) -> Self {
        Relation {
            source_len,
            rows: vec![BitSet::new(source_len); target_len],
        }
    }

    pub fn full(source_len: usize, target_len: usize) -> Self {
        Relation {
            source_len,
            rows: vec![BitSet::full(source_len); target_len],
        }
    }

    /// The diagonal `Δ` on `n` points.
    pub fn identity(n: usize) -> Self {
        let mut r = Relation::empty(n, n);
        for i in 0..n {
            r.rows[i].insert(i);
        }
        r
    }

    pub fn from_pairs<I>(source_len: usize, target_len: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut r = Relation::empty(source_len, target_len);
        for (y, x) in pairs {
            if y >= target_len {
                return Err(CoarseError::UnknownPoint { point: y, len: target_len });
            }
            if x >= source_len {
                return Err(CoarseError::UnknownPoint { point: x, len: source_len });
            }
            r.rows[y].insert(x);
        }
        Ok(r)
    }

    /// Graph `{(f x, x)}` of a point map.
    pub fn graph(f: &[usize], target_len: usize) -> Result<Self> {
        Relation::from_pairs(f.len(), target_len, f.iter().enumerate().map(|(x, &y)| (y, x)))
    }

    /// The metric entourage `E_n` of a space.
    pub fn entourage(space: &Space, n: Scale) -> Self {
        let len = space.len();
        let mut r = Relation::empty(len, len);
        for y in 0..len {
            for x in 0..len {
                if space.dist(y, x) <= n {
                    r.rows[y].insert(x);
                }
            }
        }
        r
    }

    /// Block-diagonal relation `⊔ A × B` for same-indexed sets.
    pub fn from_rectangles<'a, I>(source_len: usize, target_len: usize, rects: I) -> Self
    where
        I: IntoIterator<Item = (&'a [usize], &'a [usize])>,
    {
        let mut r = Relation::empty(source_len, target_len);
        for (ys, xs) in rects {
            for &y in ys {
                for &x in xs {
                    r.rows[y].insert(x);
                }
            }
        }
        r
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.rows.len()
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        y < self.rows.len() && self.rows[y].contains(x)
    }

    pub fn insert(&mut self, y: usize, x: usize) {
        self.rows[y].insert(x);
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(BitSet::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(BitSet::is_empty)
    }

    pub fn row(&self, y: usize) -> &BitSet {
        &self.rows[y]
    }

    /// Pairs `(y, x)` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(y, row)| row.iter().map(move |x| (y, x)))
    }

    /// `S ∘ R = {(z, x) | ∃y: (z, y) ∈ S, (y, x) ∈ R}`.
    pub fn compose(s: &Relation, r: &Relation) -> Result<Relation> {
        if s.source_len != r.target_len() {
            return Err(CoarseError::SpaceMismatch(format!(
                "cannot compose: S has source of {} points, R has target of {}",
                s.source_len,
                r.target_len()
            )));
        }
        let mut out = Relation::empty(r.source_len, s.target_len());
        for (z, srow) in s.rows.iter().enumerate() {
            for y in srow.iter() {
                out.rows[z].union_with(&r.rows[y]);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Relation {
        let mut out = Relation::empty(self.target_len(), self.source_len);
        for (y, x) in self.pairs() {
            out.rows[x].insert(y);
        }
        out
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(&other.rows) {
            a.union_with(b);
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.source_len == other.source_len
            && self.target_len() == other.target_len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    fn check_same_shape(&self, other: &Relation) -> Result<()> {
        if self.source_len != other.source_len || self.target_len() != other.target_len() {
            return Err(CoarseError::SpaceMismatch("relations of different shape".into()));
        }
        Ok(())
    }

    /// `E[A] = {y | ∃a ∈ A: (y, a) ∈ E}`.
    pub fn neighborhood(&self, a: &BitSet) -> Result<BitSet> {
        if a.capacity() != self.source_len {
            return Err(CoarseError::SpaceMismatch("point set of wrong size".into()));
        }
        Ok(BitSet::from_iter(
            self.target_len(),
            self.rows
                .iter()
                .enumerate()
                .filter(|(_, row)| row.intersects(a))
                .map(|(y, _)| y),
        ))
    }

    /// `π_X(R)`.
    pub fn domain(&self) -> BitSet {
        let mut d = BitSet::new(self.source_len);
        for row in &self.rows {
            d.union_with(row);
        }
        d
    }

    /// `π_Y(R)`.
    pub fn range(&self) -> BitSet {
        BitSet::from_iter(
            self.target_len(),
            self.rows
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.is_empty())
                .map(|(y, _)| y),
        )
    }

    /// Keeps only pairs with `y ∈ ys` and `x ∈ xs`.
    pub fn restrict(&self, ys: &BitSet, xs: &BitSet) -> Relation {
        let mut out = self.clone();
        for (y, row) in out.rows.iter_mut().enumerate() {
            if ys.contains(y) {
                row.intersect_with(xs);
            } else {
                *row = BitSet::new(self.source_len);
            }
        }
        out
    }
}

/// `ρ(n) = max d_Y(y1, y2)` over pairs `(y1, x1), (y2, x2) ∈ R` with
/// `d_X(x1, x2) ≤ n`; this is the scale of `R ∘ E_n ∘ R^T`.
fn expansion_profile(r: &Relation, x: &Space, y: &Space) -> Profile<Scale> {
    let diam = x.finite_diameter() as usize;
    let mut by_dist = vec![Scale::ZERO; diam + 1];
    let mut at_inf = Scale::ZERO;
    let columns: Vec<(usize, Vec<usize>)> = {
        let t = r.transpose();
        (0..r.source_len())
            .filter(|&c| !t.row(c).is_empty())
            .map(|c| (c, t.row(c).iter().collect()))
            .collect()
    };
    for (x1, ys1) in &columns {
        for (x2, ys2) in &columns {
            if x2 < x1 {
                continue;
            }
            let mut cross = Scale::ZERO;
            'outer: for &a in ys1 {
                for &b in ys2 {
                    cross = cross.max(y.dist(a, b));
                    if cross == Scale::Infinite {
                        break 'outer;
                    }
                }
            }
            match x.dist(*x1, *x2) {
                Scale::Finite(d) => {
                    let slot = &mut by_dist[d as usize];
                    *slot = (*slot).max(cross);
                }
                Scale::Infinite => at_inf = at_inf.max(cross),
            }
        }
    }
    for i in 1..by_dist.len() {
        by_dist[i] = by_dist[i].max(by_dist[i - 1]);
    }
    let last = *by_dist.last().unwrap_or(&Scale::ZERO);
    Profile::new(by_dist, last.max(at_inf))
}

/// Quantitative classification of a relation against the map/relation
/// dictionary.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    /// Scale of `R ∘ E_n ∘ R^T` as a function of `n`.
    pub expansion: Profile<Scale>,
    /// Scale of `R^T ∘ E_n ∘ R`.
    pub co_expansion: Profile<Scale>,
    /// Least `n` with `dom ⊆ E_n[π_X(R)]`.
    pub densely_defined_scale: Scale,
    /// Least `n` with `codom ⊆ E_n[π_Y(R)]`.
    pub coarsely_surjective_scale: Scale,
}

/// Rows of the partial-map/relation dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationKind {
    Uncontrolled,
    PartialCoarseMap,
    CoarseMap,
    CoboundedPartialCoarseMap,
    ExpansiveCoarseMap,
    CoarseEquivalence,
}

impl RelationReport {
    pub fn is_controlled(&self) -> bool {
        self.expansion.finite_on_finite_scales()
    }

    pub fn is_densely_defined(&self) -> bool {
        self.is_controlled() && self.densely_defined_scale.is_finite()
    }

    pub fn is_coarsely_surjective(&self) -> bool {
        self.is_controlled() && self.coarsely_surjective_scale.is_finite()
    }

    pub fn is_partial_coarse_embedding(&self) -> bool {
        self.is_controlled() && self.co_expansion.finite_on_finite_scales()
    }

    pub fn is_coarse_equivalence(&self) -> bool {
        self.is_partial_coarse_embedding()
            && self.is_densely_defined()
            && self.is_coarsely_surjective()
    }

    /// Most specific dictionary row matched by the report.
    pub fn kind(&self) -> RelationKind {
        if !self.is_controlled() {
            RelationKind::Uncontrolled
        } else if self.is_coarse_equivalence() {
            RelationKind::CoarseEquivalence
        } else if self.is_partial_coarse_embedding() && self.is_densely_defined() {
            RelationKind::ExpansiveCoarseMap
        } else if self.is_densely_defined() {
            RelationKind::CoarseMap
        } else if self.is_coarsely_surjective() {
            RelationKind::CoboundedPartialCoarseMap
        } else {
            RelationKind::PartialCoarseMap
        }
    }
}

/// Classifies `R ⊆ Y × X` against the whole of `X` and `Y`.
pub fn classify_relation(r: &Relation, x: &Space, y: &Space) -> Result<RelationReport> {
    classify_relation_on(r, x, y, &x.all_points(), &y.all_points())
}

/// Like [`classify_relation`], with density measured against `dom_x` and
/// surjectivity against `dom_y`.
pub fn classify_relation_on(
    r: &Relation,
    x: &Space,
    y: &Space,
    dom_x: &BitSet,
    dom_y: &BitSet,
) -> Result<RelationReport> {
    if r.source_len() != x.len() || r.target_len() != y.len() {
        return Err(CoarseError::SpaceMismatch(format!(
            "relation is {}x{}, spaces have {} and {} points",
            r.target_len(),
            r.source_len(),
            y.len(),
            x.len()
        )));
    }
    let t = r.transpose();
    Ok(RelationReport {
        expansion: expansion_profile(r, x, y),
        co_expansion: expansion_profile(&t, y, x),
        densely_defined_scale: x.subordinate_scale(dom_x, &r.domain()),
        coarsely_surjective_scale: y.subordinate_scale(dom_y, &r.range()),
    })
}

/// Subordination of `R1` to `R2` as subsets of `Y × X` with the max-metric:
/// `max_{(y,x) ∈ R1} min_{(y',x') ∈ R2} max(d(y,y'), d(x,x'))`.
pub fn product_subordinate_scale(r1: &Relation, r2: &Relation, x: &Space, y: &Space) -> Scale {
    let targets: Vec<(usize, usize)> = r2.pairs().collect();
    let mut worst = Scale::ZERO;
    for (a, b) in r1.pairs() {
        let mut best = Scale::Infinite;
        for &(c, d) in &targets {
            let s = y.dist(a, c).max(x.dist(b, d));
            if s < best {
                best = s;
                if best == Scale::ZERO {
                    break;
                }
            }
        }
        worst = worst.max(best);
        if worst == Scale::Infinite {
            break;
        }
    }
    worst
}

/// Witness scale for `R1 ≍ R2` given `R1 ≺ R2` and `π_X(R2) ≺ π_X(R1)`.
///
/// Returns the larger of the two product subordination scales. For
/// controlled relations satisfying the preconditions this is finite.
pub fn asymptotic_from_inclusion(
    r1: &Relation,
    r2: &Relation,
    x: &Space,
    y: &Space,
) -> Result<Scale> {
    let forward = product_subordinate_scale(r1, r2, x, y);
    if !forward.is_finite() {
        return Err(CoarseError::Precondition { side: "R1 to R2", scale: forward });
    }
    let proj = x.subordinate_scale(&r2.domain(), &r1.domain());
    if !proj.is_finite() {
        return Err(CoarseError::Precondition { side: "pi_X(R2) to pi_X(R1)", scale: proj });
    }
    Ok(forward.max(product_subordinate_scale(r2, r1, x, y)))
}
