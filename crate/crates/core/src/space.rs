use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{CoarseError, Result};
use crate::profile::Profile;
use crate::relation::Relation;
use crate::scale::Scale;

/// Finite set `0..n` with an extended metric.
///
/// The metric `E_n = {(x, y) | d(x, y) ≤ n}` filtration generates the coarse
/// structure; points at distance `∞` lie in different coarsely connected
/// components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Space {
    n: usize,
    dist: Vec<Scale>,
}

impl Space {
    /// Validates zero diagonal, symmetry and the triangle inequality.
    pub fn new(rows: Vec<Vec<Scale>>) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(CoarseError::InvalidMetric(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        let space = Space { n, dist };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for x in 0..n {
            if self.dist(x, x) != Scale::ZERO {
                return Err(CoarseError::InvalidMetric(format!("d({x},{x}) != 0")));
            }
            for y in 0..n {
                if self.dist(x, y) != self.dist(y, x) {
                    return Err(CoarseError::InvalidMetric(format!(
                        "d({x},{y}) != d({y},{x})"
                    )));
                }
                if x != y && self.dist(x, y) == Scale::ZERO {
                    return Err(CoarseError::InvalidMetric(format!(
                        "distinct points {x},{y} at distance 0"
                    )));
                }
            }
        }
        for y in 0..n {
            for x in 0..n {
                let dxy = self.dist(x, y);
                if !dxy.is_finite() {
                    continue;
                }
                for z in 0..n {
                    if self.dist(x, z) > dxy + self.dist(y, z) {
                        return Err(CoarseError::InvalidMetric(format!(
                            "triangle inequality fails for ({x},{y},{z})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Trusted constructor for matrices that are metrics by construction.
    pub(crate) fn from_flat_unchecked(n: usize, dist: Vec<Scale>) -> Self {
        debug_assert_eq!(dist.len(), n * n);
        Space { n, dist }
    }

    /// Path metric `|i - j|` on `0..n`.
    pub fn interval(n: usize) -> Self {
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(Scale::Finite(i.abs_diff(j) as u64));
            }
        }
        Space::from_flat_unchecked(n, dist)
    }

    /// Hop-count metric of an undirected graph; unreachable pairs get `∞`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            for p in [a, b] {
                if p >= n {
                    return Err(CoarseError::UnknownPoint { point: p, len: n });
                }
            }
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut dist = vec![Scale::Infinite; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            dist[s * n + s] = Scale::ZERO;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let du = dist[s * n + u].finite().unwrap_or(0);
                for &v in &adj[u] {
                    if dist[s * n + v] == Scale::Infinite {
                        dist[s * n + v] = Scale::Finite(du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(Space::from_flat_unchecked(n, dist))
    }

    /// Disjoint union with `∞` between the parts; points are renumbered in
    /// order.
    pub fn disjoint_union(parts: &[Space]) -> Self {
        let n: usize = parts.iter().map(|p| p.n).sum();
        let mut dist = vec![Scale::Infinite; n * n];
        let mut off = 0;
        for p in parts {
            for i in 0..p.n {
                for j in 0..p.n {
                    dist[(off + i) * n + off + j] = p.dist(i, j);
                }
            }
            off += p.n;
        }
        Space::from_flat_unchecked(n, dist)
    }

    /// Largest metric below the given symmetric weights (shortest paths).
    pub(crate) fn path_closure(n: usize, mut w: Vec<Scale>) -> Self {
        for i in 0..n {
            w[i * n + i] = Scale::ZERO;
        }
        for k in 0..n {
            for i in 0..n {
                let wik = w[i * n + k];
                if !wik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let via = wik + w[k * n + j];
                    if via < w[i * n + j] {
                        w[i * n + j] = via;
                    }
                }
            }
        }
        Space::from_flat_unchecked(n, w)
    }

    /// Subspace on the listed points with the induced metric.
    pub fn induced(&self, points: &[usize]) -> Result<Self> {
        for &p in points {
            self.check_point(p)?;
        }
        let m = points.len();
        let mut dist = Vec::with_capacity(m * m);
        for &a in points {
            for &b in points {
                dist.push(self.dist(a, b));
            }
        }
        let sub = Space::from_flat_unchecked(m, dist);
        if points.len() != BitSet::from_iter(self.n, points.iter().copied()).count() {
            return Err(CoarseError::InvalidMetric("repeated point in subspace".into()));
        }
        Ok(sub)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> Scale {
        self.dist[x * self.n + y]
    }

    pub fn check_point(&self, p: usize) -> Result<()> {
        if p < self.n {
            Ok(())
        } else {
            Err(CoarseError::UnknownPoint { point: p, len: self.n })
        }
    }

    pub fn all_points(&self) -> BitSet {
        BitSet::full(self.n)
    }

    /// Supremum of all distances, `∞` if the space is disconnected.
    pub fn diameter(&self) -> Scale {
        self.dist.iter().copied().max().unwrap_or(Scale::ZERO)
    }

    /// Largest finite distance.
    pub fn finite_diameter(&self) -> u64 {
        self.dist.iter().filter_map(|d| d.finite()).max().unwrap_or(0)
    }

    /// The `E_n`-neighbourhood `E_n[A]`.
    pub fn ball(&self, a: &BitSet, n: Scale) -> BitSet {
        let mut out = BitSet::new(self.n);
        for x in 0..self.n {
            if a.iter().any(|p| self.dist(x, p) <= n) {
                out.insert(x);
            }
        }
        out
    }

    /// Least `n` with `A ⊆ E_n[B]`. `∅ ≺ B` at scale 0; a nonempty set is
    /// not subordinate to `∅` at any scale.
    pub fn subordinate_scale(&self, a: &BitSet, b: &BitSet) -> Scale {
        let mut worst = Scale::ZERO;
        for x in a.iter() {
            let near = b.iter().map(|y| self.dist(x, y)).min().unwrap_or(Scale::Infinite);
            worst = worst.max(near);
            if worst == Scale::Infinite {
                break;
            }
        }
        worst
    }

    /// `(A ≺ B scale, B ≺ A scale)`; `A ≍ B` iff both are finite.
    pub fn subordination(&self, a: &BitSet, b: &BitSet) -> (Scale, Scale) {
        (self.subordinate_scale(a, b), self.subordinate_scale(b, a))
    }

    /// Symmetric asymptotic witness `max` of both subordination scales.
    pub fn asymptotic_scale(&self, a: &BitSet, b: &BitSet) -> Scale {
        let (ab, ba) = self.subordination(a, b);
        ab.max(ba)
    }

    /// Component label of each point: the smallest point in its class.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        for x in 0..self.n {
            if label[x] != usize::MAX {
                continue;
            }
            for y in x..self.n {
                if self.dist(x, y).is_finite() {
                    label[y] = x;
                }
            }
        }
        label
    }

    /// Component index `0..k` of each point, numbered by smallest member.
    pub fn component_indices(&self) -> (usize, Vec<usize>) {
        let labels = self.components();
        let mut next = 0;
        let mut map = vec![usize::MAX; self.n];
        let mut out = Vec::with_capacity(self.n);
        for &l in &labels {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            out.push(map[l]);
        }
        (next, out)
    }

    /// Set scale of a relation on this space: `max d(x, y)` over its pairs.
    pub fn entourage_scale(&self, e: &Relation) -> Scale {
        debug_assert_eq!(e.source_len(), self.n);
        debug_assert_eq!(e.target_len(), self.n);
        e.pairs().map(|(y, x)| self.dist(y, x)).max().unwrap_or(Scale::ZERO)
    }

    fn check_map(&self, target: &Space, f: &[usize]) -> Result<()> {
        if f.len() != self.n {
            return Err(CoarseError::InvalidMap(format!(
                "map has {} entries for {} points",
                f.len(),
                self.n
            )));
        }
        for &y in f {
            target.check_point(y)?;
        }
        Ok(())
    }

    /// Expansion profile `ρ(n) = max d_Y(f x, f y)` over `d_X(x, y) ≤ n`.
    pub fn map_expansion(&self, target: &Space, f: &[usize]) -> Result<Profile<Scale>> {
        self.check_map(target, f)?;
        let diam = self.finite_diameter() as usize;
        let mut by_dist = vec![Scale::ZERO; diam + 1];
        let mut at_inf = Scale::ZERO;
        for x in 0..self.n {
            for y in 0..self.n {
                let img = target.dist(f[x], f[y]);
                match self.dist(x, y) {
                    Scale::Finite(d) => {
                        let slot = &mut by_dist[d as usize];
                        *slot = (*slot).max(img);
                    }
                    Scale::Infinite => at_inf = at_inf.max(img),
                }
            }
        }
        for i in 1..by_dist.len() {
            by_dist[i] = by_dist[i].max(by_dist[i - 1]);
        }
        let last = *by_dist.last().unwrap_or(&Scale::ZERO);
        Ok(Profile::new(by_dist, last.max(at_inf)))
    }

    /// `max_x d_Y(f x, g x)`; the maps are close iff this is finite.
    pub fn closeness(&self, target: &Space, f: &[usize], g: &[usize]) -> Result<Scale> {
        self.check_map(target, f)?;
        self.check_map(target, g)?;
        Ok(f.iter()
            .zip(g)
            .map(|(&a, &b)| target.dist(a, b))
            .max()
            .unwrap_or(Scale::ZERO))
    }
}
