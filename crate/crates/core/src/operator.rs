//! Operators between coarse modules.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoarseError, Result};
use crate::lfcm::Module;
use crate::matrix::{CMatrix, C64};
use crate::norm::{operator_norm, DEFAULT_TOL};
use crate::profile::Profile;
use crate::relation::Relation;
use crate::scale::Scale;

/// Relative tolerance used by [`Operator::default_tol`].
pub const SUPPORT_REL_TOL: f64 = 1e-12;

/// A complex matrix `target.dim × source.dim` between two modules.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    source: Module,
    target: Module,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(source: Module, target: Module, matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(CoarseError::ShapeMismatch {
                expected_rows: target.dim(),
                expected_cols: source.dim(),
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(Operator { source, target, matrix })
    }

    pub(crate) fn from_parts(source: Module, target: Module, matrix: CMatrix) -> Self {
        debug_assert_eq!((matrix.rows(), matrix.cols()), (target.dim(), source.dim()));
        Operator { source, target, matrix }
    }

    pub fn identity(c: &Module) -> Self {
        Operator::from_parts(c.clone(), c.clone(), CMatrix::identity(c.dim()))
    }

    pub fn zero(source: &Module, target: &Module) -> Self {
        Operator::from_parts(source.clone(), target.clone(), CMatrix::zeros(target.dim(), source.dim()))
    }

    pub fn source(&self) -> &Module {
        &self.source
    }

    pub fn target(&self) -> &Module {
        &self.target
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Same matrix, relabelled source and target. Dimensions must agree.
    pub fn relabel(&self, source: &Module, target: &Module) -> Result<Operator> {
        Operator::new(source.clone(), target.clone(), self.matrix.clone())
    }

    /// Source and target live over the same space.
    pub fn is_endogenous(&self) -> bool {
        self.source.same_space_as(&self.target)
    }

    pub fn norm(&self) -> f64 {
        operator_norm(&self.matrix, DEFAULT_TOL)
    }

    /// `1e-12 · ‖t‖`.
    pub fn default_tol(&self) -> f64 {
        SUPPORT_REL_TOL * self.norm()
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrix.unitarity_defect()
    }

    /// `‖1_B t 1_A‖` for target block `b` and source block `a`.
    pub fn block_norm(&self, b: usize, a: usize) -> f64 {
        let rows = self.target.coords_of(b);
        let cols = self.source.coords_of(a);
        match (rows.len(), cols.len()) {
            (0, _) | (_, 0) => 0.0,
            (1, 1) => self.matrix[(rows[0], cols[0])].norm(),
            _ => operator_norm(&self.matrix.select(rows, cols), DEFAULT_TOL),
        }
    }

    /// All block norms, row-major over (target block, source block).
    pub fn block_norms(&self) -> Vec<f64> {
        let (ny, nx) = (self.target.space().block_count(), self.source.space().block_count());
        let mut out = vec![0.0; ny * nx];
        for b in 0..ny {
            if self.target.rank(b) == 0 {
                continue;
            }
            for a in 0..nx {
                out[b * nx + a] = self.block_norm(b, a);
            }
        }
        out
    }

    /// Block pairs `(B, A)` with `‖1_B t 1_A‖ > tol`.
    pub fn block_support(&self, tol: f64) -> Vec<(usize, usize)> {
        let nx = self.source.space().block_count();
        self.block_norms()
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v > tol)
            .map(|(i, _)| (i / nx, i % nx))
            .collect()
    }

    /// Union of the rectangles `B × A` over [`Operator::block_support`].
    pub fn support(&self, tol: f64) -> Relation {
        let (sx, sy) = (self.source.space(), self.target.space());
        let blocks = self.block_support(tol);
        Relation::from_rectangles(
            sx.point_count(),
            sy.point_count(),
            blocks.iter().map(|&(b, a)| (sy.block(b), sx.block(a))),
        )
    }

    /// Scale of the support; only defined between modules over one space.
    pub fn propagation(&self, tol: f64) -> Result<Scale> {
        self.require_endogenous()?;
        let sp = self.source.space();
        Ok(self
            .block_support(tol)
            .iter()
            .map(|&(b, a)| sp.block_pair_scale(b, a))
            .max()
            .unwrap_or(Scale::ZERO))
    }

    fn require_endogenous(&self) -> Result<()> {
        if self.is_endogenous() {
            Ok(())
        } else {
            Err(CoarseError::SpaceMismatch("operator is not endogenous".into()))
        }
    }

    /// `self ∘ t`.
    pub fn compose(&self, t: &Operator) -> Result<Operator> {
        if t.target != self.source {
            return Err(CoarseError::SpaceMismatch("operators are not composable".into()));
        }
        Ok(Operator::from_parts(t.source.clone(), self.target.clone(), self.matrix.matmul(&t.matrix)?))
    }

    fn check_parallel(&self, other: &Operator) -> Result<()> {
        if self.source != other.source || self.target != other.target {
            return Err(CoarseError::SpaceMismatch("operators have different modules".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_parallel(other)?;
        Ok(Operator::from_parts(self.source.clone(), self.target.clone(), self.matrix.add(&other.matrix)?))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_parallel(other)?;
        Ok(Operator::from_parts(self.source.clone(), self.target.clone(), self.matrix.sub(&other.matrix)?))
    }

    pub fn scaled(&self, c: C64) -> Operator {
        Operator::from_parts(self.source.clone(), self.target.clone(), self.matrix.scaled(c))
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_parts(self.target.clone(), self.source.clone(), self.matrix.adjoint())
    }

    /// `t ⊕ h : C ⊕ C' → D ⊕ D'` over the given sum modules.
    pub fn direct_sum(&self, h: &Operator, source: &Module, target: &Module) -> Result<Operator> {
        Operator::new(source.clone(), target.clone(), self.matrix.direct_sum(&h.matrix))
    }

    pub fn inverse(&self) -> Option<Operator> {
        if self.matrix.rows() != self.matrix.cols() {
            return None;
        }
        self.matrix
            .inverse()
            .map(|m| Operator::from_parts(self.target.clone(), self.source.clone(), m))
    }

    /// Zeroes every block `(B, A)` whose rectangle has scale `> n`.
    pub fn truncate(&self, n: Scale) -> Result<Operator> {
        self.require_endogenous()?;
        let sp = self.source.space().clone();
        let mut m = self.matrix.clone();
        for b in 0..sp.block_count() {
            for a in 0..sp.block_count() {
                if sp.block_pair_scale(b, a) > n {
                    m.zero_block(self.target.coords_of(b), self.source.coords_of(a));
                }
            }
        }
        Ok(Operator::from_parts(self.source.clone(), self.target.clone(), m))
    }

    /// Upper bound `‖t − truncate(t, n)‖` and lower bound
    /// `max ‖1_B t 1_A‖` over blocks with scale `> n`, on the distance from `t`
    /// to the operators of propagation `≤ n`.
    pub fn approx_profile(&self) -> Result<ApproxProfile> {
        self.require_endogenous()?;
        let sp = self.source.space();
        let nb = sp.block_count();
        let norms = self.block_norms();
        let mut top = 0u64;
        for b in 0..nb {
            for a in 0..nb {
                if let Scale::Finite(s) = sp.block_pair_scale(b, a) {
                    top = top.max(s);
                }
            }
        }
        let mut upper = Vec::with_capacity(top as usize + 1);
        let mut lower = Vec::with_capacity(top as usize + 1);
        for n in 0..=top {
            let n = Scale::Finite(n);
            let off = (0..nb * nb)
                .filter(|&i| sp.block_pair_scale(i / nb, i % nb) > n)
                .map(|i| norms[i])
                .fold(0.0, f64::max);
            lower.push(off);
            // the removed part dominates each of its blocks; clamp away rounding
            upper.push(if off == 0.0 { 0.0 } else { self.sub(&self.truncate(n)?)?.norm().max(off) });
        }
        let mut certified = upper.clone();
        for i in 1..certified.len() {
            certified[i] = certified[i].min(certified[i - 1]);
        }
        Ok(ApproxProfile {
            upper: Profile::new(upper, 0.0),
            lower: Profile::new(lower, 0.0),
            certified: Profile::new(certified, 0.0),
        })
    }

    /// Compares `π_Y(Supp t)` with `dom_1` of the target; the witness is the
    /// asymptotic scale between the two.
    pub fn is_coarsely_full(&self, tol: f64) -> (bool, Scale) {
        let sy = self.target.space();
        let range = self.support(tol).range();
        let dom = sy.points_of(&self.target.support_blocks());
        let w = sy.base().asymptotic_scale(&range, &dom);
        (w.is_finite(), w)
    }
}

/// Bracket on the distance to propagation-`n` operators.
///
/// `upper` is the truncation error at `n` itself. Masking blocks is not
/// norm-monotone, so `upper` can increase with `n`; `certified` is its
/// running minimum, the best truncation bound among scales `≤ n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxProfile {
    pub upper: Profile<f64>,
    pub lower: Profile<f64>,
    pub certified: Profile<f64>,
}

fn random_unit_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..core::f64::consts::TAU))
}

/// Entries uniform in the unit square, on every block pair.
pub fn random_operator<R: Rng>(source: &Module, target: &Module, rng: &mut R) -> Operator {
    let m = CMatrix::from_fn(target.dim(), source.dim(), |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    Operator::from_parts(source.clone(), target.clone(), m)
}

/// Random operator truncated to propagation `≤ n`.
pub fn random_band_operator<R: Rng>(source: &Module, target: &Module, n: Scale, rng: &mut R) -> Result<Operator> {
    random_operator(source, target, rng).truncate(n)
}

/// Unitary of propagation `≤ max(n, disc)`: one layer of 2×2 rotations on a
/// random matching of coordinates whose blocks are within `n`, with random
/// phases on the unmatched coordinates.
pub fn random_controlled_unitary(c: &Module, n: Scale, seed: u64) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sp = c.space();
    let d = c.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(&mut rng);
    let mut partner = vec![usize::MAX; d];
    let mut candidates = Vec::new();
    for (i, &k) in order.iter().enumerate() {
        if partner[k] != usize::MAX {
            continue;
        }
        let bk = c.coord_block(k);
        candidates.clear();
        candidates.extend(order[i + 1..].iter().copied().filter(|&j| {
            let bj = c.coord_block(j);
            partner[j] == usize::MAX && (bj == bk || sp.block_pair_scale(bk, bj) <= n)
        }));
        if let Some(&j) = candidates.choose(&mut rng) {
            partner[k] = j;
            partner[j] = k;
        } else {
            partner[k] = k;
        }
    }
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        let j = partner[k];
        if j == k {
            m[(k, k)] = random_unit_complex(&mut rng);
        } else if k < j {
            let theta = rng.gen_range(0.0..core::f64::consts::FRAC_PI_2);
            let a = random_unit_complex(&mut rng) * libm::cos(theta);
            let b = random_unit_complex(&mut rng) * libm::sin(theta);
            let w = random_unit_complex(&mut rng);
            m[(k, k)] = a;
            m[(k, j)] = b;
            m[(j, k)] = -w * b.conj();
            m[(j, j)] = w * a.conj();
        }
    }
    Operator::from_parts(c.clone(), c.clone(), m)
}

/// Random contraction of propagation `≤ n`: a band operator scaled to norm 1.
pub fn random_band_contraction<R: Rng>(c: &Module, n: Scale, rng: &mut R) -> Result<Operator> {
    let t = random_band_operator(c, c, n, rng)?;
    let norm = t.norm();
    Ok(if norm > 0.0 { t.scaled(C64::new(1.0 / norm, 0.0)) } else { t })
}

/// For each `n ≤ n_max`, the least `m` such that `upper_{U t U*}(m) ≤ ε` over
/// `samples` random propagation-`≤ n` contractions `t` on the source.
/// Sample `i` at scale `n` is drawn from its own seed, so the result does not
/// depend on evaluation order.
pub fn coarse_like_profile(u: &Operator, n_max: u64, samples: usize, eps: f64, seed: u64) -> Result<Vec<Scale>> {
    let c = u.source();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let mut worst = Scale::ZERO;
        for i in 0..samples {
            let sub = seed ^ (n.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(i as u64).rotate_left(17);
            let mut rng = ChaCha8Rng::seed_from_u64(sub);
            let t = random_band_contraction(c, Scale::Finite(n), &mut rng)?;
            let conj = u.compose(&t)?.compose(&u.adjoint())?;
            worst = worst.max(first_within(&conj.approx_profile()?.upper, eps));
        }
        out.push(worst);
    }
    Ok(out)
}

fn first_within(p: &Profile<f64>, eps: f64) -> Scale {
    p.steps()
        .iter()
        .position(|&v| v <= eps)
        .map(|i| Scale::Finite(i as u64))
        .unwrap_or(Scale::Infinite)
}
