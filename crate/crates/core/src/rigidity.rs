//! Approximate relations of operators and the extraction of coarse
//! embeddings from unitaries.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{CoarseError, Result};
use crate::lfcm::{domain, same_space, LfcmSpace, Module};
use crate::matrix::{CMatrix, C64};
use crate::norm::{operator_norm, DEFAULT_TOL};
use crate::operator::Operator;
use crate::relation::{classify_relation_on, product_subordinate_scale, Relation, RelationReport};
use crate::scale::Scale;

/// Which measurable sets `B × A` are tested against `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Single partition blocks.
    Blocks,
    /// The union of the blocks inside the `F`-ball (target) or `E`-ball
    /// (source) around each block.
    Windows,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxParams {
    pub delta: f64,
    pub f_scale: Scale,
    pub e_scale: Scale,
    pub mode: Mode,
}

impl ApproxParams {
    pub fn new(delta: f64, f_scale: Scale, e_scale: Scale, mode: Mode) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(CoarseError::InvalidParams(format!("delta {delta} is outside (0, 1)")));
        }
        Ok(ApproxParams { delta, f_scale, e_scale, mode })
    }

    /// Parameters for the adjoint: `(δ, E, F)`.
    pub fn swapped(&self) -> Self {
        ApproxParams { f_scale: self.e_scale, e_scale: self.f_scale, ..*self }
    }

    /// `self ≤ other` in the order under which approximate relations grow.
    pub fn is_below(&self, other: &ApproxParams) -> bool {
        self.mode == other.mode
            && other.delta <= self.delta
            && self.f_scale <= other.f_scale
            && self.e_scale <= other.e_scale
    }
}

/// `δ = min`, scales `max`.
pub fn parameter_join(p1: &ApproxParams, p2: &ApproxParams) -> Result<ApproxParams> {
    if p1.mode != p2.mode {
        return Err(CoarseError::InvalidParams("cannot join parameters of different modes".into()));
    }
    Ok(ApproxParams {
        delta: p1.delta.min(p2.delta),
        f_scale: p1.f_scale.max(p2.f_scale),
        e_scale: p1.e_scale.max(p2.e_scale),
        mode: p1.mode,
    })
}

fn windows(space: &LfcmSpace, r: Scale) -> Vec<BitSet> {
    (0..space.block_count()).map(|b| space.window(b, r)).collect()
}

/// `f^T_{δ,F,E}`: union of `B × A` with `‖1_B T 1_A‖ > δ`.
pub fn approximate_relation(t: &Operator, p: &ApproxParams) -> Result<Relation> {
    ApproxParams::new(p.delta, p.f_scale, p.e_scale, p.mode)?;
    let (sx, sy) = (t.source().space(), t.target().space());
    if p.f_scale < sy.disc_gauge_scale() || p.e_scale < sx.disc_gauge_scale() {
        return Err(CoarseError::InvalidParams(format!(
            "scales ({}, {}) are below the discreteness gauges ({}, {})",
            p.f_scale,
            p.e_scale,
            sy.disc_gauge_scale(),
            sx.disc_gauge_scale()
        )));
    }
    let mut out = Relation::empty(sx.point_count(), sy.point_count());
    match p.mode {
        Mode::Blocks => {
            for (b, a) in t.block_support(p.delta) {
                for &y in sy.block(b) {
                    for &x in sx.block(a) {
                        out.insert(y, x);
                    }
                }
            }
        }
        Mode::Windows => {
            let wy = windows(sy, p.f_scale);
            let wx = windows(sx, p.e_scale);
            let rows: Vec<Vec<usize>> = wy.iter().map(|w| t.target().coords_of_blocks(w)).collect();
            let cols: Vec<Vec<usize>> = wx.iter().map(|w| t.source().coords_of_blocks(w)).collect();
            let pts_y: Vec<BitSet> = wy.iter().map(|w| sy.points_of(w)).collect();
            let pts_x: Vec<Vec<usize>> = wx.iter().map(|w| sx.points_of(w).iter().collect()).collect();
            for b in 0..sy.block_count() {
                for a in 0..sx.block_count() {
                    if rows[b].is_empty() || cols[a].is_empty() {
                        continue;
                    }
                    let m = t.matrix().select(&rows[b], &cols[a]);
                    if operator_norm(&m, DEFAULT_TOL) > p.delta {
                        for y in pts_y[b].iter() {
                            for &x in &pts_x[a] {
                                out.insert(y, x);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Unimodular scalar per coarsely connected component of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralUnitary {
    space: Arc<LfcmSpace>,
    phases: Vec<f64>,
}

/// One angle per component, indexed as in `Space::component_indices`.
pub fn make_central_unitary(space: Arc<LfcmSpace>, phases: Vec<f64>) -> Result<CentralUnitary> {
    if phases.len() != space.component_count() {
        return Err(CoarseError::DimensionMismatch {
            expected: space.component_count(),
            got: phases.len(),
        });
    }
    Ok(CentralUnitary { space, phases })
}

impl CentralUnitary {
    pub fn identity(space: Arc<LfcmSpace>) -> Self {
        let phases = vec![0.0; space.component_count()];
        CentralUnitary { space, phases }
    }

    pub fn from_scalars(space: Arc<LfcmSpace>, scalars: &[C64]) -> Result<Self> {
        make_central_unitary(space, scalars.iter().map(|z| z.arg()).collect())
    }

    pub fn space(&self) -> &Arc<LfcmSpace> {
        &self.space
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn scalar(&self, component: usize) -> C64 {
        C64::from_polar(1.0, self.phases[component])
    }

    /// Componentwise product.
    pub fn then(&self, other: &CentralUnitary) -> Result<CentralUnitary> {
        if !same_space(&self.space, &other.space) {
            return Err(CoarseError::SpaceMismatch("central unitaries over different spaces".into()));
        }
        let phases = self.phases.iter().zip(&other.phases).map(|(a, b)| a + b).collect();
        Ok(CentralUnitary { space: self.space.clone(), phases })
    }

    pub fn inverse(&self) -> CentralUnitary {
        CentralUnitary { space: self.space.clone(), phases: self.phases.iter().map(|a| -a).collect() }
    }

    /// The diagonal operator this unitary induces on a module.
    pub fn on(&self, c: &Module) -> Result<Operator> {
        if !same_space(&self.space, c.space()) {
            return Err(CoarseError::SpaceMismatch("module is not over the unitary's space".into()));
        }
        let mut m = CMatrix::zeros(c.dim(), c.dim());
        for k in 0..c.dim() {
            m[(k, k)] = self.scalar(self.space.block_component(c.coord_block(k)));
        }
        Operator::new(c.clone(), c.clone(), m)
    }
}

/// Whether `f^{vTu} = f^T` as sets.
pub fn central_invariance_check(
    t: &Operator,
    u: &CentralUnitary,
    v: &CentralUnitary,
    p: &ApproxParams,
) -> Result<bool> {
    let vtu = v.on(t.target())?.compose(t)?.compose(&u.on(t.source())?)?;
    Ok(approximate_relation(&vtu, p)? == approximate_relation(t, p)?)
}

/// When a schedule step counts as a success.
#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdPolicy {
    /// Density witness `≤ E`, surjectivity witness `≤ F`, `ρ(disc_X) ≤ F`,
    /// co-expansion at `disc_Y` `≤ E`, inverse thickening `≤ max(F, E)`.
    StepScales,
    Fixed(Thresholds),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub densely_defined: Scale,
    pub coarsely_surjective: Scale,
    pub expansion: Scale,
    pub co_expansion: Scale,
    pub inverse_thickening: Scale,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionConfig {
    pub delta: f64,
    pub schedule: Vec<(Scale, Scale)>,
    pub mode: Mode,
    pub thresholds: ThresholdPolicy,
}

impl ExtractionConfig {
    pub fn new(delta: f64, schedule: Vec<(Scale, Scale)>, mode: Mode) -> Self {
        ExtractionConfig { delta, schedule, mode, thresholds: ThresholdPolicy::StepScales }
    }
}

/// `(d, d), (m, m), (2m, 2m), …` with `d = disc`, `m = max(d, 1)`, stopping
/// at the first entry reaching `diameter`.
pub fn doubling_schedule(disc: Scale, diameter: u64) -> Vec<(Scale, Scale)> {
    let d = disc.finite().unwrap_or(0);
    let mut out = vec![(Scale::Finite(d), Scale::Finite(d))];
    let mut s = d.max(1);
    while out.last().map(|&(f, _)| f < Scale::Finite(diameter)).unwrap_or(true) {
        if Scale::Finite(s) > out.last().unwrap().0 {
            out.push((Scale::Finite(s), Scale::Finite(s)));
        }
        s = s.saturating_mul(2);
    }
    out
}

/// Schedule for a unitary between modules over `X` and `Y`.
pub fn default_schedule(u: &Operator) -> Vec<(Scale, Scale)> {
    let (sx, sy) = (u.source().space(), u.target().space());
    let disc = sx.disc_gauge_scale().max(sy.disc_gauge_scale());
    let diam = sx.base().finite_diameter().max(sy.base().finite_diameter());
    doubling_schedule(disc, diam)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessScales {
    pub densely_defined: Scale,
    pub coarsely_surjective: Scale,
    pub expansion_at_disc: Scale,
    pub co_expansion_at_disc: Scale,
    pub controlled: bool,
    pub co_controlled: bool,
    /// Subordination of `f^{U*}` to `(f^U)^T` in the product metric.
    pub inverse_thickening: Scale,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepFailure {
    NotDenselyDefined,
    NotCoarselySurjective,
    Uncontrolled,
    TransposeUncontrolled,
    ExpansionTooLarge,
    CoExpansionTooLarge,
    InverseIncompatible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub delta: f64,
    pub f_scale: Scale,
    pub e_scale: Scale,
    pub mode: Mode,
    pub relation_size: usize,
    pub witness: WitnessScales,
    pub failures: Vec<StepFailure>,
}

impl StepDiagnostics {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    /// `f^U` at the successful step, or at the best failed step.
    pub relation: Relation,
    pub report: RelationReport,
    pub steps: Vec<StepDiagnostics>,
    pub chosen_step: usize,
    pub success: bool,
}

/// Walks the schedule and returns at the first step where `f^U`, restricted
/// to `dom_1(C_Y) × dom_1(C_X)`, passes the threshold policy.
pub fn extract_embedding(u: &Operator, cfg: &ExtractionConfig) -> Result<Extraction> {
    if cfg.schedule.is_empty() {
        return Err(CoarseError::EmptySchedule);
    }
    if cfg.schedule.windows(2).any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1) {
        return Err(CoarseError::InvalidParams("schedule scales must be nondecreasing".into()));
    }
    let (sx, sy) = (u.source().space().clone(), u.target().space().clone());
    let dom_x = sx.points_of(&domain(u.source(), 1)?.blocks);
    let dom_y = sy.points_of(&domain(u.target(), 1)?.blocks);
    let ua = u.adjoint();
    let mut steps = Vec::with_capacity(cfg.schedule.len());
    let mut best: Option<(usize, Relation, RelationReport)> = None;
    let mut cached: Option<(Relation, Relation)> = None;
    for (i, &(f, e)) in cfg.schedule.iter().enumerate() {
        let p = ApproxParams::new(cfg.delta, f, e, cfg.mode)?;
        let (fwd, back) = match (&cached, cfg.mode) {
            (Some(c), Mode::Blocks) => c.clone(),
            _ => {
                let fwd = approximate_relation(u, &p)?.restrict(&dom_y, &dom_x);
                let back = approximate_relation(&ua, &p.swapped())?.restrict(&dom_x, &dom_y);
                (fwd, back)
            }
        };
        if cfg.mode == Mode::Blocks {
            cached = Some((fwd.clone(), back.clone()));
        }
        let report = classify_relation_on(&fwd, sx.base(), sy.base(), &dom_x, &dom_y)?;
        let witness = WitnessScales {
            densely_defined: report.densely_defined_scale,
            coarsely_surjective: report.coarsely_surjective_scale,
            expansion_at_disc: report.expansion.at(sx.disc_gauge_scale()),
            co_expansion_at_disc: report.co_expansion.at(sy.disc_gauge_scale()),
            controlled: report.expansion.finite_on_finite_scales(),
            co_controlled: report.co_expansion.finite_on_finite_scales(),
            inverse_thickening: product_subordinate_scale(&back, &fwd.transpose(), sy.base(), sx.base()),
        };
        let th = match &cfg.thresholds {
            ThresholdPolicy::StepScales => Thresholds {
                densely_defined: e,
                coarsely_surjective: f,
                expansion: f,
                co_expansion: e,
                inverse_thickening: f.max(e),
            },
            ThresholdPolicy::Fixed(t) => *t,
        };
        let failures = judge(&witness, &th);
        let diag = StepDiagnostics {
            delta: cfg.delta,
            f_scale: f,
            e_scale: e,
            mode: cfg.mode,
            relation_size: fwd.len(),
            witness,
            failures,
        };
        let ok = diag.succeeded();
        let better = match &best {
            None => true,
            Some((j, _, _)) => diag.failures.len() < steps_failures(&steps, *j),
        };
        steps.push(diag);
        if ok || better {
            best = Some((i, fwd, report));
        }
        if ok {
            break;
        }
    }
    let (chosen_step, relation, report) = best.expect("schedule is nonempty");
    let success = steps[chosen_step].succeeded();
    Ok(Extraction { relation, report, steps, chosen_step, success })
}

fn steps_failures(steps: &[StepDiagnostics], j: usize) -> usize {
    steps[j].failures.len()
}

fn judge(w: &WitnessScales, th: &Thresholds) -> Vec<StepFailure> {
    let mut out = Vec::new();
    if w.densely_defined > th.densely_defined {
        out.push(StepFailure::NotDenselyDefined);
    }
    if w.coarsely_surjective > th.coarsely_surjective {
        out.push(StepFailure::NotCoarselySurjective);
    }
    if !w.controlled {
        out.push(StepFailure::Uncontrolled);
    }
    if !w.co_controlled {
        out.push(StepFailure::TransposeUncontrolled);
    }
    if w.expansion_at_disc > th.expansion {
        out.push(StepFailure::ExpansionTooLarge);
    }
    if w.co_expansion_at_disc > th.co_expansion {
        out.push(StepFailure::CoExpansionTooLarge);
    }
    if w.inverse_thickening > th.inverse_thickening {
        out.push(StepFailure::InverseIncompatible);
    }
    out
}

/// Witness for one rank threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KappaWitness {
    pub kappa: usize,
    pub witness: Scale,
    pub bound: Scale,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainInvariance {
    pub condition: f64,
    pub propagation: Scale,
    pub inverse_propagation: Scale,
    pub per_kappa: Vec<KappaWitness>,
}

impl DomainInvariance {
    pub fn all_within(&self) -> bool {
        self.per_kappa.iter().all(|k| k.within)
    }
}

/// Largest condition number accepted by [`domain_invariance_check`].
pub const MAX_CONDITION: f64 = 1e12;

/// Asymptotic witness between `dom_κ` of source and target of an invertible
/// endogenous `t`, against `max(prop t, prop t⁻¹) + 2·disc`.
pub fn domain_invariance_check(t: &Operator, kappas: &[usize]) -> Result<DomainInvariance> {
    if !t.is_endogenous() {
        return Err(CoarseError::SpaceMismatch("operator is not endogenous".into()));
    }
    let inv = t.inverse().ok_or(CoarseError::Singular { condition: f64::INFINITY })?;
    let condition = t.norm() * inv.norm();
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(CoarseError::Singular { condition });
    }
    let propagation = t.propagation(t.default_tol())?;
    let inverse_propagation = inv.propagation(inv.default_tol())?;
    let sp = t.source().space();
    let bound = propagation.max(inverse_propagation) + sp.disc_gauge_scale().times(2);
    let mut per_kappa = Vec::with_capacity(kappas.len());
    for &kappa in kappas {
        let a = sp.points_of(&domain(t.source(), kappa)?.blocks);
        let b = sp.points_of(&domain(t.target(), kappa)?.blocks);
        let witness = sp.base().asymptotic_scale(&a, &b);
        per_kappa.push(KappaWitness { kappa, witness, bound, within: witness <= bound });
    }
    Ok(DomainInvariance { condition, propagation, inverse_propagation, per_kappa })
}

/// Human-readable failure list for diagnostics.
pub fn describe_failures(f: &[StepFailure]) -> String {
    let mut s = String::new();
    for (i, x) in f.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(match x {
            StepFailure::NotDenselyDefined => "not densely defined",
            StepFailure::NotCoarselySurjective => "not coarsely surjective",
            StepFailure::Uncontrolled => "uncontrolled",
            StepFailure::TransposeUncontrolled => "transpose uncontrolled",
            StepFailure::ExpansionTooLarge => "expansion above threshold",
            StepFailure::CoExpansionTooLarge => "co-expansion above threshold",
            StepFailure::InverseIncompatible => "inverse outside thickening",
        });
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfcm::{make_module, uniform_module, DimensionVector};
    use crate::operator::{random_controlled_unitary, random_operator};
    use crate::space::Space;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(n: usize) -> Module {
        uniform_module(Arc::new(LfcmSpace::singletons(Space::interval(n))))
    }

    fn perm(c: &Module, f: impl Fn(usize) -> usize) -> Operator {
        let n = c.dim();
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(if i == f(j) { 1.0 } else { 0.0 }, 0.0));
        Operator::new(c.clone(), c.clone(), m).unwrap()
    }

    fn blocks(delta: f64) -> ApproxParams {
        ApproxParams::new(delta, Scale::ZERO, Scale::ZERO, Mode::Blocks).unwrap()
    }

    #[test]
    fn reversal_and_identity() {
        let c = z(6);
        let rev = perm(&c, |j| 5 - j);
        let want = Relation::graph(&[5, 4, 3, 2, 1, 0], 6).unwrap();
        assert_eq!(approximate_relation(&rev, &blocks(0.5)).unwrap(), want);
        assert_eq!(approximate_relation(&Operator::identity(&c), &blocks(0.9)).unwrap(), Relation::identity(6));
        assert!(ApproxParams::new(1.0, Scale::ZERO, Scale::ZERO, Mode::Blocks).is_err());
    }

    #[test]
    fn windows_catch_split_mass() {
        let c = z(2);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let m = CMatrix::from_real(2, 2, &[h, 0.0, h, 0.0]).unwrap();
        let t = Operator::new(c.clone(), c.clone(), m).unwrap();
        assert_eq!(approximate_relation(&t, &blocks(0.5)).unwrap().len(), 2);
        assert!(approximate_relation(&t, &blocks(0.8)).unwrap().is_empty());
        let w = ApproxParams::new(0.8, Scale::Finite(1), Scale::ZERO, Mode::Windows).unwrap();
        let r = approximate_relation(&t, &w).unwrap();
        assert_eq!(r.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn join_example() {
        let p1 = ApproxParams::new(0.3, Scale::Finite(2), Scale::Finite(1), Mode::Blocks).unwrap();
        let p2 = ApproxParams::new(0.1, Scale::Finite(1), Scale::Finite(4), Mode::Blocks).unwrap();
        let j = parameter_join(&p1, &p2).unwrap();
        assert_eq!((j.delta, j.f_scale, j.e_scale), (0.1, Scale::Finite(2), Scale::Finite(4)));
        assert_eq!(parameter_join(&p1, &p1).unwrap(), p1);
        let w = ApproxParams { mode: Mode::Windows, ..p1 };
        assert!(parameter_join(&p1, &w).is_err());
    }

    #[test]
    fn central_unitaries() {
        let sp = Arc::new(LfcmSpace::singletons(Space::disjoint_union(&[Space::interval(3), Space::interval(3)])));
        let c = uniform_module(sp.clone());
        assert_eq!(make_central_unitary(sp.clone(), vec![0.0, 0.0]).unwrap().on(&c).unwrap(), Operator::identity(&c));
        let flip = make_central_unitary(sp.clone(), vec![0.0, core::f64::consts::PI]).unwrap().on(&c).unwrap();
        for k in 0..6 {
            let want = if k < 3 { 1.0 } else { -1.0 };
            assert!((flip.matrix()[(k, k)] - C64::new(want, 0.0)).norm() < 1e-15);
        }
        assert!(make_central_unitary(sp.clone(), vec![0.0]).is_err());
        let conn = Arc::new(LfcmSpace::singletons(Space::interval(4)));
        let s = make_central_unitary(conn.clone(), vec![0.7]).unwrap().on(&uniform_module(conn)).unwrap();
        assert_eq!(s.matrix(), &CMatrix::identity(4).scaled(C64::from_polar(1.0, 0.7)));

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..100u64 {
            let t = random_operator(&c, &c, &mut rng);
            let u = make_central_unitary(sp.clone(), vec![seed as f64 * 0.37, 1.1]).unwrap();
            let v = make_central_unitary(sp.clone(), vec![2.0, seed as f64 * 0.11]).unwrap();
            assert!(central_invariance_check(&t, &u, &v, &blocks(0.3)).unwrap());
        }
    }

    #[test]
    fn block_mixing_unitary_changes_relation() {
        let c = z(2);
        let t = Operator::new(c.clone(), c.clone(), CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let mix = Operator::new(c.clone(), c.clone(), CMatrix::from_real(2, 2, &[h, h, -h, h]).unwrap()).unwrap();
        let p = blocks(0.5);
        assert_ne!(approximate_relation(&mix.compose(&t).unwrap(), &p).unwrap(), approximate_relation(&t, &p).unwrap());
        let phases = Operator::new(
            c.clone(),
            c.clone(),
            CMatrix::from_row_major(2, 2, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(approximate_relation(&phases.compose(&t).unwrap(), &p).unwrap(), approximate_relation(&t, &p).unwrap());
    }

    #[test]
    fn extract_reversal() {
        let c = z(10);
        let rev = perm(&c, |j| 9 - j);
        let ex = extract_embedding(&rev, &ExtractionConfig::new(0.1, vec![(Scale::ZERO, Scale::ZERO)], Mode::Blocks)).unwrap();
        assert!(ex.success);
        assert!(ex.report.is_coarse_equivalence());
        assert_eq!(ex.relation, Relation::graph(&[9, 8, 7, 6, 5, 4, 3, 2, 1, 0], 10).unwrap());
        assert!(matches!(
            extract_embedding(&rev, &ExtractionConfig::new(0.1, vec![], Mode::Blocks)),
            Err(CoarseError::EmptySchedule)
        ));
    }

    #[test]
    fn extract_scrambled_is_close() {
        let c = z(16);
        for seed in 0..20 {
            let w1 = random_controlled_unitary(&c, Scale::Finite(1), seed);
            let w2 = random_controlled_unitary(&c, Scale::Finite(1), seed + 100);
            let p = perm(&c, |j| 15 - j);
            let u = w2.compose(&p).unwrap().compose(&w1).unwrap();
            let ex = extract_embedding(&u, &ExtractionConfig::new(0.1, default_schedule(&u), Mode::Blocks)).unwrap();
            assert!(ex.success, "seed {seed}: {:?}", ex.steps);
            for (y, x) in ex.relation.pairs() {
                assert!(y.abs_diff(15 - x) <= 2 + 2);
            }
        }
    }

    #[test]
    fn extract_onto_domain_of_bounded_target() {
        let sp = Arc::new(LfcmSpace::singletons(Space::interval(4)));
        let src = make_module(sp.clone(), &DimensionVector(vec![1, 0, 0, 0])).unwrap();
        let tgt = make_module(sp, &DimensionVector(vec![0, 0, 1, 0])).unwrap();
        let u = Operator::new(src, tgt, CMatrix::identity(1)).unwrap();
        let ex = extract_embedding(&u, &ExtractionConfig::new(0.1, vec![(Scale::ZERO, Scale::ZERO)], Mode::Blocks)).unwrap();
        assert!(ex.success);
        assert_eq!(ex.relation.pairs().collect::<Vec<_>>(), vec![(2, 0)]);
    }

    #[test]
    fn doubling() {
        assert_eq!(
            doubling_schedule(Scale::ZERO, 5),
            vec![(0, 0), (1, 1), (2, 2), (4, 4), (8, 8)]
                .into_iter()
                .map(|(a, b)| (Scale::Finite(a), Scale::Finite(b)))
                .collect::<Vec<_>>()
        );
        assert_eq!(doubling_schedule(Scale::Finite(3), 0).len(), 1);
    }

    #[test]
    fn domain_invariance_examples() {
        let c = z(4);
        let id = domain_invariance_check(&Operator::identity(&c), &[1, 2, 3]).unwrap();
        assert!(id.per_kappa.iter().all(|k| k.witness == Scale::ZERO));
        let sp = c.space().clone();
        let tgt = make_module(sp, &DimensionVector(vec![2, 1, 0, 1])).unwrap();
        // coordinates over blocks 0,1,2,3 go to 0,0,1,3
        let m = CMatrix::from_real(4, 4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ])
        .unwrap();
        let t = Operator::new(c, tgt, m).unwrap();
        let r = domain_invariance_check(&t, &[1]).unwrap();
        assert_eq!(r.propagation, Scale::Finite(1));
        assert_eq!(r.per_kappa[0].witness, Scale::Finite(1));
        assert!(r.all_within());
        let z2 = Operator::zero(&z(2), &z(2));
        assert!(matches!(domain_invariance_check(&z2, &[1]), Err(CoarseError::Singular { .. })));
    }
}
