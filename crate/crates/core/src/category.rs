//! Functors on the approximable category in conjugation normal form, and
//! congruence modulo central unitaries.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoarseError, Result};
use crate::lfcm::{direct_sum, pushforward, same_space, MeasurableMap, Module};
use crate::matrix::{CMatrix, C64};
use crate::operator::Operator;
use crate::relation::Relation;
use crate::rigidity::{make_central_unitary, CentralUnitary};
use crate::scale::Scale;

/// Largest unitarity defect accepted from callers.
pub const UNITARY_TOL: f64 = 1e-10;

/// `F(C) = target of U(C)` and `F(t) = U(D) t U(C)*`. Modules outside the
/// table go to their pushforward along the fallback map, with the identity
/// matrix as unitary.
#[derive(Clone, Debug)]
pub struct FunctorSpec {
    entries: Vec<Operator>,
    fallback: Option<MeasurableMap>,
}

impl FunctorSpec {
    pub fn entries(&self) -> &[Operator] {
        &self.entries
    }

    pub fn fallback(&self) -> Option<&MeasurableMap> {
        self.fallback.as_ref()
    }

    /// `U(C) : C → F(C)`.
    pub fn unitary(&self, c: &Module) -> Result<Operator> {
        if let Some(u) = self.entries.iter().find(|u| u.source() == c) {
            return Ok(u.clone());
        }
        match &self.fallback {
            Some(f) => {
                let image = pushforward(f, c)?;
                Operator::new(c.clone(), image, CMatrix::identity(c.dim()))
            }
            None => Err(CoarseError::MissingObject),
        }
    }

    pub fn object(&self, c: &Module) -> Result<Module> {
        Ok(self.unitary(c)?.target().clone())
    }

    /// `F(t) = U(D) ∘ t ∘ U(C)*`.
    pub fn apply(&self, t: &Operator) -> Result<Operator> {
        let uc = self.unitary(t.source())?;
        let ud = self.unitary(t.target())?;
        ud.compose(t)?.compose(&uc.adjoint())
    }
}

/// `f_*` with identity-matrix unitaries.
pub fn pushforward_functor(f: MeasurableMap) -> FunctorSpec {
    FunctorSpec { entries: Vec::new(), fallback: Some(f) }
}

fn check_entries(unitaries: &[Operator]) -> Result<()> {
    for (i, u) in unitaries.iter().enumerate() {
        let defect = u.unitarity_defect();
        if defect.is_nan() || defect > UNITARY_TOL {
            return Err(CoarseError::NotUnitary { defect });
        }
        for w in &unitaries[..i] {
            if w.source() == u.source() && w != u {
                return Err(CoarseError::ConflictingImage);
            }
        }
    }
    Ok(())
}

/// Functor defined only on the listed modules.
pub fn functor_from_unitaries(unitaries: Vec<Operator>) -> Result<FunctorSpec> {
    check_entries(&unitaries)?;
    Ok(FunctorSpec { entries: unitaries, fallback: None })
}

/// Listed modules go through their unitaries; every other module is pushed
/// forward along `f`.
pub fn assemble_functor(pairs: Vec<Operator>, f: MeasurableMap) -> Result<FunctorSpec> {
    check_entries(&pairs)?;
    for u in &pairs {
        if !same_space(u.source().space(), f.source()) || !same_space(u.target().space(), f.target()) {
            return Err(CoarseError::SpaceMismatch("pair is not over the fallback map's spaces".into()));
        }
    }
    Ok(FunctorSpec { entries: pairs, fallback: Some(f) })
}

/// `α_{C,D} = F(i_C) π_{F(C)} + F(i_D) π_{F(D)} : F(C) ⊕ F(D) → F(C ⊕ D)`.
pub fn additivity_iso(functor: &FunctorSpec, c: &Module, d: &Module) -> Result<Operator> {
    let cd = direct_sum(c, d)?;
    let fcd = direct_sum(&functor.object(c)?, &functor.object(d)?)?;
    let left = functor.apply(&cd.inclusions[0])?.compose(&fcd.projections[0])?;
    let right = functor.apply(&cd.inclusions[1])?.compose(&fcd.projections[1])?;
    left.add(&right)
}

/// Certificate for `t = v s u` with `u`, `v` central.
#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceWitness {
    pub u: CentralUnitary,
    pub v: CentralUnitary,
    pub residual: f64,
}

/// `‖t − v s u‖`.
pub fn congruence_residual(t: &Operator, s: &Operator, u: &CentralUnitary, v: &CentralUnitary) -> Result<f64> {
    let vsu = v.on(s.target())?.compose(s)?.compose(&u.on(s.source())?)?;
    Ok(t.sub(&vsu)?.norm())
}

fn component_coords(c: &Module) -> Vec<Vec<usize>> {
    let sp = c.space();
    let mut out = vec![Vec::new(); sp.component_count()];
    for k in 0..c.dim() {
        out[sp.block_component(c.coord_block(k))].push(k);
    }
    out
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Searches for central `u`, `v` with `t ≈ v s u`.
///
/// Each pair (target component `k`, source component `j`) asks for
/// `v_k u_j = arg⟨s_kj, t_kj⟩`. The phases are propagated along a
/// maximum-weight spanning forest of that bipartite graph, with `u = 1` at
/// the root of every tree that touches a source component. Returns the
/// witness when `‖t − v s u‖ ≤ tol · ‖t‖`.
pub fn cong_mod_central(t: &Operator, s: &Operator, tol: f64) -> Result<Option<CongruenceWitness>> {
    if t.source() != s.source() || t.target() != s.target() {
        return Err(CoarseError::SpaceMismatch("operators have different modules".into()));
    }
    let (cx, cy) = (component_coords(t.source()), component_coords(t.target()));
    let (nx, ny) = (cx.len(), cy.len());
    // nodes: 0..nx source components, nx..nx+ny target components
    let mut edges: Vec<(f64, usize, usize, f64)> = Vec::new();
    for (k, rows) in cy.iter().enumerate() {
        for (j, cols) in cx.iter().enumerate() {
            let mut ip = C64::new(0.0, 0.0);
            for &r in rows {
                for &c in cols {
                    ip += s.matrix()[(r, c)].conj() * t.matrix()[(r, c)];
                }
            }
            if ip.norm() > 0.0 {
                edges.push((ip.norm(), j, nx + k, ip.arg()));
            }
        }
    }
    edges.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut parent: Vec<usize> = (0..nx + ny).collect();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nx + ny];
    for &(_, a, b, phase) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            adj[a].push((b, phase));
            adj[b].push((a, phase));
        }
    }
    let mut phase: Vec<Option<f64>> = vec![None; nx + ny];
    let mut stack = Vec::new();
    for root in 0..nx + ny {
        if phase[root].is_some() {
            continue;
        }
        phase[root] = Some(0.0);
        stack.push(root);
        while let Some(n) = stack.pop() {
            let pn = phase[n].unwrap();
            for &(m, e) in &adj[n] {
                if phase[m].is_none() {
                    // u_j + v_k = e on every tree edge
                    phase[m] = Some(e - pn);
                    stack.push(m);
                }
            }
        }
    }
    let u = make_central_unitary(t.source().space().clone(), phase[..nx].iter().map(|p| p.unwrap()).collect())?;
    let v = make_central_unitary(t.target().space().clone(), phase[nx..].iter().map(|p| p.unwrap()).collect())?;
    let residual = congruence_residual(t, s, &u, &v)?;
    Ok(if residual <= tol * t.norm() { Some(CongruenceWitness { u, v, residual }) } else { None })
}

impl CongruenceWitness {
    /// Central pair for `s1 t1 ≅ s2 t2` from `t1 = v1 t2 u1` and
    /// `s1 = v2 s2 u2`. All modules must lie over one space, where central
    /// unitaries commute with controlled operators.
    pub fn compose(&self, outer: &CongruenceWitness) -> Result<(CentralUnitary, CentralUnitary)> {
        let middle = outer.u.then(&self.v)?;
        Ok((self.u.clone(), outer.v.then(&middle)?))
    }

    /// Witness of `s ≅ t` from one of `t ≅ s`.
    pub fn inverse(&self) -> (CentralUnitary, CentralUnitary) {
        (self.u.inverse(), self.v.inverse())
    }
}

/// Failures of the naturality squares `G(t) η_C ≅ η_D F(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalityVerdict {
    /// `(index, relative residual)` per failing morphism.
    pub failures: Vec<(usize, f64)>,
    pub max_residual: f64,
}

impl NaturalityVerdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn natural_iso_mod_central_check<E>(
    f: &FunctorSpec,
    g: &FunctorSpec,
    eta: E,
    morphisms: &[Operator],
    tol: f64,
) -> Result<NaturalityVerdict>
where
    E: Fn(&Module) -> Result<Operator>,
{
    let mut failures = Vec::new();
    let mut max_residual = 0.0f64;
    for (i, t) in morphisms.iter().enumerate() {
        let lhs = g.apply(t)?.compose(&eta(t.source())?)?;
        let rhs = eta(t.target())?.compose(&f.apply(t)?)?;
        let scale = lhs.norm().max(f64::MIN_POSITIVE);
        match cong_mod_central(&lhs, &rhs, tol)? {
            Some(w) => max_residual = max_residual.max(w.residual / scale),
            None => {
                let r = lhs.sub(&rhs)?.norm() / scale;
                max_residual = max_residual.max(r);
                failures.push((i, r));
            }
        }
    }
    Ok(NaturalityVerdict { failures, max_residual })
}

/// `ν_C = U_g(C) U_f(C)* : f_*C → g_*C`, the identity matrix.
pub fn pushforward_transition(f: &MeasurableMap, g: &MeasurableMap, c: &Module) -> Result<Operator> {
    let source = pushforward(f, c)?;
    let target = pushforward(g, c)?;
    Operator::new(source, target, CMatrix::identity(c.dim()))
}

/// Scale of `(f × g)(E_disc^X)`, after checking that the support of `ν_C`
/// is the block saturation of that relation for each supplied module.
pub fn closeness_from_functor_congruence(f: &MeasurableMap, g: &MeasurableMap, modules: &[Module]) -> Result<Scale> {
    if !same_space(f.source(), g.source()) || !same_space(f.target(), g.target()) {
        return Err(CoarseError::SpaceMismatch("maps have different spaces".into()));
    }
    let (sx, sy) = (f.source(), f.target());
    let mut scale = Scale::ZERO;
    for blk in sx.blocks() {
        for &a in blk {
            for &b in blk {
                scale = scale.max(sy.base().dist(g.images()[a], f.images()[b]));
            }
        }
    }
    for c in modules {
        let nu = pushforward_transition(f, g, c)?;
        let support = nu.support(0.0);
        let ny = sy.point_count();
        let want = Relation::from_rectangles(
            ny,
            ny,
            (0..sx.block_count())
                .filter(|&a| c.rank(a) > 0)
                .map(|a| (sy.block(g.block_image(a)), sy.block(f.block_image(a)))),
        );
        if support != want {
            return Err(CoarseError::Inconsistent("support of the transition unitary".into()));
        }
    }
    Ok(scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfcm::{make_module, uniform_module, DimensionVector, LfcmSpace};
    use crate::operator::{random_controlled_unitary, random_operator};
    use crate::space::Space;
    use alloc::sync::Arc;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize) -> Arc<LfcmSpace> {
        Arc::new(LfcmSpace::singletons(Space::interval(n)))
    }

    #[test]
    fn pushforward_functor_is_identity_on_matrices() {
        let sp = space(6);
        let c = uniform_module(sp.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_operator(&c, &c, &mut rng);
        let id = pushforward_functor(MeasurableMap::identity(sp.clone()));
        assert_eq!(id.apply(&t).unwrap(), t);
        let g = MeasurableMap::new(sp.clone(), sp.clone(), vec![1, 1, 2, 3, 4, 5]).unwrap();
        let gt = pushforward_functor(g).apply(&t).unwrap();
        assert_eq!(gt.matrix(), t.matrix());
        assert_eq!(gt.source().labels(), &[1, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn additivity_of_identity_and_pushforward() {
        let sp = space(3);
        let c = make_module(sp.clone(), &DimensionVector(vec![1, 0, 2])).unwrap();
        let d = uniform_module(sp.clone());
        let id = pushforward_functor(MeasurableMap::identity(sp.clone()));
        let a = additivity_iso(&id, &c, &d).unwrap();
        assert_eq!(a.matrix(), &CMatrix::identity(6));
        let g = MeasurableMap::new(sp.clone(), sp.clone(), vec![0, 0, 1]).unwrap();
        let a = additivity_iso(&pushforward_functor(g), &c, &d).unwrap();
        assert_eq!(a.matrix(), &CMatrix::identity(6));
    }

    #[test]
    fn functor_from_unitaries_checks_input() {
        let sp = space(4);
        let c = uniform_module(sp.clone());
        let bad = Operator::new(c.clone(), c.clone(), CMatrix::identity(4).scaled(C64::new(2.0, 0.0))).unwrap();
        assert!(matches!(functor_from_unitaries(vec![bad]), Err(CoarseError::NotUnitary { .. })));
        let u1 = random_controlled_unitary(&c, Scale::Finite(1), 1);
        let u2 = random_controlled_unitary(&c, Scale::Finite(1), 2);
        assert!(matches!(functor_from_unitaries(vec![u1.clone(), u2]), Err(CoarseError::ConflictingImage)));
        let f = functor_from_unitaries(vec![u1.clone()]).unwrap();
        assert!(matches!(f.unitary(&make_module(sp, &DimensionVector(vec![1, 1, 1, 0])).unwrap()), Err(CoarseError::MissingObject)));
        let t = random_operator(&c, &c, &mut ChaCha8Rng::seed_from_u64(3));
        let lhs = f.apply(&t.adjoint()).unwrap();
        let rhs = f.apply(&t).unwrap().adjoint();
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-12);
    }

    #[test]
    fn congruence_examples() {
        let sp = space(5);
        let c = uniform_module(sp.clone());
        let s = random_operator(&c, &c, &mut ChaCha8Rng::seed_from_u64(4));
        let w = cong_mod_central(&s, &s, 1e-12).unwrap().unwrap();
        assert_eq!(w.residual, 0.0);
        let t = s.scaled(C64::from_polar(1.0, 0.9));
        let w = cong_mod_central(&t, &s, 1e-12).unwrap().unwrap();
        assert_eq!(w.u.phases(), &[0.0]);
        assert!((w.v.scalar(0) - C64::from_polar(1.0, 0.9)).norm() < 1e-12);
    }

    #[test]
    fn congruence_across_components() {
        let sp = Arc::new(LfcmSpace::singletons(Space::disjoint_union(&[Space::interval(3), Space::interval(3)])));
        let c = uniform_module(sp.clone());
        let s = random_operator(&c, &c, &mut ChaCha8Rng::seed_from_u64(5)).truncate(Scale::Finite(2)).unwrap();
        let u = make_central_unitary(sp.clone(), vec![0.4, -1.3]).unwrap();
        let v = make_central_unitary(sp.clone(), vec![2.2, 0.1]).unwrap();
        let t = v.on(&c).unwrap().compose(&s).unwrap().compose(&u.on(&c).unwrap()).unwrap();
        let w = cong_mod_central(&t, &s, 1e-12).unwrap().unwrap();
        assert!(w.residual < 1e-12 * t.norm());
        let mixed = random_operator(&c, &c, &mut ChaCha8Rng::seed_from_u64(6));
        let pert = s.add(&mixed.scaled(C64::new(0.5 * s.norm() / mixed.norm(), 0.0))).unwrap();
        assert!(cong_mod_central(&pert, &s, 1e-6).unwrap().is_none());
    }

    #[test]
    fn closeness_examples() {
        let sp = space(6);
        let c = uniform_module(sp.clone());
        let id = MeasurableMap::identity(sp.clone());
        assert_eq!(closeness_from_functor_congruence(&id, &id, core::slice::from_ref(&c)).unwrap(), Scale::ZERO);
        let shift = MeasurableMap::new(sp.clone(), sp.clone(), vec![1, 2, 3, 4, 5, 5]).unwrap();
        assert_eq!(closeness_from_functor_congruence(&id, &shift, core::slice::from_ref(&c)).unwrap(), Scale::Finite(1));
        let two = Arc::new(LfcmSpace::singletons(Space::disjoint_union(&[Space::interval(3), Space::interval(3)])));
        let a = MeasurableMap::new(sp.clone(), two.clone(), vec![0, 1, 2, 2, 2, 2]).unwrap();
        let b = MeasurableMap::new(sp.clone(), two.clone(), vec![0, 1, 2, 2, 2, 3]).unwrap();
        assert_eq!(closeness_from_functor_congruence(&a, &b, core::slice::from_ref(&c)).unwrap(), Scale::Infinite);
        let nu = pushforward_transition(&a, &b, &c).unwrap();
        assert!(nu.support(0.0).contains(3, 2));
    }
}
