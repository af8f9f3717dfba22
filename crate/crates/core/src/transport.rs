//! Transgression of a gerbe to the loop orbifold and the string-connection
//! transport: the line-bundle cocycle `F`, the surface operator `U`, the
//! Stokes equivariance identity, and Segal's boundary formula. Everything
//! is evaluated in cycle units: a log value `x` means `exp(2*pi*i*x)`.

use serde::{Deserialize, Serialize};

use crate::action::{pullback, EquivariantComplex, SimplicialMap};
use crate::cochain::{boundary, pair, Chain};
use crate::error::{Error, Result};
use crate::exec::{map_collect, ExecMode};
use crate::gerbe::GerbeCocycle;
use crate::loops::{OrbifoldLoop, OrbifoldSurface};
use crate::rat::{format_rat, rat_int, Mod1, Rat};
use crate::simplicial::{sort_sign, SimplicialComplex};

/// The transgressed line-bundle cocycle: a validated gerbe viewed through
/// its loop-space evaluator `F`.
#[derive(Debug, Clone)]
pub struct LineBundleCocycle {
    pub gerbe: GerbeCocycle,
}

impl LineBundleCocycle {
    pub fn new(gerbe: GerbeCocycle, mode: ExecMode) -> Result<Self> {
        let report = gerbe.check(mode);
        if !report.is_valid() {
            return Err(Error::Validation(format!(
                "gerbe is not a cocycle: {}",
                report
                    .violations
                    .first()
                    .map(ToString::to_string)
                    .unwrap_or_default()
            )));
        }
        Ok(LineBundleCocycle { gerbe })
    }

    fn check_target(&self, target: &EquivariantComplex) -> Result<()> {
        if !std::ptr::eq(
            std::sync::Arc::as_ptr(&self.gerbe.base.action),
            std::sync::Arc::as_ptr(&target.action),
        ) && self.gerbe.base.complex().to_json().vertices != target.complex().to_json().vertices
        {
            return Err(Error::ComplexMismatch(
                "loop and gerbe live on different orbifolds".into(),
            ));
        }
        Ok(())
    }
}

/// `F(phi, g) = (1/|Gamma|) < phi^* A_g, [Q] >` mod 1.
pub fn transgress_f(b: &LineBundleCocycle, l: &OrbifoldLoop, g: usize) -> Result<Mod1> {
    b.check_target(&l.target)?;
    if g >= l.target.group().order() {
        return Err(Error::InvalidLoop(format!("group element {g} out of range")));
    }
    let pulled = pullback(
        &l.map,
        l.total_space(),
        l.target.complex(),
        &b.gerbe.a[g],
    )?;
    let total = pair(&pulled, &l.cycle)?;
    let gamma = rat_int(l.gamma().order() as i64);
    Ok(Mod1::new(total / gamma))
}

/// A transport operator: a scalar in cycle units between tensor products of
/// boundary fibers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportOperator {
    /// log of the scalar; the phase is `exp(2*pi*i*log_value)`
    pub log_value: String,
    pub incoming: usize,
    pub outgoing: usize,
}

impl TransportOperator {
    pub fn log(&self) -> Mod1 {
        Mod1::new(crate::rat::parse_rat(&self.log_value).expect("stored rational"))
    }

    /// Composition tensors operators: log values add mod 1.
    pub fn compose(&self, other: &TransportOperator) -> TransportOperator {
        let sum = self.log() + other.log();
        TransportOperator {
            log_value: format_rat(sum.lift()),
            incoming: self.incoming,
            outgoing: other.outgoing,
        }
    }
}

/// `U_Phi = (1/|Gamma|) < Phi^* B, [P] >` mod 1.
pub fn transport_u(b: &LineBundleCocycle, s: &OrbifoldSurface) -> Result<TransportOperator> {
    b.check_target(&s.target)?;
    let log = transport_log(b, s)?;
    Ok(TransportOperator {
        log_value: format_rat(Mod1::new(log).lift()),
        incoming: s.incoming.len(),
        outgoing: s.outgoing.len(),
    })
}

/// The raw (pre-mod) transport pairing.
pub fn transport_log(b: &LineBundleCocycle, s: &OrbifoldSurface) -> Result<Rat> {
    let pulled = pullback(
        &s.map,
        &s.gamma_action.complex,
        s.target.complex(),
        &b.gerbe.b,
    )?;
    let total = pair(&pulled, &s.chain)?;
    Ok(total / rat_int(s.gamma_order() as i64))
}

/// Outcome of the equivariance check: the two sides of
/// `< Phi^*(g^*B - B), [P] > = < Phi^* A_g, boundary [P] >`, compared
/// exactly (before any reduction mod 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub g: String,
    pub surface_side: String,
    pub boundary_side: String,
    pub holds: bool,
}

/// The commuting square of the string connection for one group element.
pub fn check_equivariance(
    b: &LineBundleCocycle,
    s: &OrbifoldSurface,
    g: usize,
) -> Result<EquivarianceReport> {
    b.check_target(&s.target)?;
    let m = s.target.complex();
    let gb = s.target.action.group_pullback(g, &b.gerbe.b)?;
    let diff = gb.sub(&b.gerbe.b)?;
    let pulled = pullback(&s.map, &s.gamma_action.complex, m, &diff)?;
    let lhs = pair(&pulled, &s.chain)?;
    // boundary side: incoming minus outgoing, via the loops' own maps
    let mut rhs = Rat::from_integer(0.into());
    for (list, sign) in [(&s.incoming, 1i64), (&s.outgoing, -1i64)] {
        for bl in list {
            let pa = pullback(
                &bl.loop_.map,
                bl.loop_.total_space(),
                m,
                &b.gerbe.a[g],
            )?;
            rhs += pair(&pa, &bl.loop_.cycle)? * rat_int(sign);
        }
    }
    Ok(EquivarianceReport {
        g: s.target.group().name(g).to_string(),
        surface_side: format_rat(&lhs),
        boundary_side: format_rat(&rhs),
        holds: lhs == rhs,
    })
}

/// Batch equivariance over every group element, in parallel, with
/// deterministic ordering.
pub fn equivariance_sweep(
    b: &LineBundleCocycle,
    s: &OrbifoldSurface,
    mode: ExecMode,
) -> Result<Vec<EquivarianceReport>> {
    let elements: Vec<usize> = s.target.group().elements().collect();
    map_collect(mode, elements, |g| check_equivariance(b, s, g))
        .into_iter()
        .collect()
}

/// Pushforward of a chain along a simplicial map (degenerate images drop).
pub fn push_chain_along(
    map: &SimplicialMap,
    source: &SimplicialComplex,
    target: &SimplicialComplex,
    z: &Chain,
) -> Result<Chain> {
    let mut out = Chain::zero(z.degree);
    for (&i, v) in z.support() {
        let img: Vec<usize> = source
            .simplex(z.degree, i)
            .iter()
            .map(|&x| map.vertices[x])
            .collect();
        if let Some((sorted, sign)) = sort_sign(&img) {
            let idx = target.index_of(z.degree, &sorted).ok_or_else(|| {
                Error::ComplexMismatch("pushforward image is not a simplex".into())
            })?;
            out.add_to(idx, v * rat_int(sign));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegalReport {
    pub volume_side: String,
    pub transport_side: String,
    pub holds: bool,
}

/// Segal's formula: for a closed surface `s` bounding a 3-chain `v` in `M`
/// (meaning `boundary v = Phi_* [P]`),
/// `(1/|Gamma|) < omega, v >  =  log U_Phi` mod 1, with `omega = delta B`.
pub fn segal_check(
    b: &LineBundleCocycle,
    v: &Chain,
    s: &OrbifoldSurface,
) -> Result<SegalReport> {
    b.check_target(&s.target)?;
    if !s.is_closed() {
        return Err(Error::InvalidSurface(
            "Segal's formula needs a closed surface".into(),
        ));
    }
    if v.degree != 3 {
        return Err(Error::BoundaryMismatch("volume chain must have degree 3".into()));
    }
    let m = s.target.complex();
    let bd = boundary(m, v)?;
    let image = push_chain_along(&s.map, &s.gamma_action.complex, m, &s.chain)?;
    if bd != image {
        return Err(Error::BoundaryMismatch(
            "boundary of the 3-chain is not the image of the surface".into(),
        ));
    }
    let omega = b.gerbe.curvature()?;
    let gamma = rat_int(s.gamma_order() as i64);
    let volume = pair(&omega, v)? / gamma;
    let transport = transport_log(b, s)?;
    let lhs = Mod1::new(volume);
    let rhs = Mod1::new(transport);
    Ok(SegalReport {
        volume_side: format_rat(lhs.lift()),
        transport_side: format_rat(rhs.lift()),
        holds: lhs == rhs,
    })
}

/// Builds the closed boundary surface of a region of 3-simplices in a
/// trivially-acted 3-manifold: returns the oriented 3-chain `v` and the
/// abstract boundary surface with its inclusion map, oriented so that
/// `Phi_* [P] = boundary v`.
pub fn solid_region_surface(
    target: &EquivariantComplex,
    tets: &[usize],
) -> Result<(Chain, OrbifoldSurface)> {
    if target.group().order() != 1 {
        return Err(Error::InvalidSurface(
            "solid regions are built over trivially-acted targets".into(),
        ));
    }
    let m = target.complex();
    let orientation = crate::cycles::fundamental_cycle(m, 3, None)?;
    let mut v = Chain::zero(3);
    for &t in tets {
        if t >= m.n_cells(3) {
            return Err(Error::Validation(format!("tetrahedron index {t} out of range")));
        }
        v.set(t, orientation.get(t));
    }
    let bd = boundary(m, &v)?;
    if bd.is_zero() {
        return Err(Error::InvalidSurface("region has empty boundary".into()));
    }
    // abstract surface on the boundary faces
    let mut verts: Vec<u64> = Vec::new();
    let mut tris: Vec<Vec<u64>> = Vec::new();
    for (&f, _) in bd.support() {
        let tri = m.simplex(2, f);
        for &x in tri {
            let label = m.vertex_label(x);
            if !verts.contains(&label) {
                verts.push(label);
            }
        }
        tris.push(tri.iter().map(|&x| m.vertex_label(x)).collect());
    }
    verts.sort_unstable();
    let p = SimplicialComplex::from_simplices(verts, &tris)?;
    let vertices: Vec<usize> = (0..p.vertex_count())
        .map(|x| m.vertex_by_label(p.vertex_label(x)).unwrap())
        .collect();
    let map = SimplicialMap::new(&p, m, vertices.clone())?;
    // [P] pulled back from the boundary chain
    let mut chain = Chain::zero(2);
    for t in 0..p.n_cells(2) {
        let img: Vec<usize> = p.simplex(2, t).iter().map(|&x| vertices[x]).collect();
        let (sorted, sign) = sort_sign(&img).expect("inclusion is injective");
        let idx = m.index_of(2, &sorted).expect("face present");
        chain.set(t, bd.get(idx) * rat_int(sign));
    }
    let gamma = crate::action::GroupAction::trivial(p);
    let phi_sharp =
        crate::group::Homomorphism::new(&gamma.group, target.group(), vec![target.group().identity()])?;
    let s = OrbifoldSurface {
        gamma_action: gamma,
        target: target.clone(),
        map,
        phi_sharp,
        incoming: Vec::new(),
        outgoing: Vec::new(),
        chain,
    };
    let report = s.validate();
    if let Some(viol) = report.first() {
        return Err(Error::InvalidSurface(format!(
            "region boundary is not a closed surface: {viol}"
        )));
    }
    Ok((v, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::cochain::Cochain;
    use crate::library::{meridian_loop, torus_cylinder, twisted_loop};
    use rand::SeedableRng;

    fn bundle(gerbe: GerbeCocycle) -> LineBundleCocycle {
        LineBundleCocycle::new(gerbe, ExecMode::default()).unwrap()
    }

    #[test]
    fn trivial_gerbe_transgresses_to_zero() {
        let target = library::torus_z2();
        let b = bundle(GerbeCocycle::trivial(target.clone()));
        let l = meridian_loop(&target, 0);
        for g in 0..2 {
            assert!(transgress_f(&b, &l, g).unwrap().is_zero());
        }
        let s = torus_cylinder(&target, 0, 1);
        assert!(transport_u(&b, &s).unwrap().log().is_zero());
    }

    #[test]
    fn f_vanishes_at_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let target = library::torus_z2();
        let b = bundle(library::random_gerbe(&target, &mut rng).unwrap());
        let e = target.group().identity();
        for l in [meridian_loop(&target, 1), twisted_loop(&target, 2)] {
            assert!(transgress_f(&b, &l, e).unwrap().is_zero());
        }
    }

    #[test]
    fn f_groupoid_identity_all_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let target = library::torus_z2();
        for _ in 0..4 {
            let b = bundle(library::random_gerbe(&target, &mut rng).unwrap());
            for l in [meridian_loop(&target, 0), twisted_loop(&target, 1)] {
                for g in 0..2 {
                    for h in 0..2 {
                        let gh = target.group().mul(g, h);
                        let lhs = transgress_f(&b, &l, g).unwrap()
                            + transgress_f(&b, &l.act(g).unwrap(), h).unwrap();
                        let rhs = transgress_f(&b, &l, gh).unwrap();
                        assert_eq!(lhs, rhs, "groupoid identity at ({g},{h})");
                    }
                }
            }
        }
    }

    #[test]
    fn f_value_matches_direct_edge_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let target = library::torus_z2();
        let b = bundle(library::random_gerbe(&target, &mut rng).unwrap());
        let l = meridian_loop(&target, 2);
        // direct evaluation: sum of A_g over the meridian's edges with the
        // cycle's signs (Gamma is trivial)
        for g in 0..2 {
            let mut direct = Rat::from_integer(0.into());
            for (&e, sign) in l.cycle.support() {
                let edge = l.total_space().simplex(1, e);
                let img = [l.map.vertices[edge[0]], l.map.vertices[edge[1]]];
                let (sorted, s) = sort_sign(&img).unwrap();
                let idx = target.complex().index_of(1, &sorted).unwrap();
                direct += b.gerbe.a[g].get(idx) * rat_int(s) * sign;
            }
            assert_eq!(transgress_f(&b, &l, g).unwrap(), Mod1::new(direct));
        }
    }

    #[test]
    fn equivariance_identity_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let target = library::torus_z2();
        for _ in 0..3 {
            let b = bundle(library::random_gerbe(&target, &mut rng).unwrap());
            for width in 1..=2 {
                let s = torus_cylinder(&target, 0, width);
                for r in equivariance_sweep(&b, &s, ExecMode::default()).unwrap() {
                    assert!(r.holds, "equivariance fails: {r:?}");
                }
            }
        }
    }

    #[test]
    fn gluing_is_additive_on_logs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let target = library::torus_z2();
        let b = bundle(library::random_gerbe_shifted(&target, &mut rng).unwrap());
        let s1 = torus_cylinder(&target, 0, 1);
        let s2 = torus_cylinder(&target, 1, 1);
        let glued = crate::loops::glue(&s1, 0, &s2, 0, &[0, 1, 2]).unwrap();
        let lhs = transport_u(&b, &glued).unwrap().log();
        let rhs = transport_u(&b, &s1).unwrap().log() + transport_u(&b, &s2).unwrap().log();
        assert_eq!(lhs, rhs);
        // operator composition mirrors the same addition
        let op = transport_u(&b, &s1)
            .unwrap()
            .compose(&transport_u(&b, &s2).unwrap());
        assert_eq!(op.log(), lhs);
    }

    #[test]
    fn self_gluing_preserves_log() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let target = library::torus_z2();
        let b = bundle(library::random_gerbe(&target, &mut rng).unwrap());
        let s = torus_cylinder(&target, 0, 4);
        let closed = crate::loops::self_glue(&s, 0, 0, &[0, 1, 2]).unwrap();
        assert_eq!(
            transport_u(&b, &s).unwrap().log(),
            transport_u(&b, &closed).unwrap().log()
        );
    }

    #[test]
    fn segal_formula_on_t3_regions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let target = library::t3_trivial();
        for _ in 0..3 {
            let mut gerbe = GerbeCocycle::trivial(target.clone());
            gerbe.b = library::random_cochain(target.complex(), 2, 0.5, &mut rng);
            let b = bundle(gerbe);
            for tets in [vec![0], vec![5], vec![0, 1]] {
                let (v, s) = solid_region_surface(&target, &tets).unwrap();
                let report = segal_check(&b, &v, &s).unwrap();
                assert!(report.holds, "{report:?}");
            }
        }
    }

    #[test]
    fn segal_rejects_wrong_boundary() {
        let target = library::t3_trivial();
        let b = bundle(GerbeCocycle::trivial(target.clone()));
        let (_, s) = solid_region_surface(&target, &[0]).unwrap();
        let wrong = Chain::zero(3);
        assert!(matches!(
            segal_check(&b, &wrong, &s),
            Err(Error::BoundaryMismatch(_))
        ));
    }

    #[test]
    fn pushforward_is_adjoint_to_pullback() {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        let target = library::torus_z2();
        let s = torus_cylinder(&target, 1, 2);
        let m = target.complex();
        let p = &s.gamma_action.complex;
        for _ in 0..5 {
            let mut c = Cochain::zero(2, crate::rat::CoefficientRing::Rationals);
            for i in 0..m.n_cells(2) {
                if rng.gen_bool(0.5) {
                    c.set(i, crate::rat::rat(rng.gen_range(-5..5), rng.gen_range(1..4)));
                }
            }
            let lhs = pair(&pullback(&s.map, p, m, &c).unwrap(), &s.chain).unwrap();
            let pushed = push_chain_along(&s.map, p, m, &s.chain).unwrap();
            let rhs = pair(&c, &pushed).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
