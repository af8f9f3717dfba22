//! Built-in orbifolds and gerbes: the smallest instances exercising every
//! check, plus seeded random generators for the property suites.

use rand::Rng;

use crate::action::{EquivariantComplex, GroupAction};
use crate::cochain::Cochain;
use crate::error::Result;
use crate::gerbe::GerbeCocycle;
use crate::group::FiniteGroup;
use crate::rat::{rat, CoefficientRing, Rat};
use crate::shapes;
use crate::simplicial::SimplicialComplex;

/// `[pt/Z2]`.
pub fn pt_mod_z2() -> EquivariantComplex {
    let pt = SimplicialComplex::point();
    let g = FiniteGroup::cyclic(2);
    EquivariantComplex::new(GroupAction::new(pt, g, vec![vec![0], vec![0]]).unwrap())
}

/// `[pt/(Z2 x Z2)]`.
pub fn pt_mod_k4() -> EquivariantComplex {
    let z2 = FiniteGroup::cyclic(2);
    let k4 = FiniteGroup::direct_product(&z2, &z2);
    let pt = SimplicialComplex::point();
    EquivariantComplex::new(GroupAction::new(pt, k4, vec![vec![0]; 4]).unwrap())
}

/// Discrete torsion on `[pt/(Z2 x Z2)]`: `rho_{(a,b),(c,d)} = bc/2`, a
/// nontrivial class of `H^2(Z2 x Z2; Q/Z)`.
pub fn discrete_torsion_gerbe() -> GerbeCocycle {
    let base = pt_mod_k4();
    let group = base.group().clone();
    let mut gerbe = GerbeCocycle::trivial(base);
    for g in group.elements() {
        for h in group.elements() {
            // direct_product index (x, y) -> 2x + y
            let b = g % 2;
            let c = h / 2;
            if b * c % 2 == 1 {
                gerbe.rho[g][h].set(0, rat(1, 2));
            }
        }
    }
    gerbe
}

/// Triangle circle with the free Z3 rotation.
pub fn circle_z3() -> EquivariantComplex {
    let c = shapes::circle(3);
    let g = FiniteGroup::cyclic(3);
    let maps = (0..3)
        .map(|r| (0..3).map(|v| (v + r) % 3).collect())
        .collect();
    EquivariantComplex::new(GroupAction::new(c, g, maps).unwrap())
}

/// Torus with the free Z2 half-rotation in the first circle factor.
pub fn torus_z2() -> EquivariantComplex {
    let t = shapes::grid_torus(4, 3);
    let g = FiniteGroup::cyclic(2);
    let maps = vec![shapes::torus_shift(4, 3, 0), shapes::torus_shift(4, 3, 2)];
    EquivariantComplex::new(GroupAction::new(t, g, maps).unwrap())
}

/// 3-torus with the trivial group (curvature and gluing playground).
pub fn t3_trivial() -> EquivariantComplex {
    EquivariantComplex::new(GroupAction::trivial(shapes::grid_torus3(3, 3, 3)))
}

/// Random rational cochain with small numerators and denominators.
pub fn random_cochain<R: Rng>(
    complex: &SimplicialComplex,
    degree: usize,
    density: f64,
    rng: &mut R,
) -> Cochain {
    let mut c = Cochain::zero(degree, CoefficientRing::Rationals);
    for i in 0..complex.n_cells(degree) {
        if rng.gen_bool(density) {
            c.set(i, rat(rng.gen_range(-9..=9), rng.gen_range(1..=6)));
        }
    }
    c
}

/// Random G-invariant rational cochain (an averaged random cochain).
pub fn random_invariant_cochain<R: Rng>(
    ec: &EquivariantComplex,
    degree: usize,
    rng: &mut R,
) -> Result<Cochain> {
    let c = random_cochain(ec.complex(), degree, 0.5, rng);
    ec.action.average(&c)
}

/// Random valid gerbe with relation (6) holding exactly for the stored
/// lifts: `B = B_inv + delta C`, `A_g = g*C - C`, `rho` the coboundary of a
/// constant group 1-cochain. Exactness of (6) makes every transgression
/// identity a theorem for arbitrary structure groups `Gamma`.
pub fn random_gerbe<R: Rng>(ec: &EquivariantComplex, rng: &mut R) -> Result<GerbeCocycle> {
    let complex = ec.complex().clone();
    let group = ec.group().clone();
    let c = random_cochain(&complex, 1, 0.6, rng);
    let b_inv = random_invariant_cochain(ec, 2, rng)?;
    let mut gerbe = GerbeCocycle::trivial(ec.clone());
    gerbe.b = crate::cochain::coboundary(&complex, &c)?.add(&b_inv)?;
    for g in group.elements() {
        let pulled = ec.action.group_pullback(g, &c)?;
        gerbe.a[g] = pulled.sub(&c)?;
    }
    // constant group 1-cochain mu with mu_e = 0
    let mu: Vec<Rat> = group
        .elements()
        .map(|g| {
            if g == group.identity() {
                Rat::from_integer(0.into())
            } else {
                rat(rng.gen_range(0..12), 12)
            }
        })
        .collect();
    for g in group.elements() {
        for h in group.elements() {
            // g*(mu_h) = mu_h for constants
            let val = &mu[h] - &mu[group.mul(g, h)] + &mu[g];
            if !num_traits::Zero::is_zero(&val) {
                for v in 0..complex.n_cells(0) {
                    gerbe.rho[g][h].set(v, val.clone());
                }
            }
        }
    }
    Ok(gerbe)
}

/// Random valid gerbe by the full Cech coboundary construction, including a
/// non-constant `lambda` shift. Relation (6) holds mod 1; the canonical
/// lifts may carry an integer discrepancy (the discrete winding), so this
/// flavor is only fed to transgression tests with trivial `Gamma`.
pub fn random_gerbe_shifted<R: Rng>(
    ec: &EquivariantComplex,
    rng: &mut R,
) -> Result<GerbeCocycle> {
    let complex = ec.complex().clone();
    let group = ec.group().clone();
    let mut gerbe = random_gerbe(ec, rng)?;
    let lambda: Vec<Cochain> = group
        .elements()
        .map(|g| {
            if g == group.identity() {
                Cochain::zero(0, CoefficientRing::Rationals)
            } else {
                random_cochain(&complex, 0, 0.5, rng)
            }
        })
        .collect();
    for g in group.elements() {
        let d_lambda = crate::cochain::coboundary(&complex, &lambda[g])?;
        gerbe.a[g] = gerbe.a[g].sub(&d_lambda)?;
        for h in group.elements() {
            let shift = ec
                .action
                .group_pullback(g, &lambda[h])?
                .sub(&lambda[group.mul(g, h)])?
                .add(&lambda[g])?;
            let new = gerbe.rho[g][h].as_rational().sub(&shift)?;
            gerbe.rho[g][h] = new.reduce_mod1();
        }
    }
    Ok(gerbe)
}

/// Shifts a gerbe by the total coboundary of Cech data `(c1, lambda)`,
/// producing a cohomologous gerbe (used by well-definedness tests).
pub fn cech_shift<R: Rng>(gerbe: &GerbeCocycle, rng: &mut R) -> Result<GerbeCocycle> {
    let ec = gerbe.base.clone();
    let complex = ec.complex().clone();
    let group = ec.group().clone();
    let c1 = random_cochain(&complex, 1, 0.5, rng);
    let mut out = gerbe.clone();
    out.b = out.b.add(&crate::cochain::coboundary(&complex, &c1)?)?;
    for g in group.elements() {
        let pulled = ec.action.group_pullback(g, &c1)?;
        out.a[g] = out.a[g].add(&pulled.sub(&c1)?)?;
    }
    // constant lambda part keeps relation (6) exact after the shift
    let mu: Vec<Rat> = group
        .elements()
        .map(|g| {
            if g == group.identity() {
                Rat::from_integer(0.into())
            } else {
                rat(rng.gen_range(0..8), 8)
            }
        })
        .collect();
    for g in group.elements() {
        for h in group.elements() {
            let val = &mu[h] - &mu[group.mul(g, h)] + &mu[g];
            if !num_traits::Zero::is_zero(&val) {
                for v in 0..complex.n_cells(0) {
                    out.rho[g][h].add_to(v, val.clone());
                }
            }
        }
    }
    Ok(out)
}

/// The built-in T^2/Z2 gerbe (fixed seed).
pub fn torus_z2_gerbe() -> GerbeCocycle {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
    random_gerbe(&torus_z2(), &mut rng).expect("builtin gerbe")
}

/// The built-in T^3 gerbe with random invariant B (nonzero curvature).
pub fn t3_gerbe() -> GerbeCocycle {
    use rand::SeedableRng;
    let ec = t3_trivial();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
    let mut gerbe = GerbeCocycle::trivial(ec.clone());
    gerbe.b = random_cochain(ec.complex(), 2, 0.4, &mut rng);
    gerbe
}

/// The built-in invalid gerbe: one `A` entry perturbed by 1/7.
pub fn perturbed_gerbe() -> GerbeCocycle {
    let mut gerbe = torus_z2_gerbe();
    let old = gerbe.a[1].get(0);
    gerbe.a[1].set(0, old + rat(1, 7));
    gerbe
}


/// Trivial-Gamma loop: a triangle circle onto one meridian of the 4 x 3
/// grid torus (column `column`).
pub fn meridian_loop(target: &EquivariantComplex, column: usize) -> crate::loops::OrbifoldLoop {
    let q = shapes::circle(3);
    let gamma = GroupAction::trivial(q);
    let vertices = (0..3).map(|j| (column % 4) * 3 + j).collect();
    crate::loops::OrbifoldLoop::new(gamma, target.clone(), vertices, vec![0], None).unwrap()
}

/// Z2-twisted loop: a square circle winding around the horizontal circle of
/// the grid torus at row `row`, with Gamma = Z2 acting by the antipode.
pub fn twisted_loop(target: &EquivariantComplex, row: usize) -> crate::loops::OrbifoldLoop {
    let q = shapes::circle(4);
    let gamma_group = FiniteGroup::cyclic(2);
    let maps = vec![(0..4).collect(), (0..4).map(|v| (v + 2) % 4).collect()];
    let gamma = GroupAction::new(q, gamma_group, maps).unwrap();
    let vertices = (0..4).map(|k| (k % 4) * 3 + row % 3).collect();
    crate::loops::OrbifoldLoop::new(gamma, target.clone(), vertices, vec![0, 1], None).unwrap()
}

/// Vertical cylinder in the grid torus between columns `column` and
/// `column + width`, swept by meridian loops.
pub fn torus_cylinder(
    target: &EquivariantComplex,
    column: usize,
    width: usize,
) -> crate::loops::OrbifoldSurface {
    let p = shapes::cylinder(3, width);
    let gamma = GroupAction::trivial(p);
    let vertices: Vec<usize> = (0..3 * (width + 1))
        .map(|v| {
            let (l, j) = (v / 3, v % 3);
            ((column + l) % 4) * 3 + j
        })
        .collect();
    let incoming = crate::loops::BoundaryLoop {
        loop_: meridian_loop(target, column),
        embedding: vec![0, 1, 2],
    };
    let outgoing = crate::loops::BoundaryLoop {
        loop_: meridian_loop(target, column + width),
        embedding: vec![3 * width, 3 * width + 1, 3 * width + 2],
    };
    crate::loops::OrbifoldSurface::new(
        gamma,
        target.clone(),
        vertices,
        vec![0],
        vec![incoming],
        vec![outgoing],
        None,
    )
    .unwrap()
}

/// Twisted annulus: Gamma = Z2 on a length-4 cylinder over the horizontal
/// circle, between rows `row` and `row + height`.
pub fn twisted_cylinder(
    target: &EquivariantComplex,
    row: usize,
    height: usize,
) -> crate::loops::OrbifoldSurface {
    let p = shapes::cylinder(4, height);
    let gamma_group = FiniteGroup::cyclic(2);
    let maps = (0..2)
        .map(|r| {
            (0..4 * (height + 1))
                .map(|v| {
                    let (l, k) = (v / 4, v % 4);
                    l * 4 + (k + 2 * r) % 4
                })
                .collect()
        })
        .collect();
    let gamma = GroupAction::new(p, gamma_group, maps).unwrap();
    let vertices: Vec<usize> = (0..4 * (height + 1))
        .map(|v| {
            let (l, k) = (v / 4, v % 4);
            (k % 4) * 3 + (row + l) % 3
        })
        .collect();
    let incoming = crate::loops::BoundaryLoop {
        loop_: twisted_loop(target, row),
        embedding: vec![0, 1, 2, 3],
    };
    let outgoing = crate::loops::BoundaryLoop {
        loop_: twisted_loop(target, row + height),
        embedding: (0..4).map(|k| 4 * height + k).collect(),
    };
    crate::loops::OrbifoldSurface::new(
        gamma,
        target.clone(),
        vertices,
        vec![0, 1],
        vec![incoming],
        vec![outgoing],
        None,
    )
    .unwrap()
}

/// Closed torus surface mapped by a group translate of the identity,
/// with trivial or full Gamma.
pub fn torus_closed_surface(
    target: &EquivariantComplex,
    shift: usize,
    full_gamma: bool,
) -> crate::loops::OrbifoldSurface {
    let p = shapes::grid_torus(4, 3);
    let vertices: Vec<usize> = shapes::torus_shift(4, 3, shift);
    let (gamma, phi_sharp) = if full_gamma {
        let g = FiniteGroup::cyclic(2);
        let maps = vec![shapes::torus_shift(4, 3, 0), shapes::torus_shift(4, 3, 2)];
        (GroupAction::new(p, g, maps).unwrap(), vec![0, 1])
    } else {
        (GroupAction::trivial(p), vec![0])
    };
    crate::loops::OrbifoldSurface::new(
        gamma,
        target.clone(),
        vertices,
        phi_sharp,
        vec![],
        vec![],
        None,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::ExecMode;

    #[test]
    fn builtin_gerbes_validate() {
        assert!(discrete_torsion_gerbe().check(ExecMode::default()).is_valid());
        assert!(torus_z2_gerbe().check(ExecMode::default()).is_valid());
        assert!(t3_gerbe().check(ExecMode::default()).is_valid());
        assert!(!perturbed_gerbe().check(ExecMode::default()).is_valid());
    }

    #[test]
    fn random_gerbes_are_exactly_valid() {
        use rand::SeedableRng;
        let ec = torus_z2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let g = random_gerbe(&ec, &mut rng).unwrap();
            let report = g.check(ExecMode::default());
            assert!(report.is_valid());
            // relation (6) holds exactly, not just mod 1
            assert!(report.warnings.is_empty(), "{:?}", report.warnings);
        }
    }

    #[test]
    fn shifted_gerbes_are_valid_mod_one() {
        use rand::SeedableRng;
        let ec = torus_z2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100);
        for _ in 0..5 {
            let g = random_gerbe_shifted(&ec, &mut rng).unwrap();
            assert!(g.check(ExecMode::default()).is_valid());
        }
    }

    #[test]
    fn cech_shift_preserves_validity_and_curvature_class() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        let g = torus_z2_gerbe();
        let g2 = cech_shift(&g, &mut rng).unwrap();
        assert!(g2.check(ExecMode::default()).is_valid());
        // curvature is unchanged on a 2-dimensional base (both vanish)
        assert_eq!(g.curvature().unwrap(), g2.curvature().unwrap());
    }
}
