//! Fundamental cycles of oriented pseudomanifolds.
//!
//! Orientation signs are propagated from a seed top simplex across shared
//! codimension-1 faces in a deterministic breadth-first order; a sign
//! conflict certifies non-orientability.

use std::collections::VecDeque;

use crate::cochain::{boundary, Chain};
use crate::error::{Error, Result};
use crate::rat::rat_int;
use crate::simplicial::SimplicialComplex;

/// Seed for orientation propagation: top simplex index and its sign.
#[derive(Debug, Clone, Copy)]
pub struct OrientationSeed {
    pub simplex: usize,
    pub sign: i64,
}

impl Default for OrientationSeed {
    fn default() -> Self {
        OrientationSeed {
            simplex: 0,
            sign: 1,
        }
    }
}

fn propagate_signs(
    complex: &SimplicialComplex,
    d: usize,
    relative: bool,
    seed: OrientationSeed,
) -> Result<Vec<i64>> {
    let top = complex.n_cells(d);
    if top == 0 {
        return Err(Error::NotPseudomanifold(format!(
            "no {d}-simplices present"
        )));
    }
    if seed.simplex >= top || (seed.sign != 1 && seed.sign != -1) {
        return Err(Error::Validation("bad orientation seed".into()));
    }
    // cofaces of each (d-1)-simplex
    let mut cofaces: Vec<Vec<(usize, i64)>> = vec![Vec::new(); complex.n_cells(d.saturating_sub(1))];
    if d >= 1 {
        for s in 0..top {
            for (f, sign) in complex.faces_with_signs(d, s) {
                cofaces[f].push((s, sign));
            }
        }
        for (f, list) in cofaces.iter().enumerate() {
            let allowed = if relative {
                (1..=2).contains(&list.len())
            } else {
                list.len() == 2
            };
            if !allowed {
                return Err(Error::NotPseudomanifold(format!(
                    "face {} lies in {} top simplices",
                    complex.simplex_id(d - 1, f),
                    list.len()
                )));
            }
        }
    }
    let mut signs: Vec<i64> = vec![0; top];
    let mut queue = VecDeque::new();
    let mut start = Some(seed);
    while let Some(s) = start.take() {
        signs[s.simplex] = s.sign;
        queue.push_back(s.simplex);
        while let Some(cur) = queue.pop_front() {
            if d == 0 {
                break;
            }
            for (f, sign_cur) in complex.faces_with_signs(d, cur) {
                for &(other, sign_other) in &cofaces[f] {
                    if other == cur {
                        continue;
                    }
                    // shared-face contributions must cancel
                    let needed = -signs[cur] * sign_cur * sign_other;
                    if signs[other] == 0 {
                        signs[other] = needed;
                        queue.push_back(other);
                    } else if signs[other] != needed {
                        return Err(Error::NonOrientable(format!(
                            "orientation conflict across face {}",
                            complex.simplex_id(d - 1, f)
                        )));
                    }
                }
            }
        }
        // continue on the next unvisited component, deterministically
        start = signs
            .iter()
            .position(|&s| s == 0)
            .map(|simplex| OrientationSeed { simplex, sign: 1 });
    }
    Ok(signs)
}

/// Fundamental cycle of a closed oriented `d`-pseudomanifold: one `+-1`
/// coefficient per top simplex, boundary exactly zero. Components beyond the
/// seeded one are oriented from their lowest-index simplex with sign `+1`.
pub fn fundamental_cycle(
    complex: &SimplicialComplex,
    d: usize,
    seed: Option<OrientationSeed>,
) -> Result<Chain> {
    let signs = propagate_signs(complex, d, false, seed.unwrap_or_default())?;
    let mut z = Chain::zero(d);
    for (s, &sign) in signs.iter().enumerate() {
        z.set(s, rat_int(sign));
    }
    let bd = boundary(complex, &z)?;
    if !bd.is_zero() {
        return Err(Error::NotPseudomanifold(
            "propagated chain has nonzero boundary".into(),
        ));
    }
    Ok(z)
}

/// Relative fundamental chain of a compact oriented `d`-pseudomanifold with
/// boundary: the boundary of the result is supported on faces lying in a
/// single top simplex.
pub fn relative_fundamental_chain(
    complex: &SimplicialComplex,
    d: usize,
    seed: Option<OrientationSeed>,
) -> Result<Chain> {
    let signs = propagate_signs(complex, d, true, seed.unwrap_or_default())?;
    let mut z = Chain::zero(d);
    for (s, &sign) in signs.iter().enumerate() {
        z.set(s, rat_int(sign));
    }
    if d >= 1 {
        let bd = boundary(complex, &z)?;
        for (&f, _) in bd.support() {
            let coface_count = (0..complex.n_cells(d))
                .filter(|&s| {
                    complex
                        .faces_with_signs(d, s)
                        .iter()
                        .any(|&(ff, _)| ff == f)
                })
                .count();
            if coface_count != 1 {
                return Err(Error::NotPseudomanifold(format!(
                    "residual boundary on interior face {}",
                    complex.simplex_id(d - 1, f)
                )));
            }
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use num_traits::Signed;

    #[test]
    fn triangle_circle_cycle() {
        let c = shapes::circle(3);
        let z = fundamental_cycle(&c, 1, None).unwrap();
        assert_eq!(z.support().count(), 3);
        assert!(boundary(&c, &z).unwrap().is_zero());
        for (_, v) in z.support() {
            assert!(v.clone().abs() == crate::rat::rat_int(1));
        }
    }

    #[test]
    fn torus_cycle_closes() {
        let t = shapes::grid_torus(4, 3);
        let z = fundamental_cycle(&t, 2, None).unwrap();
        assert_eq!(z.support().count(), t.n_cells(2));
        assert!(boundary(&t, &z).unwrap().is_zero());
    }

    #[test]
    fn three_torus_cycle_closes() {
        let t = shapes::grid_torus3(3, 3, 3);
        let z = fundamental_cycle(&t, 3, None).unwrap();
        assert!(boundary(&t, &z).unwrap().is_zero());
    }

    #[test]
    fn moebius_band_is_not_orientable() {
        let m = shapes::moebius();
        match relative_fundamental_chain(&m, 2, None) {
            Err(Error::NonOrientable(_)) => {}
            other => panic!("expected NonOrientable, got {other:?}"),
        }
    }

    #[test]
    fn open_circle_is_not_closed_pseudomanifold() {
        // a path is not a closed 1-pseudomanifold
        let c = crate::simplicial::SimplicialComplex::from_simplices(
            vec![0, 1, 2],
            &[vec![0, 1], vec![1, 2]],
        )
        .unwrap();
        assert!(matches!(
            fundamental_cycle(&c, 1, None),
            Err(Error::NotPseudomanifold(_))
        ));
    }

    #[test]
    fn cylinder_relative_boundary_is_two_circles() {
        let cyl = shapes::cylinder(4, 2);
        let z = relative_fundamental_chain(&cyl, 2, None).unwrap();
        let bd = boundary(&cyl, &z).unwrap();
        // the boundary lives on the two rim circles, 4 edges each
        assert_eq!(bd.support().count(), 8);
        // rim edges at level 0: vertices 0..4; at level 2: vertices 8..12
        for (&e, v) in bd.support() {
            let s = cyl.simplex(1, e);
            let level0 = s.iter().all(|&x| x < 4);
            let level2 = s.iter().all(|&x| x >= 8);
            assert!(level0 || level2, "boundary edge off the rims");
            assert!(v.clone().abs() == crate::rat::rat_int(1));
        }
    }

    #[test]
    fn seed_flip_negates_the_cycle() {
        let c = shapes::circle(4);
        let z1 = fundamental_cycle(&c, 1, None).unwrap();
        let z2 = fundamental_cycle(
            &c,
            1,
            Some(OrientationSeed {
                simplex: 0,
                sign: -1,
            }),
        )
        .unwrap();
        assert_eq!(z1.neg(), z2);
    }
}
