//! Right actions of finite groups on simplicial complexes, simplicial maps,
//! pullbacks of cochains, and the invariant subspace.
//!
//! The right-action convention is fixed throughout: `vertex_map(g)` realizes
//! `x -> x.g`, so `vertex_map(g h) = vertex_map(h) o vertex_map(g)` and
//! pullbacks compose as `(g h)^* = g^* o h^*`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::matrix::{rational_kernel, SparseMat};
use crate::rat::{rat_int, CoefficientRing, Rat};
use crate::simplicial::{sort_sign, SimplicialComplex};

/// A simplicial map between complexes, given on vertices. Simplices may map
/// degenerately; degenerate images contribute zero to pullbacks.
#[derive(Debug, Clone)]
pub struct SimplicialMap {
    /// image vertex in the target, indexed by source vertex
    pub vertices: Vec<usize>,
}

impl SimplicialMap {
    pub fn new(
        source: &SimplicialComplex,
        target: &SimplicialComplex,
        vertices: Vec<usize>,
    ) -> Result<Self> {
        if vertices.len() != source.vertex_count() {
            return Err(Error::ComplexMismatch(format!(
                "vertex assignment has length {}, source has {} vertices",
                vertices.len(),
                source.vertex_count()
            )));
        }
        if vertices.iter().any(|&v| v >= target.vertex_count()) {
            return Err(Error::ComplexMismatch("image vertex out of range".into()));
        }
        let map = SimplicialMap { vertices };
        // every simplex must land on a simplex (possibly degenerate)
        for k in 1..=source.dim() {
            for idx in 0..source.n_cells(k) {
                if let Some((img, _)) = map.image_simplex(source, k, idx) {
                    if target.index_of(k, &img).is_none() {
                        return Err(Error::ComplexMismatch(format!(
                            "simplex {} maps to {:?}, not a simplex of the target",
                            source.simplex_id(k, idx),
                            img
                        )));
                    }
                }
            }
        }
        Ok(map)
    }

    /// Sorted image tuple and orientation sign; `None` when degenerate.
    pub fn image_simplex(
        &self,
        source: &SimplicialComplex,
        k: usize,
        idx: usize,
    ) -> Option<(Vec<usize>, i64)> {
        let img: Vec<usize> = source
            .simplex(k, idx)
            .iter()
            .map(|&v| self.vertices[v])
            .collect();
        sort_sign(&img)
    }

    /// Composite `self` then `after` (both on vertices).
    pub fn compose(&self, after: &SimplicialMap) -> SimplicialMap {
        SimplicialMap {
            vertices: self.vertices.iter().map(|&v| after.vertices[v]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertices.iter().enumerate().all(|(i, &v)| i == v)
    }
}

/// Pullback of a cochain along a simplicial map: `(f^* c)(s) = sign * c(f s)`,
/// zero on simplices with degenerate image. Commutes with the coboundary.
pub fn pullback(
    map: &SimplicialMap,
    source: &SimplicialComplex,
    target: &SimplicialComplex,
    c: &Cochain,
) -> Result<Cochain> {
    c.check_ambient(target)?;
    let k = c.degree;
    let mut out = Cochain::zero(k, c.ring);
    for idx in 0..source.n_cells(k) {
        if let Some((img, sign)) = map.image_simplex(source, k, idx) {
            if let Some(tgt_idx) = target.index_of(k, &img) {
                let v = c.get(tgt_idx);
                if !v.is_zero() {
                    out.set(idx, v * rat_int(sign));
                }
            }
        }
    }
    Ok(out)
}

/// Matrix of the pullback on degree-`k` cochains (target basis to source
/// basis).
pub fn pullback_matrix(
    map: &SimplicialMap,
    source: &SimplicialComplex,
    target: &SimplicialComplex,
    k: usize,
) -> SparseMat {
    let mut m = SparseMat::zeros(source.n_cells(k), target.n_cells(k));
    for idx in 0..source.n_cells(k) {
        if let Some((img, sign)) = map.image_simplex(source, k, idx) {
            if let Some(tgt_idx) = target.index_of(k, &img) {
                m.set(idx, tgt_idx, rat_int(sign));
            }
        }
    }
    m
}

/// One violated action invariant, with its witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ActionViolation {
    IdentityNotIdentity,
    NotPermutation { element: String },
    CompositionFailure { g: String, h: String, vertex: u64 },
    AutomorphismViolation { element: String, simplex: String },
}

impl fmt::Display for ActionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionViolation::IdentityNotIdentity => {
                write!(f, "identity element does not act as the identity")
            }
            ActionViolation::NotPermutation { element } => {
                write!(f, "element {element} does not act by a vertex permutation")
            }
            ActionViolation::CompositionFailure { g, h, vertex } => write!(
                f,
                "composition fails: (x.{g}).{h} != x.({g}{h}) at vertex {vertex}"
            ),
            ActionViolation::AutomorphismViolation { element, simplex } => write!(
                f,
                "element {element} carries simplex {simplex} outside the complex"
            ),
        }
    }
}

/// A right action of a finite group by simplicial automorphisms.
#[derive(Debug, Clone)]
pub struct GroupAction {
    pub complex: SimplicialComplex,
    pub group: FiniteGroup,
    /// vertex_maps[g][x] = x.g
    pub vertex_maps: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn new(
        complex: SimplicialComplex,
        group: FiniteGroup,
        vertex_maps: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let a = GroupAction {
            complex,
            group,
            vertex_maps,
        };
        let report = a.validate();
        if report.is_empty() {
            Ok(a)
        } else {
            Err(Error::Validation(format!(
                "invalid group action: {}",
                report
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; ")
            )))
        }
    }

    pub fn trivial(complex: SimplicialComplex) -> Self {
        let n = complex.vertex_count();
        GroupAction {
            complex,
            group: FiniteGroup::trivial(),
            vertex_maps: vec![(0..n).collect()],
        }
    }

    /// Reports every violated invariant; empty iff the action is valid.
    pub fn validate(&self) -> Vec<ActionViolation> {
        let mut out = Vec::new();
        let n = self.complex.vertex_count();
        let ord = self.group.order();
        if self.vertex_maps.len() != ord {
            out.push(ActionViolation::NotPermutation {
                element: "<missing maps>".into(),
            });
            return out;
        }
        for g in 0..ord {
            let m = &self.vertex_maps[g];
            let mut seen = vec![false; n];
            let mut ok = m.len() == n;
            if ok {
                for &v in m {
                    if v >= n || seen[v] {
                        ok = false;
                        break;
                    }
                    seen[v] = true;
                }
            }
            if !ok {
                out.push(ActionViolation::NotPermutation {
                    element: self.group.name(g).to_string(),
                });
            }
        }
        if out.iter().any(|v| matches!(v, ActionViolation::NotPermutation { .. })) {
            return out;
        }
        let e = self.group.identity();
        if (0..n).any(|x| self.vertex_maps[e][x] != x) {
            out.push(ActionViolation::IdentityNotIdentity);
        }
        for g in 0..ord {
            for h in 0..ord {
                let gh = self.group.mul(g, h);
                for x in 0..n {
                    if self.vertex_maps[h][self.vertex_maps[g][x]] != self.vertex_maps[gh][x] {
                        out.push(ActionViolation::CompositionFailure {
                            g: self.group.name(g).to_string(),
                            h: self.group.name(h).to_string(),
                            vertex: self.complex.vertex_label(x),
                        });
                    }
                }
            }
        }
        // automorphism: simplices map to simplices of the same dimension
        for g in 0..ord {
            for k in 1..=self.complex.dim() {
                for idx in 0..self.complex.n_cells(k) {
                    let img: Vec<usize> = self
                        .complex
                        .simplex(k, idx)
                        .iter()
                        .map(|&v| self.vertex_maps[g][v])
                        .collect();
                    let exists = sort_sign(&img)
                        .and_then(|(s, _)| self.complex.index_of(k, &s))
                        .is_some();
                    if !exists {
                        out.push(ActionViolation::AutomorphismViolation {
                            element: self.group.name(g).to_string(),
                            simplex: self.complex.simplex_id(k, idx),
                        });
                    }
                }
            }
        }
        out
    }

    /// The self-map realizing `x -> x.g`.
    pub fn map_of(&self, g: usize) -> SimplicialMap {
        SimplicialMap {
            vertices: self.vertex_maps[g].clone(),
        }
    }

    /// `g^* c` for a cochain on the acted complex.
    pub fn group_pullback(&self, g: usize, c: &Cochain) -> Result<Cochain> {
        pullback(&self.map_of(g), &self.complex, &self.complex, c)
    }

    /// Matrix of `g^*` on degree-`k` cochains.
    pub fn group_pullback_matrix(&self, g: usize, k: usize) -> SparseMat {
        pullback_matrix(&self.map_of(g), &self.complex, &self.complex, k)
    }

    /// Image of a simplex under `g` with orientation sign.
    pub fn simplex_image(&self, g: usize, k: usize, idx: usize) -> (usize, i64) {
        let img: Vec<usize> = self
            .complex
            .simplex(k, idx)
            .iter()
            .map(|&v| self.vertex_maps[g][v])
            .collect();
        let (sorted, sign) = sort_sign(&img).expect("automorphisms are non-degenerate");
        (
            self.complex
                .index_of(k, &sorted)
                .expect("automorphisms preserve the complex"),
            sign,
        )
    }

    /// `(1/|G|) sum_g g^* c`; a projector onto the invariant subspace.
    pub fn average(&self, c: &Cochain) -> Result<Cochain> {
        if c.ring == CoefficientRing::RationalsMod1 {
            return Err(Error::RingMismatch(
                "averaging divides by |G|; not defined on mod-1 values".into(),
            ));
        }
        let mut acc = Cochain::zero(c.degree, CoefficientRing::Rationals);
        for g in self.group.elements() {
            acc = acc.add(&self.group_pullback(g, &c.as_rational())?)?;
        }
        let avg = acc.scale(&Rat::new(1.into(), (self.group.order() as i64).into()));
        if c.ring == CoefficientRing::Integers {
            if !avg.is_integral() {
                return Err(Error::RingMismatch(
                    "average of integer cochain is not integral".into(),
                ));
            }
            let mut out = Cochain::zero(c.degree, CoefficientRing::Integers);
            for (&i, v) in avg.support() {
                out.set(i, v.clone());
            }
            return Ok(out);
        }
        Ok(avg)
    }

    pub fn is_invariant(&self, c: &Cochain) -> Result<bool> {
        for g in self.group.elements() {
            if self.group_pullback(g, c)? != *c {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Deterministic basis of the G-invariant subspace of degree-`k`
    /// rational cochains.
    pub fn invariant_cochains(&self, k: usize) -> Vec<Cochain> {
        let n = self.complex.n_cells(k);
        let nontrivial: Vec<usize> = self
            .group
            .elements()
            .filter(|&g| g != self.group.identity())
            .collect();
        if nontrivial.is_empty() || n == 0 {
            // everything is invariant
            return (0..n)
                .map(|i| {
                    let mut c = Cochain::zero(k, CoefficientRing::Rationals);
                    c.set(i, rat_int(1));
                    c
                })
                .collect();
        }
        // stack (g^* - id) for all nontrivial g
        let mut stacked = SparseMat::zeros(n * nontrivial.len(), n);
        for (block, &g) in nontrivial.iter().enumerate() {
            let m = self.group_pullback_matrix(g, k);
            for (&(i, j), v) in m.iter() {
                stacked.add_to(block * n + i, j, v.clone());
            }
            for j in 0..n {
                stacked.add_to(block * n + j, j, rat_int(-1));
            }
        }
        rational_kernel(&stacked)
            .into_iter()
            .map(|v| {
                let mut c = Cochain::zero(k, CoefficientRing::Rationals);
                for (i, x) in v.into_iter().enumerate() {
                    if !x.is_zero() {
                        c.set(i, x);
                    }
                }
                c
            })
            .collect()
    }
}

/// An orbifold presentation `[M/G]`: a validated action plus a memoized
/// nerve cache (populated on demand; same value regardless of who fills it).
#[derive(Debug, Clone)]
pub struct EquivariantComplex {
    pub action: Arc<GroupAction>,
    nerve_cache: Arc<Mutex<HashMap<usize, Arc<crate::nerve::NerveModel>>>>,
}

impl EquivariantComplex {
    pub fn new(action: GroupAction) -> Self {
        EquivariantComplex {
            action: Arc::new(action),
            nerve_cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.action.complex
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.action.group
    }

    /// The truncated action-groupoid nerve, built once per `p_max`.
    pub fn nerve(&self, p_max: usize) -> Arc<crate::nerve::NerveModel> {
        let mut cache = self.nerve_cache.lock().unwrap();
        cache
            .entry(p_max)
            .or_insert_with(|| Arc::new(crate::nerve::NerveModel::build(&self.action, p_max)))
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::coboundary;
    use crate::rat::rat;
    use crate::shapes;

    fn hexagon_z3() -> GroupAction {
        let hex = shapes::circle(6);
        let g = FiniteGroup::cyclic(3);
        let maps = vec![
            (0..6).collect(),
            (0..6).map(|v| (v + 2) % 6).collect(),
            (0..6).map(|v| (v + 4) % 6).collect(),
        ];
        GroupAction::new(hex, g, maps).unwrap()
    }

    #[test]
    fn trivial_action_validates() {
        let a = GroupAction::trivial(shapes::circle(3));
        assert!(a.validate().is_empty());
    }

    #[test]
    fn z3_rotation_of_hexagon_validates() {
        let a = hexagon_z3();
        assert!(a.validate().is_empty());
    }

    #[test]
    fn broken_action_is_reported() {
        // a "map" sending an edge to a non-edge: transpose two non-adjacent
        // vertices of the hexagon for the non-identity element of Z2
        let hex = shapes::circle(6);
        let g = FiniteGroup::cyclic(2);
        let mut m1: Vec<usize> = (0..6).collect();
        m1.swap(0, 3);
        let a = GroupAction {
            complex: hex,
            group: g,
            vertex_maps: vec![(0..6).collect(), m1],
        };
        let report = a.validate();
        assert!(report
            .iter()
            .any(|v| matches!(v, ActionViolation::AutomorphismViolation { .. })));
    }

    #[test]
    fn identity_pullbacks() {
        let a = hexagon_z3();
        let mut c = Cochain::zero(1, CoefficientRing::Rationals);
        c.set(0, rat(3, 7));
        c.set(4, rat(-1, 2));
        let id_map = SimplicialMap {
            vertices: (0..6).collect(),
        };
        assert_eq!(pullback(&id_map, &a.complex, &a.complex, &c).unwrap(), c);
        assert_eq!(a.group_pullback(a.group.identity(), &c).unwrap(), c);
    }

    #[test]
    fn antipode_moves_indicator_cochain() {
        // Z2 antipode on a square circle: indicator of edge 0 pulls back to
        // the indicator of the antipodal edge
        let sq = shapes::circle(4);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![(0..4).collect(), (0..4).map(|v| (v + 2) % 4).collect()];
        let a = GroupAction::new(sq, g, maps).unwrap();
        let mut c = Cochain::zero(1, CoefficientRing::Rationals);
        let e0 = a.complex.index_of(1, &[0, 1]).unwrap();
        c.set(e0, rat(1, 1));
        let pulled = a.group_pullback(1, &c).unwrap();
        let antipodal = a.complex.index_of(1, &[2, 3]).unwrap();
        assert_eq!(pulled.get(antipodal), rat(1, 1));
        assert_eq!(pulled.get(e0), Rat::zero());
    }

    #[test]
    fn right_action_composition_law_on_cochains() {
        use rand::{Rng, SeedableRng};
        let a = hexagon_z3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut c = Cochain::zero(1, CoefficientRing::Rationals);
            for i in 0..6 {
                c.set(i, rat(rng.gen_range(-9..9), rng.gen_range(1..7)));
            }
            for g in a.group.elements() {
                for h in a.group.elements() {
                    let gh = a.group.mul(g, h);
                    let lhs = a.group_pullback(gh, &c).unwrap();
                    let rhs = a
                        .group_pullback(g, &a.group_pullback(h, &c).unwrap())
                        .unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn pullback_commutes_with_coboundary() {
        use rand::{Rng, SeedableRng};
        let a = hexagon_z3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut c = Cochain::zero(0, CoefficientRing::Rationals);
        for i in 0..6 {
            c.set(i, rat(rng.gen_range(-9..9), rng.gen_range(1..7)));
        }
        for g in a.group.elements() {
            let lhs = a
                .group_pullback(g, &coboundary(&a.complex, &c).unwrap())
                .unwrap();
            let rhs = coboundary(&a.complex, &a.group_pullback(g, &c).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn average_is_invariant_projector() {
        let a = hexagon_z3();
        let mut c = Cochain::zero(1, CoefficientRing::Rationals);
        c.set(0, rat(1, 1));
        c.set(2, rat(1, 3));
        let avg = a.average(&c).unwrap();
        assert_eq!(a.average(&avg).unwrap(), avg);
        assert!(a.is_invariant(&avg).unwrap());
        // already invariant cochain is fixed
        let inv = a.invariant_cochains(1);
        for b in &inv {
            assert_eq!(&a.average(b).unwrap(), b);
        }
    }

    #[test]
    fn invariant_subspace_of_rotating_square() {
        // Z4 rotating a 4-gon: degree-1 invariants are the constant cochains
        let sq = shapes::circle(4);
        let g = FiniteGroup::cyclic(4);
        let maps = (0..4)
            .map(|r| (0..4).map(|v| (v + r) % 4).collect())
            .collect();
        let a = GroupAction::new(sq, g, maps).unwrap();
        let basis = a.invariant_cochains(1);
        assert_eq!(basis.len(), 1);
        // edge [3,0] is traversed against its canonical orientation, so the
        // rotation-invariant cochain flips sign there
        let b = &basis[0];
        let wrap = a.complex.index_of(1, &[0, 3]).unwrap();
        for i in 0..4 {
            let v = b.get(i);
            if i == wrap {
                assert_eq!(v, -b.get(0));
            } else {
                assert_eq!(v, b.get(0));
            }
        }
    }

    #[test]
    fn average_rejects_mod1() {
        let a = hexagon_z3();
        let c = Cochain::zero(0, CoefficientRing::RationalsMod1);
        assert!(a.average(&c).is_err());
    }
}
