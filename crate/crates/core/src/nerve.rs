//! The action-groupoid nerve: level `p` is the disjoint union of `|G|^p`
//! copies of `M`, indexed by words `(g_1, ..., g_p)`, with face maps
//!
//! ```text
//!   d_0 (m; g_1, ..., g_p) = (m.g_1; g_2, ..., g_p)
//!   d_i (m; g_1, ..., g_p) = (m; g_1, ..., g_i g_{i+1}, ..., g_p)
//!   d_p (m; g_1, ..., g_p) = (m; g_1, ..., g_{p-1})
//! ```
//!
//! For finite `G` the total complex of the induced double complex computes
//! the cohomology of the Borel construction `M x_G EG`; truncation at
//! `p_max >= n + 1` is exact in degree `n`.

use std::sync::OnceLock;

use crate::action::GroupAction;
use crate::cochain::Cochain;
use crate::complex::{CohomologyGroup, FiniteComplex};
use crate::double::DoubleComplex;
use crate::error::{Error, Result};
use crate::matrix::SparseMat;
use crate::rat::{rat_int, CoefficientRing, Rat};

/// A face map between nerve levels: per source word, the target word and
/// the group element acting on the `M` factor (`m -> m.a`).
#[derive(Debug, Clone, PartialEq, Eq)]
struct FaceMap {
    word_map: Vec<usize>,
    act: Vec<usize>,
}

#[derive(Debug)]
pub struct NerveModel {
    pub action: GroupAction,
    pub p_max: usize,
    /// faces[p][i]: the map `d_i : N_p -> N_{p-1}` for `1 <= p <= p_max`
    faces: Vec<Vec<FaceMap>>,
    total: OnceLock<FiniteComplex>,
}

impl NerveModel {
    pub fn build(action: &GroupAction, p_max: usize) -> NerveModel {
        let ord = action.group.order();
        let mut faces = vec![Vec::new()];
        for p in 1..=p_max {
            let words = ord.pow(p as u32);
            let mut level_faces = Vec::with_capacity(p + 1);
            for i in 0..=p {
                let mut word_map = Vec::with_capacity(words);
                let mut act = Vec::with_capacity(words);
                for w in 0..words {
                    let digits = word_digits(w, p, ord);
                    let (target, a) = if i == 0 {
                        (digits[1..].to_vec(), digits[0])
                    } else if i == p {
                        (digits[..p - 1].to_vec(), action.group.identity())
                    } else {
                        let mut t = Vec::with_capacity(p - 1);
                        t.extend_from_slice(&digits[..i - 1]);
                        t.push(action.group.mul(digits[i - 1], digits[i]));
                        t.extend_from_slice(&digits[i + 1..]);
                        (t, action.group.identity())
                    };
                    word_map.push(word_index(&target, ord));
                    act.push(a);
                }
                level_faces.push(FaceMap { word_map, act });
            }
            faces.push(level_faces);
        }
        let model = NerveModel {
            action: action.clone(),
            p_max,
            faces,
            total: OnceLock::new(),
        };
        debug_assert!(model.check_simplicial_identities().is_ok());
        model
    }

    pub fn group_order(&self) -> usize {
        self.action.group.order()
    }

    pub fn words_at(&self, p: usize) -> usize {
        self.group_order().pow(p as u32)
    }

    /// Rank of the `(p, j)` grid position.
    pub fn level_rank(&self, p: usize, j: usize) -> usize {
        self.words_at(p) * self.action.complex.n_cells(j)
    }

    /// `d_i d_j = d_{j-1} d_i` for `i < j`, on every level present.
    pub fn check_simplicial_identities(&self) -> Result<()> {
        let compose = |outer: &FaceMap, inner: &FaceMap| -> FaceMap {
            // inner: N_p -> N_{p-1}, outer: N_{p-1} -> N_{p-2}
            let n = inner.word_map.len();
            let mut word_map = Vec::with_capacity(n);
            let mut act = Vec::with_capacity(n);
            for w in 0..n {
                let mid = inner.word_map[w];
                word_map.push(outer.word_map[mid]);
                act.push(self.action.group.mul(inner.act[w], outer.act[mid]));
            }
            FaceMap { word_map, act }
        };
        for p in 2..=self.p_max {
            for j in 1..=p {
                for i in 0..j {
                    let lhs = compose(&self.faces[p - 1][i], &self.faces[p][j]);
                    let rhs = compose(&self.faces[p - 1][j - 1], &self.faces[p][i]);
                    if lhs != rhs {
                        return Err(Error::Validation(format!(
                            "simplicial identity d_{i} d_{j} = d_{} d_{i} fails at level {p}",
                            j - 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Pullback matrix of the face map `d_i : N_p -> N_{p-1}` on degree-`j`
    /// cochains.
    fn face_pullback(&self, p: usize, i: usize, j: usize) -> SparseMat {
        let m_cells = self.action.complex.n_cells(j);
        let face = &self.faces[p][i];
        let mut out = SparseMat::zeros(self.level_rank(p, j), self.level_rank(p - 1, j));
        for w in 0..self.words_at(p) {
            let a = face.act[w];
            let tw = face.word_map[w];
            for cell in 0..m_cells {
                let (img, sign) = self.action.simplex_image(a, j, cell);
                out.set(w * m_cells + cell, tw * m_cells + img, rat_int(sign));
            }
        }
        out
    }

    /// Bar differential `delta : C^j(N_p) -> C^j(N_{p+1})`,
    /// the alternating sum of face pullbacks of level `p+1`.
    pub fn bar_matrix(&self, p: usize, j: usize) -> SparseMat {
        let mut out = SparseMat::zeros(self.level_rank(p + 1, j), self.level_rank(p, j));
        for i in 0..=(p + 1) {
            let f = self.face_pullback(p + 1, i, j);
            let sign = if i % 2 == 0 { rat_int(1) } else { rat_int(-1) };
            out = out.add(&f.scale(&sign));
        }
        out
    }

    /// Simplicial coboundary at level `p`: block diagonal copies of `M`'s.
    pub fn vertical_matrix(&self, p: usize, j: usize) -> SparseMat {
        let base = self.action.complex.coboundary_matrix(j);
        let words = self.words_at(p);
        let mut out = SparseMat::zeros(
            words * self.action.complex.n_cells(j + 1),
            words * self.action.complex.n_cells(j),
        );
        let (rows, cols) = (base.rows, base.cols);
        for w in 0..words {
            for (&(r, c), v) in base.iter() {
                out.set(w * rows + r, w * cols + c, v.clone());
            }
        }
        out
    }

    /// The nerve double complex: `delta` in the level direction, `d` the
    /// simplicial coboundary, total differential `delta + (-1)^p d`.
    pub fn double_complex(&self) -> Result<DoubleComplex> {
        self.double_complex_capped(self.action.complex.dim())
    }

    /// Same grid with the form degree capped at `j_cap` (sheaf truncation:
    /// the coboundary out of column `j_cap` is dropped).
    pub fn double_complex_capped(&self, j_cap: usize) -> Result<DoubleComplex> {
        let dim = self.action.complex.dim().min(j_cap);
        let mut ranks = Vec::new();
        let mut delta = Vec::new();
        let mut d = Vec::new();
        let mut labels = Vec::new();
        for p in 0..=self.p_max {
            ranks.push((0..=dim).map(|j| self.level_rank(p, j)).collect());
            let mut drow = Vec::new();
            let mut vrow = Vec::new();
            let mut lrow = Vec::new();
            for j in 0..=dim {
                if p < self.p_max {
                    drow.push(self.bar_matrix(p, j));
                } else {
                    drow.push(SparseMat::zeros(0, self.level_rank(p, j)));
                }
                if j < dim {
                    vrow.push(self.vertical_matrix(p, j));
                } else {
                    vrow.push(SparseMat::zeros(0, self.level_rank(p, j)));
                }
                let m_cells = self.action.complex.n_cells(j);
                lrow.push(
                    (0..self.level_rank(p, j))
                        .map(|idx| {
                            let (w, cell) = (idx / m_cells.max(1), idx % m_cells.max(1));
                            format!(
                                "p{p}w{w}:{}",
                                self.action.complex.simplex_id(j, cell)
                            )
                        })
                        .collect(),
                );
            }
            delta.push(drow);
            d.push(vrow);
            labels.push(lrow);
        }
        let dc = DoubleComplex::new(ranks, delta, d)?.with_labels(labels);
        Ok(dc)
    }

    /// Total complex of the truncated nerve double complex (cached).
    pub fn total_complex(&self) -> &FiniteComplex {
        self.total.get_or_init(|| {
            self.double_complex()
                .and_then(|dc| dc.total_complex())
                .expect("nerve double complex is well formed")
        })
    }

    /// Offset of the `(p, j)` block inside total degree `p + j`.
    pub fn block_offset(&self, p: usize, j: usize) -> usize {
        self.block_offset_capped(p, j, self.action.complex.dim())
    }

    /// Block offset in the `j_cap`-truncated total complex.
    pub fn block_offset_capped(&self, p: usize, j: usize, j_cap: usize) -> usize {
        let n = p + j;
        let dim = self.action.complex.dim().min(j_cap);
        let mut off = 0;
        for q in 0..p {
            if n - q <= dim && q <= self.p_max {
                off += self.level_rank(q, n - q);
            }
        }
        off
    }

    /// Lift of a G-invariant cochain on `M` into the `p = 0` column of the
    /// total complex. Errors with `NotInvariant` otherwise; the bar
    /// component of its total coboundary vanishes exactly by invariance.
    pub fn lift_invariant_form(&self, omega: &Cochain) -> Result<Cochain> {
        if !self.action.is_invariant(omega)? {
            return Err(Error::NotInvariant(format!(
                "degree-{} cochain is not G-invariant",
                omega.degree
            )));
        }
        omega.check_ambient(&self.action.complex)?;
        let mut out = Cochain::zero(omega.degree, omega.ring);
        let off = self.block_offset(0, omega.degree);
        for (&i, v) in omega.support() {
            out.set(off + i, v.clone());
        }
        Ok(out)
    }

    /// Pushes a chain of `M` into the `p = 0` block of the total chain
    /// group in its degree.
    pub fn include_chain(&self, z: &crate::cochain::Chain) -> crate::cochain::Chain {
        let off = self.block_offset(0, z.degree);
        let mut out = crate::cochain::Chain::zero(z.degree);
        for (&i, v) in z.support() {
            out.add_to(off + i, v.clone());
        }
        out
    }
}

fn word_digits(mut w: usize, p: usize, ord: usize) -> Vec<usize> {
    let mut digits = vec![0; p];
    for i in (0..p).rev() {
        digits[i] = w % ord;
        w /= ord;
    }
    digits
}

fn word_index(digits: &[usize], ord: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * ord + d)
}

/// Borel (equivariant) cohomology `H^n(M x_G EG; ring)` through the nerve,
/// truncated at `p_max` (defaults to the stable `n + 1`).
pub fn borel_cohomology(
    ec: &crate::action::EquivariantComplex,
    degree: isize,
    ring: CoefficientRing,
    p_max: Option<usize>,
) -> Result<CohomologyGroup> {
    if degree < 0 {
        return Ok(CohomologyGroup::zero());
    }
    let need = degree as usize + 1;
    let p_max = p_max.unwrap_or(need);
    if p_max < need {
        return Err(Error::TruncationTooSmall(format!(
            "degree {degree} needs p_max >= {need}, got {p_max}"
        )));
    }
    let nerve = ec.nerve(p_max);
    nerve.total_complex().cohomology(degree, ring)
}

/// Pairing of a lifted cochain with a total chain, evaluated exactly.
pub fn pair_total(c: &Cochain, z: &crate::cochain::Chain) -> Result<Rat> {
    crate::cochain::pair(c, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::EquivariantComplex;
    use crate::cochain::Chain;
    use crate::group::FiniteGroup;
    use crate::rat::{rat, Int};
    use crate::shapes;
    use crate::simplicial::SimplicialComplex;
    use num_traits::Zero;

    fn pt_mod_z2() -> EquivariantComplex {
        let pt = SimplicialComplex::point();
        let g = FiniteGroup::cyclic(2);
        EquivariantComplex::new(GroupAction::new(pt, g, vec![vec![0], vec![0]]).unwrap())
    }

    #[test]
    fn p0_nerve_is_m_itself() {
        let a = GroupAction::trivial(shapes::circle(3));
        let n = NerveModel::build(&a, 0);
        assert_eq!(n.level_rank(0, 0), 3);
        assert_eq!(n.level_rank(0, 1), 3);
        let t = n.total_complex();
        assert_eq!(
            t.cohomology(1, CoefficientRing::Integers).unwrap().free_rank,
            1
        );
    }

    #[test]
    fn classifying_space_of_z2() {
        let ec = pt_mod_z2();
        // H^*(BZ2; Z) = Z, 0, Z/2, 0, Z/2
        let expected: Vec<CohomologyGroup> = vec![
            CohomologyGroup::free(1),
            CohomologyGroup::zero(),
            CohomologyGroup {
                free_rank: 0,
                torsion: vec![Int::from(2)],
                divisible_rank: 0,
                rational_divisible_rank: 0,
            },
            CohomologyGroup::zero(),
            CohomologyGroup {
                free_rank: 0,
                torsion: vec![Int::from(2)],
                divisible_rank: 0,
                rational_divisible_rank: 0,
            },
        ];
        for (n, exp) in expected.iter().enumerate() {
            let h = borel_cohomology(&ec, n as isize, CoefficientRing::Integers, None).unwrap();
            assert_eq!(&h, exp, "H^{n}(BZ2; Z)");
        }
    }

    #[test]
    fn truncation_stability() {
        let ec = pt_mod_z2();
        for n in 0..=3isize {
            let a =
                borel_cohomology(&ec, n, CoefficientRing::Integers, Some(n as usize + 1)).unwrap();
            let b =
                borel_cohomology(&ec, n, CoefficientRing::Integers, Some(n as usize + 2)).unwrap();
            assert_eq!(a, b, "truncation stability at degree {n}");
        }
    }

    #[test]
    fn trivial_group_nerve_reproduces_m() {
        let a = GroupAction::trivial(shapes::grid_torus(4, 3));
        let ec = EquivariantComplex::new(a);
        for n in 0..=2isize {
            let h = borel_cohomology(&ec, n, CoefficientRing::Integers, None).unwrap();
            let direct = ec
                .complex()
                .cochain_complex()
                .cohomology(n, CoefficientRing::Integers)
                .unwrap();
            assert_eq!(h, direct, "degree {n}");
        }
    }

    #[test]
    fn lift_pairs_like_the_base_form() {
        let a = GroupAction::trivial(shapes::circle(3));
        let ec = EquivariantComplex::new(a);
        let nerve = ec.nerve(2);
        let mut omega = Cochain::zero(1, CoefficientRing::Rationals);
        omega.set(0, rat(1, 2));
        omega.set(2, rat(-1, 3));
        let lifted = nerve.lift_invariant_form(&omega).unwrap();
        let mut z = Chain::zero(1);
        z.set(0, rat(1, 1));
        z.set(2, rat(2, 1));
        let lhs = pair_total(&lifted, &nerve.include_chain(&z)).unwrap();
        let rhs = crate::cochain::pair(&omega, &z).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn bar_closedness_of_invariant_lift() {
        // Z2 pi-rotation on the torus; invariant 2-cochain lifts with
        // vanishing bar component
        let t = shapes::grid_torus(4, 3);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![shapes::torus_shift(4, 3, 0), shapes::torus_shift(4, 3, 2)];
        let a = GroupAction::new(t, g, maps).unwrap();
        let ec = EquivariantComplex::new(a);
        let nerve = ec.nerve(3);
        let inv = ec.action.invariant_cochains(2);
        assert!(!inv.is_empty());
        let omega = &inv[0];
        let lifted = nerve.lift_invariant_form(omega).unwrap();
        // total coboundary has only the (0, 3) block (zero here: dim M = 2)
        // and the (1, 2) bar block, which must vanish by invariance
        let total = nerve.total_complex();
        let d = total.diff(2);
        let mut as_vec = vec![Rat::zero(); total.rank(2)];
        for (&i, v) in lifted.support() {
            as_vec[i] = v.clone();
        }
        let image = d.apply(&as_vec);
        assert!(image.iter().all(Zero::is_zero));
    }

    #[test]
    fn non_invariant_lift_rejected() {
        let t = shapes::grid_torus(4, 3);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![shapes::torus_shift(4, 3, 0), shapes::torus_shift(4, 3, 2)];
        let a = GroupAction::new(t, g, maps).unwrap();
        let ec = EquivariantComplex::new(a);
        let nerve = ec.nerve(2);
        let mut c = Cochain::zero(2, CoefficientRing::Rationals);
        c.set(0, rat(1, 1));
        assert!(matches!(
            nerve.lift_invariant_form(&c),
            Err(Error::NotInvariant(_))
        ));
    }
}
