//! Beilinson-Deligne cohomology of `[M/G]` over the action-groupoid nerve.
//!
//! Two coefficient complexes are realized for weight `q`:
//!
//! * the circle variant `U(1)(q)`: the sheaf-truncated total complex with
//!   all values reduced mod 1 (columns `j <= q-1`, no coboundary out of the
//!   last column). Its cohomology is computed from the integral truncated
//!   complex by universal coefficients. For `q = 1` the model degenerates
//!   to locally constant circle functions (the kernel of `d log` on the
//!   0-cochain column).
//! * the integral variant `Z(q)`: the cone of the truncation map from the
//!   full integral total complex to the truncated rational one, graded so
//!   that reducing the rational part mod 1 is a chain map onto the circle
//!   variant with a degree shift of one.
//!
//! A global gerbe `(B, A, rho)` embeds as the circle cocycle with blocks
//! `B` at `(0,2)`, `A` at `(1,1)` and `-rho` at `(2,0)`; the sign is forced
//! by the total differential `delta + (-1)^p d` and is part of the engine's
//! convention header.

use std::sync::Arc;

use num_traits::Zero;

use crate::action::EquivariantComplex;
use crate::cochain::{Chain, Cochain};
use crate::complex::{CohomologyGroup, FiniteComplex};
use crate::error::{Error, Result};
use crate::gerbe::{periods_integral, GerbeCocycle, PeriodsOutcome};
use crate::matrix::SparseMat;
use crate::mixed::MixedComplex;
use crate::nerve::NerveModel;
use crate::rat::{rat_int, CoefficientRing, Int, Rat};
use crate::snf::smith_normal_form;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeligneVariant {
    /// `Z(q)`
    Integral,
    /// `U(1)(q)`
    Circle,
}

#[derive(Debug, Clone, Copy)]
pub struct DeligneComplexSpec {
    pub q: usize,
    pub variant: DeligneVariant,
    pub p_max: usize,
}

impl DeligneComplexSpec {
    pub fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(Error::Validation("Deligne weight q must be >= 1".into()));
        }
        if self.p_max < 1 {
            return Err(Error::Validation("p_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// A degree-`n` cochain of the circle complex `U(1)(q)`: mod-1 values on
/// the truncated nerve total complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleCochain {
    pub q: usize,
    pub c: Cochain,
}

impl CircleCochain {
    pub fn degree(&self) -> usize {
        self.c.degree
    }
}

/// A degree-`n` cochain of the integral complex `Z(q)`: an integer cochain
/// on the full total complex in degree `n` together with a rational cochain
/// on the truncated total complex in degree `n - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralCochain {
    pub q: usize,
    pub degree: usize,
    pub z: Cochain,
    pub a: Cochain,
}

/// A flat class: a mod-1 cocycle of the full nerve total complex.
#[derive(Debug, Clone)]
pub struct FlatClass {
    pub q: usize,
    pub c: Cochain,
}

/// Result of the triviality decision: an explicit primitive, or an integral
/// cycle on which the class pairs non-integrally (gauge invariant witness).
#[derive(Debug, Clone)]
pub enum Trivialization {
    Primitive(CircleCochain),
    Obstruction { cycle: Chain, pairing: Rat },
}

impl Trivialization {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Trivialization::Primitive(_))
    }
}

/// The assembled Deligne machinery for one `(orbifold, q, p_max)`.
pub struct DeligneComplex {
    pub q: usize,
    pub p_max: usize,
    pub nerve: Arc<NerveModel>,
    /// untruncated total complex of the nerve (integral entries)
    full: FiniteComplex,
    /// sheaf truncation at column `q - 1`
    trunc: FiniteComplex,
    j_cap: usize,
}

impl DeligneComplex {
    pub fn new(ec: &EquivariantComplex, q: usize, p_max: usize) -> Result<Self> {
        if q < 1 {
            return Err(Error::Validation("Deligne weight q must be >= 1".into()));
        }
        let nerve = ec.nerve(p_max);
        let full = nerve.total_complex().clone();
        let j_cap = q - 1;
        let trunc = nerve.double_complex_capped(j_cap)?.total_complex()?;
        Ok(DeligneComplex {
            q,
            p_max,
            nerve,
            full,
            trunc,
            j_cap,
        })
    }

    pub fn trunc_total(&self) -> &FiniteComplex {
        &self.trunc
    }

    pub fn full_total(&self) -> &FiniteComplex {
        &self.full
    }

    /// Block offset of `(p, j)` inside the truncated total complex.
    pub fn trunc_offset(&self, p: usize, j: usize) -> usize {
        self.nerve.block_offset_capped(p, j, self.j_cap)
    }

    /// Projection from the full total complex onto the truncation in one
    /// degree (drops the blocks with `j >= q`).
    fn projection(&self, n: usize) -> SparseMat {
        let dim = self.nerve.action.complex.dim();
        let kept = dim.min(self.j_cap);
        let mut m = SparseMat::zeros(self.trunc.rank(n as isize), self.full.rank(n as isize));
        for p in 0..=self.p_max.min(n) {
            let j = n - p;
            if j > kept {
                continue;
            }
            let src = self.nerve.block_offset(p, j);
            let dst = self.trunc_offset(p, j);
            for i in 0..self.nerve.level_rank(p, j) {
                m.set(dst + i, src + i, rat_int(1));
            }
        }
        m
    }

    /// The cone presentation of `Z(q)` as a mixed complex.
    fn integral_mixed(&self) -> Result<MixedComplex> {
        let top = self.p_max + self.nerve.action.complex.dim() + 2;
        let z_ranks: Vec<usize> = (0..=top).map(|n| self.full.rank(n as isize)).collect();
        let q_ranks: Vec<usize> = (0..=top)
            .map(|n| self.trunc.rank(n as isize - 1))
            .collect();
        let minus_one = -Rat::from_integer(1.into());
        let zz: Vec<SparseMat> = (0..=top)
            .map(|n| self.full.diff(n as isize).scale(&minus_one))
            .collect();
        let zq: Vec<SparseMat> = (0..=top).map(|n| self.projection(n)).collect();
        let qq: Vec<SparseMat> = (0..=top)
            .map(|n| self.trunc.diff(n as isize - 1))
            .collect();
        MixedComplex::new(z_ranks, q_ranks, zz, zq, qq)
    }

    /// Locally constant circle functions on the nerve levels: the `q = 1`
    /// degenerate model (the kernel of `d log` on the 0-cochain column).
    fn locally_constant_complex(&self) -> Result<FiniteComplex> {
        let action = &self.nerve.action;
        let comps = action.complex.components();
        let n_comp = comps.iter().copied().max().map_or(0, |m| m + 1);
        // component image under each group element
        let mut comp_rep = vec![0usize; n_comp];
        for v in (0..comps.len()).rev() {
            comp_rep[comps[v]] = v;
        }
        let comp_image: Vec<Vec<usize>> = action
            .group
            .elements()
            .map(|g| {
                (0..n_comp)
                    .map(|c| comps[action.vertex_maps[g][comp_rep[c]]])
                    .collect()
            })
            .collect();
        let ranks: Vec<usize> = (0..=self.p_max)
            .map(|p| self.nerve.words_at(p) * n_comp)
            .collect();
        let ord = action.group.order();
        let mut diffs = Vec::new();
        for p in 0..self.p_max {
            let mut m = SparseMat::zeros(ranks[p + 1], ranks[p]);
            // faces of level p+1 described directly on words
            for w in 0..self.nerve.words_at(p + 1) {
                let digits = word_digits(w, p + 1, ord);
                for i in 0..=(p + 1) {
                    let (tw, act) = if i == 0 {
                        (word_index(&digits[1..], ord), digits[0])
                    } else if i == p + 1 {
                        (word_index(&digits[..p], ord), action.group.identity())
                    } else {
                        let mut t = Vec::with_capacity(p);
                        t.extend_from_slice(&digits[..i - 1]);
                        t.push(action.group.mul(digits[i - 1], digits[i]));
                        t.extend_from_slice(&digits[i + 1..]);
                        (word_index(&t, ord), action.group.identity())
                    };
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    for c in 0..n_comp {
                        m.add_to(
                            w * n_comp + c,
                            tw * n_comp + comp_image[act][c],
                            rat_int(sign),
                        );
                    }
                }
            }
            diffs.push(m);
        }
        FiniteComplex::new(ranks, diffs)
    }

    /// `H^n` of the circle complex `U(1)(q)`.
    pub fn circle_cohomology(&self, n: isize) -> Result<CohomologyGroup> {
        if n < 0 {
            return Ok(CohomologyGroup::zero());
        }
        if self.q == 1 {
            return self
                .locally_constant_complex()?
                .cohomology(n, CoefficientRing::RationalsMod1);
        }
        self.trunc.cohomology(n, CoefficientRing::RationalsMod1)
    }

    /// `H^n` of the integral complex `Z(q)`.
    pub fn integral_cohomology(&self, n: isize) -> Result<CohomologyGroup> {
        if n < 0 {
            return Ok(CohomologyGroup::zero());
        }
        self.integral_mixed()?.cohomology(n)
    }

    /// Total differential of the circle complex, exact mod 1.
    pub fn circle_diff(&self, x: &CircleCochain) -> Result<CircleCochain> {
        let n = x.degree();
        x.c.check_len(self.trunc.rank(n as isize))?;
        let d = self.trunc.diff(n as isize);
        let mut vec = vec![Rat::zero(); self.trunc.rank(n as isize)];
        for (&i, v) in x.c.support() {
            vec[i] = v.clone();
        }
        let out = d.apply(&vec);
        let mut c = Cochain::zero(n + 1, CoefficientRing::RationalsMod1);
        for (i, v) in out.into_iter().enumerate() {
            if !v.is_zero() {
                c.set(i, v);
            }
        }
        Ok(CircleCochain { q: self.q, c })
    }

    /// Total differential of the integral complex:
    /// `D(z, a) = (-Dz, proj(z) + D a)`.
    pub fn integral_diff(&self, x: &IntegralCochain) -> Result<IntegralCochain> {
        let n = x.degree;
        x.z.check_len(self.full.rank(n as isize))?;
        x.a.check_len(self.trunc.rank(n as isize - 1))?;
        let mut zvec = vec![Rat::zero(); self.full.rank(n as isize)];
        for (&i, v) in x.z.support() {
            zvec[i] = v.clone();
        }
        let mut avec = vec![Rat::zero(); self.trunc.rank(n as isize - 1)];
        for (&i, v) in x.a.support() {
            avec[i] = v.clone();
        }
        let dz = self.full.diff(n as isize).apply(&zvec);
        let mut z_out = Cochain::zero(n + 1, CoefficientRing::Integers);
        for (i, v) in dz.into_iter().enumerate() {
            if !v.is_zero() {
                z_out.set(i, -v);
            }
        }
        let proj = self.projection(n).apply(&zvec);
        let da = self.trunc.diff(n as isize - 1).apply(&avec);
        let mut a_out = Cochain::zero(n, CoefficientRing::Rationals);
        for (i, v) in proj.into_iter().zip(da).map(|(p, d)| p + d).enumerate() {
            if !v.is_zero() {
                a_out.set(i, v);
            }
        }
        Ok(IntegralCochain {
            q: self.q,
            degree: n + 1,
            z: z_out,
            a: a_out,
        })
    }

    /// The comparison map `Z(q) -> U(1)(q)[-1]`: kill the integer part,
    /// reduce the form part mod 1. A chain map on the nose.
    pub fn exp_comparison(&self, x: &IntegralCochain) -> CircleCochain {
        CircleCochain {
            q: self.q,
            c: x.a.reduce_mod1(),
        }
    }

    /// Embeds a gerbe as the circle 2-cocycle `(B, A, -rho)` (weight 3).
    pub fn gerbe_cochain(&self, gerbe: &GerbeCocycle) -> Result<CircleCochain> {
        if self.q != 3 {
            return Err(Error::Validation(format!(
                "gerbes are weight-3 cocycles; this complex has q = {}",
                self.q
            )));
        }
        if self.p_max < 3 {
            return Err(Error::TruncationTooSmall(
                "gerbe cocycles need p_max >= 3".into(),
            ));
        }
        let m = &self.nerve.action.complex;
        let ord = self.nerve.group_order();
        let mut c = Cochain::zero(2, CoefficientRing::RationalsMod1);
        let off_b = self.trunc_offset(0, 2);
        for (&i, v) in gerbe.b.support() {
            c.add_to(off_b + i, v.clone());
        }
        let off_a = self.trunc_offset(1, 1);
        let edges = m.n_cells(1);
        for g in 0..ord {
            for (&i, v) in gerbe.a[g].support() {
                c.add_to(off_a + g * edges + i, v.clone());
            }
        }
        let off_r = self.trunc_offset(2, 0);
        let verts = m.n_cells(0);
        for g in 0..ord {
            for h in 0..ord {
                let w = g * ord + h;
                for (&i, v) in gerbe.rho[g][h].support() {
                    c.add_to(off_r + w * verts + i, -v.clone());
                }
            }
        }
        Ok(CircleCochain { q: 3, c })
    }

    /// Validates a flat class: a mod-1 cocycle of the full total complex.
    pub fn flat_class(&self, c: Cochain) -> Result<FlatClass> {
        if c.degree != self.q - 1 {
            return Err(Error::DegreeMismatch(format!(
                "flat class must have degree q - 1 = {}",
                self.q - 1
            )));
        }
        c.check_len(self.full.rank(c.degree as isize))?;
        let mut vec = vec![Rat::zero(); self.full.rank(c.degree as isize)];
        for (&i, v) in c.support() {
            vec[i] = v.clone();
        }
        let image = self.full.diff(c.degree as isize).apply(&vec);
        if image.iter().any(|v| !crate::rat::is_integral(v)) {
            return Err(Error::NotACocycle(
                "flat class is not a mod-1 cocycle of the nerve total complex".into(),
            ));
        }
        Ok(FlatClass { q: self.q, c })
    }

    /// `sigma`: includes a flat class into the circle complex. In degree
    /// `q - 1` the truncation keeps every block, so this is the identity on
    /// coordinates; all honest form data is zero.
    pub fn sigma(&self, f: &FlatClass) -> Result<CircleCochain> {
        if f.q != self.q {
            return Err(Error::DegreeMismatch("flat class weight mismatch".into()));
        }
        let out = CircleCochain {
            q: self.q,
            c: f.c.clone(),
        };
        // degree q-1 blocks coincide between the two gradings
        debug_assert_eq!(
            self.full.rank((self.q - 1) as isize),
            self.trunc.rank((self.q - 1) as isize)
        );
        Ok(out)
    }

    /// `kappa`: the curvature of a gerbe, with its integer-period
    /// certificate. Errors with `PeriodsNotIntegral` when the periods fail.
    pub fn kappa(&self, gerbe: &GerbeCocycle) -> Result<Cochain> {
        let omega = gerbe.curvature()?;
        match periods_integral(&self.nerve, &omega)? {
            PeriodsOutcome::Integral => Ok(omega),
            PeriodsOutcome::Violation { pairing, .. } => Err(Error::PeriodsNotIntegral(format!(
                "curvature pairs to {} with an integral cycle",
                crate::rat::format_rat(&pairing)
            ))),
        }
    }

    /// Decides whether a circle cocycle is a total coboundary; returns an
    /// explicit primitive or an integral cycle witnessing nontriviality.
    pub fn trivialize(&self, x: &CircleCochain) -> Result<Trivialization> {
        let n = x.degree();
        x.c.check_len(self.trunc.rank(n as isize))?;
        // solve D y = b + k with y rational, k integral
        let d = self.trunc.diff(n as isize - 1).to_int()?;
        let rows = self.trunc.rank(n as isize);
        let mut b = vec![Rat::zero(); rows];
        for (&i, v) in x.c.support() {
            b[i] = v.clone();
        }
        let smith = smith_normal_form(&d);
        // transform the right-hand side
        let ub: Vec<Rat> = (0..rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..rows {
                    if !smith.u[(i, j)].is_zero() && !b[j].is_zero() {
                        acc += Rat::from_integer(smith.u[(i, j)].clone()) * &b[j];
                    }
                }
                acc
            })
            .collect();
        for i in smith.rank..rows {
            if !crate::rat::is_integral(&ub[i]) {
                // row i of U is an integral cycle pairing non-integrally
                let mut cycle = Chain::zero(n);
                for j in 0..rows {
                    if !smith.u[(i, j)].is_zero() {
                        cycle.set(j, Rat::from_integer(smith.u[(i, j)].clone()));
                    }
                }
                return Ok(Trivialization::Obstruction {
                    cycle,
                    pairing: ub[i].clone(),
                });
            }
        }
        // back-substitute: y = V w with w_i = ub_i / s_i on the pivot rows
        let cols = d.cols;
        let mut w = vec![Rat::zero(); cols];
        for i in 0..smith.rank.min(cols) {
            if !smith.d[(i, i)].is_zero() {
                w[i] = &ub[i] / Rat::from_integer(smith.d[(i, i)].clone());
            }
        }
        let mut y = vec![Rat::zero(); cols];
        for i in 0..cols {
            for j in 0..cols {
                if !smith.v[(i, j)].is_zero() && !w[j].is_zero() {
                    y[i] += Rat::from_integer(smith.v[(i, j)].clone()) * &w[j];
                }
            }
        }
        let mut prim = Cochain::zero(n.saturating_sub(1), CoefficientRing::RationalsMod1);
        for (i, v) in y.into_iter().enumerate() {
            if !v.is_zero() {
                prim.set(i, v);
            }
        }
        let candidate = CircleCochain {
            q: self.q,
            c: prim,
        };
        debug_assert!(self
            .circle_diff(&candidate)
            .map(|d| d.c.congruent_mod1(&x.c))
            .unwrap_or(false));
        Ok(Trivialization::Primitive(candidate))
    }

    /// A deterministic generating family of flat classes, read off the
    /// Smith normal form of the total differential in degree `q - 1`: the
    /// columns of `V` scaled by the reciprocals of the nonunit elementary
    /// divisors give the torsion classes, the kernel columns scaled by
    /// `1/k` the divisible ones.
    pub fn sample_flat_classes(&self, orders: &[i64]) -> Result<Vec<FlatClass>> {
        let n = (self.q - 1) as isize;
        let d = self.full.diff(n).to_int()?;
        let mut out = Vec::new();
        let push = |col: Vec<Int>, denom: Int, out: &mut Vec<FlatClass>| -> Result<()> {
            let mut c = Cochain::zero(self.q - 1, CoefficientRing::RationalsMod1);
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    c.add_to(i, Rat::new(v.clone(), denom.clone()));
                }
            }
            if !c.is_zero() {
                out.push(self.flat_class(c)?);
            }
            Ok(())
        };
        if d.rows == 0 {
            for j in 0..self.full.rank(n) {
                for &k in orders {
                    let mut col = vec![Int::zero(); self.full.rank(n)];
                    col[j] = Int::from(1);
                    push(col, Int::from(k), &mut out)?;
                }
            }
            return Ok(out);
        }
        let smith = smith_normal_form(&d);
        for i in 0..smith.rank {
            let s = smith.d[(i, i)].clone();
            if s > Int::from(1) {
                push(smith.v.column(i), s, &mut out)?;
            }
        }
        for j in smith.rank..smith.v.cols {
            for &k in orders {
                push(smith.v.column(j), Int::from(k), &mut out)?;
            }
        }
        Ok(out)
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

/// Deligne cohomology `H^n([M/G]; Z(q))` or `H^n([M/G]; U(1)(q))`.
pub fn deligne_cohomology(
    ec: &EquivariantComplex,
    spec: &DeligneComplexSpec,
    n: isize,
) -> Result<CohomologyGroup> {
    spec.validate()?;
    if n >= 0 && spec.p_max < n as usize + 1 {
        return Err(Error::TruncationTooSmall(format!(
            "degree {n} needs p_max >= {}, got {}",
            n + 1,
            spec.p_max
        )));
    }
    let dc = DeligneComplex::new(ec, spec.q, spec.p_max)?;
    match spec.variant {
        DeligneVariant::Circle => dc.circle_cohomology(n),
        DeligneVariant::Integral => dc.integral_cohomology(n),
    }
}

impl Cochain {
    /// Bounds check against an abstract rank (total-complex contexts).
    pub fn check_len(&self, rank: usize) -> Result<()> {
        match self.max_index() {
            Some(max) if max >= rank => Err(Error::ComplexMismatch(format!(
                "cochain references index {max}, rank is {rank}"
            ))),
            _ => Ok(()),
        }
    }
}

impl FiniteComplex {
    /// Integer kernel basis of the cochain differential in one degree
    /// (cocycles, not chain cycles).
    pub fn chain_cycle_basis_of_cochains(&self, degree: isize) -> Result<Vec<Vec<Int>>> {
        if degree < 0 {
            return Ok(Vec::new());
        }
        let d = self.diff(degree).to_int()?;
        if d.rows == 0 {
            let n = self.rank(degree);
            return Ok((0..n)
                .map(|i| {
                    let mut v = vec![Int::zero(); n];
                    v[i] = Int::from(1);
                    v
                })
                .collect());
        }
        Ok(smith_normal_form(&d).kernel_basis())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::GroupAction;
    use crate::exec::ExecMode;
    use crate::group::FiniteGroup;
    use crate::rat::rat;
    use crate::shapes;
    use crate::simplicial::SimplicialComplex;

    fn pt_mod_z2() -> EquivariantComplex {
        let pt = SimplicialComplex::point();
        let g = FiniteGroup::cyclic(2);
        EquivariantComplex::new(GroupAction::new(pt, g, vec![vec![0], vec![0]]).unwrap())
    }

    fn torus_z2() -> EquivariantComplex {
        let t = shapes::grid_torus(4, 3);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![shapes::torus_shift(4, 3, 0), shapes::torus_shift(4, 3, 2)];
        EquivariantComplex::new(GroupAction::new(t, g, maps).unwrap())
    }

    #[test]
    fn two_flat_line_bundles_on_pt_mod_z2() {
        let ec = pt_mod_z2();
        let spec = DeligneComplexSpec {
            q: 2,
            variant: DeligneVariant::Circle,
            p_max: 3,
        };
        let h1 = deligne_cohomology(&ec, &spec, 1).unwrap();
        assert_eq!(h1.order(), Some(Int::from(2)));
    }

    #[test]
    fn locally_constant_functions_at_weight_one() {
        // trivial G on two disjoint circles: H^0(U(1)(1)) = (Q/Z)^2
        let two_circles = SimplicialComplex::from_simplices(
            vec![0, 1, 2, 10, 11, 12],
            &[
                vec![0, 1],
                vec![1, 2],
                vec![0, 2],
                vec![10, 11],
                vec![11, 12],
                vec![10, 12],
            ],
        )
        .unwrap();
        let ec = EquivariantComplex::new(GroupAction::trivial(two_circles));
        let spec = DeligneComplexSpec {
            q: 1,
            variant: DeligneVariant::Circle,
            p_max: 2,
        };
        let h0 = deligne_cohomology(&ec, &spec, 0).unwrap();
        assert_eq!(h0.divisible_rank, 2);
        assert_eq!(h0.free_rank, 0);
        assert!(h0.torsion.is_empty());
    }

    #[test]
    fn point_has_no_higher_deligne_cohomology() {
        let pt = SimplicialComplex::point();
        let ec = EquivariantComplex::new(GroupAction::trivial(pt));
        for q in 1..=3 {
            for n in 1..=2isize {
                let spec = DeligneComplexSpec {
                    q,
                    variant: DeligneVariant::Circle,
                    p_max: n as usize + 1,
                };
                let h = deligne_cohomology(&ec, &spec, n).unwrap();
                assert!(h.is_zero(), "q={q}, n={n}: {h}");
            }
        }
    }

    #[test]
    fn truncation_guard() {
        let ec = pt_mod_z2();
        let spec = DeligneComplexSpec {
            q: 2,
            variant: DeligneVariant::Circle,
            p_max: 1,
        };
        assert!(matches!(
            deligne_cohomology(&ec, &spec, 2),
            Err(Error::TruncationTooSmall(_))
        ));
    }

    #[test]
    fn degree_shift_between_variants() {
        // |H^{n-1}(U(1)(q))| = |H^n(Z(q))| on finite instances
        let cases: Vec<(EquivariantComplex, usize, isize)> = vec![
            (pt_mod_z2(), 2, 2),
            (pt_mod_z2(), 2, 4),
            (pt_mod_z2(), 3, 3),
        ];
        for (ec, q, n) in cases {
            let circle = deligne_cohomology(
                &ec,
                &DeligneComplexSpec {
                    q,
                    variant: DeligneVariant::Circle,
                    p_max: n as usize + 1,
                },
                n - 1,
            )
            .unwrap();
            let integral = deligne_cohomology(
                &ec,
                &DeligneComplexSpec {
                    q,
                    variant: DeligneVariant::Integral,
                    p_max: n as usize + 1,
                },
                n,
            )
            .unwrap();
            assert_eq!(
                circle.order(),
                integral.order(),
                "shift fails at q={q}, n={n}: {circle} vs {integral}"
            );
        }
    }

    #[test]
    fn exp_comparison_is_a_chain_map() {
        use rand::{Rng, SeedableRng};
        let ec = pt_mod_z2();
        let dc = DeligneComplex::new(&ec, 2, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for n in 0..=3usize {
            for _ in 0..10 {
                let mut z = Cochain::zero(n, CoefficientRing::Integers);
                for i in 0..dc.full.rank(n as isize) {
                    z.set(i, rat(rng.gen_range(-4..4), 1));
                }
                let mut a = Cochain::zero(n.saturating_sub(1), CoefficientRing::Rationals);
                if n >= 1 {
                    for i in 0..dc.trunc.rank(n as isize - 1) {
                        a.set(i, rat(rng.gen_range(-9..9), rng.gen_range(1..6)));
                    }
                }
                let x = IntegralCochain {
                    q: 2,
                    degree: n,
                    z,
                    a,
                };
                let lhs = dc.exp_comparison(&dc.integral_diff(&x).unwrap());
                if n == 0 {
                    // the comparison lands in degree -1 = 0; the image of
                    // the differential reduces to zero mod 1
                    assert!(lhs.c.is_zero());
                    continue;
                }
                let rhs = dc.circle_diff(&dc.exp_comparison(&x)).unwrap();
                assert!(lhs.c.congruent_mod1(&rhs.c), "degree {n}");
            }
        }
    }

    #[test]
    fn gerbe_embeds_as_cocycle() {
        use rand::SeedableRng;
        // randomized valid gerbe on T^2/Z2 by coboundary construction
        let ec = torus_z2();
        let dc = DeligneComplex::new(&ec, 3, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let gerbe = crate::library::random_gerbe(&ec, &mut rng).unwrap();
        assert!(gerbe.check(ExecMode::default()).is_valid());
        let x = dc.gerbe_cochain(&gerbe).unwrap();
        let dx = dc.circle_diff(&x).unwrap();
        assert!(dx.c.is_zero(), "gerbe does not embed as a cocycle");
    }

    #[test]
    fn trivialize_round_trip_and_obstruction() {
        let ec = pt_mod_z2();
        let dc = DeligneComplex::new(&ec, 2, 3).unwrap();
        // the nontrivial flat character of Z2 at level 1
        let off = dc.trunc_offset(1, 0);
        let mut c = Cochain::zero(1, CoefficientRing::RationalsMod1);
        c.set(off + 1, rat(1, 2));
        let x = CircleCochain { q: 2, c };
        assert!(dc.circle_diff(&x).unwrap().c.is_zero());
        match dc.trivialize(&x).unwrap() {
            Trivialization::Obstruction { pairing, .. } => {
                assert_eq!(crate::rat::reduce_mod1(&pairing), rat(1, 2));
            }
            Trivialization::Primitive(_) => panic!("nontrivial class reported trivial"),
        }
        // a genuine coboundary trivializes and round-trips
        let mut seed = Cochain::zero(0, CoefficientRing::RationalsMod1);
        seed.set(0, rat(1, 3));
        let y = CircleCochain { q: 2, c: seed };
        let dy = dc.circle_diff(&y).unwrap();
        match dc.trivialize(&dy).unwrap() {
            Trivialization::Primitive(eta) => {
                let d_eta = dc.circle_diff(&eta).unwrap();
                assert!(d_eta.c.congruent_mod1(&dy.c));
            }
            Trivialization::Obstruction { .. } => panic!("coboundary reported nontrivial"),
        }
    }

    #[test]
    fn sigma_of_discrete_torsion_and_kappa_sigma_zero() {
        let gerbe = crate::library::discrete_torsion_gerbe();
        let ec = gerbe.base.clone();
        let dc = DeligneComplex::new(&ec, 3, 4).unwrap();
        // the discrete torsion gerbe is flat: its embedding is a flat class
        let x = dc.gerbe_cochain(&gerbe).unwrap();
        let flat = dc.flat_class(x.c.clone()).unwrap();
        let sig = dc.sigma(&flat).unwrap();
        assert_eq!(sig.c, x.c);
        // kappa vanishes on gerbes with zero form data
        let omega = dc.kappa(&gerbe).unwrap();
        assert!(omega.is_zero());
    }

    #[test]
    fn sample_flat_classes_are_cocycles() {
        let ec = pt_mod_z2();
        let dc = DeligneComplex::new(&ec, 2, 3).unwrap();
        let flats = dc.sample_flat_classes(&[2, 3]).unwrap();
        assert!(!flats.is_empty());
        for f in &flats {
            let x = dc.sigma(f).unwrap();
            let dx = dc.circle_diff(&x).unwrap();
            assert!(dx.c.is_zero());
        }
    }
}
