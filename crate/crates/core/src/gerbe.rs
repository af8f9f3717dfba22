//! Global gerbes with connection on `[M/G]`: the cocycle data
//! `xi = (B, {A_g}, {rho_{g,h}})` with the relations
//!
//! ```text
//!   (5)   g*B - B = delta A_g                       (exact, rational)
//!   (6)   A_g + g*A_h - A_{gh} = delta rho_{g,h}    (mod 1)
//!   (c)   g*rho_{h,k} - rho_{gh,k} + rho_{g,hk} - rho_{g,h} = 0  (mod 1)
//! ```
//!
//! Circle data is additive: `rho` stores rational lifts in `[0,1)` whose
//! value `x` means the phase `exp(2*pi*i*x)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::action::EquivariantComplex;
use crate::cochain::{coboundary, Chain, Cochain};
use crate::error::{Error, Result};
use crate::exec::{map_collect, ExecMode};
use crate::nerve::NerveModel;
use crate::rat::{format_rat, CoefficientRing, Rat};

#[derive(Debug, Clone)]
pub struct GerbeCocycle {
    pub base: EquivariantComplex,
    /// rational 2-cochain on `M`
    pub b: Cochain,
    /// rational 1-cochains on `M`, indexed by group element
    pub a: Vec<Cochain>,
    /// mod-1 0-cochains on `M`, indexed by ordered pairs `(g, h)`
    pub rho: Vec<Vec<Cochain>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GerbeViolation {
    /// `g*B - B != delta A_g`
    Relation5 { g: String, simplex: String },
    /// `A_g + g*A_h - A_{gh} != delta rho_{g,h}` mod 1
    Relation6 { g: String, h: String, simplex: String },
    /// `delta rho != 0` mod 1
    RhoCocycle {
        g: String,
        h: String,
        k: String,
        simplex: String,
    },
    /// wrong degrees or stray simplex references
    Malformed { detail: String },
}

impl fmt::Display for GerbeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GerbeViolation::Relation5 { g, simplex } => {
                write!(f, "relation (5) fails for g={g} at simplex {simplex}")
            }
            GerbeViolation::Relation6 { g, h, simplex } => {
                write!(f, "relation (6) fails for (g,h)=({g},{h}) at simplex {simplex}")
            }
            GerbeViolation::RhoCocycle { g, h, k, simplex } => write!(
                f,
                "rho cocycle condition fails for ({g},{h},{k}) at simplex {simplex}"
            ),
            GerbeViolation::Malformed { detail } => write!(f, "malformed gerbe: {detail}"),
        }
    }
}

/// Outcome of `check_gerbe_cocycle`; empty `violations` means valid.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct GerbeReport {
    pub violations: Vec<GerbeViolation>,
    /// non-fatal notes, e.g. relation (6) holding only mod 1 with the
    /// stored lifts (an integer discrepancy shifts transgression values by
    /// multiples of 1/|Gamma| on loops with |Gamma| > 1)
    pub warnings: Vec<String>,
}

impl GerbeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GerbeCocycle {
    /// Assembles a gerbe without validation; missing `A`/`rho` entries are
    /// taken to be zero.
    pub fn new_unchecked(
        base: EquivariantComplex,
        b: Cochain,
        a: Vec<Cochain>,
        rho: Vec<Vec<Cochain>>,
    ) -> Self {
        GerbeCocycle { base, b, a, rho }
    }

    pub fn trivial(base: EquivariantComplex) -> Self {
        let ord = base.group().order();
        let b = Cochain::zero(2, CoefficientRing::Rationals);
        let a = (0..ord)
            .map(|_| Cochain::zero(1, CoefficientRing::Rationals))
            .collect();
        let rho = (0..ord)
            .map(|_| {
                (0..ord)
                    .map(|_| Cochain::zero(0, CoefficientRing::RationalsMod1))
                    .collect()
            })
            .collect();
        GerbeCocycle::new_unchecked(base, b, a, rho)
    }

    pub fn group_order(&self) -> usize {
        self.base.group().order()
    }

    /// Normalizes so that `A_e = 0` and `rho_{e,g} = rho_{g,e} = 0`, by the
    /// standard coboundary shift with `lambda_e = rho_{e,e}`. Returns notes
    /// describing what was shifted.
    pub fn normalize(mut self) -> Result<(Self, Vec<String>)> {
        let mut notes = Vec::new();
        let group = self.base.group().clone();
        let complex = self.base.complex().clone();
        let e = group.identity();
        let lambda_e = self.rho[e][e].clone();
        if !lambda_e.is_zero() {
            notes.push("normalized by the coboundary shift with lambda_e = rho_{e,e}".into());
            // rho'_{g,h} = rho_{g,h} - (g* lambda_h - lambda_{gh} + lambda_g)
            // with lambda supported at e
            for g in group.elements() {
                for h in group.elements() {
                    let mut shift = Cochain::zero(0, CoefficientRing::Rationals);
                    if h == e {
                        let pulled = self.base.action.group_pullback(g, &lambda_e.as_rational())?;
                        shift = shift.add(&pulled)?;
                    }
                    if g == e {
                        shift = shift.add(&lambda_e.as_rational())?;
                    }
                    if group.mul(g, h) == e {
                        shift = shift.sub(&lambda_e.as_rational())?;
                    }
                    if !shift.is_zero() {
                        let new = self.rho[g][h].as_rational().sub(&shift)?;
                        self.rho[g][h] = new.reduce_mod1();
                    }
                }
            }
            // A'_g = A_g - delta(lambda)_g, nonzero only at g = e
            let d_lambda = coboundary(&complex, &lambda_e.as_rational())?;
            self.a[e] = self.a[e].sub(&d_lambda)?;
        }
        if !self.a[e].is_zero() {
            if self.a[e].is_integral() {
                notes.push("dropped residual integer A_e after normalization".into());
                self.a[e] = Cochain::zero(1, CoefficientRing::Rationals);
            }
            // a fractional residual will surface as a relation violation
        }
        Ok((self, notes))
    }

    /// Total-degree-2 data check; empty report iff (5), (6) and the rho
    /// cocycle condition hold for all elements.
    pub fn check(&self, mode: ExecMode) -> GerbeReport {
        let mut report = GerbeReport::default();
        let group = self.base.group();
        let complex = self.base.complex();
        let ord = group.order();

        if self.b.degree != 2 || self.b.check_ambient(complex).is_err() {
            report.violations.push(GerbeViolation::Malformed {
                detail: "B must be a 2-cochain on M".into(),
            });
            return report;
        }
        if self.a.len() != ord || self.rho.len() != ord || self.rho.iter().any(|r| r.len() != ord)
        {
            report.violations.push(GerbeViolation::Malformed {
                detail: "A and rho must be indexed by G and G x G".into(),
            });
            return report;
        }
        for g in 0..ord {
            if self.a[g].degree != 1 || self.a[g].check_ambient(complex).is_err() {
                report.violations.push(GerbeViolation::Malformed {
                    detail: format!("A_{} must be a 1-cochain on M", group.name(g)),
                });
                return report;
            }
            for h in 0..ord {
                if self.rho[g][h].degree != 0
                    || self.rho[g][h].check_ambient(complex).is_err()
                {
                    report.violations.push(GerbeViolation::Malformed {
                        detail: format!(
                            "rho_{{{},{}}} must be a 0-cochain on M",
                            group.name(g),
                            group.name(h)
                        ),
                    });
                    return report;
                }
            }
        }

        // relation (5), exact, per group element
        let rel5: Vec<Option<GerbeViolation>> = map_collect(mode, (0..ord).collect(), |g| {
            let pulled = self.base.action.group_pullback(g, &self.b).ok()?;
            let lhs = pulled.sub(&self.b).ok()?;
            let rhs = coboundary(complex, &self.a[g]).ok()?;
            let diff = lhs.sub(&rhs).ok()?;
            let witness = diff.support().next().map(|(&s, _)| s);
            witness.map(|s| GerbeViolation::Relation5 {
                g: group.name(g).to_string(),
                simplex: complex.simplex_id(2, s),
            })
        });
        report.violations.extend(rel5.into_iter().flatten());

        // relation (6), mod 1, per ordered pair
        let pairs: Vec<(usize, usize)> = (0..ord)
            .flat_map(|g| (0..ord).map(move |h| (g, h)))
            .collect();
        let rel6: Vec<(Option<GerbeViolation>, Option<String>)> =
            map_collect(mode, pairs.clone(), |(g, h)| {
                let run = || -> Result<(Option<GerbeViolation>, Option<String>)> {
                    let ga = self.base.action.group_pullback(g, &self.a[h])?;
                    let gh = group.mul(g, h);
                    let lhs = self.a[g].add(&ga)?.sub(&self.a[gh])?;
                    let rhs = coboundary(complex, &self.rho[g][h].as_rational())?;
                    let diff = lhs.sub(&rhs)?;
                    if let Some((&s, _)) = diff
                        .support()
                        .find(|(_, v)| !crate::rat::is_integral(v))
                    {
                        return Ok((
                            Some(GerbeViolation::Relation6 {
                                g: group.name(g).to_string(),
                                h: group.name(h).to_string(),
                                simplex: complex.simplex_id(1, s),
                            }),
                            None,
                        ));
                    }
                    let warn = if !diff.is_zero() {
                        Some(format!(
                            "relation (6) for ({},{}) holds mod 1 but not exactly with the stored lifts",
                            group.name(g),
                            group.name(h)
                        ))
                    } else {
                        None
                    };
                    Ok((None, warn))
                };
                run().unwrap_or((
                    Some(GerbeViolation::Malformed {
                        detail: "degree mismatch while checking relation (6)".into(),
                    }),
                    None,
                ))
            });
        for (v, w) in rel6 {
            report.violations.extend(v);
            report.warnings.extend(w);
        }

        // rho cocycle condition, mod 1, per ordered triple
        let triples: Vec<(usize, usize, usize)> = (0..ord)
            .flat_map(|g| {
                (0..ord).flat_map(move |h| (0..ord).map(move |k| (g, h, k)))
            })
            .collect();
        let relc: Vec<Option<GerbeViolation>> = map_collect(mode, triples, |(g, h, k)| {
            let run = || -> Result<Option<GerbeViolation>> {
                let t1 = self
                    .base
                    .action
                    .group_pullback(g, &self.rho[h][k].as_rational())?;
                let t2 = &self.rho[group.mul(g, h)][k];
                let t3 = &self.rho[g][group.mul(h, k)];
                let t4 = &self.rho[g][h];
                let total = t1
                    .sub(&t2.as_rational())?
                    .add(&t3.as_rational())?
                    .sub(&t4.as_rational())?;
                let witness = total
                    .support()
                    .find(|(_, v)| !crate::rat::is_integral(v))
                    .map(|(&s, _)| s);
                Ok(witness.map(|s| GerbeViolation::RhoCocycle {
                    g: group.name(g).to_string(),
                    h: group.name(h).to_string(),
                    k: group.name(k).to_string(),
                    simplex: complex.simplex_id(0, s),
                }))
            };
            run().unwrap_or(Some(GerbeViolation::Malformed {
                detail: "degree mismatch while checking rho cocycle".into(),
            }))
        });
        report.violations.extend(relc.into_iter().flatten());
        report
    }

    /// Curvature `omega = delta B`: exactly closed and exactly G-invariant
    /// for a valid gerbe (both are re-checked here).
    pub fn curvature(&self) -> Result<Cochain> {
        let complex = self.base.complex();
        let omega = coboundary(complex, &self.b)?;
        let closed = coboundary(complex, &omega)?;
        if !closed.is_zero() {
            return Err(Error::NotClosed("delta delta B != 0".into()));
        }
        if !self.base.action.is_invariant(&omega)? {
            return Err(Error::NotInvariant(
                "curvature of a gerbe violating relation (5) is not invariant".into(),
            ));
        }
        Ok(omega)
    }
}

/// Outcome of the integer-period test: either confirmation or a violating
/// cycle of the truncated nerve total complex together with the pairing.
#[derive(Debug, Clone)]
pub enum PeriodsOutcome {
    Integral,
    Violation { cycle: Chain, pairing: Rat },
}

impl PeriodsOutcome {
    pub fn is_integral(&self) -> bool {
        matches!(self, PeriodsOutcome::Integral)
    }
}

/// Whether a closed invariant cochain has integer periods: its lift pairs
/// integrally with every generator of the integral cycles of the nerve
/// total complex in its degree.
pub fn periods_integral(nerve: &NerveModel, omega: &Cochain) -> Result<PeriodsOutcome> {
    let complex = &nerve.action.complex;
    if !coboundary(complex, &omega.as_rational())?.is_zero() {
        return Err(Error::NotClosed(format!(
            "degree-{} cochain is not closed",
            omega.degree
        )));
    }
    let lifted = nerve.lift_invariant_form(omega)?;
    let total = nerve.total_complex();
    for z in total.chain_cycle_basis(omega.degree as isize)? {
        let mut chain = Chain::zero(omega.degree);
        for (i, v) in z.iter().enumerate() {
            if !num_traits::Zero::is_zero(v) {
                chain.set(i, Rat::from_integer(v.clone()));
            }
        }
        let value = crate::cochain::pair(&lifted, &chain)?;
        if !crate::rat::is_integral(&value) {
            return Ok(PeriodsOutcome::Violation {
                cycle: chain,
                pairing: value,
            });
        }
    }
    Ok(PeriodsOutcome::Integral)
}

/// JSON schema of a gerbe: `p/q` strings in cycle units, simplices by id.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct GerbeJson {
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub b: std::collections::BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub a: std::collections::BTreeMap<String, std::collections::BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub rho: std::collections::BTreeMap<String, std::collections::BTreeMap<String, String>>,
}

impl GerbeCocycle {
    pub fn to_json(&self) -> GerbeJson {
        let complex = self.base.complex();
        let group = self.base.group();
        let mut j = GerbeJson::default();
        for (&i, v) in self.b.support() {
            j.b.insert(complex.simplex_id(2, i), format_rat(v));
        }
        for g in group.elements() {
            if self.a[g].is_zero() {
                continue;
            }
            let entry = j.a.entry(group.name(g).to_string()).or_default();
            for (&i, v) in self.a[g].support() {
                entry.insert(complex.simplex_id(1, i), format_rat(v));
            }
        }
        for g in group.elements() {
            for h in group.elements() {
                if self.rho[g][h].is_zero() {
                    continue;
                }
                let key = format!("{},{}", group.name(g), group.name(h));
                let entry = j.rho.entry(key).or_default();
                for (&i, v) in self.rho[g][h].support() {
                    entry.insert(complex.simplex_id(0, i), format_rat(v));
                }
            }
        }
        j
    }

    pub fn from_json(base: EquivariantComplex, j: &GerbeJson) -> Result<Self> {
        let complex = base.complex().clone();
        let group = base.group().clone();
        let mut gerbe = GerbeCocycle::trivial(base);
        for (id, val) in &j.b {
            let (k, idx) = complex.parse_simplex_id(id)?;
            if k != 2 {
                return Err(Error::Parse(format!("B entry `{id}` is not a 2-simplex")));
            }
            gerbe.b.set(idx, crate::rat::parse_rat(val)?);
        }
        for (gname, entries) in &j.a {
            let g = group
                .index_of(gname)
                .ok_or_else(|| Error::Parse(format!("unknown group element `{gname}`")))?;
            for (id, val) in entries {
                let (k, idx) = complex.parse_simplex_id(id)?;
                if k != 1 {
                    return Err(Error::Parse(format!("A entry `{id}` is not an edge")));
                }
                gerbe.a[g].set(idx, crate::rat::parse_rat(val)?);
            }
        }
        for (pair, entries) in &j.rho {
            let (gn, hn) = pair
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad rho key `{pair}`")))?;
            let g = group
                .index_of(gn.trim())
                .ok_or_else(|| Error::Parse(format!("unknown group element `{gn}`")))?;
            let h = group
                .index_of(hn.trim())
                .ok_or_else(|| Error::Parse(format!("unknown group element `{hn}`")))?;
            for (id, val) in entries {
                let (k, idx) = complex.parse_simplex_id(id)?;
                if k != 0 {
                    return Err(Error::Parse(format!("rho entry `{id}` is not a vertex")));
                }
                gerbe.rho[g][h].set(idx, crate::rat::parse_rat(val)?);
            }
        }
        Ok(gerbe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::GroupAction;
    use crate::group::FiniteGroup;
    use crate::rat::rat;
    use crate::shapes;

    use crate::library::{discrete_torsion_gerbe, pt_mod_k4};

    #[test]
    fn trivial_gerbe_is_valid() {
        let base = pt_mod_k4();
        let report = GerbeCocycle::trivial(base).check(ExecMode::default());
        assert!(report.is_valid());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn discrete_torsion_is_a_cocycle() {
        // the 64 triple conditions reduce to bilinearity of bc/2
        let report = discrete_torsion_gerbe().check(ExecMode::default());
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn perturbed_gerbe_fails_with_witness() {
        let t = shapes::grid_torus(4, 3);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![shapes::torus_shift(4, 3, 0), shapes::torus_shift(4, 3, 2)];
        let base = EquivariantComplex::new(GroupAction::new(t, g, maps).unwrap());
        let mut gerbe = GerbeCocycle::trivial(base);
        gerbe.a[1].set(0, rat(1, 7));
        let report = gerbe.check(ExecMode::default());
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            GerbeViolation::Relation5 { .. } | GerbeViolation::Relation6 { .. }
        )));
    }

    #[test]
    fn curvature_of_random_b_on_t3() {
        use rand::{Rng, SeedableRng};
        let t3 = shapes::grid_torus3(3, 3, 3);
        let base = EquivariantComplex::new(GroupAction::trivial(t3));
        let mut gerbe = GerbeCocycle::trivial(base);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for i in 0..gerbe.base.complex().n_cells(2) {
            if rng.gen_bool(0.3) {
                gerbe.b.set(i, rat(rng.gen_range(-6..6), rng.gen_range(1..5)));
            }
        }
        assert!(gerbe.check(ExecMode::default()).is_valid());
        let omega = gerbe.curvature().unwrap();
        // closed and invariant were checked inside; also exact by build
        assert_eq!(
            omega,
            coboundary(gerbe.base.complex(), &gerbe.b).unwrap()
        );
    }

    #[test]
    fn two_dimensional_base_has_zero_curvature() {
        let t = shapes::grid_torus(4, 3);
        let base = EquivariantComplex::new(GroupAction::trivial(t));
        let gerbe = GerbeCocycle::trivial(base);
        assert!(gerbe.curvature().unwrap().is_zero());
    }

    #[test]
    fn periods_of_scaled_fundamental_class() {
        // T^2, trivial G: a 2-cochain pairing to 1 with the fundamental
        // cycle has integer periods; scaled by 1/3 it does not
        let t = shapes::grid_torus(4, 3);
        let base = EquivariantComplex::new(GroupAction::trivial(t.clone()));
        let nerve = base.nerve(3);
        let mut omega = Cochain::zero(2, CoefficientRing::Rationals);
        // supported on a single triangle, aligned with the fundamental sign
        let z = crate::cycles::fundamental_cycle(&t, 2, None).unwrap();
        let (&s0, sign) = z.support().next().unwrap();
        omega.set(s0, sign.clone());
        assert!(periods_integral(&nerve, &omega).unwrap().is_integral());
        let scaled = omega.scale(&rat(1, 3));
        match periods_integral(&nerve, &scaled).unwrap() {
            PeriodsOutcome::Violation { pairing, .. } => {
                assert!(!crate::rat::is_integral(&pairing));
            }
            PeriodsOutcome::Integral => panic!("1/3-scaled class cannot have integer periods"),
        }
        // zero cochain trivially passes
        let zero = Cochain::zero(2, CoefficientRing::Rationals);
        assert!(periods_integral(&nerve, &zero).unwrap().is_integral());
    }

    #[test]
    fn normalization_clears_degenerate_rho() {
        let base = pt_mod_k4();
        let group = base.group().clone();
        let mut gerbe = GerbeCocycle::trivial(base);
        // shift the trivial gerbe by a constant rho_{e,e}
        for g in group.elements() {
            gerbe.rho[group.identity()][g].set(0, rat(1, 3));
            gerbe.rho[g][group.identity()].set(0, rat(1, 3));
        }
        gerbe.rho[group.identity()][group.identity()].set(0, rat(1, 3));
        let (norm, notes) = gerbe.normalize().unwrap();
        assert!(!notes.is_empty());
        let e = norm.base.group().identity();
        for g in norm.base.group().elements() {
            assert!(norm.rho[e][g].is_zero(), "rho_e,{g} nonzero");
            assert!(norm.rho[g][e].is_zero(), "rho_{g},e nonzero");
        }
        assert!(norm.a[e].is_zero());
    }

    #[test]
    fn json_round_trip() {
        let gerbe = discrete_torsion_gerbe();
        let j = gerbe.to_json();
        let back = GerbeCocycle::from_json(gerbe.base.clone(), &j).unwrap();
        assert_eq!(back.to_json().rho, j.rho);
        assert!(back.check(ExecMode::default()).is_valid());
    }
}
