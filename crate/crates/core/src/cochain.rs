//! Cochains and chains on a simplicial complex, with the evaluation pairing
//! and the exact Stokes adjunction `<delta c, z> = <c, boundary z>`.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::{is_integral, reduce_mod1, CoefficientRing, Rat};
use crate::simplicial::SimplicialComplex;

/// A degree-`k` cochain: a finite map from canonical `k`-simplex indices to
/// ring elements; absent indices are zero. `RationalsMod1` values are kept
/// as canonical representatives in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub ring: CoefficientRing,
    values: BTreeMap<usize, Rat>,
}

impl Cochain {
    pub fn zero(degree: usize, ring: CoefficientRing) -> Self {
        Cochain {
            degree,
            ring,
            values: BTreeMap::new(),
        }
    }

    fn normalize(ring: CoefficientRing, v: Rat) -> Rat {
        match ring {
            CoefficientRing::RationalsMod1 => reduce_mod1(&v),
            _ => v,
        }
    }

    pub fn set(&mut self, idx: usize, v: Rat) {
        let v = Self::normalize(self.ring, v);
        if self.ring == CoefficientRing::Integers {
            assert!(is_integral(&v), "non-integer value in integer cochain");
        }
        if v.is_zero() {
            self.values.remove(&idx);
        } else {
            self.values.insert(idx, v);
        }
    }

    pub fn add_to(&mut self, idx: usize, v: Rat) {
        let cur = self.get(idx);
        self.set(idx, cur + v);
    }

    pub fn get(&self, idx: usize) -> Rat {
        self.values.get(&idx).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (&usize, &Rat)> {
        self.values.iter()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.values.keys().next_back().copied()
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "adding cochains of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let ring = if self.ring == other.ring {
            self.ring
        } else {
            CoefficientRing::Rationals
        };
        let mut out = Cochain::zero(self.degree, ring);
        for (&i, v) in &self.values {
            out.add_to(i, v.clone());
        }
        for (&i, v) in &other.values {
            out.add_to(i, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.add(&other.scale(&-Rat::from_integer(1.into())))
    }

    pub fn scale(&self, c: &Rat) -> Cochain {
        let mut out = Cochain::zero(self.degree, self.ring);
        for (&i, v) in &self.values {
            out.set(i, v * c);
        }
        out
    }

    /// Reinterprets the values modulo 1.
    pub fn reduce_mod1(&self) -> Cochain {
        let mut out = Cochain::zero(self.degree, CoefficientRing::RationalsMod1);
        for (&i, v) in &self.values {
            out.set(i, v.clone());
        }
        out
    }

    /// Relabels as a plain rational cochain (mod-1 values keep their
    /// canonical representative: the chosen lift).
    pub fn as_rational(&self) -> Cochain {
        let mut out = Cochain::zero(self.degree, CoefficientRing::Rationals);
        for (&i, v) in &self.values {
            out.set(i, v.clone());
        }
        out
    }

    /// True if every value is an integer (as a mod-1 cochain: zero).
    pub fn is_integral(&self) -> bool {
        self.values.values().all(is_integral)
    }

    /// Exact congruence mod 1.
    pub fn congruent_mod1(&self, other: &Cochain) -> bool {
        if self.degree != other.degree {
            return false;
        }
        let keys: std::collections::BTreeSet<usize> = self
            .values
            .keys()
            .chain(other.values.keys())
            .copied()
            .collect();
        keys.into_iter()
            .all(|i| is_integral(&(self.get(i) - other.get(i))))
    }

    /// Checks that every referenced simplex exists in `complex` at the
    /// cochain's degree.
    pub fn check_ambient(&self, complex: &SimplicialComplex) -> Result<()> {
        let n = complex.n_cells(self.degree);
        match self.max_index() {
            Some(max) if max >= n => Err(Error::ComplexMismatch(format!(
                "cochain references simplex {max} but complex has {n} cells in degree {}",
                self.degree
            ))),
            _ => Ok(()),
        }
    }
}

/// A degree-`k` chain: a finite formal sum of canonical `k`-simplices with
/// rational coefficients (fundamental cycles use only +-1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub degree: usize,
    values: BTreeMap<usize, Rat>,
}

impl Chain {
    pub fn zero(degree: usize) -> Self {
        Chain {
            degree,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, idx: usize, v: Rat) {
        if v.is_zero() {
            self.values.remove(&idx);
        } else {
            self.values.insert(idx, v);
        }
    }

    pub fn add_to(&mut self, idx: usize, v: Rat) {
        let cur = self.get(idx);
        self.set(idx, cur + v);
    }

    pub fn get(&self, idx: usize) -> Rat {
        self.values.get(&idx).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (&usize, &Rat)> {
        self.values.iter()
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "adding chains of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (&i, v) in &other.values {
            out.add_to(i, v.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Chain {
        let mut out = Chain::zero(self.degree);
        for (&i, v) in &self.values {
            out.set(i, v * c);
        }
        out
    }

    pub fn neg(&self) -> Chain {
        self.scale(&-Rat::from_integer(1.into()))
    }
}

/// `<c, z>`: evaluation of a cochain on a chain of the same degree.
pub fn pair(c: &Cochain, z: &Chain) -> Result<Rat> {
    if c.degree != z.degree {
        return Err(Error::DegreeMismatch(format!(
            "pairing degree-{} cochain with degree-{} chain",
            c.degree, z.degree
        )));
    }
    let mut acc = Rat::zero();
    for (&i, v) in &c.values {
        let w = z.get(i);
        if !w.is_zero() {
            acc += v * w;
        }
    }
    Ok(acc)
}

/// Boundary of a chain in its ambient complex.
pub fn boundary(complex: &SimplicialComplex, z: &Chain) -> Result<Chain> {
    if z.degree == 0 {
        return Ok(Chain::zero(0));
    }
    if z.values.keys().next_back().is_some_and(|&m| m >= complex.n_cells(z.degree)) {
        return Err(Error::ComplexMismatch(
            "chain references simplices outside the complex".into(),
        ));
    }
    let mut out = Chain::zero(z.degree - 1);
    for (&i, v) in &z.values {
        for (face, sign) in complex.faces_with_signs(z.degree, i) {
            out.add_to(face, v * Rat::from_integer(sign.into()));
        }
    }
    Ok(out)
}

/// Coboundary of a cochain in its ambient complex. Mod-1 cochains get the
/// coboundary of their canonical lift, reduced mod 1 again.
pub fn coboundary(complex: &SimplicialComplex, c: &Cochain) -> Result<Cochain> {
    c.check_ambient(complex)?;
    let mut out = Cochain::zero(c.degree + 1, c.ring);
    for tau in 0..complex.n_cells(c.degree + 1) {
        let mut acc = Rat::zero();
        for (face, sign) in complex.faces_with_signs(c.degree + 1, tau) {
            let v = c.get(face);
            if !v.is_zero() {
                acc += v * Rat::from_integer(sign.into());
            }
        }
        if !acc.is_zero() {
            out.set(tau, acc);
        }
    }
    Ok(out)
}
