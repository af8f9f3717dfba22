//! Finite cochain complexes of free modules and their cohomology.
//!
//! A `FiniteComplex` stores ranks and differentials `D_k : C^k -> C^{k+1}`
//! with `D_{k+1} D_k = 0` checked exactly at construction. Integral
//! cohomology goes through Smith normal form; rational cohomology through
//! exact rank computations; `RationalsMod1` coefficients are computed from
//! the integral complex by the universal-coefficient decomposition
//! `H^n(C (x) Q/Z) = (Q/Z)^{free H^n(C)} (+) torsion H^{n+1}(C)`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{IntMat, SparseMat};
use crate::rat::{CoefficientRing, Int};
use crate::snf::smith_normal_form;

/// A finitely generated abelian group presented as
/// `Z^free (+) (+)_i Z/t_i (+) (Q/Z)^divisible (+) Q^rational_divisible`,
/// with the torsion list in a divisibility chain.
///
/// The two divisible fields are only populated by circle-coefficient and
/// Deligne-style computations; plain integral cohomology leaves them zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyGroup {
    pub free_rank: usize,
    #[serde(with = "int_vec_serde")]
    pub torsion: Vec<Int>,
    #[serde(default, skip_serializing_if = "is_zero_usize")]
    pub divisible_rank: usize,
    #[serde(default, skip_serializing_if = "is_zero_usize")]
    pub rational_divisible_rank: usize,
}

fn is_zero_usize(x: &usize) -> bool {
    *x == 0
}

mod int_vec_serde {
    use super::Int;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Int], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Int>, D::Error> {
        let strings: Vec<String> = Vec::deserialize(d)?;
        strings
            .into_iter()
            .map(|s| s.parse::<Int>().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl CohomologyGroup {
    pub fn zero() -> Self {
        CohomologyGroup {
            free_rank: 0,
            torsion: Vec::new(),
            divisible_rank: 0,
            rational_divisible_rank: 0,
        }
    }

    pub fn free(rank: usize) -> Self {
        CohomologyGroup {
            free_rank: rank,
            ..CohomologyGroup::zero()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0
            && self.torsion.is_empty()
            && self.divisible_rank == 0
            && self.rational_divisible_rank == 0
    }

    /// Order of the group when finite.
    pub fn order(&self) -> Option<Int> {
        if self.free_rank > 0 || self.divisible_rank > 0 || self.rational_divisible_rank > 0 {
            return None;
        }
        let mut n = Int::from(1);
        for t in &self.torsion {
            n *= t;
        }
        Some(n)
    }

    /// Order of the finite (torsion-list) part alone.
    pub fn finite_part_order(&self) -> Int {
        let mut n = Int::from(1);
        for t in &self.torsion {
            n *= t;
        }
        n
    }
}

impl std::fmt::Display for CohomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        match self.divisible_rank {
            0 => {}
            1 => parts.push("Q/Z".to_string()),
            r => parts.push(format!("(Q/Z)^{r}")),
        }
        match self.rational_divisible_rank {
            0 => {}
            1 => parts.push("Q".to_string()),
            r => parts.push(format!("Q^{r}")),
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// A bounded cochain complex of free modules.
#[derive(Debug, Clone)]
pub struct FiniteComplex {
    ranks: Vec<usize>,
    /// `diffs[k]` maps degree `k` to `k+1`; shape `ranks[k+1] x ranks[k]`.
    /// `diffs.len() == ranks.len()`; the last differential maps to zero.
    diffs: Vec<SparseMat>,
    /// Optional basis labels per degree, used in witnesses.
    labels: Vec<Vec<String>>,
}

impl FiniteComplex {
    pub fn new(ranks: Vec<usize>, mut diffs: Vec<SparseMat>) -> Result<Self> {
        let n = ranks.len();
        while diffs.len() < n {
            let k = diffs.len();
            let next = if k + 1 < n { ranks[k + 1] } else { 0 };
            diffs.push(SparseMat::zeros(next, ranks[k]));
        }
        for (k, d) in diffs.iter().enumerate() {
            let next = if k + 1 < n { ranks[k + 1] } else { 0 };
            if d.cols != ranks[k] || d.rows != next {
                return Err(Error::DegreeMismatch(format!(
                    "differential {k} has shape {}x{}, expected {}x{}",
                    d.rows, d.cols, next, ranks[k]
                )));
            }
        }
        for k in 0..n.saturating_sub(1) {
            if !diffs[k + 1].mul(&diffs[k]).is_zero() {
                return Err(Error::NotACocycle(format!(
                    "D_{} . D_{} != 0",
                    k + 1,
                    k
                )));
            }
        }
        let labels = ranks
            .iter()
            .enumerate()
            .map(|(k, &r)| (0..r).map(|i| format!("{k}:{i}")).collect())
            .collect();
        Ok(FiniteComplex {
            ranks,
            diffs,
            labels,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Self {
        assert_eq!(labels.len(), self.ranks.len());
        for (k, l) in labels.iter().enumerate() {
            assert_eq!(l.len(), self.ranks[k]);
        }
        self.labels = labels;
        self
    }

    pub fn max_degree(&self) -> isize {
        self.ranks.len() as isize - 1
    }

    pub fn rank(&self, degree: isize) -> usize {
        if degree < 0 || degree as usize >= self.ranks.len() {
            0
        } else {
            self.ranks[degree as usize]
        }
    }

    pub fn label(&self, degree: usize, index: usize) -> &str {
        &self.labels[degree][index]
    }

    /// Differential out of `degree`; a zero matrix outside the graded range.
    pub fn diff(&self, degree: isize) -> SparseMat {
        if degree < 0 || degree as usize >= self.diffs.len() {
            SparseMat::zeros(self.rank(degree + 1), self.rank(degree))
        } else {
            self.diffs[degree as usize].clone()
        }
    }

    pub fn is_integral(&self) -> bool {
        self.diffs.iter().all(SparseMat::is_integer)
    }

    pub fn cohomology(&self, degree: isize, ring: CoefficientRing) -> Result<CohomologyGroup> {
        if degree < 0 || degree as usize >= self.ranks.len() {
            return Ok(CohomologyGroup::zero());
        }
        let d_in = self.diff(degree - 1);
        let d_out = self.diff(degree);
        match ring {
            CoefficientRing::Rationals => {
                let free = self.rank(degree) - d_out.rank() - d_in.rank();
                Ok(CohomologyGroup::free(free))
            }
            CoefficientRing::Integers => {
                let (din, dout) = self.integral_pair(&d_in, &d_out)?;
                let s_in = smith_normal_form(&din);
                let rank_out = smith_normal_form(&dout).rank;
                let free = self.rank(degree) - rank_out - s_in.rank;
                Ok(CohomologyGroup {
                    free_rank: free,
                    torsion: s_in.torsion_divisors(),
                    divisible_rank: 0,
                    rational_divisible_rank: 0,
                })
            }
            CoefficientRing::RationalsMod1 => {
                // H^n(C (x) Q/Z) via universal coefficients
                let here = self.cohomology(degree, CoefficientRing::Integers)?;
                let above = self.cohomology(degree + 1, CoefficientRing::Integers)?;
                Ok(CohomologyGroup {
                    free_rank: 0,
                    torsion: above.torsion,
                    divisible_rank: here.free_rank,
                    rational_divisible_rank: 0,
                })
            }
        }
    }

    fn integral_pair(&self, d_in: &SparseMat, d_out: &SparseMat) -> Result<(IntMat, IntMat)> {
        if !self.is_integral() {
            return Err(Error::RingMismatch(
                "complex has rational differentials; integral cohomology undefined".into(),
            ));
        }
        Ok((d_in.to_int()?, d_out.to_int()?))
    }

    /// Integer basis of the degree-`n` cycles of the dual chain complex
    /// (kernel of the transposed differential into degree `n`), i.e. the
    /// chains killed by the boundary. Used for period and pairing checks.
    pub fn chain_cycle_basis(&self, degree: isize) -> Result<Vec<Vec<Int>>> {
        if degree < 0 || degree as usize >= self.ranks.len() {
            return Ok(Vec::new());
        }
        if !self.is_integral() {
            return Err(Error::RingMismatch(
                "cycle extraction requires an integral complex".into(),
            ));
        }
        // boundary on chains = transpose of the cochain differential d^{n-1}
        let boundary = self.diff(degree - 1).transpose().to_int()?;
        if boundary.rows == 0 {
            // everything is a cycle
            let n = self.rank(degree);
            return Ok((0..n)
                .map(|i| {
                    let mut v = vec![Int::zero(); n];
                    v[i] = Int::from(1);
                    v
                })
                .collect());
        }
        Ok(smith_normal_form(&boundary).kernel_basis())
    }

    /// Euler characteristic from ranks.
    pub fn euler_from_ranks(&self) -> i64 {
        self.ranks
            .iter()
            .enumerate()
            .map(|(k, &r)| if k % 2 == 0 { r as i64 } else { -(r as i64) })
            .sum()
    }

    /// Euler characteristic from rational cohomology.
    pub fn euler_from_cohomology(&self) -> Result<i64> {
        let mut chi = 0i64;
        for k in 0..self.ranks.len() {
            let h = self.cohomology(k as isize, CoefficientRing::Rationals)?;
            let term = h.free_rank as i64;
            chi += if k % 2 == 0 { term } else { -term };
        }
        Ok(chi)
    }
}
