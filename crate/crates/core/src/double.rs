//! First-quadrant double complexes and their total complexes.
//!
//! Positions are `(p, j)`: `p` is the nerve (Cech) level raised by the
//! differential `delta`, `j` the form degree raised by `d`. The two
//! differentials commute on the nose; the total differential is
//! `delta + (-1)^p d`, which squares to zero.

use crate::complex::FiniteComplex;
use crate::error::{Error, Result};
use crate::matrix::SparseMat;
use crate::rat::{rat_int, Rat};

#[derive(Debug, Clone)]
pub struct DoubleComplex {
    pub p_max: usize,
    pub j_max: usize,
    /// ranks[p][j]
    ranks: Vec<Vec<usize>>,
    /// nerve direction: (p, j) -> (p+1, j)
    delta: Vec<Vec<SparseMat>>,
    /// form direction: (p, j) -> (p, j+1)
    d: Vec<Vec<SparseMat>>,
    /// optional labels per position
    labels: Vec<Vec<Vec<String>>>,
}

impl DoubleComplex {
    /// Builds and validates: `delta delta = 0`, `d d = 0`, `delta d = d delta`.
    pub fn new(
        ranks: Vec<Vec<usize>>,
        delta: Vec<Vec<SparseMat>>,
        d: Vec<Vec<SparseMat>>,
    ) -> Result<Self> {
        let p_max = ranks.len().saturating_sub(1);
        let j_max = ranks.first().map_or(0, |r| r.len().saturating_sub(1));
        for row in &ranks {
            if row.len() != j_max + 1 {
                return Err(Error::DegreeMismatch("ragged double complex grid".into()));
            }
        }
        let dc = DoubleComplex {
            p_max,
            j_max,
            ranks,
            delta,
            d,
            labels: Vec::new(),
        };
        dc.validate()?;
        Ok(dc)
    }

    pub fn with_labels(mut self, labels: Vec<Vec<Vec<String>>>) -> Self {
        self.labels = labels;
        self
    }

    pub fn rank(&self, p: isize, j: isize) -> usize {
        if p < 0 || j < 0 || p as usize > self.p_max || j as usize > self.j_max {
            0
        } else {
            self.ranks[p as usize][j as usize]
        }
    }

    /// delta: (p, j) -> (p+1, j); zero outside the grid.
    pub fn delta_at(&self, p: isize, j: isize) -> SparseMat {
        if p >= 0 && j >= 0 && (p as usize) < self.p_max && j as usize <= self.j_max {
            self.delta[p as usize][j as usize].clone()
        } else {
            SparseMat::zeros(self.rank(p + 1, j), self.rank(p, j))
        }
    }

    /// d: (p, j) -> (p, j+1); zero outside the grid.
    pub fn d_at(&self, p: isize, j: isize) -> SparseMat {
        if p >= 0 && j >= 0 && p as usize <= self.p_max && (j as usize) < self.j_max {
            self.d[p as usize][j as usize].clone()
        } else {
            SparseMat::zeros(self.rank(p, j + 1), self.rank(p, j))
        }
    }

    fn validate(&self) -> Result<()> {
        for p in 0..=self.p_max as isize {
            for j in 0..=self.j_max as isize {
                let shape_ok = |m: &SparseMat, r: usize, c: usize| m.rows == r && m.cols == c;
                let dl = self.delta_at(p, j);
                if !shape_ok(&dl, self.rank(p + 1, j), self.rank(p, j)) {
                    return Err(Error::DegreeMismatch(format!(
                        "delta at ({p},{j}) has wrong shape"
                    )));
                }
                let dd = self.d_at(p, j);
                if !shape_ok(&dd, self.rank(p, j + 1), self.rank(p, j)) {
                    return Err(Error::DegreeMismatch(format!(
                        "d at ({p},{j}) has wrong shape"
                    )));
                }
                if !self.delta_at(p + 1, j).mul(&dl).is_zero() {
                    return Err(Error::NotACocycle(format!(
                        "delta^2 != 0 at ({p},{j})"
                    )));
                }
                if !self.d_at(p, j + 1).mul(&dd).is_zero() {
                    return Err(Error::NotACocycle(format!("d^2 != 0 at ({p},{j})")));
                }
                let a = self.d_at(p + 1, j).mul(&dl);
                let b = self.delta_at(p, j + 1).mul(&dd);
                if a != b {
                    return Err(Error::SignConventionViolation(format!(
                        "delta and d do not commute at ({p},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Offsets of each `(p, j)` block inside total degree `n = p + j`,
    /// blocks ordered by ascending `p`.
    pub fn block_offset(&self, p: usize, j: usize) -> usize {
        let n = p + j;
        let mut off = 0;
        for q in 0..p {
            if n - q <= self.j_max && q <= self.p_max {
                off += self.ranks[q][n - q];
            }
        }
        off
    }

    pub fn total_rank(&self, n: usize) -> usize {
        let mut r = 0;
        for p in 0..=self.p_max.min(n) {
            let j = n - p;
            if j <= self.j_max {
                r += self.ranks[p][j];
            }
        }
        r
    }

    /// Assembles the total complex with differential `delta + (-1)^p d`.
    pub fn total_complex(&self) -> Result<FiniteComplex> {
        let n_max = self.p_max + self.j_max;
        let ranks: Vec<usize> = (0..=n_max).map(|n| self.total_rank(n)).collect();
        let mut diffs = Vec::new();
        for n in 0..=n_max {
            let mut m = SparseMat::zeros(self.total_rank(n + 1), ranks[n]);
            for p in 0..=self.p_max.min(n) {
                let j = n - p;
                if j > self.j_max {
                    continue;
                }
                let src = self.block_offset(p, j);
                // delta block into (p+1, j)
                if p + 1 <= self.p_max {
                    let dst = self.block_offset(p + 1, j);
                    for (&(r, c), v) in self.delta[p][j].iter() {
                        m.add_to(dst + r, src + c, v.clone());
                    }
                }
                // (-1)^p d block into (p, j+1)
                if j + 1 <= self.j_max {
                    let dst = self.block_offset(p, j + 1);
                    let sign: Rat = if p % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                    for (&(r, c), v) in self.d[p][j].iter() {
                        m.add_to(dst + r, src + c, v * &sign);
                    }
                }
            }
            diffs.push(m);
        }
        let total = FiniteComplex::new(ranks, diffs).map_err(|e| match e {
            Error::NotACocycle(msg) => Error::SignConventionViolation(msg),
            other => other,
        })?;
        if self.labels.is_empty() {
            return Ok(total);
        }
        let mut labels = Vec::new();
        for n in 0..=n_max {
            let mut row = Vec::new();
            for p in 0..=self.p_max.min(n) {
                let j = n - p;
                if j <= self.j_max {
                    row.extend(self.labels[p][j].iter().cloned());
                }
            }
            labels.push(row);
        }
        Ok(total.with_labels(labels))
    }
}
