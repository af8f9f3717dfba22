//! Exact matrices: dense integer matrices (the Smith normal form carrier)
//! and sparse rational matrices (differentials of simplicial and bar
//! complexes, which are mostly zero).

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{format_rat, is_integral, parse_rat, Int, Rat};

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Int>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = IntMat::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.into_iter().enumerate() {
                m[(i, j)] = Int::from(v);
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(i, j)] += prod;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> IntMat {
        let mut out = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Int::zero();
                for j in 0..self.cols {
                    if !self[(i, j)].is_zero() && !v[j].is_zero() {
                        acc += &self[(i, j)] * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Int {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut m = self.data.clone();
        let at = |m: &Vec<Int>, i: usize, j: usize| m[i * n + j].clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if at(&m, k, k).is_zero() {
                // find a pivot row below
                let swap = (k + 1..n).find(|&i| !at(&m, i, k).is_zero());
                match swap {
                    Some(i) => {
                        for j in 0..n {
                            m.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&at(&m, i, j) * &at(&m, k, k) - &at(&m, i, k) * &at(&m, k, j)) / &prev;
                    m[i * n + j] = v;
                }
                m[i * n + k] = Int::zero();
            }
            prev = at(&m, k, k);
        }
        sign * at(&m, n - 1, n - 1)
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

/// Sparse rational matrix stored as a triplet map. Acts on column vectors;
/// entry `(i, j)` is row `i`, column `j`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), Rat>,
}

impl SparseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: Rat) {
        if v.is_zero() {
            return;
        }
        assert!(i < self.rows && j < self.cols, "index out of range");
        let cur = self.entries.entry((i, j)).or_insert_with(Rat::zero);
        *cur += v;
        if cur.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rat {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_integer(&self) -> bool {
        self.entries.values().all(is_integral)
    }

    pub fn scale(&self, c: &Rat) -> SparseMat {
        let mut out = SparseMat::zeros(self.rows, self.cols);
        if c.is_zero() {
            return out;
        }
        for (&(i, j), v) in &self.entries {
            out.entries.insert((i, j), v * c);
        }
        out
    }

    pub fn add(&self, other: &SparseMat) -> SparseMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (&(i, j), v) in &other.entries {
            out.add_to(i, j, v.clone());
        }
        out
    }

    pub fn mul(&self, other: &SparseMat) -> SparseMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = SparseMat::zeros(self.rows, other.cols);
        // group rhs entries by row for the sparse product
        let mut rhs_rows: BTreeMap<usize, Vec<(usize, &Rat)>> = BTreeMap::new();
        for (&(i, j), v) in &other.entries {
            rhs_rows.entry(i).or_default().push((j, v));
        }
        for (&(i, k), a) in &self.entries {
            if let Some(row) = rhs_rows.get(&k) {
                for &(j, b) in row {
                    out.add_to(i, j, a * b);
                }
            }
        }
        out
    }

    /// Matrix-vector product over the rationals.
    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Rat::zero(); self.rows];
        for (&(i, j), a) in &self.entries {
            if !v[j].is_zero() {
                out[i] += a * &v[j];
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMat {
        let mut out = SparseMat::zeros(self.cols, self.rows);
        for (&(i, j), v) in &self.entries {
            out.entries.insert((j, i), v.clone());
        }
        out
    }

    /// Converts to a dense integer matrix; errors if any entry is fractional.
    pub fn to_int(&self) -> Result<IntMat> {
        let mut out = IntMat::zeros(self.rows, self.cols);
        for (&(i, j), v) in &self.entries {
            if !is_integral(v) {
                return Err(Error::RingMismatch(format!(
                    "entry ({i},{j}) = {} is not an integer",
                    format_rat(v)
                )));
            }
            out[(i, j)] = v.numer().clone();
        }
        Ok(out)
    }

    pub fn from_int(m: &IntMat) -> SparseMat {
        let mut out = SparseMat::zeros(m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                if !m[(i, j)].is_zero() {
                    out.entries
                        .insert((i, j), Rat::from_integer(m[(i, j)].clone()));
                }
            }
        }
        out
    }

    /// Rank over the rationals by exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        rational_rank(&mut self.to_dense())
    }

    pub fn to_dense(&self) -> Vec<Vec<Rat>> {
        let mut d = vec![vec![Rat::zero(); self.cols]; self.rows];
        for (&(i, j), v) in &self.entries {
            d[i][j] = v.clone();
        }
        d
    }
}

/// In-place row reduction; returns the rank. Columns are processed left to
/// right with the first nonzero entry as pivot, so the result is
/// deterministic.
pub fn rational_rank(m: &mut [Vec<Rat>]) -> usize {
    row_echelon(m).len()
}

/// Reduces `m` to row echelon form in place and returns the pivot columns.
pub fn row_echelon(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for j in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][j].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][j].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][j].is_zero() {
                let f = m[i][j].clone();
                for c in 0..cols {
                    let t = &m[r][c] * &f;
                    m[i][c] -= t;
                }
            }
        }
        pivots.push(j);
        r += 1;
    }
    pivots
}

/// Basis of the rational kernel of `m` (as column vectors), deterministic:
/// free columns in increasing order, each with unit coordinate.
pub fn rational_kernel(m: &SparseMat) -> Vec<Vec<Rat>> {
    let mut d = m.to_dense();
    let pivots = row_echelon(&mut d);
    let cols = m.cols;
    let mut basis = Vec::new();
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    for j in 0..cols {
        if pivot_set.contains(&j) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[j] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            // row r: x_pc + sum over free columns of d[r][c] x_c = 0
            if !d[r][j].is_zero() {
                v[pc] = -d[r][j].clone();
            }
        }
        basis.push(v);
    }
    basis
}

/// Solves `m x = b` over the rationals; returns one solution if consistent.
pub fn solve_rational(m: &SparseMat, b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(b.len(), m.rows);
    let mut d = m.to_dense();
    for (i, row) in d.iter_mut().enumerate() {
        row.push(b[i].clone());
    }
    let pivots = row_echelon(&mut d);
    // inconsistent if the augmented column is a pivot
    if pivots.contains(&m.cols) {
        return None;
    }
    let mut x = vec![Rat::zero(); m.cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = d[r][m.cols].clone();
    }
    Some(x)
}

/// JSON form of a sparse rational matrix: triplets with `p/q` strings.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, String)>,
}

impl SparseMat {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), v)| (i, j, format_rat(v)))
                .collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<SparseMat> {
        let mut m = SparseMat::zeros(j.rows, j.cols);
        for (i, jj, s) in &j.entries {
            if *i >= j.rows || *jj >= j.cols {
                return Err(Error::Parse(format!(
                    "matrix entry ({i},{jj}) outside {}x{}",
                    j.rows, j.cols
                )));
            }
            m.set(*i, *jj, parse_rat(s)?);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn sparse_mul_matches_dense() {
        let mut a = SparseMat::zeros(2, 3);
        a.set(0, 0, rat(1, 2));
        a.set(1, 2, rat(3, 1));
        let mut b = SparseMat::zeros(3, 2);
        b.set(0, 1, rat(4, 1));
        b.set(2, 0, rat(-1, 3));
        let c = a.mul(&b);
        assert_eq!(c.get(0, 1), rat(2, 1));
        assert_eq!(c.get(1, 0), rat(-1, 1));
        assert_eq!(c.nnz(), 2);
    }

    #[test]
    fn kernel_is_killed_by_matrix() {
        let mut m = SparseMat::zeros(2, 4);
        m.set(0, 0, rat(1, 1));
        m.set(0, 1, rat(2, 1));
        m.set(1, 2, rat(1, 1));
        m.set(1, 3, rat(-1, 1));
        let ker = rational_kernel(&m);
        assert_eq!(ker.len(), 2);
        for v in ker {
            assert!(m.apply(&v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn det_small() {
        let m = IntMat::from_rows(vec![vec![2, 4], vec![6, 8]]);
        assert_eq!(m.det(), Int::from(-8));
        assert_eq!(IntMat::identity(3).det(), Int::from(1));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let mut m = SparseMat::zeros(2, 2);
        m.set(0, 0, rat(1, 1));
        m.set(1, 0, rat(2, 1));
        let b = vec![rat(3, 1), rat(6, 1)];
        let x = solve_rational(&m, &b).unwrap();
        assert_eq!(m.apply(&x), b);
        let b_bad = vec![rat(3, 1), rat(5, 1)];
        assert!(solve_rational(&m, &b_bad).is_none());
    }
}
