//! Smith normal form over the integers.
//!
//! `smith_normal_form(A)` returns unimodular `U`, `V` and diagonal `D` with
//! `U * A * V = D`, `d_i >= 0` and `d_i | d_{i+1}`. The pivot rule is fixed
//! (smallest nonzero absolute value, ties broken in row-major order of the
//! working submatrix) so the decomposition is identical across runs and
//! platforms.

use num_traits::{Signed, Zero};

use crate::matrix::IntMat;
use crate::rat::Int;

#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
    pub rank: usize,
}

impl Smith {
    /// Nontrivial elementary divisors (diagonal entries > 1).
    pub fn torsion_divisors(&self) -> Vec<Int> {
        let n = self.rank.min(self.d.rows).min(self.d.cols);
        (0..n)
            .map(|i| self.d[(i, i)].clone())
            .filter(|d| d > &Int::from(1))
            .collect()
    }

    /// Integer kernel basis of `A`: the columns of `V` beyond the rank.
    pub fn kernel_basis(&self) -> Vec<Vec<Int>> {
        (self.rank..self.v.cols)
            .map(|j| self.v.column(j))
            .collect()
    }
}

struct Work {
    d: IntMat,
    u: IntMat,
    v: IntMat,
}

impl Work {
    fn find_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut best_abs = Int::zero();
        for i in k..self.d.rows {
            for j in k..self.d.cols {
                let v = &self.d[(i, j)];
                if v.is_zero() {
                    continue;
                }
                let abs = v.abs();
                if best.is_none() || abs < best_abs {
                    best = Some((i, j));
                    best_abs = abs;
                }
            }
        }
        best
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.d.cols {
            let t = self.d[(i, c)].clone();
            self.d[(i, c)] = self.d[(j, c)].clone();
            self.d[(j, c)] = t;
        }
        for c in 0..self.u.cols {
            let t = self.u[(i, c)].clone();
            self.u[(i, c)] = self.u[(j, c)].clone();
            self.u[(j, c)] = t;
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.d.rows {
            let t = self.d[(r, i)].clone();
            self.d[(r, i)] = self.d[(r, j)].clone();
            self.d[(r, j)] = t;
        }
        for r in 0..self.v.rows {
            let t = self.v[(r, i)].clone();
            self.v[(r, i)] = self.v[(r, j)].clone();
            self.v[(r, j)] = t;
        }
    }

    /// row[i] -= q * row[k]
    fn row_op(&mut self, i: usize, k: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.d.cols {
            let t = q * &self.d[(k, c)];
            self.d[(i, c)] -= t;
        }
        for c in 0..self.u.cols {
            let t = q * &self.u[(k, c)];
            self.u[(i, c)] -= t;
        }
    }

    /// col[j] -= q * col[k]
    fn col_op(&mut self, j: usize, k: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.d.rows {
            let t = q * &self.d[(r, k)];
            self.d[(r, j)] -= t;
        }
        for r in 0..self.v.rows {
            let t = q * &self.v[(r, k)];
            self.v[(r, j)] -= t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.d.cols {
            let t = -self.d[(i, c)].clone();
            self.d[(i, c)] = t;
        }
        for c in 0..self.u.cols {
            let t = -self.u[(i, c)].clone();
            self.u[(i, c)] = t;
        }
    }

    /// Brings the smallest entry to `(k, k)` and clears row and column `k`.
    /// Returns false when the trailing submatrix is zero.
    fn clear_position(&mut self, k: usize) -> bool {
        let Some((pi, pj)) = self.find_pivot(k) else {
            return false;
        };
        self.swap_rows(k, pi);
        self.swap_cols(k, pj);
        loop {
            if self.d[(k, k)].is_negative() {
                self.negate_row(k);
            }
            let mut clean = true;
            for i in k + 1..self.d.rows {
                if self.d[(i, k)].is_zero() {
                    continue;
                }
                let q = &self.d[(i, k)] / &self.d[(k, k)];
                self.row_op(i, k, &q);
                if !self.d[(i, k)].is_zero() {
                    // nonzero remainder: strictly smaller pivot, restart
                    self.swap_rows(k, i);
                    clean = false;
                    break;
                }
            }
            if !clean {
                continue;
            }
            for j in k + 1..self.d.cols {
                if self.d[(k, j)].is_zero() {
                    continue;
                }
                let q = &self.d[(k, j)] / &self.d[(k, k)];
                self.col_op(j, k, &q);
                if !self.d[(k, j)].is_zero() {
                    self.swap_cols(k, j);
                    clean = false;
                    break;
                }
            }
            if clean {
                return true;
            }
        }
    }

    /// Finds a trailing entry not divisible by the pivot `d[k][k]`.
    fn divisibility_offender(&self, k: usize) -> Option<usize> {
        let pivot = &self.d[(k, k)];
        for i in k + 1..self.d.rows {
            for j in k + 1..self.d.cols {
                if !(&self.d[(i, j)] % pivot).is_zero() {
                    return Some(i);
                }
            }
        }
        None
    }
}

pub fn smith_normal_form(a: &IntMat) -> Smith {
    let mut w = Work {
        d: a.clone(),
        u: IntMat::identity(a.rows),
        v: IntMat::identity(a.cols),
    };
    let steps = a.rows.min(a.cols);
    let mut rank = 0;

    for k in 0..steps {
        if !w.clear_position(k) {
            break;
        }
        // enforce d_k | trailing entries; each fold shrinks the pivot
        while let Some(i) = w.divisibility_offender(k) {
            let minus_one = Int::from(-1);
            w.row_op(k, i, &minus_one);
            w.clear_position(k);
        }
        rank = k + 1;
    }

    Smith {
        u: w.u,
        d: w.d,
        v: w.v,
        rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn check_decomposition(a: &IntMat, s: &Smith) {
        // U * A * V = D
        assert_eq!(s.u.mul(a).mul(&s.v), s.d);
        // unimodularity
        let one = Int::one();
        assert!(s.u.det().abs() == one && s.v.det().abs() == one);
        // diagonal, nonnegative, divisibility chain
        for i in 0..s.d.rows {
            for j in 0..s.d.cols {
                if i != j {
                    assert!(s.d[(i, j)].is_zero(), "off-diagonal entry at ({i},{j})");
                }
            }
        }
        let n = s.d.rows.min(s.d.cols);
        for i in 0..n {
            assert!(!s.d[(i, i)].is_negative());
            if i + 1 < n && !s.d[(i + 1, i + 1)].is_zero() {
                assert!(
                    !s.d[(i, i)].is_zero() && (&s.d[(i + 1, i + 1)] % &s.d[(i, i)]).is_zero(),
                    "divisibility chain broken at {i}"
                );
            }
        }
    }

    #[test]
    fn identity_case() {
        let a = IntMat::from_rows(vec![vec![1]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.d, a);
        assert_eq!(s.u, IntMat::identity(1));
        assert_eq!(s.v, IntMat::identity(1));
    }

    #[test]
    fn two_by_two() {
        // oracle: U*A*V = D, |det D| = |det A| = 8, d1 = gcd of entries = 2
        let a = IntMat::from_rows(vec![vec![2, 4], vec![6, 8]]);
        let s = smith_normal_form(&a);
        check_decomposition(&a, &s);
        assert_eq!(s.d[(0, 0)], Int::from(2));
        assert_eq!(s.d[(1, 1)], Int::from(4));
        assert_eq!(s.d.det().abs(), a.det().abs());
    }

    #[test]
    fn zero_matrix() {
        let a = IntMat::zeros(2, 3);
        let s = smith_normal_form(&a);
        assert_eq!(s.d, IntMat::zeros(2, 3));
        assert_eq!(s.u, IntMat::identity(2));
        assert_eq!(s.v, IntMat::identity(3));
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn kernel_basis_is_killed() {
        let a = IntMat::from_rows(vec![vec![1, 2, 3], vec![2, 4, 6]]);
        let s = smith_normal_form(&a);
        check_decomposition(&a, &s);
        assert_eq!(s.rank, 1);
        for v in s.kernel_basis() {
            assert!(a.apply(&v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn torsion_divisors_of_multiplication_by_two() {
        let a = IntMat::from_rows(vec![vec![2]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.torsion_divisors(), vec![Int::from(2)]);
    }

    #[test]
    fn randomized_small_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..80 {
            let r = rng.gen_range(1..6);
            let c = rng.gen_range(1..6);
            let rows: Vec<Vec<i64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect())
                .collect();
            let a = IntMat::from_rows(rows);
            let s = smith_normal_form(&a);
            check_decomposition(&a, &s);
        }
    }

    #[test]
    fn deterministic_output() {
        let a = IntMat::from_rows(vec![vec![4, 6, 10], vec![6, 12, 18], vec![10, 18, 34]]);
        let s1 = smith_normal_form(&a);
        let s2 = smith_normal_form(&a);
        assert_eq!(s1.u, s2.u);
        assert_eq!(s1.v, s2.v);
        assert_eq!(s1.d, s2.d);
    }
}
