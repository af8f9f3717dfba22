//! Cochain complexes whose terms mix a finitely generated integral part
//! with a rational vector space: `A^n = Z^{a_n} (+) Q^{b_n}`, differential
//!
//! ```text
//!   | ZZ  0  |      ZZ : integer entries, the integral subquotient
//!   | ZQ  QQ |      ZQ, QQ : rational entries
//! ```
//!
//! The rational part is a subcomplex and the integral part the quotient, so
//! cohomology splits through the long exact sequence with connecting map
//! induced by `ZQ`. Because divisible groups are injective the extension
//! splits, giving
//!
//! `H^n = Z^{f_n - r_n} (+) torsion(H^n_Z) (+) (Q/Z)^{r_{n-1}} (+) Q^{h_n - r_{n-1}}`
//!
//! where `f_n`, `h_n` are the free/rational cohomology ranks of the two parts
//! and `r_n` is the rank of the connecting map out of degree `n`. Both the
//! Cheeger-Simons complex and the integral Deligne complex are instances.

use num_traits::Zero;

use crate::complex::CohomologyGroup;
use crate::error::{Error, Result};
use crate::matrix::{rational_rank, SparseMat};
use crate::rat::Rat;
use crate::snf::smith_normal_form;

#[derive(Debug, Clone)]
pub struct MixedComplex {
    z_ranks: Vec<usize>,
    q_ranks: Vec<usize>,
    /// zz[n]: Z^{a_n} -> Z^{a_{n+1}} (integer entries)
    zz: Vec<SparseMat>,
    /// zq[n]: Z^{a_n} -> Q^{b_{n+1}}
    zq: Vec<SparseMat>,
    /// qq[n]: Q^{b_n} -> Q^{b_{n+1}}
    qq: Vec<SparseMat>,
}

impl MixedComplex {
    pub fn new(
        z_ranks: Vec<usize>,
        q_ranks: Vec<usize>,
        zz: Vec<SparseMat>,
        zq: Vec<SparseMat>,
        qq: Vec<SparseMat>,
    ) -> Result<Self> {
        assert_eq!(z_ranks.len(), q_ranks.len());
        let c = MixedComplex {
            z_ranks,
            q_ranks,
            zz,
            zq,
            qq,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn degrees(&self) -> usize {
        self.z_ranks.len()
    }

    pub fn z_rank(&self, n: isize) -> usize {
        if n < 0 || n as usize >= self.z_ranks.len() {
            0
        } else {
            self.z_ranks[n as usize]
        }
    }

    pub fn q_rank(&self, n: isize) -> usize {
        if n < 0 || n as usize >= self.q_ranks.len() {
            0
        } else {
            self.q_ranks[n as usize]
        }
    }

    fn block(&self, mats: &[SparseMat], n: isize, rows: usize, cols: usize) -> SparseMat {
        if n >= 0 && (n as usize) < mats.len() {
            mats[n as usize].clone()
        } else {
            SparseMat::zeros(rows, cols)
        }
    }

    pub fn zz_at(&self, n: isize) -> SparseMat {
        self.block(&self.zz, n, self.z_rank(n + 1), self.z_rank(n))
    }

    pub fn zq_at(&self, n: isize) -> SparseMat {
        self.block(&self.zq, n, self.q_rank(n + 1), self.z_rank(n))
    }

    pub fn qq_at(&self, n: isize) -> SparseMat {
        self.block(&self.qq, n, self.q_rank(n + 1), self.q_rank(n))
    }

    fn validate(&self) -> Result<()> {
        for n in 0..self.degrees() as isize {
            if !self.zz_at(n).is_integer() {
                return Err(Error::RingMismatch(format!(
                    "ZZ block at degree {n} has fractional entries"
                )));
            }
            if !self.zz_at(n + 1).mul(&self.zz_at(n)).is_zero() {
                return Err(Error::NotACocycle(format!("ZZ^2 != 0 at {n}")));
            }
            if !self.qq_at(n + 1).mul(&self.qq_at(n)).is_zero() {
                return Err(Error::NotACocycle(format!("QQ^2 != 0 at {n}")));
            }
            let mixed = self
                .zq_at(n + 1)
                .mul(&self.zz_at(n))
                .add(&self.qq_at(n + 1).mul(&self.zq_at(n)));
            if !mixed.is_zero() {
                return Err(Error::NotACocycle(format!(
                    "ZQ.ZZ + QQ.ZQ != 0 at {n}"
                )));
            }
        }
        Ok(())
    }

    /// Rank of the connecting map out of `H^n` of the integral part into
    /// `H^{n+1}` of the rational part: the span of `ZQ(ker ZZ_n)` inside
    /// the rational cocycles, modulo rational boundaries.
    fn connecting_rank(&self, n: isize) -> Result<usize> {
        let zz = self.zz_at(n).to_int()?;
        let kernel = if zz.rows == 0 {
            let a = self.z_rank(n);
            (0..a)
                .map(|i| {
                    let mut v = vec![crate::rat::Int::zero(); a];
                    v[i] = crate::rat::Int::from(1);
                    v
                })
                .collect::<Vec<_>>()
        } else {
            smith_normal_form(&zz).kernel_basis()
        };
        let zq = self.zq_at(n);
        let qq = self.qq_at(n);
        let target = self.q_rank(n + 1);
        let mut cols: Vec<Vec<Rat>> = Vec::new();
        for v in &kernel {
            let vr: Vec<Rat> = v.iter().map(|x| Rat::from_integer(x.clone())).collect();
            cols.push(zq.apply(&vr));
        }
        let qq_rank = qq.rank();
        // rank [ZQ K | QQ] - rank QQ, assembled densely by rows
        let mut dense: Vec<Vec<Rat>> = vec![vec![Rat::zero(); cols.len() + qq.cols]; target];
        for (c, col) in cols.iter().enumerate() {
            for (r, val) in col.iter().enumerate() {
                dense[r][c] = val.clone();
            }
        }
        for (&(r, c), val) in qq.iter() {
            dense[r][cols.len() + c] = val.clone();
        }
        Ok(rational_rank(&mut dense) - qq_rank)
    }

    pub fn cohomology(&self, n: isize) -> Result<CohomologyGroup> {
        // integral part via Smith normal form
        let s_in = smith_normal_form(&self.zz_at(n - 1).to_int()?);
        let rank_out = smith_normal_form(&self.zz_at(n).to_int()?).rank;
        let f_n = self.z_rank(n) - rank_out - s_in.rank;
        let torsion = s_in.torsion_divisors();
        // rational part by ranks
        let h_n = self.q_rank(n) - self.qq_at(n).rank() - self.qq_at(n - 1).rank();
        let r_n = self.connecting_rank(n)?;
        let r_prev = self.connecting_rank(n - 1)?;
        Ok(CohomologyGroup {
            free_rank: f_n - r_n,
            torsion,
            divisible_rank: r_prev,
            rational_divisible_rank: h_n - r_prev,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat_int, Int};

    /// Cone of Z -> Q in degree 0: H^0 = 0, H^1 = Q/Z.
    #[test]
    fn cone_of_inclusion() {
        let z_ranks = vec![1, 0];
        let q_ranks = vec![0, 1];
        let zz = vec![SparseMat::zeros(0, 1), SparseMat::zeros(0, 0)];
        let mut zq0 = SparseMat::zeros(1, 1);
        zq0.set(0, 0, rat_int(1));
        let zq = vec![zq0, SparseMat::zeros(0, 0)];
        let qq = vec![SparseMat::zeros(1, 0), SparseMat::zeros(0, 1)];
        let c = MixedComplex::new(z_ranks, q_ranks, zz, zq, qq).unwrap();
        let h0 = c.cohomology(0).unwrap();
        assert!(h0.is_zero(), "H^0 = {h0}");
        let h1 = c.cohomology(1).unwrap();
        assert_eq!(h1.divisible_rank, 1);
        assert_eq!(h1.free_rank, 0);
        assert!(h1.torsion.is_empty());
        assert_eq!(h1.rational_divisible_rank, 0);
    }

    /// Pure integral complex: multiplication by 2 in degree 0.
    #[test]
    fn pure_torsion() {
        let z_ranks = vec![1, 1];
        let q_ranks = vec![0, 0];
        let mut zz0 = SparseMat::zeros(1, 1);
        zz0.set(0, 0, rat_int(2));
        let zz = vec![zz0, SparseMat::zeros(0, 1)];
        let zq = vec![SparseMat::zeros(0, 1), SparseMat::zeros(0, 1)];
        let qq = vec![SparseMat::zeros(0, 0), SparseMat::zeros(0, 0)];
        let c = MixedComplex::new(z_ranks, q_ranks, zz, zq, qq).unwrap();
        let h1 = c.cohomology(1).unwrap();
        assert_eq!(h1.free_rank, 0);
        assert_eq!(h1.torsion, vec![Int::from(2)]);
    }

    /// Z-part Z in degree 0 with zero ZQ: H^0 keeps its free rank, and the
    /// rational line survives as a Q summand.
    #[test]
    fn disconnected_parts() {
        let z_ranks = vec![1];
        let q_ranks = vec![1];
        let zz = vec![SparseMat::zeros(0, 1)];
        let zq = vec![SparseMat::zeros(0, 1)];
        let qq = vec![SparseMat::zeros(0, 1)];
        let c = MixedComplex::new(z_ranks, q_ranks, zz, zq, qq).unwrap();
        let h0 = c.cohomology(0).unwrap();
        assert_eq!(h0.free_rank, 1);
        assert_eq!(h0.rational_divisible_rank, 1);
        assert_eq!(h0.divisible_rank, 0);
    }
}
