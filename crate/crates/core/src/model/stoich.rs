//! Stoichiometric matrices and exact rational linear algebra on them.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Crn;
use crate::error::{CrnError, Result};

/// Γl, Γr, Γ = Γr − Γl (all n×m, row-major `Vec<Vec<_>>`) and the exact rank of Γ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoichMatrices {
    pub n: usize,
    pub m: usize,
    pub gamma_l: Vec<Vec<u32>>,
    pub gamma_r: Vec<Vec<u32>>,
    pub gamma: Vec<Vec<i64>>,
    pub rank: usize,
}

impl StoichMatrices {
    pub fn gamma_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.m, |i, j| self.gamma[i][j] as f64)
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.gamma.iter().map(|row| row[j]).collect()
    }
}

/// Γ = Γ0·Q with the columns of Γ0 a basis of im Γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisFactorization {
    /// Indices of the columns of Γ chosen as the basis.
    pub pivot_columns: Vec<usize>,
    /// n×r integer matrix.
    pub gamma0: Vec<Vec<i64>>,
    /// r×m rational matrix stored as (numerator, denominator) strings-free pairs.
    pub q: Vec<Vec<(i64, i64)>>,
}

impl BasisFactorization {
    pub fn rank(&self) -> usize {
        self.pivot_columns.len()
    }

    pub fn gamma0_f64(&self) -> DMatrix<f64> {
        let n = self.gamma0.len();
        DMatrix::from_fn(n, self.rank(), |i, j| self.gamma0[i][j] as f64)
    }

    pub fn q_f64(&self) -> DMatrix<f64> {
        let r = self.rank();
        let m = if r == 0 { 0 } else { self.q[0].len() };
        DMatrix::from_fn(r, m, |i, j| {
            let (p, d) = self.q[i][j];
            p as f64 / d as f64
        })
    }

    /// Exact check that Γ0·Q reproduces `gamma`.
    pub fn reproduces(&self, gamma: &[Vec<i64>]) -> bool {
        let r = self.rank();
        gamma.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, &g)| {
                let mut acc = BigRational::zero();
                for p in 0..r {
                    let (num, den) = self.q[p][j];
                    acc += BigRational::new(BigInt::from(self.gamma0[i][p]), BigInt::one())
                        * BigRational::new(BigInt::from(num), BigInt::from(den));
                }
                acc == BigRational::from_integer(BigInt::from(g))
            })
        })
    }
}

pub fn stoich_matrices(crn: &Crn) -> StoichMatrices {
    let n = crn.n_species();
    let m = crn.n_reactions();
    let gamma_l: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..m).map(|j| crn.left(i, j)).collect())
        .collect();
    let gamma_r: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..m).map(|j| crn.right(i, j)).collect())
        .collect();
    let gamma: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| gamma_r[i][j] as i64 - gamma_l[i][j] as i64)
                .collect()
        })
        .collect();
    let rank = rref(&to_rational(&gamma)).1.len();
    StoichMatrices {
        n,
        m,
        gamma_l,
        gamma_r,
        gamma,
        rank,
    }
}

/// Leftmost pivot columns of Γ form Γ0; Q is read off the reduced row echelon form.
pub fn basis_factorization(sm: &StoichMatrices) -> Result<BasisFactorization> {
    let (reduced, pivots) = rref(&to_rational(&sm.gamma));
    if pivots.is_empty() {
        return Err(CrnError::TrivialSubspace);
    }
    let gamma0 = (0..sm.n)
        .map(|i| pivots.iter().map(|&j| sm.gamma[i][j]).collect())
        .collect();
    let q = (0..pivots.len())
        .map(|p| {
            (0..sm.m)
                .map(|j| {
                    let v = &reduced[p][j];
                    let num = v.numer().to_i64().expect("Q entry numerator fits in i64");
                    let den = v.denom().to_i64().expect("Q entry denominator fits in i64");
                    (num, den)
                })
                .collect()
        })
        .collect();
    Ok(BasisFactorization {
        pivot_columns: pivots,
        gamma0,
        q,
    })
}

/// Exact test of whether `v` lies in the column space of Γ.
pub fn in_span(sm: &StoichMatrices, v: &[i64]) -> Result<bool> {
    if v.len() != sm.n {
        return Err(CrnError::LengthMismatch {
            expected: sm.n,
            got: v.len(),
        });
    }
    let augmented: Vec<Vec<i64>> = sm
        .gamma
        .iter()
        .zip(v)
        .map(|(row, &x)| {
            let mut r = row.clone();
            r.push(x);
            r
        })
        .collect();
    Ok(rref(&to_rational(&augmented)).1.len() == sm.rank)
}

fn to_rational(a: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    a.iter()
        .map(|row| {
            row.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect()
}

/// Reduced row echelon form by left-to-right Gauss-Jordan elimination.
/// Returns the reduced matrix and the pivot column indices.
pub(crate) fn rref(a: &[Vec<BigRational>]) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut a = a.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..cols {
                    let delta = &factor * &a[row][c];
                    a[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Exact rank of an integer matrix.
pub fn integer_rank(a: &[Vec<i64>]) -> usize {
    rref(&to_rational(a)).1.len()
}

/// A basis of the left null space of Γ (vectors u with uᵀΓ = 0), scaled to integers.
pub fn left_null_space(sm: &StoichMatrices) -> Vec<Vec<i64>> {
    // Null space of Γᵀ (m×n).
    let gt: Vec<Vec<i64>> = (0..sm.m)
        .map(|j| (0..sm.n).map(|i| sm.gamma[i][j]).collect())
        .collect();
    let (reduced, pivots) = if sm.m == 0 {
        (Vec::new(), Vec::new())
    } else {
        rref(&to_rational(&gt))
    };
    let free: Vec<usize> = (0..sm.n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); sm.n];
            v[f] = BigRational::one();
            for (p, &pc) in pivots.iter().enumerate() {
                v[pc] = -reduced[p][f].clone();
            }
            let lcm = v
                .iter()
                .fold(BigInt::one(), |acc, x| num_integer_lcm(&acc, x.denom()));
            v.iter()
                .map(|x| {
                    (x * BigRational::from_integer(lcm.clone()))
                        .to_integer()
                        .to_i64()
                        .unwrap_or(0)
                })
                .collect()
        })
        .collect()
}

fn num_integer_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    let g = gcd(a.abs(), b.abs());
    (a * b).abs() / g
}

fn gcd(mut a: BigInt, mut b: BigInt) -> BigInt {
    while !b.is_zero() {
        let t = &a % &b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Crn;

    fn r_xiv() -> Crn {
        // X+Y -> 2Y, X -> 0, 0 -> X, Y -> 0, 0 -> Y
        Crn::from_pairs(
            2,
            &[
                (&[1, 1], &[0, 2]),
                (&[1, 0], &[0, 0]),
                (&[0, 0], &[1, 0]),
                (&[0, 1], &[0, 0]),
                (&[0, 0], &[0, 1]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn r_xiv_matrices() {
        let sm = stoich_matrices(&r_xiv());
        assert_eq!(sm.column(0), vec![-1, 1]);
        assert_eq!(sm.rank, 2);
        for i in 0..2 {
            for j in 0..5 {
                assert_eq!(
                    sm.gamma[i][j],
                    sm.gamma_r[i][j] as i64 - sm.gamma_l[i][j] as i64
                );
            }
        }
    }

    #[test]
    fn single_reaction_and_empty() {
        let sm = stoich_matrices(&Crn::from_pairs(2, &[(&[1, 0], &[0, 1])]).unwrap());
        assert_eq!(sm.column(0), vec![-1, 1]);
        assert_eq!(sm.rank, 1);
        let sm = stoich_matrices(&Crn::empty(3).unwrap());
        assert_eq!(sm.m, 0);
        assert_eq!(sm.rank, 0);
        assert_eq!(basis_factorization(&sm), Err(CrnError::TrivialSubspace));
    }

    #[test]
    fn dependent_columns_factorize() {
        let sm = StoichMatrices {
            n: 2,
            m: 2,
            gamma_l: vec![vec![0, 0], vec![0, 0]],
            gamma_r: vec![vec![1, 2], vec![1, 2]],
            gamma: vec![vec![1, 2], vec![1, 2]],
            rank: 1,
        };
        let bf = basis_factorization(&sm).unwrap();
        assert_eq!(bf.gamma0, vec![vec![1], vec![1]]);
        assert_eq!(bf.q, vec![vec![(1, 1), (2, 1)]]);
        assert!(bf.reproduces(&sm.gamma));
    }

    #[test]
    fn fully_open_has_full_rank() {
        let sm = stoich_matrices(&r_xiv());
        let bf = basis_factorization(&sm).unwrap();
        assert_eq!(bf.rank(), 2);
        assert!(bf.reproduces(&sm.gamma));
        assert!(in_span(&sm, &[7, -3]).unwrap());
    }

    #[test]
    fn span_membership() {
        let sm = stoich_matrices(&Crn::from_pairs(2, &[(&[1, 0], &[0, 1])]).unwrap());
        assert!(in_span(&sm, &[1, -1]).unwrap());
        assert!(!in_span(&sm, &[1, 1]).unwrap());
        assert!(in_span(&sm, &[1]).is_err());
    }

    #[test]
    fn left_null_space_of_conservative_network() {
        // X -> Y conserves x + y.
        let sm = stoich_matrices(&Crn::from_pairs(2, &[(&[1, 0], &[0, 1])]).unwrap());
        let u = left_null_space(&sm);
        assert_eq!(u.len(), 1);
        assert_eq!(u[0][0], u[0][1]);
    }
}
