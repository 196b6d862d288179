//! Small exact linear algebra over arbitrary-precision rationals.
//!
//! Digit encodings, quadrature nodes, and fixed anchors are exact rational
//! objects; floating point enters only when a value is finally fed to a
//! trigonometric evaluation. Matrices here are tiny (dimension ≤ 4), so
//! Gauss–Jordan elimination with exact pivots is entirely adequate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational p/q.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Fractional part in [0, 1): r − ⌊r⌋.
pub fn frac(r: &Rat) -> Rat {
    r - r.floor()
}

/// Nearest double; exact until the parts exceed f64 range (far beyond use here).
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational within f64 range")
}

/// A point with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatVec(pub Vec<Rat>);

impl RatVec {
    pub fn zero(dim: usize) -> Self {
        RatVec(vec![Rat::zero(); dim])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RatVec(v.iter().map(|&c| rat_int(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        RatVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        RatVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Componentwise fractional part — the exact mod-1 reduction.
    pub fn frac(&self) -> RatVec {
        RatVec(self.0.iter().map(frac).collect())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    /// Dot product with an integer vector, exact.
    pub fn dot_ints(&self, ints: &[i64]) -> Rat {
        self.0
            .iter()
            .zip(ints)
            .map(|(a, &k)| a * rat_int(k))
            .sum()
    }

    /// Serialization form: components as "p/q" joined by commas.
    pub fn to_fraction_string(&self) -> String {
        self.0
            .iter()
            .map(|r| format!("{}/{}", r.numer(), r.denom()))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parse the "p/q,p/q,…" form produced by [`RatVec::to_fraction_string`];
    /// bare integers are accepted as well.
    pub fn parse(s: &str) -> Option<RatVec> {
        let mut comps = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let r = match part.split_once('/') {
                Some((p, q)) => Rat::new(p.trim().parse().ok()?, q.trim().parse().ok()?),
                None => Rat::from_integer(part.parse().ok()?),
            };
            comps.push(r);
        }
        if comps.is_empty() {
            None
        } else {
            Some(RatVec(comps))
        }
    }
}

/// Dense square rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMat {
    pub rows: Vec<Vec<Rat>>,
}

impl RatMat {
    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        RatMat { rows }
    }

    pub fn from_ints(entries: &[Vec<i64>]) -> Self {
        RatMat {
            rows: entries
                .iter()
                .map(|row| row.iter().map(|&c| rat_int(c)).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn mul_vec(&self, v: &RatVec) -> RatVec {
        RatVec(
            self.rows
                .iter()
                .map(|row| row.iter().zip(&v.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn mul_mat(&self, other: &RatMat) -> RatMat {
        let d = self.dim();
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|k| &self.rows[i][k] * &other.rows[k][j]).sum())
                    .collect()
            })
            .collect();
        RatMat { rows }
    }

    pub fn sub(&self, other: &RatMat) -> RatMat {
        RatMat {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a - b).collect())
                .collect(),
        }
    }

    /// Exact inverse by Gauss–Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<RatMat> {
        let d = self.dim();
        let mut a = self.rows.clone();
        let mut inv = RatMat::identity(d).rows;
        for col in 0..d {
            let pivot = (col..d).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..d {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for r in 0..d {
                if r != col && !a[r][col].is_zero() {
                    let factor = a[r][col].clone();
                    for j in 0..d {
                        let t = &a[col][j] * &factor;
                        a[r][j] = &a[r][j] - t;
                        let t = &inv[col][j] * &factor;
                        inv[r][j] = &inv[r][j] - t;
                    }
                }
            }
        }
        Some(RatMat { rows: inv })
    }

    /// k-th power by repeated multiplication (k is small everywhere we call this).
    pub fn pow(&self, k: usize) -> RatMat {
        let mut out = RatMat::identity(self.dim());
        for _ in 0..k {
            out = out.mul_mat(self);
        }
        out
    }

    /// Least common multiple of all entry denominators.
    pub fn common_denominator(&self) -> BigInt {
        let mut lcm = BigInt::one();
        for row in &self.rows {
            for e in row {
                lcm = num::integer::lcm(lcm, e.denom().abs());
            }
        }
        lcm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_reduces_into_unit_interval() {
        assert_eq!(frac(&rat(7, 3)), rat(1, 3));
        assert_eq!(frac(&rat(-1, 4)), rat(3, 4));
        assert_eq!(frac(&rat_int(5)), Rat::zero());
    }

    #[test]
    fn inverse_of_invertible_matrix_round_trips() {
        let m = RatMat::from_ints(&[vec![2, 1], vec![0, 3]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul_mat(&inv), RatMat::identity(2));
        assert_eq!(inv.mul_mat(&m), RatMat::identity(2));
    }

    #[test]
    fn inverse_of_singular_matrix_is_none() {
        let m = RatMat::from_ints(&[vec![1, 2], vec![2, 4]]);
        assert!(m.inverse().is_none());
    }

    #[test]
    fn fraction_string_round_trips() {
        let v = RatVec(vec![rat(8, 3), rat_int(0), rat(-1, 2)]);
        let s = v.to_fraction_string();
        assert_eq!(s, "8/3,0/1,-1/2");
        assert_eq!(RatVec::parse(&s).unwrap(), v);
    }

    #[test]
    fn common_denominator_is_lcm() {
        let m = RatMat {
            rows: vec![vec![rat(1, 4), rat(1, 6)], vec![rat_int(1), rat(2, 3)]],
        };
        assert_eq!(m.common_denominator(), BigInt::from(12));
    }
}
