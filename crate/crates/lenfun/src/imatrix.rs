//! Dense integer matrices with exact determinant (Bareiss), unimodular
//! inverse and characteristic polynomial. Backs the acting matrices of
//! abelian-by-cyclic groups and the exponent matrices of monomial maps.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::qmatrix::QMatrix;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IMatrix {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "matrix rows must be square".into(),
            ));
        }
        let mut m = Self::zero(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(*v);
            }
        }
        Ok(m)
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "matrix rows must be square".into(),
            ));
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn neg(&self) -> IMatrix {
        IMatrix {
            n: self.n,
            entries: self.entries.iter().map(|e| -e).collect(),
        }
    }

    pub fn mul(&self, other: &IMatrix) -> IMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = IMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| &self[(i, j)] * &v[j])
                    .fold(BigInt::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    pub fn trace(&self) -> BigInt {
        (0..self.n)
            .map(|i| self[(i, i)].clone())
            .fold(BigInt::zero(), |acc, x| acc + x)
    }

    /// Fraction-free Bareiss determinant.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.entries.clone();
        let at = |m: &Vec<BigInt>, i: usize, j: usize| m[i * n + j].clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if at(&m, k, k).is_zero() {
                let Some(swap) = (k + 1..n).find(|&r| !at(&m, r, k).is_zero()) else {
                    return BigInt::zero();
                };
                for c in 0..n {
                    m.swap(k * n + c, swap * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = at(&m, i, j) * at(&m, k, k) - at(&m, i, k) * at(&m, k, j);
                    m[i * n + j] = num / &prev;
                }
                m[i * n + k] = BigInt::zero();
            }
            prev = at(&m, k, k);
        }
        sign * at(&m, n - 1, n - 1)
    }

    pub fn is_unimodular(&self) -> bool {
        let d = self.det();
        d.is_one() || d == BigInt::from(-1)
    }

    /// Exact inverse for unimodular matrices (integer adjugate over det).
    pub fn inverse_unimodular(&self) -> Result<IMatrix> {
        let d = self.det();
        if !(d.is_one() || d == BigInt::from(-1)) {
            return Err(Error::BadDeterminant {
                det: d.to_string(),
                expected: "+-1".into(),
            });
        }
        let q = self.to_qmatrix().inverse()?;
        let mut out = IMatrix::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let e = &q[(i, j)];
                debug_assert!(e.denom().is_one());
                out[(i, j)] = e.numer().clone();
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: i64) -> Result<IMatrix> {
        let mut base = if e < 0 {
            self.inverse_unimodular()?
        } else {
            self.clone()
        };
        let mut exp = e.unsigned_abs();
        let mut acc = IMatrix::identity(self.n);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    pub fn to_qmatrix(&self) -> QMatrix {
        QMatrix::from_fn(self.n, self.n, |i, j| {
            BigRational::from_integer(self[(i, j)].clone())
        })
    }

    /// Coefficients of `det(xI - A)`, ascending; exact integers.
    pub fn charpoly_int(&self) -> Result<Vec<BigInt>> {
        let p = self.to_qmatrix().charpoly()?;
        p.coeffs
            .iter()
            .map(|c| {
                if c.denom().is_one() {
                    Ok(c.numer().clone())
                } else {
                    Err(Error::Invalid(
                        "integer matrix has non-integer characteristic coefficients".into(),
                    ))
                }
            })
            .collect()
    }

    /// Row-major JSON array (integers as JSON numbers when they fit,
    /// strings otherwise).
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..self.n)
            .map(|i| {
                let row: Vec<serde_json::Value> = (0..self.n)
                    .map(|j| {
                        let e = &self[(i, j)];
                        match i64::try_from(e) {
                            Ok(v) => serde_json::Value::from(v),
                            Err(_) => serde_json::Value::from(e.to_string()),
                        }
                    })
                    .collect();
                serde_json::Value::from(row)
            })
            .collect();
        serde_json::Value::from(rows)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<IMatrix> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix JSON must be an array of rows".into()))?;
        let parse_cell = |c: &serde_json::Value| -> Result<BigInt> {
            if let Some(i) = c.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(s) = c.as_str() {
                s.parse()
                    .map_err(|_| Error::Parse(format!("bad integer `{s}`")))
            } else {
                Err(Error::Parse(format!("bad matrix cell `{c}`")))
            }
        };
        let big_rows: Result<Vec<Vec<BigInt>>> = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(parse_cell)
                    .collect()
            })
            .collect();
        IMatrix::from_big_rows(big_rows?)
    }
}

impl std::ops::Index<(usize, usize)> for IMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.n + j]
    }
}

impl fmt::Display for IMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let cells: Vec<String> = (0..self.n).map(|j| self[(i, j)].to_string()).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse() {
        let a = IMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(a.det(), BigInt::one());
        let inv = a.inverse_unimodular().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert_eq!(a.pow(-2).unwrap(), inv.mul(&inv));

        let b = IMatrix::from_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]).unwrap();
        assert_eq!(b.det(), BigInt::from(-3));
        assert!(b.inverse_unimodular().is_err());
    }

    #[test]
    fn charpoly_int_matches() {
        let a = IMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let p = a.charpoly_int().unwrap();
        assert_eq!(p, vec![BigInt::one(), BigInt::from(-3), BigInt::one()]);
    }

    #[test]
    fn json_round_trip() {
        let a = IMatrix::from_rows(&[vec![-2, -9], vec![1, 4]]).unwrap();
        let v = a.to_json();
        assert_eq!(IMatrix::from_json(&v).unwrap(), a);
    }
}
