//! Exact rational linear algebra: matrices over arbitrary-precision
//! rationals, Gaussian elimination, kernels, characteristic polynomials
//! (Faddeev-LeVerrier) and univariate rational polynomials.

use std::fmt;
use std::hash::Hash;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::group::{FamilyOracle, Group};
use crate::qnum::{format_rational, parse_rational};
use crate::{Error, Result};

/// Dense row-major matrix over `BigRational`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<BigRational>,
}

impl QMatrix {
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: vec![BigRational::zero(); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut m = Self::zero(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        Self::from_fn(n_rows, n_cols, |i, j| {
            BigRational::from_integer(rows[i][j].into())
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn require_square(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        Ok(self.n_rows)
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn transpose(&self) -> QMatrix {
        Self::from_fn(self.n_cols, self.n_rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        Self::from_fn(self.n_rows, self.n_cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        Self::from_fn(self.n_rows, self.n_cols, |i, j| &self[(i, j)] - &other[(i, j)])
    }

    pub fn neg(&self) -> QMatrix {
        Self::from_fn(self.n_rows, self.n_cols, |i, j| -self[(i, j)].clone())
    }

    pub fn scale(&self, c: &BigRational) -> QMatrix {
        Self::from_fn(self.n_rows, self.n_cols, |i, j| &self[(i, j)] * c)
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(
            self.n_cols, other.n_rows,
            "dimension mismatch in matrix product"
        );
        let mut out = Self::zero(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.n_cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.n_cols, v.len());
        (0..self.n_rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .fold(BigRational::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    pub fn trace(&self) -> BigRational {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self[(i, i)].clone())
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// Determinant by exact Gaussian elimination.
    pub fn det(&self) -> Result<BigRational> {
        let n = self.require_square()?;
        let mut m = self.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Ok(BigRational::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pv = m[(col, col)].clone();
            det *= &pv;
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &pv;
                for c in col..n {
                    let sub = &factor * &m[(col, c)];
                    m[(r, c)] -= sub;
                }
            }
        }
        Ok(det)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.n_cols {
            let ia = a * self.n_cols + c;
            let ib = b * self.n_cols + c;
            self.entries.swap(ia, ib);
        }
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<QMatrix> {
        let n = self.require_square()?;
        let mut m = self.clone();
        let mut inv = QMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Err(Error::SingularMatrix);
            };
            m.swap_rows(p, col);
            inv.swap_rows(p, col);
            let pv = m[(col, col)].clone();
            for c in 0..n {
                m[(col, c)] /= &pv;
                inv[(col, c)] /= &pv;
            }
            for r in 0..n {
                if r == col || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in 0..n {
                    let s1 = &factor * &m[(col, c)];
                    m[(r, c)] -= s1;
                    let s2 = &factor * &inv[(col, c)];
                    inv[(r, c)] -= s2;
                }
            }
        }
        Ok(inv)
    }

    pub fn pow(&self, e: i64) -> Result<QMatrix> {
        let n = self.require_square()?;
        let mut base = if e < 0 {
            self.inverse()?
        } else {
            self.clone()
        };
        let mut exp = e.unsigned_abs();
        let mut acc = QMatrix::identity(n);
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

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.n_cols {
            if row >= self.n_rows {
                break;
            }
            let Some(p) = (row..self.n_rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(p, row);
            let pv = self[(row, col)].clone();
            for c in col..self.n_cols {
                self[(row, c)] /= &pv;
            }
            for r in 0..self.n_rows {
                if r == row || self[(r, col)].is_zero() {
                    continue;
                }
                let factor = self[(r, col)].clone();
                for c in col..self.n_cols {
                    let s = &factor * &self[(row, c)];
                    self[(r, c)] -= s;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the null space, as column vectors.
    pub fn kernel_basis(&self) -> Vec<Vec<BigRational>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.n_cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![BigRational::zero(); self.n_cols];
            v[fc] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[(r, fc)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Coefficients of `det(xI - A)`, ascending degree, by Faddeev-LeVerrier.
    pub fn charpoly(&self) -> Result<UPoly> {
        let n = self.require_square()?;
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        let mut m = QMatrix::zero(n, n);
        for k in 1..=n {
            // M_k = A (M_{k-1} + c_{n-k+1} I), c_{n-k} = -tr(M_k)/k
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] += &coeffs[n - k + 1];
            }
            m = self.mul(&shifted);
            coeffs[n - k] = -(m.trace() / BigRational::from_integer(k.into()));
        }
        Ok(UPoly::new(coeffs))
    }

    /// The matrix is unitriangular when `M - I` is strictly upper triangular.
    pub fn is_unitriangular(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.n_rows;
        for i in 0..n {
            for j in 0..=i {
                let want = if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                };
                if self[(i, j)] != want {
                    return false;
                }
            }
        }
        true
    }

    /// Canonical string form `[[p/q,...],[...]]`.
    pub fn canonical_string(&self) -> String {
        let rows: Vec<String> = (0..self.n_rows)
            .map(|i| {
                let cells: Vec<String> = self.row(i).iter().map(format_rational).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!("[{}]", rows.join(","))
    }

    pub fn parse(s: &str) -> Result<QMatrix> {
        let s = s.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("matrix must be wrapped in [..]: `{s}`")))?;
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            rest = rest.trim_start_matches(',').trim();
            if rest.is_empty() {
                break;
            }
            let row_src = rest
                .strip_prefix('[')
                .ok_or_else(|| Error::Parse(format!("expected `[` starting a row in `{s}`")))?;
            let end = row_src
                .find(']')
                .ok_or_else(|| Error::Parse(format!("unterminated row in `{s}`")))?;
            let cells = &row_src[..end];
            let row: Result<Vec<BigRational>> = cells
                .split(',')
                .filter(|c| !c.trim().is_empty())
                .map(|c| parse_rational(c.trim()))
                .collect();
            rows.push(row?);
            rest = &row_src[end + 1..];
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty matrix".into()));
        }
        let n_cols = rows[0].len();
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        let n_rows = rows.len();
        Ok(QMatrix {
            n_rows,
            n_cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Maximum absolute value of the entries as `f64` (for renormalization).
    pub fn max_abs_f64(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| crate::qnum::to_f64(&e.abs()))
            .fold(0.0, f64::max)
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.entries.iter().map(crate::qnum::to_f64).collect()
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.entries[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.entries[i * self.n_cols + j]
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_string())
    }
}

/// Univariate polynomial over `BigRational`, coefficients ascending.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UPoly {
    pub coeffs: Vec<BigRational>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("nonempty")
    }

    pub fn derivative(&self) -> UPoly {
        if self.coeffs.len() <= 1 {
            return UPoly::zero();
        }
        UPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        UPoly::new(out)
    }

    pub fn divrem(&self, divisor: &UPoly) -> (UPoly, UPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return (UPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); self.degree() - dd + 1];
        let lead = divisor.leading().clone();
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let s = &c * dc;
                rem[i + j] -= s;
            }
            quot[i] = c;
        }
        (UPoly::new(quot), UPoly::new(rem))
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading().clone();
        UPoly::new(a.coeffs.iter().map(|c| c / &lead).collect())
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree_part(&self) -> UPoly {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        let (q, r) = self.divrem(&g);
        debug_assert!(r.is_zero());
        q
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_matrix(&self, m: &QMatrix) -> Result<QMatrix> {
        let n = m.require_square()?;
        let mut acc = QMatrix::zero(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m);
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        Ok(acc)
    }
}

/// Family oracle over invertible n-by-n rational matrices. Parsing rejects
/// singular matrices, so inverses inside the group operations are total.
#[derive(Clone, Copy, Debug)]
pub struct QMatrixFamily {
    n: usize,
}

impl QMatrixFamily {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Group for QMatrixFamily {
    type Elem = QMatrix;

    fn identity(&self) -> QMatrix {
        QMatrix::identity(self.n)
    }

    fn op(&self, x: &QMatrix, y: &QMatrix) -> QMatrix {
        x.mul(y)
    }

    fn inv(&self, x: &QMatrix) -> QMatrix {
        x.inverse().expect("family elements are invertible")
    }
}

impl FamilyOracle for QMatrixFamily {
    fn family_tag(&self) -> String {
        "qmatrix".into()
    }

    fn canonical(&self, e: &QMatrix) -> String {
        e.canonical_string()
    }

    fn parse_elem(&self, s: &str) -> Result<QMatrix> {
        let m = QMatrix::parse(s)?;
        if m.n_rows() != self.n || m.n_cols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} matrix, got {1}x{2}",
                self.n,
                m.n_rows(),
                m.n_cols()
            )));
        }
        if m.det()?.is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(m)
    }
}

/// Reads off the dimension of a canonical matrix string.
pub fn infer_dimension(target: &str) -> Result<usize> {
    let m = QMatrix::parse(target)?;
    Ok(m.require_square()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{rat, ratio};

    #[test]
    fn det_inverse_pow() {
        let m = QMatrix::from_i64_rows(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(m.det().unwrap(), rat(1));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMatrix::identity(2));
        assert_eq!(m.pow(-3).unwrap(), inv.pow(3).unwrap());
        let singular = QMatrix::from_i64_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(singular.det().unwrap(), rat(0));
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn charpoly_fibonacci_like() {
        let m = QMatrix::from_i64_rows(&[vec![2, 1], vec![1, 1]]);
        // x^2 - 3x + 1
        let p = m.charpoly().unwrap();
        assert_eq!(p.coeffs, vec![rat(1), rat(-3), rat(1)]);
        // Cayley-Hamilton
        assert_eq!(p.eval_matrix(&m).unwrap(), QMatrix::zero(2, 2));
    }

    #[test]
    fn kernel_of_singular() {
        let m = QMatrix::from_i64_rows(&[vec![0, 3], vec![0, 0]]);
        let ker = m.kernel_basis();
        assert_eq!(ker.len(), 1);
        assert_eq!(m.mul_vec(&ker[0]), vec![rat(0), rat(0)]);
    }

    #[test]
    fn parse_canonical_round_trip() {
        let m = QMatrix::from_fn(2, 2, |i, j| ratio((i * 2 + j + 1) as i64, 3));
        let s = m.canonical_string();
        assert_eq!(QMatrix::parse(&s).unwrap(), m);
        assert_eq!(s, "[[1/3,2/3],[1,4/3]]");
    }

    #[test]
    fn upoly_gcd_and_squarefree() {
        // p = (x-1)^2 (x+2)
        let p = UPoly::new(vec![rat(2), rat(-3), rat(0), rat(1)]);
        let sf = p.squarefree_part();
        // (x-1)(x+2) = x^2 + x - 2
        assert_eq!(sf.coeffs, vec![rat(-2), rat(1), rat(1)]);
    }
}
