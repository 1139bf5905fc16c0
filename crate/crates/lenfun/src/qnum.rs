//! Arbitrary-precision rational helpers: the canonical `p/q` string format
//! used in certificates and CLI output, and conversions to `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Formats a rational canonically: `p` when the denominator is 1, `p/q`
/// otherwise, sign on the numerator, always reduced.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p` or `p/q` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator `{num}`")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator `{den}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(n, d))
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Lossy conversion for reporting; exact values never round-trip through this.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of leading digits for extreme magnitudes.
        let n = q.numer().to_f64().unwrap_or(if q.numer().is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// A length evaluation: exact rational, or a certified floating bracket.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthValue {
    Exact(BigRational),
    Bracket { lo: f64, hi: f64 },
}

impl LengthValue {
    pub fn zero() -> Self {
        LengthValue::Exact(BigRational::zero())
    }

    pub fn is_finite(&self) -> bool {
        match self {
            LengthValue::Exact(_) => true,
            LengthValue::Bracket { lo, hi } => lo.is_finite() && hi.is_finite(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            LengthValue::Exact(q) => q.is_negative(),
            LengthValue::Bracket { hi, .. } => *hi < 0.0,
        }
    }

    /// Scales by a nonnegative integer factor |n|.
    pub fn scale(&self, n: u64) -> LengthValue {
        match self {
            LengthValue::Exact(q) => LengthValue::Exact(q * BigRational::from_integer(n.into())),
            LengthValue::Bracket { lo, hi } => LengthValue::Bracket {
                lo: lo * n as f64,
                hi: hi * n as f64,
            },
        }
    }

    pub fn add(&self, other: &LengthValue) -> LengthValue {
        match (self, other) {
            (LengthValue::Exact(a), LengthValue::Exact(b)) => LengthValue::Exact(a + b),
            _ => {
                let (alo, ahi) = self.as_bracket();
                let (blo, bhi) = other.as_bracket();
                LengthValue::Bracket {
                    lo: alo + blo,
                    hi: ahi + bhi,
                }
            }
        }
    }

    pub fn as_bracket(&self) -> (f64, f64) {
        match self {
            LengthValue::Exact(q) => {
                let v = to_f64(q);
                (v, v)
            }
            LengthValue::Bracket { lo, hi } => (*lo, *hi),
        }
    }

    /// Whether the two values are provably unequal: exact values compare
    /// exactly, brackets only report a violation when they are disjoint.
    pub fn provably_ne(&self, other: &LengthValue) -> bool {
        match (self, other) {
            (LengthValue::Exact(a), LengthValue::Exact(b)) => a != b,
            _ => {
                let (alo, ahi) = self.as_bracket();
                let (blo, bhi) = other.as_bracket();
                ahi < blo || bhi < alo
            }
        }
    }

    /// Whether `self <= other` provably fails.
    pub fn provably_gt(&self, other: &LengthValue) -> bool {
        match (self, other) {
            (LengthValue::Exact(a), LengthValue::Exact(b)) => a > b,
            _ => {
                let (alo, _) = self.as_bracket();
                let (_, bhi) = other.as_bracket();
                alo > bhi
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        for s in ["3", "-7/2", "0", "22/7"] {
            let q = parse_rational(s).unwrap();
            assert_eq!(format_rational(&q), s);
        }
        assert_eq!(format_rational(&parse_rational("4/2").unwrap()), "2");
        assert_eq!(format_rational(&parse_rational("-3/-6").unwrap()), "1/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn bracket_comparisons() {
        let a = LengthValue::Exact(ratio(1, 3));
        let b = LengthValue::Bracket { lo: 0.3, hi: 0.35 };
        assert!(!a.provably_ne(&b));
        let c = LengthValue::Bracket { lo: 0.5, hi: 0.6 };
        assert!(a.provably_ne(&c));
        assert!(c.provably_gt(&a));
        assert!(!b.provably_gt(&a));
    }
}
