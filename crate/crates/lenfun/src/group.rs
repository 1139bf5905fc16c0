//! Group-family abstraction used by the axiom checker, the word-metric BFS
//! and the certificate verifier.
//!
//! A family value carries the group *parameters* (e.g. the acting matrix of
//! an abelian-by-cyclic group); elements are plain immutable values. All
//! arithmetic is exact.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::Result;

/// Exact group arithmetic over an associated element type.
pub trait Group {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn op(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn inv(&self, x: &Self::Elem) -> Self::Elem;

    /// Square-and-multiply power with integer exponent.
    fn pow(&self, x: &Self::Elem, n: i64) -> Self::Elem {
        let mut base = if n < 0 { self.inv(x) } else { x.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.op(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.op(&base, &base);
            }
        }
        acc
    }

    /// Power with arbitrary-precision exponent.
    fn pow_big(&self, x: &Self::Elem, n: &BigInt) -> Self::Elem {
        let mut base = if n.is_negative() {
            self.inv(x)
        } else {
            x.clone()
        };
        let mut e = n.abs();
        let mut acc = self.identity();
        let one = BigInt::from(1);
        while !e.is_zero() {
            if (&e & &one) == one {
                acc = self.op(&acc, &base);
            }
            e >>= 1;
            if !e.is_zero() {
                base = self.op(&base, &base);
            }
        }
        acc
    }

    /// `h g h^-1`.
    fn conj(&self, h: &Self::Elem, g: &Self::Elem) -> Self::Elem {
        self.op(&self.op(h, g), &self.inv(h))
    }

    /// `x y x^-1 y^-1`.
    fn commutator(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        self.op(&self.op(x, y), &self.op(&self.inv(x), &self.inv(y)))
    }

    fn commutes(&self, x: &Self::Elem, y: &Self::Elem) -> bool {
        self.op(x, y) == self.op(y, x)
    }
}

/// A group family that can name itself and round-trip elements through the
/// canonical string form used in certificates and CLI output.
pub trait FamilyOracle: Group + Sync {
    /// Stable family identifier, e.g. `"heisenberg"`.
    fn family_tag(&self) -> String;

    /// Canonical normal-form string of an element. Equal elements produce
    /// equal strings; this keys the formal symbols of the certificate engine.
    fn canonical(&self, e: &Self::Elem) -> String;

    fn parse_elem(&self, s: &str) -> Result<Self::Elem>;
}
