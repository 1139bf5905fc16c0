//! Exact arithmetic for the integer Heisenberg group
//! `H = <a, b, c | aba^-1 b^-1 = c, ac = ca, bc = cb>`,
//! conjugation witnesses, and the polyhedral cone of its length functions.
//!
//! Elements are kept in the normal form `a^m b^n c^k`. The multiplication
//! law is pinned against the faithful representation by 3x3 upper
//! unitriangular integer matrices (`a` with the above-diagonal 1 in position
//! (1,2), `b` in (2,3), `c` in (1,3)): `a^m b^n c^k` corresponds to
//!
//! ```text
//! [ 1  m  mn+k ]
//! [ 0  1   n   ]
//! [ 0  0   1   ]
//! ```
//!
//! which gives `(m1,n1,k1) * (m2,n2,k2) = (m1+m2, n1+n2, k1+k2 - m2*n1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cert::{AffineLinIneq, AffineRat, Certificate, Conclusion, Step, TemplateInt};
use crate::group::{FamilyOracle, Group};
use crate::qnum::format_rational;
use crate::{Error, Result};

/// Normal form `a^m b^n c^k`; two elements are equal iff the triples agree.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HeisenbergElement {
    pub m: BigInt,
    pub n: BigInt,
    pub k: BigInt,
}

impl HeisenbergElement {
    pub fn new(m: impl Into<BigInt>, n: impl Into<BigInt>, k: impl Into<BigInt>) -> Self {
        Self {
            m: m.into(),
            n: n.into(),
            k: k.into(),
        }
    }

    pub fn identity() -> Self {
        Self::new(0, 0, 0)
    }

    pub fn gen_a() -> Self {
        Self::new(1, 0, 0)
    }

    pub fn gen_b() -> Self {
        Self::new(0, 1, 0)
    }

    pub fn gen_c() -> Self {
        Self::new(0, 0, 1)
    }

    /// Image in the 3x3 unitriangular representation, row-major
    /// `[x01, x02, x12]` for the three above-diagonal entries.
    pub fn matrix(&self) -> [BigInt; 3] {
        [
            self.m.clone(),
            &self.m * &self.n + &self.k,
            self.n.clone(),
        ]
    }

    /// Recovers the normal form from above-diagonal entries.
    pub fn from_matrix(x01: BigInt, x02: BigInt, x12: BigInt) -> Self {
        let k = &x02 - &x01 * &x12;
        Self {
            m: x01,
            n: x12,
            k,
        }
    }
}

impl fmt::Display for HeisenbergElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a^{} b^{} c^{}", self.m, self.n, self.k)
    }
}

/// Multiplies two 3x3 unitriangular matrices given as above-diagonal triples.
pub fn unitri_mul(x: &[BigInt; 3], y: &[BigInt; 3]) -> [BigInt; 3] {
    [
        &x[0] + &y[0],
        &x[1] + &y[1] + &x[0] * &y[2],
        &x[2] + &y[2],
    ]
}

/// The Heisenberg group as a family oracle.
#[derive(Clone, Copy, Debug, Default)]
pub struct Heisenberg;

impl Group for Heisenberg {
    type Elem = HeisenbergElement;

    fn identity(&self) -> HeisenbergElement {
        HeisenbergElement::identity()
    }

    fn op(&self, x: &HeisenbergElement, y: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement {
            m: &x.m + &y.m,
            n: &x.n + &y.n,
            k: &x.k + &y.k - &y.m * &x.n,
        }
    }

    fn inv(&self, x: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement {
            m: -&x.m,
            n: -&x.n,
            k: -&x.k - &x.m * &x.n,
        }
    }
}

impl FamilyOracle for Heisenberg {
    fn family_tag(&self) -> String {
        "heisenberg".into()
    }

    fn canonical(&self, e: &HeisenbergElement) -> String {
        e.to_string()
    }

    fn parse_elem(&self, s: &str) -> Result<HeisenbergElement> {
        parse_heisenberg(s)
    }
}

/// Parses `a^m b^n c^k` with decimal integer exponents.
pub fn parse_heisenberg(s: &str) -> Result<HeisenbergElement> {
    let mut exps: [Option<BigInt>; 3] = [None, None, None];
    for part in s.split_whitespace() {
        let (gen, exp) = part
            .split_once('^')
            .ok_or_else(|| Error::Parse(format!("expected gen^exp, got `{part}`")))?;
        let idx = match gen {
            "a" => 0,
            "b" => 1,
            "c" => 2,
            _ => return Err(Error::Parse(format!("unknown generator `{gen}`"))),
        };
        if exps[idx].is_some() {
            return Err(Error::Parse(format!("repeated generator `{gen}` in `{s}`")));
        }
        let e: BigInt = exp
            .parse()
            .map_err(|_| Error::Parse(format!("bad exponent `{exp}`")))?;
        exps[idx] = Some(e);
    }
    let [m, n, k] = exps;
    match (m, n, k) {
        (Some(m), Some(n), Some(k)) => Ok(HeisenbergElement { m, n, k }),
        _ => Err(Error::Parse(format!(
            "element `{s}` must name all of a, b, c"
        ))),
    }
}

/// `[a^n, b^m]`, computed from the group law. Equals `c^(n*m)`.
pub fn commutator_power(n: i64, m: i64) -> HeisenbergElement {
    let g = Heisenberg;
    let an = g.pow(&HeisenbergElement::gen_a(), n);
    let bm = g.pow(&HeisenbergElement::gen_b(), m);
    g.commutator(&an, &bm)
}

/// Finds `g = a^t b^-s` with `m*s + n*t = k`, so that
/// `g (a^m b^n) g^-1 = a^m b^n c^k`. The witness is verified exactly before
/// being returned; it is not unique (any Bezout pair works).
pub fn conjugator_witness(m: &BigInt, n: &BigInt, k: &BigInt) -> Result<HeisenbergElement> {
    let g = Heisenberg;
    let ext = m.extended_gcd(n);
    // ext.gcd = ext.x * m + ext.y * n
    if ext.gcd.is_zero() {
        if !k.is_zero() {
            return Err(Error::DivisibilityObstruction {
                m: m.to_string(),
                n: n.to_string(),
                k: k.to_string(),
            });
        }
        return Ok(HeisenbergElement::identity());
    }
    let (q, r) = k.div_rem(&ext.gcd);
    if !r.is_zero() {
        return Err(Error::DivisibilityObstruction {
            m: m.to_string(),
            n: n.to_string(),
            k: k.to_string(),
        });
    }
    let s = &ext.x * &q;
    let t = &ext.y * &q;
    let witness = HeisenbergElement {
        m: t,
        n: -s,
        k: BigInt::zero(),
    };
    let base = HeisenbergElement {
        m: m.clone(),
        n: n.clone(),
        k: BigInt::zero(),
    };
    let expected = HeisenbergElement {
        m: m.clone(),
        n: n.clone(),
        k: k.clone(),
    };
    let got = g.conj(&witness, &base);
    debug_assert_eq!(got, expected);
    if got != expected {
        return Err(Error::Invalid(format!(
            "conjugator self-check failed: got {got}, expected {expected}"
        )));
    }
    Ok(witness)
}

/// A coprime class `+-(p, q)`, stored with the first nonzero coordinate
/// positive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CoprimeClass {
    pub p: BigInt,
    pub q: BigInt,
}

impl CoprimeClass {
    /// Canonicalizes an arbitrary nonzero integer pair: divides by the gcd
    /// and fixes the sign. Returns the class together with the gcd.
    pub fn from_pair(m: &BigInt, n: &BigInt) -> Option<(Self, BigInt)> {
        if m.is_zero() && n.is_zero() {
            return None;
        }
        let d = m.gcd(n);
        let mut p = m / &d;
        let mut q = n / &d;
        let flip = if !p.is_zero() {
            p.is_negative()
        } else {
            q.is_negative()
        };
        if flip {
            p = -p;
            q = -q;
        }
        Some((CoprimeClass { p, q }, d))
    }
}

impl fmt::Display for CoprimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Nonnegative coefficients on coprime classes; evaluates the associated
/// length function on the cone classification of the Heisenberg group.
#[derive(Clone, Debug, Default)]
pub struct ConeCoefficients {
    coeffs: BTreeMap<CoprimeClass, BigRational>,
}

impl ConeCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a coefficient; the key pair is canonicalized, the value must
    /// be nonnegative and the pair nonzero.
    pub fn insert(&mut self, m: i64, n: i64, value: BigRational) -> Result<()> {
        if value.is_negative() {
            return Err(Error::Invalid(format!(
                "cone coefficient must be >= 0, got {}",
                format_rational(&value)
            )));
        }
        let (class, d) = CoprimeClass::from_pair(&BigInt::from(m), &BigInt::from(n))
            .ok_or_else(|| Error::Invalid("cone class (0,0) is not allowed".into()))?;
        if !d.is_one() {
            return Err(Error::Invalid(format!(
                "({m},{n}) is not coprime (gcd {d})"
            )));
        }
        self.coeffs.insert(class, value);
        Ok(())
    }

    pub fn get(&self, class: &CoprimeClass) -> BigRational {
        self.coeffs.get(class).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CoprimeClass, &BigRational)> {
        self.coeffs.iter()
    }
}

/// `l(a^m b^n c^k) = gcd(m,n) * a_s` where `s` is the class of the reduced
/// pair; zero on the center. Independent of `k`.
pub fn cone_length(coeffs: &ConeCoefficients, x: &HeisenbergElement) -> BigRational {
    match CoprimeClass::from_pair(&x.m, &x.n) {
        None => BigRational::zero(),
        Some((class, d)) => BigRational::from_integer(d) * coeffs.get(&class),
    }
}

/// Certificate that every length function vanishes on the center `c`.
///
/// The derivation replays, per parameter `k`: `a` is conjugate to `a c^k`
/// (witness `b^-k`), `c^k = a^-1 (a c^k)` with commuting factors, and
/// homogeneity on `c`, giving `k l(c) <= 2 l(a)`. Sampling `k = 2^0..2^B`
/// yields the certified bound `l(c) <= 2 l(a) / 2^B` and the flagged
/// limit-zero conclusion.
pub fn center_vanishing_certificate(budget_exponent: u32) -> Certificate {
    let samples: Vec<i64> = (0..=budget_exponent).map(|j| 1i64 << j).collect();
    let a = "a^1 b^0 c^0";
    let a_inv = "a^-1 b^0 c^0";
    let c = "a^0 b^0 c^1";
    let steps = vec![
        Step::ConjInvariance {
            g: a.into(),
            witness: "a^0 b^{-k} c^0".into(),
            conjugate: "a^1 b^0 c^{k}".into(),
        },
        Step::Homogeneity {
            g: a.into(),
            n: TemplateInt::constant(-1),
        },
        Step::CommSubadd {
            a: a_inv.into(),
            b: "a^1 b^0 c^{k}".into(),
        },
        Step::Homogeneity {
            g: c.into(),
            n: TemplateInt::linear(1, 0),
        },
        Step::LinearArith {
            multipliers: vec![
                (4, BigRational::one()),
                (0, BigRational::one()),
                (2, BigRational::one()),
                (6, BigRational::one()),
            ],
            result: AffineLinIneq {
                lhs: vec![(c.into(), AffineRat::linear(1))],
                rhs: vec![(a.into(), AffineRat::constant(2))],
            },
        },
    ];
    let per_sample = AffineLinIneq {
        lhs: vec![(c.into(), AffineRat::linear(1))],
        rhs: vec![(a.into(), AffineRat::constant(2))],
    };
    Certificate {
        family: "heisenberg".into(),
        params: None,
        target: c.into(),
        steps: vec![Step::ArchimedeanFamily {
            samples,
            steps,
            per_sample,
        }],
        conclusion: Conclusion::LimitZero,
        notes: vec![
            "center of the Heisenberg group vanishes for every length function".into(),
        ],
    }
}

/// Length-function evaluator backed by [`cone_length`] for the axiom checker.
pub fn cone_length_spec(
    coeffs: ConeCoefficients,
) -> crate::axioms::LengthFunctionSpec<HeisenbergElement> {
    crate::axioms::LengthFunctionSpec::exact("heisenberg", move |x: &HeisenbergElement| {
        Ok(cone_length(&coeffs, x))
    })
}

/// Abelianization `H -> Z^2`, `a^m b^n c^k -> (m, n)`.
pub fn abelianize(x: &HeisenbergElement) -> Vec<BigInt> {
    vec![x.m.clone(), x.n.clone()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h() -> Heisenberg {
        Heisenberg
    }

    #[test]
    fn generators_multiply_per_presentation() {
        let g = h();
        let ab = g.op(&HeisenbergElement::gen_a(), &HeisenbergElement::gen_b());
        assert_eq!(ab, HeisenbergElement::new(1, 1, 0));
        let ba = g.op(&HeisenbergElement::gen_b(), &HeisenbergElement::gen_a());
        assert_eq!(ba, HeisenbergElement::new(1, 1, -1));
        // aba^-1b^-1 = c
        assert_eq!(
            g.commutator(&HeisenbergElement::gen_a(), &HeisenbergElement::gen_b()),
            HeisenbergElement::gen_c()
        );
    }

    #[test]
    fn pow_matches_matrix_oracle() {
        let g = h();
        let x = HeisenbergElement::new(1, 1, 0);
        let cube = g.pow(&x, 3);
        assert_eq!((cube.m.clone(), cube.n.clone()), (3.into(), 3.into()));
        // the matrix representation is authoritative for the c-exponent
        let mx = x.matrix();
        let m3 = unitri_mul(&unitri_mul(&mx, &mx), &mx);
        assert_eq!(cube.matrix(), m3);
        assert_eq!(cube, HeisenbergElement::from_matrix(m3[0].clone(), m3[1].clone(), m3[2].clone()));
    }

    #[test]
    fn commutator_power_small_grid() {
        for n in -12..=12i64 {
            for m in -12..=12i64 {
                assert_eq!(
                    commutator_power(n, m),
                    HeisenbergElement::new(0, 0, n * m),
                    "[a^{n}, b^{m}]"
                );
            }
        }
    }

    #[test]
    fn conjugator_witness_examples() {
        let g = h();
        // (1,0,5): g = b^-5 and b^-5 a b^5 = a c^5
        let w = conjugator_witness(&1.into(), &0.into(), &5.into()).unwrap();
        assert_eq!(w, HeisenbergElement::new(0, -5, 0));
        assert_eq!(
            g.conj(&w, &HeisenbergElement::gen_a()),
            HeisenbergElement::new(1, 0, 5)
        );
        // (2,3,1): some a^t b^-s with 2s + 3t = 1
        let w = conjugator_witness(&2.into(), &3.into(), &1.into()).unwrap();
        let base = HeisenbergElement::new(2, 3, 0);
        assert_eq!(g.conj(&w, &base), HeisenbergElement::new(2, 3, 1));
        // (2,4,3): gcd 2 does not divide 3
        assert!(matches!(
            conjugator_witness(&2.into(), &4.into(), &3.into()),
            Err(Error::DivisibilityObstruction { .. })
        ));
    }

    #[test]
    fn cone_length_examples() {
        let mut coeffs = ConeCoefficients::new();
        coeffs.insert(1, 0, BigRational::one()).unwrap();
        let l = |m: i64, n: i64, k: i64| cone_length(&coeffs, &HeisenbergElement::new(m, n, k));
        assert_eq!(l(4, 0, 7), BigRational::from_integer(4.into()));
        assert_eq!(l(0, 0, 9), BigRational::zero());
        assert_eq!(l(2, 2, 0), BigRational::zero());
        // negative direction folds onto the same class
        assert_eq!(l(-4, 0, 2), BigRational::from_integer(4.into()));
    }

    #[test]
    fn cone_coefficients_reject_bad_keys() {
        let mut coeffs = ConeCoefficients::new();
        assert!(coeffs.insert(2, 4, BigRational::one()).is_err());
        assert!(coeffs.insert(0, 0, BigRational::one()).is_err());
        assert!(coeffs
            .insert(1, 0, BigRational::from_integer((-1).into()))
            .is_err());
    }

    #[test]
    fn parse_round_trip() {
        let e = HeisenbergElement::new(-3, 5, 12);
        assert_eq!(parse_heisenberg(&e.to_string()).unwrap(), e);
        assert!(parse_heisenberg("a^1 b^2").is_err());
        assert!(parse_heisenberg("a^1 a^2 c^0").is_err());
    }

    proptest! {
        #[test]
        fn mul_matches_matrix_representation(
            m1 in -1_000_000i64..=1_000_000, n1 in -1_000_000i64..=1_000_000,
            k1 in -1_000_000i64..=1_000_000, m2 in -1_000_000i64..=1_000_000,
            n2 in -1_000_000i64..=1_000_000, k2 in -1_000_000i64..=1_000_000,
        ) {
            let x = HeisenbergElement::new(m1, n1, k1);
            let y = HeisenbergElement::new(m2, n2, k2);
            let z = h().op(&x, &y);
            prop_assert_eq!(z.matrix(), unitri_mul(&x.matrix(), &y.matrix()));
        }

        #[test]
        fn inverse_and_associativity(
            m1 in -999i64..=999, n1 in -999i64..=999, k1 in -999i64..=999,
            m2 in -999i64..=999, n2 in -999i64..=999, k2 in -999i64..=999,
            m3 in -999i64..=999, n3 in -999i64..=999, k3 in -999i64..=999,
        ) {
            let g = h();
            let x = HeisenbergElement::new(m1, n1, k1);
            let y = HeisenbergElement::new(m2, n2, k2);
            let z = HeisenbergElement::new(m3, n3, k3);
            prop_assert_eq!(g.op(&x, &g.inv(&x)), HeisenbergElement::identity());
            prop_assert_eq!(g.op(&g.op(&x, &y), &z), g.op(&x, &g.op(&y, &z)));
        }

        #[test]
        fn conjugator_witness_fuzz(
            m in -100_000i64..=100_000,
            n in -100_000i64..=100_000,
            k in -100_000i64..=100_000,
        ) {
            let (bm, bn, bk) = (BigInt::from(m), BigInt::from(n), BigInt::from(k));
            match conjugator_witness(&bm, &bn, &bk) {
                Ok(w) => {
                    let g = h();
                    let base = HeisenbergElement { m: bm.clone(), n: bn.clone(), k: BigInt::zero() };
                    prop_assert_eq!(
                        g.conj(&w, &base),
                        HeisenbergElement { m: bm, n: bn, k: bk }
                    );
                }
                Err(Error::DivisibilityObstruction { .. }) => {
                    let d = bm.gcd(&bn);
                    prop_assert!(d.is_zero() && !bk.is_zero() || !(&bk % &d).is_zero());
                }
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }
    }
}
