//! Vanishing-certificate language.
//!
//! A certificate is a serialized derivation over formal symbols `l(g)`, keyed
//! by the family's canonical normal form of `g`. Each step carries a side
//! condition checked by exact group arithmetic and emits one or two linear
//! inequalities; a `LinearArith` step admits a nonnegative rational
//! combination of previously admitted inequalities. The conclusion is
//! entailed syntactically from the admitted set together with the ambient
//! constraint `l >= 0`.
//!
//! Steps inside an `ArchimedeanFamily` block are templates in an integer
//! parameter `k`: element strings may contain affine placeholders such as
//! `{k}`, `{-k}` or `{3k+1}`, and coefficients may carry a per-`k` part. The
//! verifier instantiates each sample, replays the instance exactly, and only
//! then admits the scaled finite bound.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::qnum::{format_rational, parse_rational};
use crate::{Error, Result};

/// Reserved symbol naming the constant term of a linear form.
pub const CONST_SYMBOL: &str = "1";

// ---------------------------------------------------------------------------
// Affine quantities in the family parameter k
// ---------------------------------------------------------------------------

/// Integer affine form `per_k * k + constant`, arbitrary precision.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TemplateInt {
    pub per_k: BigInt,
    pub constant: BigInt,
}

impl TemplateInt {
    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self {
            per_k: BigInt::zero(),
            constant: c.into(),
        }
    }

    pub fn linear(per_k: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Self {
            per_k: per_k.into(),
            constant: c.into(),
        }
    }

    pub fn instantiate(&self, k: Option<i64>) -> Result<BigInt> {
        match k {
            Some(k) => Ok(&self.per_k * BigInt::from(k) + &self.constant),
            None if self.per_k.is_zero() => Ok(self.constant.clone()),
            None => Err(Error::Parse(
                "parameter `k` used outside an archimedean family".into(),
            )),
        }
    }
}

impl fmt::Display for TemplateInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_affine_int(&self.per_k, &self.constant))
    }
}

impl From<TemplateInt> for String {
    fn from(t: TemplateInt) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TemplateInt {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        let (per_k, constant) = parse_affine_int(&s)?;
        Ok(TemplateInt { per_k, constant })
    }
}

fn format_affine_int(per_k: &BigInt, constant: &BigInt) -> String {
    if per_k.is_zero() {
        return constant.to_string();
    }
    let mut s = if per_k.is_one() {
        "k".to_string()
    } else if *per_k == BigInt::from(-1) {
        "-k".to_string()
    } else {
        format!("{per_k}k")
    };
    if constant.is_positive() {
        s.push('+');
        s.push_str(&constant.to_string());
    } else if constant.is_negative() {
        s.push_str(&constant.to_string());
    }
    s
}

/// Parses `3k+1`, `-k`, `k-2`, `7`, ... into `(per_k, constant)`.
pub fn parse_affine_int(s: &str) -> Result<(BigInt, BigInt)> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty affine expression".into()));
    }
    let mut per_k = BigInt::zero();
    let mut constant = BigInt::zero();
    // split into signed terms
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            terms.push(std::mem::take(&mut cur));
            if ch == '-' {
                cur.push('-');
            }
        } else {
            cur.push(ch);
        }
    }
    terms.push(cur);
    for t in terms {
        let t = t.trim();
        if t.is_empty() {
            return Err(Error::Parse(format!("bad affine expression `{s}`")));
        }
        if let Some(coef) = t.strip_suffix('k') {
            let c = match coef {
                "" | "+" => BigInt::one(),
                "-" => -BigInt::one(),
                other => other
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient `{other}` in `{s}`")))?,
            };
            per_k += c;
        } else {
            let c: BigInt = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad constant `{t}` in `{s}`")))?;
            constant += c;
        }
    }
    Ok((per_k, constant))
}

/// Rational affine form `per_k * k + constant`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "AffineRatRepr", into = "AffineRatRepr")]
pub struct AffineRat {
    pub per_k: BigRational,
    pub constant: BigRational,
}

#[derive(Serialize, Deserialize)]
struct AffineRatRepr {
    #[serde(default = "zero_str")]
    k: String,
    #[serde(default = "zero_str", rename = "const")]
    constant: String,
}

fn zero_str() -> String {
    "0".into()
}

impl From<AffineRat> for AffineRatRepr {
    fn from(a: AffineRat) -> Self {
        AffineRatRepr {
            k: format_rational(&a.per_k),
            constant: format_rational(&a.constant),
        }
    }
}

impl TryFrom<AffineRatRepr> for AffineRat {
    type Error = Error;
    fn try_from(r: AffineRatRepr) -> Result<Self> {
        Ok(AffineRat {
            per_k: parse_rational(&r.k)?,
            constant: parse_rational(&r.constant)?,
        })
    }
}

impl AffineRat {
    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self {
            per_k: BigRational::zero(),
            constant: BigRational::from_integer(c.into()),
        }
    }

    pub fn linear(per_k: impl Into<BigInt>) -> Self {
        Self {
            per_k: BigRational::from_integer(per_k.into()),
            constant: BigRational::zero(),
        }
    }

    pub fn rat(q: BigRational) -> Self {
        Self {
            per_k: BigRational::zero(),
            constant: q,
        }
    }

    pub fn instantiate(&self, k: Option<i64>) -> Result<BigRational> {
        match k {
            Some(k) => Ok(&self.per_k * BigRational::from_integer(k.into()) + &self.constant),
            None if self.per_k.is_zero() => Ok(self.constant.clone()),
            None => Err(Error::Parse(
                "parameter `k` used outside an archimedean family".into(),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// Linear inequalities over formal symbols l(g)
// ---------------------------------------------------------------------------

/// Normalized inequality `sum coeffs[g] * l(g) <= bound`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LinIneq {
    pub coeffs: BTreeMap<String, BigRational>,
    pub bound: BigRational,
}

impl LinIneq {
    pub fn add_term(&mut self, sym: &str, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .coeffs
            .entry(sym.to_string())
            .or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.coeffs.remove(sym);
        }
    }

    /// `l(lhs) = l(rhs)` as the pair (`l(lhs) - l(rhs) <= 0`, converse).
    pub fn equality(lhs: &str, rhs: &str) -> (LinIneq, LinIneq) {
        let mut a = LinIneq::default();
        a.add_term(lhs, BigRational::one());
        a.add_term(rhs, -BigRational::one());
        let mut b = LinIneq::default();
        b.add_term(rhs, BigRational::one());
        b.add_term(lhs, -BigRational::one());
        (a, b)
    }

    /// Nonnegative combination `sum mult_i * ineq_i`.
    pub fn combine(parts: &[(&LinIneq, &BigRational)]) -> LinIneq {
        let mut out = LinIneq::default();
        for (ineq, mult) in parts {
            for (sym, c) in &ineq.coeffs {
                out.add_term(sym, c.clone() * *mult);
            }
            out.bound += &ineq.bound * *mult;
        }
        out
    }

    /// Renders as `2 l(x) + l(y) <= 3/2` for reports.
    pub fn display(&self) -> String {
        let mut lhs = String::new();
        for (sym, c) in &self.coeffs {
            if !lhs.is_empty() {
                lhs.push_str(" + ");
            }
            if c.is_one() {
                lhs.push_str(&format!("l({sym})"));
            } else {
                lhs.push_str(&format!("{} l({sym})", format_rational(c)));
            }
        }
        if lhs.is_empty() {
            lhs.push('0');
        }
        format!("{lhs} <= {}", format_rational(&self.bound))
    }
}

/// Template inequality `lhs <= rhs` whose coefficients are affine in `k` and
/// whose symbols may contain affine placeholders. The reserved symbol `"1"`
/// denotes a constant term.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AffineLinIneq {
    pub lhs: Vec<(String, AffineRat)>,
    pub rhs: Vec<(String, AffineRat)>,
}

impl AffineLinIneq {
    /// Instantiates to the normalized form `lhs - rhs <= 0` (constants fold
    /// into the bound).
    pub fn instantiate(&self, k: Option<i64>) -> Result<LinIneq> {
        let mut out = LinIneq::default();
        for (side, sign) in [(&self.lhs, 1), (&self.rhs, -1)] {
            for (sym, coeff) in side {
                let c = coeff.instantiate(k)?;
                let c = if sign < 0 { -c } else { c };
                let sym = instantiate_template(sym, k)?;
                if sym == CONST_SYMBOL {
                    out.bound -= c;
                } else {
                    out.add_term(&sym, c);
                }
            }
        }
        Ok(out)
    }
}

/// Replaces `{affine}` placeholders in an element template by decimal values.
pub fn instantiate_template(s: &str, k: Option<i64>) -> Result<String> {
    if !s.contains('{') {
        return Ok(s.to_string());
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let end = after
            .find('}')
            .ok_or_else(|| Error::Parse(format!("unterminated placeholder in `{s}`")))?;
        let (per_k, constant) = parse_affine_int(&after[..end])?;
        let value = TemplateInt { per_k, constant }.instantiate(k)?;
        out.push_str(&value.to_string());
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Steps, conclusions, certificates
// ---------------------------------------------------------------------------

/// A single derivation step. Emitted inequalities (in admission order):
///
/// * `Homogeneity { g, n }`: `l(g^n) - |n| l(g) <= 0` and its converse.
/// * `ConjInvariance { g, witness, conjugate }`: checks
///   `witness g witness^-1 = conjugate` exactly, emits `l(conjugate) = l(g)`.
/// * `CommSubadd { a, b }`: checks `ab = ba` exactly, emits
///   `l(ab) - l(a) - l(b) <= 0`.
/// * `TorsionZero { g, order }`: checks `g^order = 1`, emits `l(g) <= 0`.
/// * `GroupIdentity { lhs, rhs }`: checks the two words evaluate to the same
///   element; emits the (trivial) equality of the two evaluations.
/// * `LinearArith { multipliers, result }`: `multipliers` index previously
///   admitted inequalities; the combination must equal `result` exactly.
/// * `ArchimedeanFamily { samples, steps, per_sample }`: replays `steps` at
///   each `k` in `samples`, requires `per_sample` instantiated at `k` to be
///   admitted by the instance, then admits the finite bound obtained from the
///   largest sample.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    Homogeneity {
        g: String,
        n: TemplateInt,
    },
    ConjInvariance {
        g: String,
        witness: String,
        conjugate: String,
    },
    CommSubadd {
        a: String,
        b: String,
    },
    TorsionZero {
        g: String,
        order: u64,
    },
    GroupIdentity {
        lhs: Vec<String>,
        rhs: Vec<String>,
    },
    LinearArith {
        #[serde(
            serialize_with = "ser_multipliers",
            deserialize_with = "de_multipliers"
        )]
        multipliers: Vec<(usize, BigRational)>,
        result: AffineLinIneq,
    },
    ArchimedeanFamily {
        samples: Vec<i64>,
        steps: Vec<Step>,
        per_sample: AffineLinIneq,
    },
}

impl Step {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Step::Homogeneity { .. } => "homogeneity",
            Step::ConjInvariance { .. } => "conj_invariance",
            Step::CommSubadd { .. } => "comm_subadd",
            Step::TorsionZero { .. } => "torsion_zero",
            Step::GroupIdentity { .. } => "group_identity",
            Step::LinearArith { .. } => "linear_arith",
            Step::ArchimedeanFamily { .. } => "archimedean_family",
        }
    }
}

fn ser_multipliers<S: serde::Serializer>(
    m: &[(usize, BigRational)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let repr: Vec<(usize, String)> = m
        .iter()
        .map(|(i, q)| (*i, format_rational(q)))
        .collect();
    repr.serialize(s)
}

fn de_multipliers<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<(usize, BigRational)>, D::Error> {
    let repr: Vec<(usize, String)> = Vec::deserialize(d)?;
    repr.into_iter()
        .map(|(i, q)| Ok((i, parse_rational(&q).map_err(serde::de::Error::custom)?)))
        .collect()
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    ExactZero,
    BoundedBy {
        #[serde(
            serialize_with = "ser_rational",
            deserialize_with = "de_rational"
        )]
        bound: BigRational,
    },
    LimitZero,
}

fn ser_rational<S: serde::Serializer>(
    q: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    format_rational(q).serialize(s)
}

fn de_rational<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<BigRational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).map_err(serde::de::Error::custom)
}

/// A serialized derivation concluding that `l(target)` vanishes, is exactly
/// zero, or is bounded.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub family: String,
    /// Family parameters, e.g. the acting matrix of an abelian-by-cyclic
    /// group as a row-major array.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    pub target: String,
    pub steps: Vec<Step>,
    pub conclusion: Conclusion,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Convenience alias used by generators building linear forms.
pub type LinF = Vec<(String, AffineRat)>;

/// Step-list builder that mirrors the verifier's admission arithmetic, so
/// generators can reference admitted inequalities by index while appending
/// steps. Per step: homogeneity, conjugation and group identities admit two
/// inequalities; the others admit one.
#[derive(Default)]
pub struct CertBuilder {
    steps: Vec<Step>,
    admitted: usize,
}

impl CertBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn admitted(&self) -> usize {
        self.admitted
    }

    /// Returns the indices of `l(g^n) - |n| l(g) <= 0` and its converse.
    pub fn homogeneity(&mut self, g: impl Into<String>, n: TemplateInt) -> (usize, usize) {
        self.steps.push(Step::Homogeneity { g: g.into(), n });
        self.admitted += 2;
        (self.admitted - 2, self.admitted - 1)
    }

    /// Returns the indices of `l(conjugate) - l(g) <= 0` and its converse.
    pub fn conj_invariance(
        &mut self,
        g: impl Into<String>,
        witness: impl Into<String>,
        conjugate: impl Into<String>,
    ) -> (usize, usize) {
        self.steps.push(Step::ConjInvariance {
            g: g.into(),
            witness: witness.into(),
            conjugate: conjugate.into(),
        });
        self.admitted += 2;
        (self.admitted - 2, self.admitted - 1)
    }

    /// Returns the index of `l(ab) - l(a) - l(b) <= 0`.
    pub fn comm_subadd(&mut self, a: impl Into<String>, b: impl Into<String>) -> usize {
        self.steps.push(Step::CommSubadd {
            a: a.into(),
            b: b.into(),
        });
        self.admitted += 1;
        self.admitted - 1
    }

    pub fn torsion_zero(&mut self, g: impl Into<String>, order: u64) -> usize {
        self.steps.push(Step::TorsionZero { g: g.into(), order });
        self.admitted += 1;
        self.admitted - 1
    }

    pub fn group_identity(&mut self, lhs: Vec<String>, rhs: Vec<String>) -> (usize, usize) {
        self.steps.push(Step::GroupIdentity { lhs, rhs });
        self.admitted += 2;
        (self.admitted - 2, self.admitted - 1)
    }

    pub fn linear_arith(
        &mut self,
        multipliers: Vec<(usize, BigRational)>,
        result: AffineLinIneq,
    ) -> usize {
        self.steps.push(Step::LinearArith {
            multipliers,
            result,
        });
        self.admitted += 1;
        self.admitted - 1
    }

    pub fn archimedean(
        &mut self,
        samples: Vec<i64>,
        steps: Vec<Step>,
        per_sample: AffineLinIneq,
    ) -> usize {
        self.steps.push(Step::ArchimedeanFamily {
            samples,
            steps,
            per_sample,
        });
        self.admitted += 1;
        self.admitted - 1
    }

    pub fn into_steps(self) -> Vec<Step> {
        self.steps
    }
}

// ---------------------------------------------------------------------------
// Generic certificate patterns
// ---------------------------------------------------------------------------

/// One-step torsion certificate: checks `g^order = 1` at build time.
pub fn torsion_zero_certificate<F: crate::group::FamilyOracle>(
    oracle: &F,
    g: &F::Elem,
    order: u64,
) -> Result<Certificate> {
    let pow = oracle.pow(g, order as i64);
    if pow != oracle.identity() {
        return Err(Error::NotTorsion {
            element: oracle.canonical(g),
            order,
        });
    }
    Ok(Certificate {
        family: oracle.family_tag(),
        params: None,
        target: oracle.canonical(g),
        steps: vec![Step::TorsionZero {
            g: oracle.canonical(g),
            order,
        }],
        conclusion: Conclusion::ExactZero,
        notes: vec![],
    })
}

/// Baumslag-Solitar pattern: a witness `h` with `h x^p h^-1 = x^q` and
/// `|p| != |q|` forces `l(x) = 0` via homogeneity on both sides.
pub fn bs_pattern_certificate<F: crate::group::FamilyOracle>(
    oracle: &F,
    x: &F::Elem,
    witness: &F::Elem,
    p: i64,
    q: i64,
) -> Result<Certificate> {
    if p.unsigned_abs() == q.unsigned_abs() {
        return Err(Error::Invalid(format!(
            "BS pattern needs |p| != |q|, got |{p}| = |{q}|"
        )));
    }
    let xp = oracle.pow(x, p);
    let xq = oracle.pow(x, q);
    if oracle.conj(witness, &xp) != xq {
        return Err(Error::Invalid(
            "witness does not conjugate x^p to x^q".into(),
        ));
    }
    let (lo, hi) = if p.unsigned_abs() < q.unsigned_abs() {
        (p, q)
    } else {
        (q, p)
    };
    // Admitted indices: 0,1 homogeneity(x, lo); 2,3 conj equality; 4,5
    // homogeneity(x, hi). Combination (|hi| - |lo|) l(x) <= 0.
    let (conj_g, conj_to, flip) = if lo == p {
        (oracle.canonical(&xp), oracle.canonical(&xq), false)
    } else {
        (oracle.canonical(&xp), oracle.canonical(&xq), true)
    };
    let sx = oracle.canonical(x);
    let steps = vec![
        Step::Homogeneity {
            g: sx.clone(),
            n: TemplateInt::constant(lo),
        },
        Step::ConjInvariance {
            g: conj_g,
            witness: oracle.canonical(witness),
            conjugate: conj_to,
        },
        Step::Homogeneity {
            g: sx.clone(),
            n: TemplateInt::constant(hi),
        },
        Step::LinearArith {
            // |hi| l(x) - l(x^hi) <= 0 ; l(x^hi) - l(x^lo) (conj, oriented
            // below) ; l(x^lo) - |lo| l(x) <= 0
            multipliers: vec![
                (5, BigRational::one()),
                (if flip { 3 } else { 2 }, BigRational::one()),
                (0, BigRational::one()),
            ],
            result: AffineLinIneq {
                lhs: vec![(
                    sx.clone(),
                    AffineRat::rat(BigRational::from_integer(
                        (hi.unsigned_abs() as i64 - lo.unsigned_abs() as i64).into(),
                    )),
                )],
                rhs: vec![],
            },
        },
    ];
    Ok(Certificate {
        family: oracle.family_tag(),
        params: None,
        target: sx,
        steps,
        conclusion: Conclusion::ExactZero,
        notes: vec![format!("h x^{p} h^-1 = x^{q} forces l(x) = 0")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::ratio;

    #[test]
    fn affine_int_round_trip() {
        for s in ["k", "-k", "3k+1", "-2k-5", "7", "0", "k-2"] {
            let (p, c) = parse_affine_int(s).unwrap();
            let t = TemplateInt {
                per_k: p,
                constant: c,
            };
            let (p2, c2) = parse_affine_int(&t.to_string()).unwrap();
            assert_eq!((p2, c2), (t.per_k.clone(), t.constant.clone()), "{s}");
        }
        assert!(parse_affine_int("").is_err());
        assert!(parse_affine_int("xk").is_err());
    }

    #[test]
    fn template_instantiation() {
        assert_eq!(
            instantiate_template("a^1 b^{-k} c^{2k+1}", Some(4)).unwrap(),
            "a^1 b^-4 c^9"
        );
        assert_eq!(instantiate_template("plain", None).unwrap(), "plain");
        assert!(instantiate_template("b^{k}", None).is_err());
        assert!(instantiate_template("b^{k", Some(1)).is_err());
    }

    #[test]
    fn lin_ineq_combination() {
        let mut a = LinIneq::default();
        a.add_term("x", ratio(1, 1));
        a.add_term("y", ratio(-1, 1));
        let mut b = LinIneq::default();
        b.add_term("y", ratio(1, 1));
        b.bound = ratio(3, 2);
        let two = ratio(2, 1);
        let one = ratio(1, 1);
        let c = LinIneq::combine(&[(&a, &one), (&b, &two)]);
        assert_eq!(c.coeffs.get("x"), Some(&ratio(1, 1)));
        assert_eq!(c.coeffs.get("y"), Some(&ratio(1, 1)));
        assert_eq!(c.bound, ratio(3, 1));
        assert_eq!(c.display(), "l(x) + l(y) <= 3");
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = crate::heisenberg::center_vanishing_certificate(3);
        let json = cert.to_json();
        let back = Certificate::from_json(&json).unwrap();
        assert_eq!(cert, back);
    }
}
