//! Certificate verifier: replays every side condition by exact group
//! arithmetic and the linear-arithmetic closure over formal symbols.
//!
//! Side-condition mismatches produce a failing [`VerifyReport`] naming the
//! step and the exact elements involved. Structural defects (negative or
//! inconsistent `LinearArith` multipliers, out-of-range indices, malformed
//! templates) are typed errors.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cert::{Certificate, Conclusion, LinIneq, Step};
use crate::cert::instantiate_template;
use crate::exec;
use crate::group::FamilyOracle;
use crate::qnum::format_rational;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StepLine {
    pub path: String,
    pub kind: String,
    pub status: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ConclusionStatus {
    /// The admitted set entails the conclusion outright.
    Established,
    /// A family of finite bounds holds for every verified sample; the limit
    /// conclusion additionally uses `l >= 0` (analytic step, flagged).
    AnalyticLimit,
    Failed,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerifyReport {
    pub family: String,
    pub target: String,
    pub verified: bool,
    pub conclusion: ConclusionStatus,
    /// Display form of the best certified finite bound, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_bound: Option<String>,
    pub steps: Vec<StepLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

struct Derivation {
    admitted: Vec<LinIneq>,
}

enum StepOutcome {
    Ok,
    Failed(String),
}

fn equality_pair(lhs: &str, rhs: &str) -> (LinIneq, LinIneq) {
    LinIneq::equality(lhs, rhs)
}

fn homogeneity_pair(sym_pow: &str, sym_base: &str, n_abs: BigRational) -> (LinIneq, LinIneq) {
    let mut a = LinIneq::default();
    a.add_term(sym_pow, BigRational::from_integer(1.into()));
    a.add_term(sym_base, -n_abs.clone());
    let mut b = LinIneq::default();
    b.add_term(sym_base, n_abs);
    b.add_term(sym_pow, -BigRational::from_integer(1.into()));
    (a, b)
}

fn replay_step<F: FamilyOracle>(
    oracle: &F,
    step: &Step,
    index: usize,
    k: Option<i64>,
    path: &str,
    deriv: &mut Derivation,
    lines: &mut Vec<StepLine>,
    family_bounds: &mut Vec<LinIneq>,
    target: &str,
) -> Result<StepOutcome> {
    let spath = if path.is_empty() {
        index.to_string()
    } else {
        format!("{path}.{index}")
    };
    let push_line = |status: &str, detail: String, lines: &mut Vec<StepLine>| {
        lines.push(StepLine {
            path: spath.clone(),
            kind: step.kind_name().into(),
            status: status.into(),
            detail,
        });
    };

    let parse = |s: &str| -> Result<F::Elem> {
        let inst = instantiate_template(s, k)?;
        oracle.parse_elem(&inst)
    };

    match step {
        Step::Homogeneity { g, n } => {
            let elem = parse(g)?;
            let n_val = n.instantiate(k)?;
            let powed = oracle.pow_big(&elem, &n_val);
            let sym_base = oracle.canonical(&elem);
            let sym_pow = oracle.canonical(&powed);
            let n_abs = BigRational::from_integer(n_val.abs());
            let (i1, i2) = homogeneity_pair(&sym_pow, &sym_base, n_abs);
            deriv.admitted.push(i1);
            deriv.admitted.push(i2);
            push_line(
                "pass",
                format!("l({sym_pow}) = |{n_val}| l({sym_base})"),
                lines,
            );
            Ok(StepOutcome::Ok)
        }
        Step::ConjInvariance {
            g,
            witness,
            conjugate,
        } => {
            let ge = parse(g)?;
            let we = parse(witness)?;
            let ce = parse(conjugate)?;
            let got = oracle.conj(&we, &ge);
            if got != ce {
                let detail = format!(
                    "witness conjugation mismatch: h g h^-1 = {}, certificate claims {}",
                    oracle.canonical(&got),
                    oracle.canonical(&ce)
                );
                push_line("fail", detail.clone(), lines);
                return Ok(StepOutcome::Failed(detail));
            }
            let (i1, i2) = equality_pair(&oracle.canonical(&ce), &oracle.canonical(&ge));
            deriv.admitted.push(i1);
            deriv.admitted.push(i2);
            push_line(
                "pass",
                format!("l({}) = l({})", oracle.canonical(&ce), oracle.canonical(&ge)),
                lines,
            );
            Ok(StepOutcome::Ok)
        }
        Step::CommSubadd { a, b } => {
            let ae = parse(a)?;
            let be = parse(b)?;
            if !oracle.commutes(&ae, &be) {
                let detail = format!(
                    "elements do not commute: ab = {}, ba = {}",
                    oracle.canonical(&oracle.op(&ae, &be)),
                    oracle.canonical(&oracle.op(&be, &ae))
                );
                push_line("fail", detail.clone(), lines);
                return Ok(StepOutcome::Failed(detail));
            }
            let prod = oracle.op(&ae, &be);
            let mut ineq = LinIneq::default();
            ineq.add_term(&oracle.canonical(&prod), BigRational::from_integer(1.into()));
            ineq.add_term(&oracle.canonical(&ae), -BigRational::from_integer(1.into()));
            ineq.add_term(&oracle.canonical(&be), -BigRational::from_integer(1.into()));
            deriv.admitted.push(ineq);
            push_line(
                "pass",
                format!(
                    "l({}) <= l({}) + l({})",
                    oracle.canonical(&prod),
                    oracle.canonical(&ae),
                    oracle.canonical(&be)
                ),
                lines,
            );
            Ok(StepOutcome::Ok)
        }
        Step::TorsionZero { g, order } => {
            let ge = parse(g)?;
            let powed = oracle.pow_big(&ge, &(*order).into());
            if powed != oracle.identity() {
                let detail = format!(
                    "g^{order} = {}, not the identity",
                    oracle.canonical(&powed)
                );
                push_line("fail", detail.clone(), lines);
                return Ok(StepOutcome::Failed(detail));
            }
            let mut ineq = LinIneq::default();
            ineq.add_term(&oracle.canonical(&ge), BigRational::from_integer(1.into()));
            deriv.admitted.push(ineq);
            push_line("pass", format!("l({}) <= 0 (torsion)", oracle.canonical(&ge)), lines);
            Ok(StepOutcome::Ok)
        }
        Step::GroupIdentity { lhs, rhs } => {
            let eval = |word: &[String]| -> Result<F::Elem> {
                let mut acc = oracle.identity();
                for w in word {
                    acc = oracle.op(&acc, &parse(w)?);
                }
                Ok(acc)
            };
            let le = eval(lhs)?;
            let re = eval(rhs)?;
            if le != re {
                let detail = format!(
                    "group identity fails: lhs = {}, rhs = {}",
                    oracle.canonical(&le),
                    oracle.canonical(&re)
                );
                push_line("fail", detail.clone(), lines);
                return Ok(StepOutcome::Failed(detail));
            }
            let (i1, i2) = equality_pair(&oracle.canonical(&le), &oracle.canonical(&re));
            deriv.admitted.push(i1);
            deriv.admitted.push(i2);
            push_line(
                "pass",
                format!("both words evaluate to {}", oracle.canonical(&le)),
                lines,
            );
            Ok(StepOutcome::Ok)
        }
        Step::LinearArith {
            multipliers,
            result,
        } => {
            let mut parts: Vec<(&LinIneq, &BigRational)> = Vec::with_capacity(multipliers.len());
            for (idx, mult) in multipliers {
                if *idx >= deriv.admitted.len() {
                    return Err(Error::CertStep {
                        step: index,
                        reason: format!(
                            "multiplier references inequality {idx}, only {} admitted",
                            deriv.admitted.len()
                        ),
                    });
                }
                if mult.is_negative() {
                    return Err(Error::CertStep {
                        step: index,
                        reason: format!("negative multiplier {}", format_rational(mult)),
                    });
                }
                parts.push((&deriv.admitted[*idx], mult));
            }
            let combo = LinIneq::combine(&parts);
            let claimed = result.instantiate(k)?;
            // symbols in the claimed inequality may be templates
            if combo != claimed {
                return Err(Error::CertStep {
                    step: index,
                    reason: format!(
                        "inconsistent combination: multipliers give `{}`, certificate claims `{}`",
                        combo.display(),
                        claimed.display()
                    ),
                });
            }
            deriv.admitted.push(claimed.clone());
            push_line("pass", claimed.display(), lines);
            Ok(StepOutcome::Ok)
        }
        Step::ArchimedeanFamily {
            samples,
            steps,
            per_sample,
        } => {
            if k.is_some() {
                return Err(Error::CertStep {
                    step: index,
                    reason: "nested archimedean families are not supported".into(),
                });
            }
            if samples.is_empty() || samples.iter().any(|s| *s < 1) {
                return Err(Error::CertStep {
                    step: index,
                    reason: "family samples must be a nonempty list of positive integers".into(),
                });
            }
            for sample in samples {
                let mut inner = Derivation { admitted: vec![] };
                for (j, s) in steps.iter().enumerate() {
                    match replay_step(
                        oracle,
                        s,
                        j,
                        Some(*sample),
                        &format!("{spath}.k={sample}"),
                        &mut inner,
                        lines,
                        family_bounds,
                        target,
                    )? {
                        StepOutcome::Ok => {}
                        StepOutcome::Failed(reason) => return Ok(StepOutcome::Failed(reason)),
                    }
                }
                let want = per_sample.instantiate(Some(*sample))?;
                if !inner.admitted.iter().any(|i| *i == want) {
                    let detail = format!(
                        "per-sample inequality `{}` not derived at k = {sample}",
                        want.display()
                    );
                    push_line("fail", detail.clone(), lines);
                    return Ok(StepOutcome::Failed(detail));
                }
            }
            let k_max = *samples.iter().max().expect("nonempty");
            let at_max = per_sample.instantiate(Some(k_max))?;
            let gamma = at_max
                .coeffs
                .get(target)
                .cloned()
                .unwrap_or_else(BigRational::zero);
            if !gamma.is_positive() {
                return Err(Error::CertStep {
                    step: index,
                    reason: format!(
                        "family bound must carry a positive coefficient on the target `{target}`"
                    ),
                });
            }
            let mut scaled = LinIneq::default();
            for (sym, c) in &at_max.coeffs {
                scaled.add_term(sym, c / &gamma);
            }
            scaled.bound = &at_max.bound / &gamma;
            deriv.admitted.push(scaled.clone());
            family_bounds.push(scaled.clone());
            push_line(
                "pass",
                format!(
                    "verified k in {samples:?}; certified finite bound {}",
                    scaled.display()
                ),
                lines,
            );
            Ok(StepOutcome::Ok)
        }
    }
}

/// Verifies a certificate against a family oracle. Deterministic: the same
/// certificate and oracle always produce an identical report.
pub fn verify_certificate<F: FamilyOracle>(
    cert: &Certificate,
    oracle: &F,
) -> Result<VerifyReport> {
    if cert.family != oracle.family_tag() {
        return Err(Error::FamilyMismatch {
            expected: oracle.family_tag(),
            got: cert.family.clone(),
        });
    }
    // target must deserialize in the family
    let target_elem = oracle.parse_elem(&cert.target)?;
    let target = oracle.canonical(&target_elem);

    let mut deriv = Derivation { admitted: vec![] };
    let mut lines = Vec::new();
    let mut family_bounds = Vec::new();
    let mut notes = cert.notes.clone();

    for (i, step) in cert.steps.iter().enumerate() {
        match replay_step(
            oracle,
            step,
            i,
            None,
            "",
            &mut deriv,
            &mut lines,
            &mut family_bounds,
            &target,
        )? {
            StepOutcome::Ok => {}
            StepOutcome::Failed(reason) => {
                return Ok(VerifyReport {
                    family: cert.family.clone(),
                    target,
                    verified: false,
                    conclusion: ConclusionStatus::Failed,
                    certified_bound: None,
                    steps: lines,
                    failure: Some(format!("step {i}: {reason}")),
                    notes,
                });
            }
        }
    }

    let one = BigRational::from_integer(1.into());
    let single_target_bound = |ineq: &LinIneq| -> Option<BigRational> {
        // ineq of the shape c*l(target) <= bound with c > 0
        if ineq.coeffs.len() != 1 {
            return None;
        }
        let (sym, c) = ineq.coeffs.iter().next()?;
        if sym != &target || !c.is_positive() {
            return None;
        }
        Some(&ineq.bound / c)
    };

    let (ok, status, bound_disp) = match &cert.conclusion {
        Conclusion::ExactZero => {
            let found = deriv
                .admitted
                .iter()
                .filter_map(&single_target_bound)
                .any(|b| !b.is_positive());
            (
                found,
                if found {
                    ConclusionStatus::Established
                } else {
                    ConclusionStatus::Failed
                },
                found.then(|| format!("l({target}) <= 0 with l >= 0, hence l({target}) = 0")),
            )
        }
        Conclusion::BoundedBy { bound } => {
            let found = deriv
                .admitted
                .iter()
                .filter_map(&single_target_bound)
                .any(|b| &b <= bound);
            (
                found,
                if found {
                    ConclusionStatus::Established
                } else {
                    ConclusionStatus::Failed
                },
                found.then(|| format!("l({target}) <= {}", format_rational(bound))),
            )
        }
        Conclusion::LimitZero => {
            let best = family_bounds
                .iter()
                .find(|i| i.coeffs.get(&target).map(|c| c == &one).unwrap_or(false));
            match best {
                Some(b) => {
                    notes.push(
                        "limit-zero is an analytic step: the certified bound holds for every \
                         verified k and l >= 0"
                            .into(),
                    );
                    (true, ConclusionStatus::AnalyticLimit, Some(b.display()))
                }
                None => (false, ConclusionStatus::Failed, None),
            }
        }
    };

    Ok(VerifyReport {
        family: cert.family.clone(),
        target,
        verified: ok,
        conclusion: status,
        certified_bound: bound_disp,
        steps: lines,
        failure: (!ok).then(|| "conclusion not entailed by the admitted inequalities".into()),
        notes,
    })
}

/// Verifies a batch; fan-out is parallel under the `parallel` feature and the
/// output order always matches the input order.
pub fn verify_batch<F: FamilyOracle>(
    certs: &[Certificate],
    oracle: &F,
) -> Vec<Result<VerifyReport>> {
    exec::par_map(certs, |c| verify_certificate(c, oracle))
}

/// Dispatches on the certificate's family tag.
pub fn verify_dispatch(cert: &Certificate) -> Result<VerifyReport> {
    match cert.family.as_str() {
        "heisenberg" => verify_certificate(cert, &crate::heisenberg::Heisenberg),
        "polycyclic" => {
            let params = cert.params.as_ref().ok_or_else(|| {
                Error::Invalid("polycyclic certificate must carry a `params.matrix`".into())
            })?;
            let group = crate::polycyclic::AbcGroup::from_params(params)?;
            verify_certificate(cert, &group)
        }
        "qmatrix" => {
            let n = crate::qmatrix::infer_dimension(&cert.target)?;
            verify_certificate(cert, &crate::qmatrix::QMatrixFamily::new(n))
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::{AffineLinIneq, AffineRat, TemplateInt};
    use crate::heisenberg::{center_vanishing_certificate, Heisenberg};

    #[test]
    fn center_certificate_verifies() {
        let cert = center_vanishing_certificate(10);
        let report = verify_certificate(&cert, &Heisenberg).unwrap();
        assert!(report.verified, "{:?}", report.failure);
        assert_eq!(report.conclusion, ConclusionStatus::AnalyticLimit);
        // certified bound coefficient 2/1024 on l(a)
        let bound = report.certified_bound.unwrap();
        assert!(bound.contains("1/512"), "bound display: {bound}");
    }

    #[test]
    fn center_certificate_budget_zero() {
        let cert = center_vanishing_certificate(0);
        let report = verify_certificate(&cert, &Heisenberg).unwrap();
        assert!(report.verified);
        let bound = report.certified_bound.unwrap();
        assert_eq!(bound, "l(a^0 b^0 c^1) + -2 l(a^1 b^0 c^0) <= 0");
    }

    #[test]
    fn tampered_witness_is_rejected_with_mismatch() {
        let mut cert = center_vanishing_certificate(4);
        if let Step::ArchimedeanFamily { steps, .. } = &mut cert.steps[0] {
            if let Step::ConjInvariance { witness, .. } = &mut steps[0] {
                *witness = "a^1 b^{-k} c^0".into();
            }
        }
        let report = verify_certificate(&cert, &Heisenberg).unwrap();
        assert!(!report.verified);
        let failure = report.failure.unwrap();
        assert!(failure.contains("mismatch"), "{failure}");
    }

    #[test]
    fn torsion_certificate_round_trip() {
        let g = Heisenberg;
        let cert = crate::cert::torsion_zero_certificate(
            &g,
            &crate::heisenberg::HeisenbergElement::identity(),
            1,
        )
        .unwrap();
        let report = verify_certificate(&cert, &g).unwrap();
        assert!(report.verified);
        assert_eq!(report.conclusion, ConclusionStatus::Established);
        // a is not torsion of order 3
        assert!(matches!(
            crate::cert::torsion_zero_certificate(
                &g,
                &crate::heisenberg::HeisenbergElement::gen_a(),
                3
            ),
            Err(Error::NotTorsion { .. })
        ));
    }

    #[test]
    fn negative_multiplier_is_typed_error() {
        let cert = Certificate {
            family: "heisenberg".into(),
            params: None,
            target: "a^0 b^0 c^1".into(),
            steps: vec![
                Step::Homogeneity {
                    g: "a^0 b^0 c^1".into(),
                    n: TemplateInt::constant(2),
                },
                Step::LinearArith {
                    multipliers: vec![(0, -num_rational::BigRational::from_integer(1.into()))],
                    result: AffineLinIneq {
                        lhs: vec![],
                        rhs: vec![("a^0 b^0 c^1".into(), AffineRat::constant(1))],
                    },
                },
            ],
            conclusion: Conclusion::ExactZero,
            notes: vec![],
        };
        assert!(matches!(
            verify_certificate(&cert, &Heisenberg),
            Err(Error::CertStep { step: 1, .. })
        ));
    }

    #[test]
    fn serialization_preserves_verification() {
        let cert = center_vanishing_certificate(6);
        let json = cert.to_json();
        let back = Certificate::from_json(&json).unwrap();
        let r1 = verify_certificate(&cert, &Heisenberg).unwrap();
        let r2 = verify_certificate(&back, &Heisenberg).unwrap();
        assert_eq!(r1, r2);
    }
}
