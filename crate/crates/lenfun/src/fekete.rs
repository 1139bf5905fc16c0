//! Subadditive limit estimation: certified upper-bound schedules on
//! `lim a(n)/n` for subadditive `a`, evaluated on the doubling schedule
//! `n = 2^0 .. 2^B` (Fekete: the limit equals `inf a(n)/n`, so every
//! schedule value is a one-sided certified upper bound).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A provider `n -> a(n) >= 0` with a doubling budget.
pub struct SubadditiveSeries<'a> {
    provider: Box<dyn Fn(u64) -> Result<f64> + Sync + 'a>,
    pub doubling_budget: u32,
}

impl<'a> SubadditiveSeries<'a> {
    pub fn new(
        doubling_budget: u32,
        provider: impl Fn(u64) -> Result<f64> + Sync + 'a,
    ) -> Self {
        Self {
            provider: Box::new(provider),
            doubling_budget,
        }
    }

    pub fn value(&self, n: u64) -> Result<f64> {
        let v = (self.provider)(n)?;
        if !v.is_finite() {
            return Err(Error::Overflow {
                level: n.ilog2().max(0),
            });
        }
        if v < 0.0 {
            return Err(Error::NegativeSeries { n });
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FeketeBound {
    pub n: u64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeketeSchedule {
    pub bounds: Vec<FeketeBound>,
    /// Best (final) certified upper bound on `lim a(n)/n`.
    pub best: f64,
    /// Always true: no lower bound is claimed.
    pub one_sided: bool,
}

const REL_TOL: f64 = 1e-9;

/// Certified upper bounds `a(2^j)/2^j` for `j = 0..=B`, with subadditivity
/// spot checks (`a(2n) <= 2 a(n)` per doubling step, plus mixed pairs on the
/// small levels). The doubling check makes the schedule non-increasing.
pub fn fekete_upper_bounds(series: &SubadditiveSeries) -> Result<FeketeSchedule> {
    if series.doubling_budget < 1 {
        return Err(Error::BadBudget);
    }
    let budget = series.doubling_budget;
    let mut values = Vec::with_capacity(budget as usize + 1);
    for j in 0..=budget {
        values.push(series.value(1u64 << j)?);
    }
    // a(2n) <= 2 a(n), which also forces schedule monotonicity
    for j in 0..budget as usize {
        let n = 1u64 << j;
        let tol = REL_TOL * values[j].abs().max(1.0);
        if values[j + 1] > 2.0 * values[j] + tol {
            return Err(Error::SubadditivityViolation { n, m: n });
        }
    }
    // mixed pairs on small levels
    for i in 0..budget.min(4) {
        for j in (i + 1)..=budget.min(4) {
            let (n, m) = (1u64 << i, 1u64 << j);
            let sum = series.value(n + m)?;
            let tol = REL_TOL * sum.abs().max(1.0);
            if sum > values[i as usize] + values[j as usize] + tol {
                return Err(Error::SubadditivityViolation { n, m });
            }
        }
    }
    let bounds: Vec<FeketeBound> = values
        .iter()
        .enumerate()
        .map(|(j, a)| FeketeBound {
            n: 1u64 << j,
            bound: a / (1u64 << j) as f64,
        })
        .collect();
    let best = bounds.last().expect("budget >= 1").bound;
    Ok(FeketeSchedule {
        bounds,
        best,
        one_sided: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_sequence_is_flat() {
        let s = SubadditiveSeries::new(8, |n| Ok(n as f64));
        let sched = fekete_upper_bounds(&s).unwrap();
        assert!(sched.bounds.iter().all(|b| (b.bound - 1.0).abs() < 1e-12));
        assert_eq!(sched.best, 1.0);
        assert!(sched.one_sided);
    }

    #[test]
    fn heisenberg_center_profile() {
        // a(n) = ceil(4 sqrt(n)): the word-length profile of the center
        let s = SubadditiveSeries::new(10, |n| Ok((4.0 * (n as f64).sqrt()).ceil()));
        let sched = fekete_upper_bounds(&s).unwrap();
        let last = sched.bounds.last().unwrap();
        assert_eq!(last.n, 1024);
        assert!(last.bound <= 0.25, "bound {}", last.bound);
        for w in sched.bounds.windows(2) {
            assert!(w[1].bound <= w[0].bound + 1e-12);
        }
    }

    #[test]
    fn log_norm_schedule_approaches_spectral_radius() {
        // a(n) = log ||M^n||_F for M = [[2,1],[1,1]]; renormalized squaring
        let log_norm = |n: u64| -> f64 {
            let mut m = [2.0f64, 1.0, 1.0, 1.0];
            let mut log_scale = 0.0f64;
            let mut acc = [1.0f64, 0.0, 0.0, 1.0];
            let mut acc_log = 0.0f64;
            let mut e = n;
            let mul = |a: &[f64; 4], b: &[f64; 4]| {
                [
                    a[0] * b[0] + a[1] * b[2],
                    a[0] * b[1] + a[1] * b[3],
                    a[2] * b[0] + a[3] * b[2],
                    a[2] * b[1] + a[3] * b[3],
                ]
            };
            let renorm = |m: &mut [f64; 4], log: &mut f64| {
                let max = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if max > 0.0 {
                    for x in m.iter_mut() {
                        *x /= max;
                    }
                    *log += max.ln();
                }
            };
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul(&acc, &m);
                    acc_log += log_scale;
                    renorm(&mut acc, &mut acc_log);
                }
                e >>= 1;
                if e > 0 {
                    m = mul(&m, &m);
                    log_scale *= 2.0;
                    renorm(&mut m, &mut log_scale);
                }
            }
            let frob = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
            acc_log + frob.ln()
        };
        let s = SubadditiveSeries::new(12, |n| Ok(log_norm(n)));
        let sched = fekete_upper_bounds(&s).unwrap();
        let expected = ((3.0 + 5.0f64.sqrt()) / 2.0).ln(); // 0.9624...
        let best = sched.best;
        assert!(best >= expected - 1e-9, "best {best} < {expected}");
        assert!(best <= expected + 1e-3, "best {best} too far above {expected}");
    }

    #[test]
    fn typed_errors() {
        let s = SubadditiveSeries::new(4, |n| Ok(if n == 4 { -1.0 } else { n as f64 }));
        assert!(matches!(
            fekete_upper_bounds(&s),
            Err(Error::NegativeSeries { n: 4 })
        ));

        // superadditive growth trips the doubling check
        let s = SubadditiveSeries::new(4, |n| Ok((n * n) as f64));
        assert!(matches!(
            fekete_upper_bounds(&s),
            Err(Error::SubadditivityViolation { .. })
        ));

        let s = SubadditiveSeries::new(0, |n| Ok(n as f64));
        assert!(matches!(fekete_upper_bounds(&s), Err(Error::BadBudget)));

        let s = SubadditiveSeries::new(2, |_| Ok(f64::NAN));
        assert!(matches!(fekete_upper_bounds(&s), Err(Error::Overflow { .. })));
    }
}
