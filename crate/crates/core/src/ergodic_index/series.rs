//! Convergence of `sum (1/r_i)^k` for closed-form cut rules, and tail bounds.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::vl::CutRule;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Divergence {
    Diverges,
    Converges,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Divergence::Diverges => "diverges",
            Divergence::Converges => "converges",
        })
    }
}

/// Ergodic index read off the per-`k` verdicts for `2 <= k <= L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "k", rename_all = "kebab-case")]
pub enum ErgodicIndex {
    /// `k`-fold product ergodic, `(k+1)`-fold not.
    Exactly(u32),
    /// Every `k`-fold product with `k <= L` is ergodic; beyond `L` the theorem is silent.
    AtLeast(u32),
    /// No `k`-fold product with `2 <= k <= L` is ergodic; `k = 1` is outside the theorem.
    BelowTwo,
}

impl fmt::Display for ErgodicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErgodicIndex::Exactly(k) => write!(f, "{k}"),
            ErgodicIndex::AtLeast(k) => write!(f, ">={k}"),
            ErgodicIndex::BelowTwo => f.write_str("<2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesReport {
    pub l: u32,
    /// `(k, verdict)` for `k = 2..=L`; the `k`-fold product is ergodic iff the series diverges.
    pub verdicts: Vec<(u32, Divergence)>,
    pub index: ErgodicIndex,
}

/// Comparison test for one `k`.
pub fn series_divergence(rule: &CutRule, k: u32) -> Result<Divergence> {
    match rule {
        CutRule::Constant { .. } => Ok(Divergence::Diverges),
        // ceil(c n^a) lies between c n^a and c n^a + 1, so the p-series test on a*k decides.
        CutRule::PowerCeil { alpha, .. } => {
            let s = alpha * BigRational::from_integer(k.into());
            Ok(if s <= BigRational::one() {
                Divergence::Diverges
            } else {
                Divergence::Converges
            })
        }
        CutRule::Geometric { beta, .. } => match beta {
            0 => Err(Error::Invalid("geometric ratio must be positive".into())),
            1 => Ok(Divergence::Diverges),
            _ => Ok(Divergence::Converges),
        },
        CutRule::Prefix { .. } => Err(Error::AnalyticTestUnavailable(
            "an explicit prefix says nothing about the tail of the series".into(),
        )),
    }
}

/// Per-`k` verdicts for `2 <= k <= L` and the implied ergodic index.
pub fn series_index(rule: &CutRule, l: u32) -> Result<SeriesReport> {
    let verdicts = (2..=l)
        .map(|k| Ok((k, series_divergence(rule, k)?)))
        .collect::<Result<Vec<_>>>()?;
    let last_div = verdicts
        .iter()
        .filter(|(_, d)| *d == Divergence::Diverges)
        .map(|(k, _)| *k)
        .max();
    let index = match last_div {
        None => ErgodicIndex::BelowTwo,
        Some(k) if k == l => ErgodicIndex::AtLeast(l),
        Some(k) => ErgodicIndex::Exactly(k),
    };
    Ok(SeriesReport { l, verdicts, index })
}

fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// An exact upper bound for `sum_{i >= n} ((L+1)/r_i)^k`.
pub fn tail_bound(rule: &CutRule, l: u32, k: u32, n: u32) -> Result<BigRational> {
    let lp1 = BigInt::from(l + 1);
    let divergent = |why: &str| Error::TailCondition {
        stage: n,
        bound: format!("infinite ({why})"),
    };
    match rule {
        CutRule::Constant { .. } => Err(divergent("constant cut counts")),
        CutRule::Geometric { c, beta } => {
            if *beta <= 1 {
                return Err(divergent("ratio 1"));
            }
            // ((L+1)/c)^k * beta^{-nk} / (1 - beta^{-k})
            let base = ratio(lp1, *c).pow(k as i32);
            let bk = BigInt::from(*beta).pow(k);
            let head = ratio(1, BigInt::from(*beta).pow(n * k));
            Ok(base * head * ratio(bk.clone(), bk - 1))
        }
        CutRule::PowerCeil { c, alpha } => {
            let s = alpha * BigRational::from_integer(k.into());
            if s <= BigRational::one() {
                return Err(divergent("p-series exponent at most 1"));
            }
            // sum_{i>=n} i^{-s} <= n^{-s} + n^{1-s}/(s-1) <= 1/F + n/(F (s-1)), F = floor(n^s).
            let (sn, sd) = (
                s.numer().to_u32().ok_or_else(|| Error::Overflow("exponent".into()))?,
                s.denom().to_u32().ok_or_else(|| Error::Overflow("exponent".into()))?,
            );
            let f = BigUint::from(n).pow(sn).nth_root(sd);
            if f.is_zero() {
                return Err(Error::TailUnverifiable("tail starts at stage 0".into()));
            }
            let f = BigRational::from_integer(f.into());
            let sum = f.recip() + BigRational::from_integer(n.into()) / (&f * (&s - BigRational::one()));
            let base = (BigRational::from_integer(lp1) / c).pow(k as i32);
            Ok(base * sum)
        }
        CutRule::Prefix { .. } => Err(Error::TailUnverifiable(
            "an explicit prefix does not determine the tail".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifier_examples() {
        let sqrt = CutRule::PowerCeil {
            c: BigRational::one(),
            alpha: ratio(1, 2),
        };
        let rep = series_index(&sqrt, 3).unwrap();
        assert_eq!(
            rep.verdicts,
            vec![(2, Divergence::Diverges), (3, Divergence::Converges)]
        );
        assert_eq!(rep.index, ErgodicIndex::Exactly(2));
        let constant = series_index(&CutRule::Constant { value: 2 }, 3).unwrap();
        assert_eq!(constant.index, ErgodicIndex::AtLeast(3));
        let geo = series_index(&CutRule::Geometric { c: 1, beta: 2 }, 3).unwrap();
        assert_eq!(geo.index, ErgodicIndex::BelowTwo);
        assert!(matches!(
            series_index(&CutRule::Prefix { values: vec![3] }, 2),
            Err(Error::AnalyticTestUnavailable(_))
        ));
    }

    #[test]
    fn geometric_tail_is_exact() {
        // sum_{i>=2} (3/(6 2^i))^2 = sum 4^{-(i+1)} = 1/48.
        let b = tail_bound(&CutRule::Geometric { c: 6, beta: 2 }, 2, 2, 2).unwrap();
        assert_eq!(b, ratio(1, 48));
    }

    #[test]
    fn power_tail_bounds_partial_sums() {
        let rule = CutRule::PowerCeil {
            c: BigRational::from_integer(10.into()),
            alpha: BigRational::one(),
        };
        let bound = tail_bound(&rule, 1, 2, 3).unwrap();
        let mut partial = BigRational::zero();
        for i in 3..2000u32 {
            let r = rule.value(i).unwrap();
            partial += ratio(4, (r as u128 * r as u128) as u64);
        }
        assert!(partial < bound);
        assert!(matches!(
            tail_bound(&CutRule::Constant { value: 9 }, 2, 2, 2),
            Err(Error::TailCondition { .. })
        ));
    }
}
