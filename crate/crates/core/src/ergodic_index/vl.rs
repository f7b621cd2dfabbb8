use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::vectors;
use crate::error::{Error, Result};

/// Cut-count rule `r_n`, defined for `n >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum CutRule {
    Constant {
        value: u64,
    },
    /// `ceil(c * n^alpha)` with rational `c > 0` and `alpha >= 0`.
    PowerCeil {
        #[serde(with = "crate::serde_util::ratio")]
        c: BigRational,
        #[serde(with = "crate::serde_util::ratio")]
        alpha: BigRational,
    },
    /// `c * beta^n`.
    Geometric {
        c: u64,
        beta: u64,
    },
    /// Explicit values `r_1, r_2, ...`; no analytic tests apply.
    Prefix {
        values: Vec<u64>,
    },
}

impl fmt::Display for CutRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutRule::Constant { value } => write!(f, "r_n = {value}"),
            CutRule::PowerCeil { c, alpha } => write!(
                f,
                "r_n = ceil({} * n^({}))",
                crate::measure::ratio_to_string(c),
                crate::measure::ratio_to_string(alpha)
            ),
            CutRule::Geometric { c, beta } => write!(f, "r_n = {c} * {beta}^n"),
            CutRule::Prefix { values } => write!(f, "r_n explicit prefix of length {}", values.len()),
        }
    }
}

/// Exact `ceil(c * n^alpha)` by bisection on integer powers.
fn power_ceil(c: &BigRational, alpha: &BigRational, n: u64) -> Option<BigUint> {
    let (cn, cd) = (c.numer().to_biguint()?, c.denom().to_biguint()?);
    let (an, ad) = (alpha.numer().to_u32()?, alpha.denom().to_u32()?);
    let nn = BigUint::from(n);
    // m >= c n^(an/ad)  <=>  (m cd)^ad >= cn^ad n^an
    let rhs = cn.pow(ad) * nn.pow(an);
    let ok = |m: &BigUint| (m * &cd).pow(ad) >= rhs;
    // Upper bound from the real root rounded up.
    let mut hi = (rhs.nth_root(ad) + BigUint::one()) / &cd + BigUint::one();
    while !ok(&hi) {
        hi *= 2u32;
    }
    let mut lo = BigUint::zero();
    while lo < hi {
        let mid = (&lo + &hi) / 2u32;
        if ok(&mid) {
            hi = mid;
        } else {
            lo = mid + BigUint::one();
        }
    }
    Some(lo)
}

impl CutRule {
    /// `r_n` for `n >= 1`.
    pub fn value(&self, n: u32) -> Result<u64> {
        if n == 0 {
            return Err(Error::Invalid("cut counts are indexed from n = 1".into()));
        }
        let overflow = || Error::Overflow(format!("r_{n} of `{self}` exceeds 64 bits"));
        match self {
            CutRule::Constant { value } => Ok(*value),
            CutRule::PowerCeil { c, alpha } => {
                if !c.is_positive() || alpha.is_negative() {
                    return Err(Error::Invalid(format!("`{self}` needs c > 0 and alpha >= 0")));
                }
                power_ceil(c, alpha, n as u64)
                    .and_then(|v| v.to_u64())
                    .ok_or_else(overflow)
            }
            CutRule::Geometric { c, beta } => beta.checked_pow(n).and_then(|b| b.checked_mul(*c)).ok_or_else(overflow),
            CutRule::Prefix { values } => values
                .get(n as usize - 1)
                .copied()
                .ok_or_else(|| Error::StageUnavailable {
                    stage: n,
                    reason: format!("cut prefix has only {} values", values.len()),
                }),
        }
    }

    /// Largest `n` for which `r_n` exists, if bounded.
    pub fn horizon(&self) -> Option<u32> {
        match self {
            CutRule::Prefix { values } => Some(values.len() as u32),
            _ => None,
        }
    }
}

/// A member of the `V_L` family: `L`, the cut rule and the vector order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VlSpec {
    #[serde(rename = "L")]
    pub l: u32,
    pub r: CutRule,
    /// Explicit `v_1, v_2, ...` replacing the canonical order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<Vec<u64>>>,
    /// Last column stage that may be materialized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
}

/// Copy offsets and heights of `C_{n+1}` built from `C_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VlLayout {
    pub offsets: Vec<BigUint>,
    /// Height of the stacked subcolumns before the top spacers.
    pub g: BigUint,
    /// `h_{n+1} = 2 g`.
    pub height: BigUint,
}

/// Stacks `r` copies of a column of height `h` with vector `v = (u_1..u_L)`.
pub fn vl_layout(h: &BigUint, r: u64, v: &[u64]) -> VlLayout {
    let l = v.len() as u64;
    assert!(r > l, "r must exceed L");
    let sigma: u64 = v.iter().sum();
    let wide = h * (2 * l + 1) + BigUint::from(sigma);
    let mut offsets = Vec::with_capacity(r as usize);
    let mut pos = BigUint::zero();
    for c in 0..r {
        offsets.push(pos.clone());
        // Spacers on subcolumn c (0-based).
        let spacers = if c + l + 2 <= r {
            wide.clone()
        } else if c + 1 < r {
            let d = (c + l + 2 - r) as usize; // 1..=L
            h + BigUint::from(v[d - 1])
        } else {
            BigUint::zero()
        };
        pos = pos + h + spacers;
    }
    VlLayout {
        offsets,
        height: &pos * 2u32,
        g: pos,
    }
}

impl VlSpec {
    pub fn new(l: u32, r: CutRule) -> Self {
        VlSpec {
            l,
            r,
            order: None,
            horizon: None,
        }
    }

    pub fn with_horizon(mut self, horizon: u32) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn cuts(&self, n: u32) -> Result<u64> {
        self.r.value(n)
    }

    /// `v_j` under the canonical order or the override.
    pub fn vector(&self, j: u64) -> Result<Vec<u64>> {
        match &self.order {
            None => Ok(vectors::enumerate_vectors(self.l, j)),
            Some(list) => {
                let v = list
                    .get(j as usize - 1)
                    .ok_or_else(|| Error::Invalid(format!("vector order override has no entry v_{j}")))?;
                if v.len() != self.l as usize || vectors::vector_index(v).is_none() {
                    return Err(Error::Invalid(format!(
                        "override entry v_{j} = {v:?} is not a strictly increasing positive {}-tuple",
                        self.l
                    )));
                }
                Ok(v.clone())
            }
        }
    }

    /// `(j, s(n))`.
    pub fn s(&self, n: u32) -> Result<(u64, Vec<u64>)> {
        let j = vectors::s_index(n as u64);
        Ok((j, self.vector(j)?))
    }

    /// Checks `r_n > L` and monotonicity for `n` in `1..=up_to`.
    pub fn validate(&self, up_to: u32) -> Result<()> {
        if self.l == 0 {
            return Err(Error::Invalid("L must be positive".into()));
        }
        let mut prev = None;
        for n in 1..=up_to {
            self.check_stage(n, prev)?;
            prev = Some(self.cuts(n)?);
        }
        Ok(())
    }

    pub(crate) fn check_stage(&self, n: u32, prev: Option<u64>) -> Result<u64> {
        let r = self.cuts(n)?;
        if r <= self.l as u64 {
            return Err(Error::Schema {
                stage: n,
                message: format!("r_{n} = {r} must exceed L = {}", self.l),
            });
        }
        if let Some(p) = prev {
            if r < p {
                return Err(Error::Schema {
                    stage: n,
                    message: format!("r_{n} = {r} is smaller than r_{} = {p}", n - 1),
                });
            }
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn layouts_match_examples() {
        let lay = vl_layout(&BigUint::one(), 2, &[1]);
        assert_eq!(lay.offsets, vec![BigUint::zero(), BigUint::from(3u32)]);
        assert_eq!((lay.g.clone(), lay.height.clone()), (4u32.into(), 8u32.into()));
        let lay = vl_layout(&BigUint::one(), 3, &[1, 2]);
        assert_eq!((lay.g.clone(), lay.height.clone()), (8u32.into(), 16u32.into()));
    }

    #[test]
    fn layout_height_formula() {
        for (h, r, v) in [(7u32, 5u64, vec![1u64, 4]), (3, 3, vec![2]), (11, 9, vec![1, 2, 6])] {
            let lay = vl_layout(&BigUint::from(h), r, &v);
            let (h, l, sigma) = (h as u64, v.len() as u64, v.iter().sum::<u64>());
            let g = r * h + (r - l - 1) * ((2 * l + 1) * h + sigma) + (l * h + sigma);
            assert_eq!(lay.g, BigUint::from(g));
        }
    }

    #[test]
    fn cut_rules() {
        let sqrt = CutRule::PowerCeil {
            c: ratio(1, 1),
            alpha: ratio(1, 2),
        };
        let got: Vec<u64> = (1..=10).map(|n| sqrt.value(n).unwrap()).collect();
        assert_eq!(got, vec![1, 2, 2, 2, 3, 3, 3, 3, 3, 4]);
        let geo = CutRule::Geometric { c: 6, beta: 2 };
        assert_eq!(geo.value(3).unwrap(), 48);
        let frac = CutRule::PowerCeil {
            c: ratio(3, 2),
            alpha: ratio(1, 1),
        };
        assert_eq!(frac.value(3).unwrap(), 5);
    }

    #[test]
    fn schema_errors_name_stage() {
        let spec = VlSpec::new(2, CutRule::Prefix { values: vec![3, 4, 2] });
        match spec.validate(3) {
            Err(Error::Schema { stage: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        let spec = VlSpec::new(2, CutRule::Constant { value: 2 });
        assert!(matches!(spec.validate(1), Err(Error::Schema { stage: 1, .. })));
    }
}
