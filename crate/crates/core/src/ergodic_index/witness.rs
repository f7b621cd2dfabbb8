//! The product sets `A`, `B` that witness non-ergodicity of the `k`-fold product.
//!
//! Levels are indexed from the bottom of `C_n`; the top level `I_1` is index
//! `h_n - 1` and the one below it, `I_2`, is `h_n - 2`.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::series::tail_bound;
use crate::error::{Error, Result};
use crate::measure::MeasureValue;
use crate::par::Execution;
use crate::tower::{Cylinder, FamilySpec, LagTable, LevelSet, Tower};

/// `A = I_1^k` and `B = (I_1^{k-1} x I_2) \ U_{m=n}^{M} R_m^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessPair {
    pub l: u32,
    pub k: u32,
    pub n: u32,
    /// Last stage whose `R_m` is removed.
    pub m: u32,
    pub i1: LevelSet,
    pub i2: LevelSet,
    /// `(stage, copies)`: `R_m` is the union of these copies of `C_m` inside `C_{m+1}`.
    pub removed: Vec<(u32, Vec<usize>)>,
    #[serde(serialize_with = "crate::serde_util::ratio::serialize")]
    pub tail_bound: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub horizon: i128,
    /// Lags at which the unrestricted terms were both nonzero and had to be summed.
    pub lags_checked: usize,
    pub first_nonzero: Option<(i128, MeasureValue)>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.first_nonzero.is_none()
    }
}

/// Builds the witness for `1 < k <= L` on a `V_L` family, removing `R_n..R_M`.
pub fn witness_sets(tower: &Tower, k: u32, n: u32, m: u32) -> Result<WitnessPair> {
    let FamilySpec::Vl(spec) = tower.spec() else {
        return Err(Error::Invalid("witnesses are defined for V_L families".into()));
    };
    let l = spec.l;
    if k < 2 || k > l {
        return Err(Error::Precondition(format!("need 1 < k <= L, got k = {k}, L = {l}")));
    }
    if n < 2 || m < n {
        return Err(Error::Precondition(format!("need 2 <= n <= M, got n = {n}, M = {m}")));
    }
    let tail = tail_bound(&spec.r, l, k, n)?;
    if tail >= BigRational::one() {
        return Err(Error::TailCondition {
            stage: n,
            bound: crate::measure::ratio_to_string(&tail),
        });
    }
    let h = tower
        .marker(n)?
        .to_u128()
        .ok_or_else(|| Error::Overflow(format!("h_{n}")))?;
    if h < 2 {
        return Err(Error::Precondition(format!("C_{n} has fewer than two levels")));
    }
    let removed = (n..=m)
        .map(|s| {
            let r = tower.cuts_after(s)?;
            Ok((s + 1, (r - l as usize - 1..r).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessPair {
        l,
        k,
        n,
        m,
        i1: LevelSet::single(n, h - 1),
        i2: LevelSet::single(n, h - 2),
        removed,
        tail_bound: tail,
    })
}

impl WitnessPair {
    /// Index sets `S` of the inclusion-exclusion sum, as positions into `removed`.
    fn subsets(&self) -> Vec<Vec<usize>> {
        let len = self.removed.len();
        (0u64..1 << len)
            .map(|mask| (0..len).filter(|b| mask >> b & 1 == 1).collect())
            .collect()
    }

    /// `level` restricted to `R_m` for every `m` in `subset`.
    fn restricted(&self, level: &LevelSet, subset: &[usize]) -> Result<Cylinder> {
        subset.iter().try_fold(Cylinder::new(level.clone()), |c, &s| {
            let (stage, copies) = &self.removed[s];
            c.restrict(*stage, copies.iter().copied())
        })
    }

    /// `mu^k(B)` by inclusion-exclusion over the removed unions.
    pub fn measure_b(&self, tower: &Tower) -> Result<MeasureValue> {
        let mut total = BigRational::zero();
        for s in self.subsets() {
            let a = self.restricted(&self.i1, &s)?.measure(tower)?;
            let b = self.restricted(&self.i2, &s)?.measure(tower)?;
            let term = a.pow(self.k - 1) * b;
            if s.len() % 2 == 0 {
                total += term.into_ratio();
            } else {
                total -= term.into_ratio();
            }
        }
        Ok(MeasureValue::from_ratio(total))
    }

    /// `mu(I_1)^k prod_m (1 - ((L+1)/r_m)^k)`.
    pub fn product_form(&self, tower: &Tower) -> Result<MeasureValue> {
        let mut out = tower.measure(&self.i1)?.pow(self.k).into_ratio();
        let mut factor = BigRational::one();
        for &(stage, ref copies) in &self.removed {
            let r = tower.cuts_after(stage - 1)?;
            let frac = BigRational::new((copies.len() as u64).into(), (r as u64).into());
            factor *= BigRational::one() - frac.pow(self.k as i32);
        }
        out *= factor;
        Ok(MeasureValue::from_ratio(out))
    }

    /// `(1 - sum_{m=n}^{M} ((L+1)/r_m)^k) mu(I_1)^k`.
    pub fn lower_bound(&self, tower: &Tower) -> Result<BigRational> {
        let mut sum = BigRational::zero();
        for &(stage, ref copies) in &self.removed {
            let r = tower.cuts_after(stage - 1)?;
            sum += BigRational::new((copies.len() as u64).into(), (r as u64).into()).pow(self.k as i32);
        }
        Ok((BigRational::one() - sum) * tower.measure(&self.i1)?.pow(self.k).into_ratio())
    }

    /// Largest horizon for which the truncated removal still covers the induction.
    pub fn max_horizon(&self, tower: &Tower) -> Result<i128> {
        tower
            .marker(self.m + 1)?
            .to_i128()
            .ok_or_else(|| Error::Overflow(format!("h_{}", self.m + 1)))
    }
}

fn scan(
    tower: &Tower,
    pair: &WitnessPair,
    horizon: i128,
    subsets: Vec<Vec<usize>>,
    exec: Execution,
) -> Result<WitnessReport> {
    let max = pair.max_horizon(tower)?;
    if horizon < 0 || horizon > max {
        return Err(Error::Precondition(format!(
            "horizon {horizon} exceeds h_{} = {max}, the range covered by removing R_{}..R_{}",
            pair.m + 1,
            pair.n,
            pair.m
        )));
    }
    let a = Cylinder::new(pair.i1.clone());
    let tables: Vec<(LagTable, LagTable, bool)> = exec.try_map(&subsets, |s| {
        let t11 = tower.correlation_table(&a, &pair.restricted(&pair.i1, s)?, -horizon, horizon)?;
        let t12 = tower.correlation_table(&a, &pair.restricted(&pair.i2, s)?, -horizon, horizon)?;
        Ok::<_, Error>((t11, t12, s.len() % 2 == 1))
    })?;
    let (free11, free12) = (&tables[0].0, &tables[0].1);
    let support: BTreeSet<i128> = free11.lags().filter(|&i| free12.count(i) > 0).collect();
    let k = pair.k;
    let lags: Vec<i128> = support.into_iter().collect();
    let values = exec.map(&lags, |&i| {
        let mut total = BigRational::zero();
        for (t11, t12, odd) in &tables {
            let term = t11.value(i).pow(k - 1) * t12.value(i);
            if *odd {
                total -= term.into_ratio();
            } else {
                total += term.into_ratio();
            }
        }
        total
    });
    let first_nonzero = lags
        .iter()
        .zip(values)
        .filter(|(_, v)| !v.is_zero())
        .min_by_key(|(i, _)| (i.abs(), **i))
        .map(|(&i, v)| (i, MeasureValue::from_ratio(v)));
    Ok(WitnessReport {
        horizon,
        lags_checked: lags.len(),
        first_nonzero,
    })
}

/// Checks `mu^k(T_k^i A ∩ B) = 0` for every `|i| <= horizon <= h_{M+1}`.
pub fn witness_verify(tower: &Tower, pair: &WitnessPair, horizon: i128, exec: Execution) -> Result<WitnessReport> {
    scan(tower, pair, horizon, pair.subsets(), exec)
}

/// The same scan with nothing removed from `B`; a sound witness makes this fail.
pub fn witness_verify_corrupted(
    tower: &Tower,
    pair: &WitnessPair,
    horizon: i128,
    exec: Execution,
) -> Result<WitnessReport> {
    scan(tower, pair, horizon, vec![Vec::new()], exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic_index::vl::{CutRule, VlSpec};

    fn family() -> Tower {
        Tower::vl(VlSpec::new(2, CutRule::Geometric { c: 6, beta: 2 }))
    }

    #[test]
    fn measures_agree() {
        let t = family();
        let w = witness_sets(&t, 2, 2, 3).unwrap();
        let ie = w.measure_b(&t).unwrap();
        assert_eq!(ie, w.product_form(&t).unwrap());
        assert!(ie.as_ratio() >= &w.lower_bound(&t).unwrap());
        assert!(!ie.is_zero());
    }

    #[test]
    fn small_scan() {
        let t = family();
        // s(3) = (1, 2) gives consecutive copy spacings, so the unrestricted set meets A below h_4.
        let w = witness_sets(&t, 2, 2, 3).unwrap();
        let hz = t.marker(4).unwrap().to_i128().unwrap();
        let ok = witness_verify(&t, &w, hz, Execution::Sequential).unwrap();
        assert!(ok.passed(), "{ok:?}");
        let bad = witness_verify_corrupted(&t, &w, hz, Execution::Sequential).unwrap();
        assert!(!bad.passed());
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = family();
        assert!(matches!(witness_sets(&t, 3, 2, 3), Err(Error::Precondition(_))));
        let flat = Tower::vl(VlSpec::new(2, CutRule::Constant { value: 4 }));
        assert!(matches!(witness_sets(&flat, 2, 2, 3), Err(Error::TailCondition { .. })));
    }
}
