//! Searching the return times `t(i)` for a time at which a product of levels
//! sweeps into another with at least half its independent share.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::independence::{check_vector, lag, t_times};
use super::vectors::vector_index;
use crate::error::{Error, Result};
use crate::measure::MeasureValue;
use crate::par::Execution;
use crate::tower::{FamilySpec, LevelSet, Tower};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub i: u64,
    pub stage: u32,
    #[serde(with = "crate::serde_util::biguint")]
    pub t: BigUint,
    pub value: MeasureValue,
    /// `prod mu(A_p) / r_{l(i)}^k`.
    pub expected: MeasureValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepOutcome {
    pub j: u64,
    pub vector: Vec<u64>,
    pub probes: Vec<Probe>,
    /// Least `i` with `value >= expected / 2`.
    pub hit: Option<u64>,
}

/// Position differences `a_p - b_p`, which must be positive and strictly increasing.
fn differences(a: &[LevelSet], b: &[LevelSet], n: u32) -> Result<Vec<u64>> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::LengthMismatch(format!(
            "{} source and {} target levels",
            a.len(),
            b.len()
        )));
    }
    let mut out = Vec::with_capacity(a.len());
    for (p, (x, y)) in a.iter().zip(b).enumerate() {
        if x.stage() != n || y.stage() != n || x.len() != 1 || y.len() != 1 {
            return Err(Error::Invalid(format!(
                "coordinate {p} is not a pair of single levels of C_{n}"
            )));
        }
        let d = x.indices()[0] as i128 - y.indices()[0] as i128;
        out.push(d);
    }
    if out.iter().any(|&d| d <= 0) || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NoAdmissibleVector(format!(
            "position differences {out:?} must be positive and strictly increasing; \
             reorder the coordinates so each A_p sits higher above B_p than the previous one"
        )));
    }
    out.into_iter()
        .map(|d| d.to_u64().ok_or_else(|| Error::Overflow("position difference".into())))
        .collect()
}

/// A vector index whose coordinates contain every difference.
fn choose_vector(tower: &Tower, diffs: &[u64], n: u32, j: Option<u64>) -> Result<u64> {
    let FamilySpec::Vl(spec) = tower.spec() else {
        return Err(Error::Invalid("the sweep probe runs on V_L families".into()));
    };
    let l = spec.l as usize;
    if diffs.len() > l {
        return Err(Error::NoAdmissibleVector(format!(
            "{} coordinates need {} distinct differences but vectors have L = {l} entries",
            diffs.len(),
            diffs.len()
        )));
    }
    let j = match j {
        Some(j) => j,
        None if spec.order.is_some() => {
            let list = spec.order.as_ref().expect("checked");
            let pos = list
                .iter()
                .position(|v| diffs.iter().all(|d| v.contains(d)))
                .ok_or_else(|| Error::NoAdmissibleVector(format!("no listed vector contains {diffs:?}")))?;
            pos as u64 + 1
        }
        None => {
            let mut v = diffs.to_vec();
            let mut next = *v.last().expect("nonempty");
            while v.len() < l {
                next += 1;
                v.push(next);
            }
            vector_index(&v).expect("strictly increasing positive tuple")
        }
    };
    let v = check_vector(tower, n, j)?;
    if let Some(d) = diffs.iter().find(|d| !v.contains(d)) {
        return Err(Error::NoAdmissibleVector(format!(
            "v_{j} = {v:?} has no coordinate {d}"
        )));
    }
    Ok(j)
}

/// Probes `i = 1..=count` for `mu(A ∩ T^{-t(i)} B) >= (1/2) prod mu(A_p) r_{l(i)}^{-k}`.
pub fn sweep_probe(
    tower: &Tower,
    a: &[LevelSet],
    b: &[LevelSet],
    n: u32,
    j: Option<u64>,
    count: u64,
    exec: Execution,
) -> Result<SweepOutcome> {
    let diffs = differences(a, b, n)?;
    let j = choose_vector(tower, &diffs, n, j)?;
    let vector = check_vector(tower, n, j)?;
    let k = a.len() as i32;
    let mass = a
        .iter()
        .map(|s| tower.measure(s))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .product::<MeasureValue>();
    let powers = vec![1i128; a.len()];
    let indices: Vec<u64> = (1..=count).collect();
    let probes = exec.try_map(&indices, |&i| {
        let rt = t_times(tower, n, j, i)?;
        let r = tower.cuts_after(rt.stage)?;
        let expected =
            MeasureValue::from_ratio(mass.as_ratio() / BigRational::from_integer(BigInt::from(r).pow(k as u32)));
        let value = tower.product_correlation(a, b, &powers, lag(&rt.t)?)?;
        Ok::<_, Error>(Probe {
            i,
            stage: rt.stage,
            t: rt.t,
            value,
            expected,
        })
    })?;
    let hit = probes
        .iter()
        .find(|p| p.value.as_ratio() * BigRational::from_integer(2.into()) >= *p.expected.as_ratio())
        .map(|p| p.i);
    Ok(SweepOutcome { j, vector, probes, hit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic_index::vl::{CutRule, VlSpec};

    #[test]
    fn finds_a_time_for_divergent_family() {
        let t = Tower::vl(VlSpec::new(1, CutRule::Constant { value: 2 }));
        let a = [LevelSet::single(2, 3)];
        let b = [LevelSet::single(2, 2)];
        let out = sweep_probe(&t, &a, &b, 2, None, 3, Execution::Sequential).unwrap();
        assert_eq!(out.vector, vec![1]);
        assert_eq!(out.hit, Some(1));
    }

    #[test]
    fn unordered_coordinates_are_rejected() {
        let t = Tower::vl(VlSpec::new(2, CutRule::Constant { value: 3 }));
        let a = [LevelSet::single(2, 5), LevelSet::single(2, 4)];
        let b = [LevelSet::single(2, 2), LevelSet::single(2, 3)];
        assert!(matches!(
            sweep_probe(&t, &a, &b, 2, None, 1, Execution::Sequential),
            Err(Error::NoAdmissibleVector(_))
        ));
    }
}
