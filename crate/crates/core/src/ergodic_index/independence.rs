//! Exact checks of pairwise independence of the return sets along `t(i) = 2 h_l(i)`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::vectors::lemma_stage;
use crate::error::{Error, Result};
use crate::measure::MeasureValue;
use crate::par::Execution;
use crate::tower::{Cylinder, FamilySpec, LevelSet, Tower};

/// Which conditional measure the sets are taken under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// `T^{-t(i)} J` under `mu_I`.
    Source,
    /// `T^{t(i)} I` under `mu_J`.
    Target,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReturnTime {
    pub i: u64,
    pub stage: u32,
    #[serde(with = "crate::serde_util::biguint")]
    pub t: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairIdentity {
    pub i: u64,
    pub i2: u64,
    pub joint: MeasureValue,
    pub product: MeasureValue,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub n: u32,
    pub j: u64,
    pub conditioning: Conditioning,
    pub times: Vec<ReturnTime>,
    pub marginals: Vec<MeasureValue>,
    pub pairs: Vec<PairIdentity>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.holds)
    }
}

/// Stage `l(i)` as a `u32`, or an error naming it.
fn stage_of(n: u32, j: u64, i: u64) -> Result<u32> {
    lemma_stage(n as u64, j, i)
        .and_then(|l| l.to_u32())
        .ok_or_else(|| Error::Overflow(format!("stage l({i}) for n = {n}, j = {j}")))
}

/// `t(i) = 2 h_{l(i)}` with `l(i) = 2^{j-1} + (i + n) 2^j`.
pub fn t_times(tower: &Tower, n: u32, j: u64, i: u64) -> Result<ReturnTime> {
    if n == 0 || j == 0 || i == 0 {
        return Err(Error::Invalid("n, j and i start at 1".into()));
    }
    let stage = stage_of(n, j, i)?;
    let h = tower.marker(stage).map_err(|e| match e {
        Error::StageUnavailable { reason, .. } => Error::StageUnavailable {
            stage,
            reason: format!("t({i}) needs h_{stage}: {reason}"),
        },
        other => other,
    })?;
    Ok(ReturnTime { i, stage, t: h * 2u32 })
}

pub(crate) fn lag(t: &BigUint) -> Result<i128> {
    t.to_i128()
        .ok_or_else(|| Error::Overflow(format!("time {t} exceeds 128 bits")))
}

/// Rejects `v_j` unless its largest coordinate is below `h_n`.
pub(crate) fn check_vector(tower: &Tower, n: u32, j: u64) -> Result<Vec<u64>> {
    let FamilySpec::Vl(spec) = tower.spec() else {
        return Err(Error::Invalid("return times are defined for V_L families".into()));
    };
    let v = spec.vector(j)?;
    let h = tower.marker(n)?;
    let u_l = *v.last().expect("L >= 1");
    if BigUint::from(u_l) >= h {
        return Err(Error::Precondition(format!(
            "v_{j} = {v:?} has u_L = {u_l} >= h_{n} = {h}"
        )));
    }
    Ok(v)
}

/// Checks `mu_I(T^{-t(i)}J ∩ T^{-t(i')}J) = mu_I(T^{-t(i)}J) mu_I(T^{-t(i')}J)` for all
/// `1 <= i < i' <= count`, or the `mu_J` form for [`Conditioning::Target`].
#[allow(clippy::too_many_arguments)]
pub fn independence_check(
    tower: &Tower,
    i_level: &LevelSet,
    j_level: &LevelSet,
    n: u32,
    j: u64,
    count: u64,
    conditioning: Conditioning,
    exec: Execution,
) -> Result<IndependenceReport> {
    for set in [i_level, j_level] {
        if set.stage() != n || set.len() != 1 {
            return Err(Error::Invalid(format!("{set} is not a single level of C_{n}")));
        }
        tower.validate_set(set)?;
    }
    check_vector(tower, n, j)?;
    let times = (1..=count)
        .map(|i| t_times(tower, n, j, i))
        .collect::<Result<Vec<_>>>()?;
    let lags = times.iter().map(|t| lag(&t.t)).collect::<Result<Vec<_>>>()?;

    let (ci, cj) = (Cylinder::new(i_level.clone()), Cylinder::new(j_level.clone()));
    let base = match conditioning {
        Conditioning::Source => tower.measure(i_level)?,
        Conditioning::Target => tower.measure(j_level)?,
    };
    let cond = |m: MeasureValue| MeasureValue::from_ratio(m.into_ratio() / base.as_ratio());

    let marginals = exec.try_map(&lags, |&t| tower.correlation(i_level, j_level, t).map(cond))?;

    let index_pairs: Vec<(usize, usize)> = (0..lags.len())
        .flat_map(|a| (a + 1..lags.len()).map(move |b| (a, b)))
        .collect();
    let pairs = exec.try_map(&index_pairs, |&(a, b)| {
        let joint = match conditioning {
            Conditioning::Source => tower.triple_measure([(&ci, 0), (&cj, lags[a]), (&cj, lags[b])])?,
            Conditioning::Target => tower.triple_measure([(&cj, 0), (&ci, -lags[a]), (&ci, -lags[b])])?,
        };
        let joint = cond(joint);
        let product = marginals[a].clone() * marginals[b].clone();
        Ok::<_, Error>(PairIdentity {
            i: a as u64 + 1,
            i2: b as u64 + 1,
            holds: joint == product,
            joint,
            product,
        })
    })?;
    Ok(IndependenceReport {
        n,
        j,
        conditioning,
        times,
        marginals,
        pairs,
    })
}
