//! Two-fold products `T^p x T^q` of a four-cut family: hypothesis checks,
//! the interval table of block returns, exact return-time sets and the classifier.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::afs::{int, validate_v, AfsParams, AfsStage};
use crate::error::{Error, Result};
use crate::measure::{Fraction, MeasureValue};
use crate::par::Execution;
use crate::synthesis::{block_of, exception_bound, separated, StageRole, SynthesisTrace};
use crate::tower::{Cylinder, LevelSet, Tower};

/// `|p q_n - q p_n| <= (p + q) h_n`.
pub fn gap_condition(st: &AfsStage, p: u64, q: u64) -> bool {
    !separated(p, q, &st.p, &st.q, &st.h)
}

/// The common value of `(q_n + l)/q` and `(p_n + k)/p` when both are equal integers.
pub fn divisibility_condition(st: &AfsStage, p: u64, q: u64, k: u64, l: u64) -> Option<BigUint> {
    let (tp, rp) = (&st.p + k).div_rem(&BigUint::from(p));
    let (tq, rq) = (&st.q + l).div_rem(&BigUint::from(q));
    (rp.is_zero() && rq.is_zero() && tp == tq).then_some(tp)
}

/// A closed integer interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "ser_bigint")]
    pub lo: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub hi: BigInt,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl Interval {
    pub fn new(lo: impl Into<BigInt>, hi: impl Into<BigInt>) -> Self {
        Interval {
            lo: lo.into(),
            hi: hi.into(),
        }
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: (&self.lo).max(&other.lo).clone(),
            hi: (&self.hi).min(&other.hi).clone(),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// Lags at which block `s` of `D_n` can meet block `t` inside `G_{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KIntervalTable {
    pub stage: u32,
    /// `((s, t), K_{s,t})` for `s < t`, in row order.
    pub off_diagonal: Vec<((u8, u8), Interval)>,
    pub diagonal: Interval,
}

impl KIntervalTable {
    pub fn get(&self, s: u8, t: u8) -> Option<&Interval> {
        if s == t {
            return Some(&self.diagonal);
        }
        self.off_diagonal.iter().find(|(k, _)| *k == (s, t)).map(|e| &e.1)
    }

    /// The seven intervals, diagonal first.
    pub fn all(&self) -> Vec<&Interval> {
        std::iter::once(&self.diagonal)
            .chain(self.off_diagonal.iter().map(|e| &e.1))
            .collect()
    }

    /// Every `i > 0` with `ip` and `iq` in some pair of table intervals, as merged ranges.
    pub fn candidate_hits(&self, p: u64, q: u64) -> Vec<Interval> {
        let all = self.all();
        let mut ranges: Vec<Interval> = Vec::new();
        for a in &all {
            for b in &all {
                if let Some(r) = simultaneous_hits(p, q, a, b) {
                    ranges.push(r);
                }
            }
        }
        ranges.sort_by(|x, y| x.lo.cmp(&y.lo));
        let mut merged: Vec<Interval> = Vec::new();
        for r in ranges {
            match merged.last_mut() {
                Some(last) if r.lo <= &last.hi + 1 => {
                    if r.hi > last.hi {
                        last.hi = r.hi;
                    }
                }
                _ => merged.push(r),
            }
        }
        merged
    }
}

/// The intervals `[c - h_n, c + h_n]` around every copy-offset difference at stage `n`.
pub fn k_intervals(st: &AfsStage) -> KIntervalTable {
    let h = int(&st.h);
    let (p, l, q) = (int(&st.p), int(&st.l), int(&st.q));
    let centers = [
        ((1, 2), p.clone()),
        ((1, 3), &p + &l),
        ((1, 4), &p + &l + &q),
        ((2, 3), l.clone()),
        ((2, 4), &l + &q),
        ((3, 4), q),
    ];
    KIntervalTable {
        stage: st.n,
        off_diagonal: centers
            .into_iter()
            .map(|(k, c)| (k, Interval::new(&c - &h, &c + &h)))
            .collect(),
        diagonal: Interval::new(BigInt::zero(), h),
    }
}

/// All `i > 0` with `i p` in `a` and `i q` in `b`, as one interval (or `None`).
pub fn simultaneous_hits(p: u64, q: u64, a: &Interval, b: &Interval) -> Option<Interval> {
    let (p, q) = (BigInt::from(p), BigInt::from(q));
    let ra = Interval::new(a.lo.div_ceil(&p), a.hi.div_floor(&p));
    let rb = Interval::new(b.lo.div_ceil(&q), b.hi.div_floor(&q));
    let mut r = ra.intersect(&rb);
    if r.lo < BigInt::from(1) {
        r.lo = BigInt::from(1);
    }
    (!r.is_empty()).then_some(r)
}

/// Which target the first coordinate is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LambdaVariant {
    /// `(T^p x T^q)^i (A x A) ∩ (A x A)`.
    #[default]
    Plain,
    /// `(T^p x T^q)^i (A x A) ∩ (TA x A)`.
    ShiftedTarget,
}

/// One positive return time with its exact product measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Return {
    pub i: u64,
    pub value: MeasureValue,
}

/// `{0 < i <= horizon : mu x mu((T^p x T^q)^i (A1 x A2) ∩ (B1 x B2)) > 0}` with values.
pub fn lambda_set_general(
    tower: &Tower,
    powers: [i128; 2],
    sources: [&LevelSet; 2],
    targets: [&LevelSet; 2],
    horizon: u64,
    exec: Execution,
) -> Result<Vec<Return>> {
    if horizon == 0 {
        return Ok(Vec::new());
    }
    if powers.contains(&0) {
        return Err(Error::Invalid("powers must be nonzero".into()));
    }
    let hz = horizon as i128;
    let table = |k: usize| {
        let p = powers[k];
        let (lo, hi) = if p > 0 { (p, p * hz) } else { (p * hz, p) };
        tower.correlation_table(
            &Cylinder::new(sources[k].clone()),
            &Cylinder::new(targets[k].clone()),
            lo,
            hi,
        )
    };
    let (t1, t2) = exec.join(|| table(0), || table(1));
    let (t1, t2) = (t1?, t2?);
    let (p, q) = (powers[0], powers[1]);
    let mut out = Vec::new();
    for (lag, _) in &t1.counts {
        if lag % p != 0 {
            continue;
        }
        let i = lag / p;
        if i < 1 || i > hz {
            continue;
        }
        if t2.count(q * i) > 0 {
            out.push(Return {
                i: i as u64,
                value: t1.value(*lag) * t2.value(q * i),
            });
        }
    }
    out.sort_by_key(|r| r.i);
    Ok(out)
}

/// Positive return times of `A x A` (or, in the variant, into `TA x A`) up to `horizon`.
pub fn lambda_set(
    tower: &Tower,
    p: i128,
    q: i128,
    a: &LevelSet,
    horizon: u64,
    variant: LambdaVariant,
    exec: Execution,
) -> Result<Vec<Return>> {
    let shifted;
    let first_target = match variant {
        LambdaVariant::Plain => a,
        LambdaVariant::ShiftedTarget => {
            shifted = tower.apply_power(a, 1)?;
            &shifted
        }
    };
    lambda_set_general(tower, [p, q], [a, a], [first_target, a], horizon, exec)
}

/// Nonzero `mu(T^{pi} A ∩ T^{qi} A ∩ A)` for `0 < i <= horizon`.
///
/// Only times that are simultaneous returns of `A` can contribute, so the
/// pairwise return set is computed first and the triple count runs on it alone.
pub fn triple_scan(
    tower: &Tower,
    a: &LevelSet,
    p: i128,
    q: i128,
    horizon: u64,
    exec: Execution,
) -> Result<Vec<Return>> {
    let candidates = lambda_set(tower, p, q, a, horizon, LambdaVariant::Plain, exec)?;
    let values = exec.try_map(&candidates, |r| tower.triple_correlation(a, p, q, r.i as i128))?;
    Ok(candidates
        .into_iter()
        .zip(values)
        .filter(|(_, v)| !v.is_zero())
        .map(|(r, value)| Return { i: r.i, value })
        .collect())
}

/// Closed-form descriptions of `p_n / q_n` with a known set of accumulation points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatioRule {
    Constant(BigRational),
    /// Values repeat with the given cycle after a finite prefix.
    EventuallyPeriodic {
        prefix: Vec<BigRational>,
        cycle: Vec<BigRational>,
    },
    /// The rule's author states the accumulation set.
    Declared(Vec<BigRational>),
}

impl RatioRule {
    /// The accumulation set `F`.
    pub fn limit_set(&self) -> Vec<BigRational> {
        let mut v = match self {
            RatioRule::Constant(r) => vec![r.clone()],
            RatioRule::EventuallyPeriodic { cycle, .. } => cycle.clone(),
            RatioRule::Declared(v) => v.clone(),
        };
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Member,
    NonMember,
    Unknown,
}

/// Exact membership of `p/q` in the accumulation set of a closed-form rule.
pub fn limit_ratio_membership(rule: &RatioRule, p: u64, q: u64) -> Result<Membership> {
    if p > q {
        return Err(Error::Precondition(format!("need p <= q, got {p}/{q}")));
    }
    let r = BigRational::new(p.into(), q.into());
    Ok(if rule.limit_set().contains(&r) {
        Membership::Member
    } else {
        Membership::NonMember
    })
}

/// Prefix evidence: stages where `|p/q - p_n/q_n| < eps`. Membership stays unknown.
pub fn ratio_prefix_evidence(
    params: &AfsParams,
    up_to: u32,
    p: u64,
    q: u64,
    eps: &BigRational,
) -> Result<(Vec<u32>, Membership)> {
    if p > q {
        return Err(Error::Precondition(format!("need p <= q, got {p}/{q}")));
    }
    let r = BigRational::new(p.into(), q.into());
    let hits = params
        .materialize(up_to)?
        .iter()
        .filter(|st| (BigRational::new(int(&st.p), int(&st.q)) - &r).abs() < *eps)
        .map(|st| st.n)
        .collect();
    Ok((hits, Membership::Unknown))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Ergodic,
    ConservativeNotErgodic,
    NotConservative,
    UnknownAtHorizon,
}

impl Regime {
    /// Process exit code for scripting.
    pub fn exit_code(self) -> i32 {
        match self {
            Regime::Ergodic => 0,
            Regime::ConservativeNotErgodic => 3,
            Regime::NotConservative => 4,
            Regime::UnknownAtHorizon => 5,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Ergodic => "ergodic",
            Regime::ConservativeNotErgodic => "conservative-not-ergodic",
            Regime::NotConservative => "not-conservative",
            Regime::UnknownAtHorizon => "unknown-at-horizon",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Certificate,
    PrefixEvidence,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Certificate => "certificate",
            Basis::PrefixEvidence => "prefix-evidence",
        })
    }
}

/// The regime of `T^{±p} x T^q` and what supports it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    /// The pair as requested.
    pub requested: (u64, u64),
    /// The pair the theorems were applied to: reduced, with `p <= q`.
    pub p: u64,
    pub q: u64,
    pub negative_first: bool,
    pub reduced: bool,
    pub swapped: bool,
    pub regime: Regime,
    pub basis: Basis,
    /// Stage beyond which the certified hypothesis holds at every stage.
    pub threshold: Option<u32>,
    /// Last stage inspected.
    pub horizon: u32,
    pub facts: Vec<String>,
}

/// Classifies `T^{±p} x T^q` for a four-cut family.
///
/// Certificates come from a synthesis trace or from the preset rule; anything
/// else yields prefix evidence only. `horizon` is the last stage re-checked.
pub fn classify(
    params: &AfsParams,
    trace: Option<&SynthesisTrace>,
    p: u64,
    q: u64,
    negative_first: bool,
    horizon: u32,
) -> Result<Verdict> {
    if p == 0 || q == 0 {
        return Err(Error::Invalid("powers must be positive".into()));
    }
    let g = p.gcd(&q);
    let (mut rp, mut rq) = (p / g, q / g);
    let swapped = rp > rq;
    if swapped {
        std::mem::swap(&mut rp, &mut rq);
    }
    let mut v = Verdict {
        requested: (p, q),
        p: rp,
        q: rq,
        negative_first,
        reduced: g != 1,
        swapped,
        regime: Regime::UnknownAtHorizon,
        basis: Basis::PrefixEvidence,
        threshold: None,
        horizon,
        facts: Vec::new(),
    };
    if g != 1 {
        v.facts
            .push(format!("reduced {p}/{q} to {}/{} by gcd {g}", p / g, q / g));
    }
    if swapped {
        v.facts
            .push("swapped coordinates: T^p x T^q is isomorphic to T^q x T^p".into());
    }
    let horizon = match (trace, params.horizon()) {
        (Some(t), _) => horizon.min(t.up_to()),
        (None, Some(hz)) => horizon.min(hz),
        (None, None) => horizon,
    };
    v.horizon = horizon;
    let stages = params.materialize(horizon)?;

    if let Some(trace) = trace {
        trace.recheck(params)?;
        v.facts
            .push(format!("trace re-checked at stages 0..={}", trace.up_to()));
        if rp < rq {
            let dir = Fraction::direction(rp, rq)?;
            if trace.spec.r.contains(&dir) {
                return certified_target(v, trace, dir, &stages);
            }
            if !negative_first {
                let sep = trace.spec.separation_list();
                if let Some(pos) = sep.iter().position(|f| *f == dir) {
                    let bar = exception_bound(pos + 1, trace.spec.r.len());
                    return certified_separation(
                        v,
                        &stages,
                        bar,
                        &format!("{dir} is entry {} of the separation list", pos + 1),
                    );
                }
            }
        }
    } else if params.has_preset_rules() && !negative_first {
        validate_class(params, horizon)?;
        if rp == rq {
            v.regime = Regime::Ergodic;
            v.basis = Basis::Certificate;
            v.facts
                .push("preset a_n = 3h_n, c_n = a_n + 1: infinite ergodic index".into());
            return Ok(v);
        }
        return certified_separation(v, &stages, 0, "preset rule a_n = 3h_n, c_n = a_n + 1");
    }

    // Prefix evidence only.
    let gaps: Vec<u32> = stages
        .iter()
        .filter(|s| gap_condition(s, rp, rq))
        .map(|s| s.n)
        .collect();
    let exact: Vec<u32> = stages
        .iter()
        .filter(|s| divisibility_condition(s, rp, rq, 0, 0).is_some())
        .map(|s| s.n)
        .collect();
    v.facts.push(format!("stages with |pq_n-qp_n| <= (p+q)h_n: {gaps:?}"));
    v.facts.push(format!("stages with q_n/q = p_n/p integral: {exact:?}"));
    Ok(v)
}

fn validate_class(params: &AfsParams, horizon: u32) -> Result<()> {
    let report = validate_v(params, horizon)?;
    if let Some(c) = report.failures().next() {
        return Err(Error::InconsistentCertificate(format!(
            "stage {}: class check `{}` fails",
            c.stage, c.name
        )));
    }
    Ok(())
}

/// Stage after which `(q - p)(n + 2) > 2p + q` always holds. At preset stages that
/// gives `|p q_n - q p_n| > (p + q) h_n`, since `p_n >= (n + 2) h_n` and `q_n = p_n + 1`.
pub fn preset_threshold(p: u64, q: u64) -> u32 {
    assert!(p < q);
    let (d, rhs) = ((q - p) as u128, (2 * p + q) as u128);
    // Smallest admissible n + 2 is rhs / d + 1.
    (rhs / d + 1).saturating_sub(3).to_u32().unwrap_or(u32::MAX)
}

fn certified_target(mut v: Verdict, trace: &SynthesisTrace, dir: Fraction, stages: &[AfsStage]) -> Result<Verdict> {
    let ergodic = trace.spec.is_ergodic_target(&dir);
    let own: Vec<&crate::synthesis::StageRecord> = trace.stages.iter().filter(|r| r.target == Some(dir)).collect();
    v.basis = Basis::Certificate;
    if ergodic {
        v.regime = Regime::Ergodic;
        v.facts.push(format!(
            "{dir} is a target: blocks {{n(i,j)}} solve (q_n+l(j))/q = (p_n+k(j))/p, every (k,l) recurring"
        ));
        for r in &own {
            v.facts.push(format!(
                "stage {}: (k,l)=({},{}) t_n={}",
                r.n,
                r.k,
                r.l,
                r.t.as_ref().map(|t| t.to_string()).unwrap_or_default()
            ));
        }
        return Ok(v);
    }
    if v.negative_first {
        v.basis = Basis::PrefixEvidence;
        v.facts
            .push("negative first power is certified only for ergodic targets".into());
        return Ok(v);
    }
    // Exact target: zero discrepancy on its own blocks, separation elsewhere.
    let sep = trace.spec.separation_list();
    let pos = sep.iter().position(|f| *f == dir).expect("exact targets are listed") + 1;
    let bar = exception_bound(pos, trace.spec.r.len()).max(preset_threshold(v.p, v.q) as u64);
    for st in stages {
        let rec = &trace.stages[st.n as usize];
        let zero = crate::synthesis::discrepancy(v.p, v.q, &st.p, &st.q).is_zero();
        if rec.role == StageRole::Exact && rec.target == Some(dir) {
            if !zero || !(&st.q % v.q).is_zero() {
                return Err(Error::InconsistentCertificate(format!(
                    "stage {}: exact stage for {dir} is not proportional",
                    st.n
                )));
            }
        } else if (st.n as u64) > bar && !zero && !separated(v.p, v.q, &st.p, &st.q, &st.h) {
            return Err(Error::InconsistentCertificate(format!(
                "stage {}: |pq_n-qp_n| <= (p+q)h_n beyond threshold {bar}",
                st.n
            )));
        }
    }
    v.regime = Regime::ConservativeNotErgodic;
    v.threshold = Some(bar as u32);
    v.facts.push(format!(
        "{dir} in R2\\R1: q_n = (q/p) p_n with q | q_n on its blocks, separated beyond stage {bar}"
    ));
    let exact: Vec<u32> = own.iter().map(|r| r.n).collect();
    v.facts.push(format!("zero-discrepancy stages: {exact:?}"));
    Ok(v)
}

fn certified_separation(mut v: Verdict, stages: &[AfsStage], claimed_bar: u64, why: &str) -> Result<Verdict> {
    let bar = claimed_bar.max(preset_threshold(v.p, v.q) as u64);
    for st in stages.iter().filter(|s| s.n as u64 > bar) {
        if !separated(v.p, v.q, &st.p, &st.q, &st.h) {
            return Err(Error::InconsistentCertificate(format!(
                "stage {}: |pq_n-qp_n| <= (p+q)h_n beyond threshold {bar}",
                st.n
            )));
        }
    }
    if let Some(st) = stages.iter().find(|s| s.n as u64 > bar && s.n > 0) {
        let (i, j) = block_of(st.n as u64);
        v.facts
            .push(format!("first stage past threshold: {} (block {i}, {j})", st.n));
    }
    v.regime = Regime::NotConservative;
    v.basis = Basis::Certificate;
    v.threshold = Some(bar as u32);
    v.facts.push(format!("{why}; |pq_n-qp_n| > (p+q)h_n for all n > {bar}"));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afs::preset_infinite_ergodic_index;

    fn stage(p: u64, q: u64, h: u64) -> AfsStage {
        let z = BigUint::zero();
        AfsStage {
            n: 0,
            big_h: z.clone(),
            h: h.into(),
            a: z.clone(),
            b: z.clone(),
            c: z.clone(),
            d: z.clone(),
            p: p.into(),
            l: z.clone(),
            q: q.into(),
            m: z,
        }
    }

    #[test]
    fn conditions() {
        assert!(gap_condition(&stage(4, 5, 1), 1, 2));
        assert!(gap_condition(&stage(7, 7, 1), 1, 1));
        assert!(!gap_condition(&stage(4, 12, 1), 1, 2));
        assert_eq!(divisibility_condition(&stage(4, 8, 1), 1, 2, 0, 0), Some(4u32.into()));
        assert_eq!(divisibility_condition(&stage(4, 9, 1), 1, 2, 0, 0), None);
        assert_eq!(divisibility_condition(&stage(3, 6, 1), 1, 2, 1, 2), Some(4u32.into()));
    }

    #[test]
    fn table_and_hits() {
        let st = AfsParams::constant(3, 10, 4, 20).stage(0).unwrap();
        let t = k_intervals(&st);
        let show = |s, u| t.get(s, u).unwrap().to_string();
        assert_eq!(show(1, 2), "[3,5]");
        assert_eq!(show(2, 3), "[10,12]");
        assert_eq!(show(3, 4), "[4,6]");
        assert_eq!(show(1, 3), "[14,16]");
        assert_eq!(show(2, 4), "[15,17]");
        assert_eq!(show(1, 4), "[19,21]");
        assert_eq!(show(2, 2), "[0,1]");
        let i = |a: i64, b: i64| Interval::new(a, b);
        assert_eq!(simultaneous_hits(1, 2, &i(3, 5), &i(4, 6)), Some(i(3, 3)));
        assert_eq!(simultaneous_hits(1, 2, &i(3, 5), &i(19, 21)), None);
        assert_eq!(simultaneous_hits(1, 2, &i(10, 12), &i(19, 21)), Some(i(10, 10)));
    }

    #[test]
    fn limit_sets() {
        let half = BigRational::new(1.into(), 2.into());
        let third = BigRational::new(1.into(), 3.into());
        let c = RatioRule::Constant(half.clone());
        assert_eq!(limit_ratio_membership(&c, 1, 3).unwrap(), Membership::NonMember);
        assert_eq!(limit_ratio_membership(&c, 1, 2).unwrap(), Membership::Member);
        let alt = RatioRule::EventuallyPeriodic {
            prefix: vec![],
            cycle: vec![half, third],
        };
        assert_eq!(limit_ratio_membership(&alt, 1, 3).unwrap(), Membership::Member);
        assert!(limit_ratio_membership(&alt, 3, 1).is_err());
    }

    #[test]
    fn preset_verdicts() {
        let preset = preset_infinite_ergodic_index();
        let v = classify(&preset, None, 1, 2, false, 6).unwrap();
        assert_eq!((v.regime, v.basis), (Regime::NotConservative, Basis::Certificate));
        assert_eq!(v.threshold, Some(2));
        let v = classify(&preset, None, 3, 3, false, 4).unwrap();
        assert_eq!(v.regime, Regime::Ergodic);
        assert!(v.reduced);
        let other = AfsParams::constant(3, 10, 4, 20);
        let v = classify(&other, None, 1, 2, false, 2).unwrap();
        assert_eq!(v.regime, Regime::UnknownAtHorizon);
    }

    #[test]
    fn thresholds() {
        // (q-p)(n+2) > 2p+q.
        assert_eq!(preset_threshold(1, 2), 2);
        assert_eq!(preset_threshold(2, 5), 1);
        assert_eq!(preset_threshold(1, 100), 0);
    }
}
