//! Parameter sequences for the four-cut family realizing prescribed direction sets.
//!
//! Stages are split into blocks `N(i) = {2^{i-1}(2j-1) : j >= 1}`; stage `n(i, j)`
//! serves the target ratio `r_i`. In ergodic mode it solves
//! `(q_n + l(j)) / (jq) = (p_n + k(j)) / (jp) = t` with the smallest admissible `t`;
//! in exact mode it takes `p_n = t p`, `q_n = t q`. Every claimed stage also keeps
//! `q_n * delta > 2 h_n + k + l`, which separates `r_i` from the first `i + j`
//! listed non-targets. Unclaimed stages follow the preset rule `a = 3h`, `c = a + 1`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::afs::{int, validate_v, AfsParams, Generator};
use crate::error::{Error, Result};
use crate::measure::{ratio_to_string, Fraction};

/// `n(i, j) = 2^{i-1} (2j - 1)`. Panics on zero arguments or overflow.
pub fn block_partition(i: u32, j: u64) -> u64 {
    assert!(i >= 1 && j >= 1, "block indices start at 1");
    (2 * j - 1)
        .checked_mul(1u64.checked_shl(i - 1).expect("block index too large"))
        .expect("stage overflow")
}

/// Inverse of [`block_partition`]: `(i, j)` with `n(i, j) = n`.
pub fn block_of(n: u64) -> (u32, u64) {
    assert!(n >= 1, "stages in blocks start at 1");
    let i = n.trailing_zeros();
    (i + 1, (n >> i).div_ceil(2))
}

/// Number of schedule entries in rounds `1..=b`; round `b` lists all pairs with `k + l <= b`.
pub fn schedule_round_end(b: u64) -> u64 {
    (1..=b).map(|r| (r + 1) * (r + 2) / 2).sum()
}

/// `(k(j), l(j))`: rounds `b = 1, 2, ...` each list every pair with `k + l <= b`,
/// by increasing sum and then by increasing `k`. Each pair recurs once per later round.
pub fn pair_schedule(j: u64) -> (u64, u64) {
    assert!(j >= 1, "schedule starts at j = 1");
    let mut b = 1u64;
    let mut rem = j - 1;
    loop {
        let len = (b + 1) * (b + 2) / 2;
        if rem < len {
            break;
        }
        rem -= len;
        b += 1;
    }
    // Position `rem` within pairs of sum 0, 1, ..., b.
    let mut s = 0u64;
    while rem > s {
        rem -= s + 1;
        s += 1;
    }
    (rem, s - rem)
}

/// `min |r - list[u]|` over the first `count` entries; `1` when `list` is empty.
pub fn separation(r: &Fraction, list: &[Fraction], count: usize) -> Result<BigRational> {
    if list.is_empty() {
        return Ok(BigRational::one());
    }
    if list.len() < count {
        return Err(Error::InsufficientComplement {
            needed: count,
            supplied: list.len(),
        });
    }
    Ok(list[..count].iter().map(|s| r.distance(s)).min().expect("count >= 1"))
}

/// Target ratios `R` (or `R2` with `r1 = Some(R1)`), and the complement prefix `S`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSpec {
    pub r: Vec<Fraction>,
    pub s: Vec<Fraction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<Vec<Fraction>>,
}

impl DirectionSpec {
    pub fn ergodic_set(r: Vec<Fraction>, s: Vec<Fraction>) -> Self {
        DirectionSpec { r, s, r1: None }
    }

    pub fn three_way(r1: Vec<Fraction>, r2: Vec<Fraction>, s: Vec<Fraction>) -> Self {
        DirectionSpec { r: r2, s, r1: Some(r1) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("R", &self.r), ("S", &self.s)] {
            for (k, f) in list.iter().enumerate() {
                if f.p() >= f.q() {
                    return Err(Error::Invalid(format!("{name} entry {f} is not in (0,1)")));
                }
                if list[..k].contains(f) {
                    return Err(Error::Invalid(format!("{name} lists {f} twice")));
                }
            }
        }
        if let Some(f) = self.r.iter().find(|f| self.s.contains(f)) {
            return Err(Error::Invalid(format!("{f} is listed both as a target and in S")));
        }
        if let Some(r1) = &self.r1 {
            if let Some(f) = r1.iter().find(|f| !self.r.contains(f)) {
                return Err(Error::Invalid(format!("R1 entry {f} is missing from R2")));
            }
        }
        Ok(())
    }

    pub fn is_three_way(&self) -> bool {
        self.r1.is_some()
    }

    /// Whether target `f` uses the full ergodic recipe.
    pub fn is_ergodic_target(&self, f: &Fraction) -> bool {
        match &self.r1 {
            Some(r1) => r1.contains(f),
            None => self.r.contains(f),
        }
    }

    /// `R2 \ R1`, in `R2` order; empty in ergodic-set mode.
    pub fn exact_targets(&self) -> Vec<Fraction> {
        match &self.r1 {
            Some(r1) => self.r.iter().filter(|f| !r1.contains(f)).copied().collect(),
            None => Vec::new(),
        }
    }

    /// Ratios to stay away from: `S` alone, or `S` interleaved with `R2 \ R1`.
    pub fn separation_list(&self) -> Vec<Fraction> {
        let extra = self.exact_targets();
        let mut out = Vec::with_capacity(self.s.len() + extra.len());
        let n = self.s.len().max(extra.len());
        for k in 0..n {
            out.extend(self.s.get(k));
            out.extend(extra.get(k));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageRole {
    /// `a = 3h`, `c = a + 1`.
    Preset,
    /// Offset divisibility toward a target in `R` (or `R1`).
    Ergodic,
    /// Exact proportionality toward a target in `R2 \ R1`.
    Exact,
}

impl fmt::Display for StageRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageRole::Preset => "preset",
            StageRole::Ergodic => "ergodic",
            StageRole::Exact => "exact",
        })
    }
}

/// What was chosen at one stage and why.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub n: u32,
    pub role: StageRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Fraction>,
    pub k: u64,
    pub l: u64,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_util::opt_ratio"
    )]
    pub delta: Option<BigRational>,
    /// The common integer `t_n = (p_n + k)/p = (q_n + l)/q`.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_util::opt_biguint"
    )]
    pub t: Option<BigUint>,
    #[serde(with = "crate::serde_util::biguint")]
    pub h: BigUint,
    #[serde(with = "crate::serde_util::biguint")]
    pub p: BigUint,
    #[serde(with = "crate::serde_util::biguint")]
    pub q: BigUint,
}

impl StageRecord {
    /// Facts certified at this stage, each with its truth value against the record.
    pub fn facts(&self) -> Vec<(String, bool)> {
        let mut out = Vec::new();
        let n = BigUint::from(self.n);
        match self.role {
            StageRole::Preset => {}
            StageRole::Ergodic | StageRole::Exact => {
                let target = self.target.expect("claimed stage has a target");
                let t = self.t.clone().unwrap_or_default();
                let (pp, qq) = (BigUint::from(target.p()), BigUint::from(target.q()));
                out.push((
                    format!("p_n+k = t*{}", target.p()),
                    &self.p + self.k == &t * &pp && !t.is_zero(),
                ));
                out.push((format!("q_n+l = t*{}", target.q()), &self.q + self.l == &t * &qq));
                if let Some(j) = self.j.filter(|_| self.role == StageRole::Ergodic) {
                    out.push((format!("{j} | t"), (&t % j).is_zero()));
                }
                let delta = self.delta.clone().unwrap_or_else(BigRational::one);
                let lhs = BigRational::from_integer(int(&self.q)) * &delta;
                let rhs = BigRational::from_integer(int(&(&self.h * 2u32 + self.k + self.l)));
                out.push(("q_n*delta > 2h_n+k+l".into(), lhs > rhs));
            }
        }
        out.push(("p_n <= q_n".into(), self.p <= self.q));
        out.push(("p_n >= n*h_n".into(), self.p >= &n * &self.h));
        out
    }
}

impl fmt::Display for StageRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let facts: Vec<String> = self
            .facts()
            .into_iter()
            .map(|(name, ok)| format!("{name}:{}", if ok { "ok" } else { "FAIL" }))
            .collect();
        write!(
            f,
            "n={} role={} i={} j={} target={} k={} l={} delta={} t={} p_n={} q_n={} certificates={}",
            self.n,
            self.role,
            opt(self.i.map(|v| v.to_string())),
            opt(self.j.map(|v| v.to_string())),
            opt(self.target.map(|v| v.to_string())),
            self.k,
            self.l,
            opt(self.delta.as_ref().map(ratio_to_string)),
            opt(self.t.as_ref().map(|v| v.to_string())),
            self.p,
            self.q,
            facts.join(";"),
        )
    }
}

/// The choices behind a synthesized family. `t` is always the smallest admissible value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisTrace {
    pub spec: DirectionSpec,
    pub stages: Vec<StageRecord>,
}

impl SynthesisTrace {
    pub fn up_to(&self) -> u32 {
        self.stages.last().map(|s| s.n).unwrap_or(0)
    }

    /// Re-evaluates every fact against `params`; the first failure is an error.
    pub fn recheck(&self, params: &AfsParams) -> Result<()> {
        let stages = params.materialize(self.up_to())?;
        for (rec, st) in self.stages.iter().zip(&stages) {
            let bad = |what: &str| Error::InconsistentCertificate(format!("stage {}: {what}", rec.n));
            if rec.n != st.n || rec.p != st.p || rec.q != st.q || rec.h != st.h {
                return Err(bad("recorded p_n, q_n, h_n differ from the family"));
            }
            if rec.role == StageRole::Preset && (st.a != &st.h * 3u32 || st.c != &st.a + 1u32) {
                return Err(bad("preset stage does not follow a = 3h, c = a + 1"));
            }
            if let Some((name, _)) = rec.facts().into_iter().find(|(_, ok)| !ok) {
                return Err(bad(&format!("fact `{name}` is false")));
            }
        }
        if self.stages.len() != stages.len() {
            return Err(Error::InconsistentCertificate("trace and family lengths differ".into()));
        }
        let report = validate_v(params, self.up_to())?;
        if let Some(c) = report.failures().next() {
            return Err(Error::InconsistentCertificate(format!(
                "stage {}: class check `{}` fails",
                c.stage, c.name
            )));
        }
        Ok(())
    }

    pub fn record(&self, n: u32) -> Option<&StageRecord> {
        self.stages.get(n as usize)
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// Smallest `T >= 1` meeting every lower bound, rounded up to a multiple of `step`.
#[allow(clippy::too_many_arguments)]
fn minimal_t(
    pp: u64,
    qq: u64,
    k: u64,
    l: u64,
    step: u64,
    big_h: &BigUint,
    h: &BigUint,
    n: u32,
    delta: &BigRational,
) -> BigUint {
    let (p, q) = (BigInt::from(pp), BigInt::from(qq));
    let (k, l) = (BigInt::from(k), BigInt::from(l));
    let (big_h, h) = (int(big_h), int(h));
    let mut lower = vec![BigInt::one()];
    // a, c >= 0.
    lower.push(ceil_div(&(&big_h + &k), &p));
    lower.push(ceil_div(&(&big_h + &l), &q));
    // p_n <= q_n, with q > p.
    if l > k {
        lower.push(ceil_div(&(&l - &k), &(&q - &p)));
    }
    // p_n >= n h_n.
    lower.push(ceil_div(&(BigInt::from(n) * &h + &k), &p));
    // q_n * delta > 2h + k + l, i.e. q_n >= floor(X / delta) + 1.
    let x = &h * 2 + &k + &l;
    let need_q: BigInt = Integer::div_floor(&(x * delta.denom()), delta.numer()) + 1;
    lower.push(ceil_div(&(need_q + &l), &q));
    let t = lower.into_iter().max().expect("non-empty");
    let step = BigInt::from(step);
    (ceil_div(&t, &step) * step).to_biguint().expect("positive")
}

/// `l_n = max(H, n(p+q+2h)+1)` and `m_n = max(H, n(p+l+q+H)+1)`.
fn minimal_tail(n: u32, big_h: &BigUint, h: &BigUint, p: &BigUint, q: &BigUint) -> (BigUint, BigUint) {
    let n = BigUint::from(n);
    let l = (&n * (p + q + h * 2u32) + 1u32).max(big_h.clone());
    let m = (&n * (p + &l + q + big_h) + 1u32).max(big_h.clone());
    (l, m)
}

/// Synthesizes stages `0..=up_to`. Stages `n(i, j)` with `i <= |R|` are claimed by `r_i`.
pub fn synthesize(spec: &DirectionSpec, up_to: u32) -> Result<(AfsParams, SynthesisTrace)> {
    spec.validate()?;
    let sep = spec.separation_list();
    let (mut big_h, mut h) = (BigUint::one(), BigUint::one());
    let mut cols: [Vec<BigUint>; 4] = Default::default();
    let mut stages = Vec::with_capacity(up_to as usize + 1);
    for n in 0..=up_to {
        let claim = (n >= 1)
            .then(|| block_of(n as u64))
            .filter(|&(i, _)| (i as usize) <= spec.r.len());
        let rec = match claim {
            None => {
                let a = &h * 3u32;
                let p = &big_h + &a;
                let q = &p + 1u32;
                StageRecord {
                    n,
                    role: StageRole::Preset,
                    i: None,
                    j: None,
                    target: None,
                    k: 0,
                    l: 0,
                    delta: None,
                    t: None,
                    h: h.clone(),
                    p,
                    q,
                }
            }
            Some((i, j)) => {
                let target = spec.r[i as usize - 1];
                let ergodic = spec.is_ergodic_target(&target);
                let own: Vec<Fraction> = sep.iter().filter(|f| **f != target).copied().collect();
                let delta = separation(&target, &own, i as usize + j as usize)?;
                let (k, l, step) = if ergodic {
                    let (k, l) = pair_schedule(j);
                    (k, l, j)
                } else {
                    (0, 0, 1)
                };
                let t = minimal_t(target.p(), target.q(), k, l, step, &big_h, &h, n, &delta);
                let p = &t * target.p() - k;
                let q = &t * target.q() - l;
                StageRecord {
                    n,
                    role: if ergodic { StageRole::Ergodic } else { StageRole::Exact },
                    i: Some(i),
                    j: Some(j),
                    target: Some(target),
                    k,
                    l,
                    delta: Some(delta),
                    t: Some(t),
                    h: h.clone(),
                    p,
                    q,
                }
            }
        };
        let (l, m) = minimal_tail(n, &big_h, &h, &rec.p, &rec.q);
        cols[0].push(&rec.p - &big_h);
        cols[1].push(&l - &big_h);
        cols[2].push(&rec.q - &big_h);
        cols[3].push(&m - &big_h);
        let next_h = &rec.p + &l + &rec.q + &big_h;
        big_h = &rec.p + &l + &rec.q + &m;
        h = next_h;
        stages.push(rec);
    }
    let [a, b, c, d] = cols.map(|prefix| Generator { prefix, rule: None });
    let params = AfsParams::new(a, b, c, d);
    Ok((
        params,
        SynthesisTrace {
            spec: spec.clone(),
            stages,
        },
    ))
}

/// Ergodic-set synthesis: `T^p x T^q` ergodic exactly for `p/q` in `R`.
pub fn synthesize_r(spec: &DirectionSpec, up_to: u32) -> Result<(AfsParams, SynthesisTrace)> {
    if spec.is_three_way() {
        return Err(Error::Invalid("ergodic-set synthesis takes no R1".into()));
    }
    synthesize(spec, up_to)
}

/// Three-regime synthesis: ergodic on `R1`, conservative-not-ergodic on `R2 \ R1`.
pub fn synthesize_three_way(spec: &DirectionSpec, up_to: u32) -> Result<(AfsParams, SynthesisTrace)> {
    if !spec.is_three_way() {
        return Err(Error::Invalid("three-way synthesis needs R1".into()));
    }
    synthesize(spec, up_to)
}

/// Largest stage `n(i, j)` with `i + j <= v` among claimed blocks (`i <= targets`), or 0.
pub fn exception_bound(v: usize, targets: usize) -> u64 {
    let mut best = 0;
    for i in 1..=targets.min(v) as u32 {
        for j in 1..=(v as u64).saturating_sub(i as u64) {
            best = best.max(block_partition(i, j));
        }
    }
    best
}

/// Signed discrepancy `p q_n - q p_n`.
pub fn discrepancy(p: u64, q: u64, p_n: &BigUint, q_n: &BigUint) -> BigInt {
    BigInt::from(p) * int(q_n) - BigInt::from(q) * int(p_n)
}

/// `|p q_n - q p_n| > (p + q) h_n`.
pub fn separated(p: u64, q: u64, p_n: &BigUint, q_n: &BigUint, h: &BigUint) -> bool {
    discrepancy(p, q, p_n, q_n).abs() > BigInt::from(p + q) * int(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Fraction {
        Fraction::parse_direction(s).unwrap()
    }

    #[test]
    fn blocks() {
        assert_eq!(block_partition(1, 1), 1);
        assert_eq!(block_partition(2, 1), 2);
        assert_eq!(block_partition(1, 2), 3);
        assert_eq!(block_partition(3, 2), 12);
        let mut seen = vec![0u32; 65];
        for i in 1..=7 {
            for j in 1..=32 {
                let n = block_partition(i, j);
                if n <= 64 {
                    seen[n as usize] += 1;
                    assert_eq!(block_of(n), (i, j));
                }
            }
        }
        assert!(seen[1..].iter().all(|&c| c == 1));
    }

    #[test]
    fn schedule() {
        assert_eq!(pair_schedule(1), (0, 0));
        assert_eq!(pair_schedule(2), (0, 1));
        assert_eq!(pair_schedule(3), (1, 0));
        assert_eq!(pair_schedule(4), (0, 0));
        assert_eq!(schedule_round_end(4), 34);
        for k in 0..=3u64 {
            for l in 0..=3 - k {
                let hits = (1..=34).filter(|&j| pair_schedule(j) == (k, l)).count();
                assert!(hits >= 2, "({k},{l}) seen {hits} times");
            }
        }
    }

    #[test]
    fn separation_examples() {
        let s = [f("1/3"), f("2/3"), f("1/4")];
        let d = separation(&f("1/2"), &s, 3).unwrap();
        assert_eq!(d, BigRational::new(1.into(), 6.into()));
        assert_eq!(separation(&f("1/2"), &[], 5).unwrap(), BigRational::one());
        assert_eq!(
            separation(&f("1/3"), &[f("1/2")], 1).unwrap(),
            BigRational::new(1.into(), 6.into())
        );
        assert!(matches!(
            separation(&f("1/2"), &s, 4),
            Err(Error::InsufficientComplement { needed: 4, supplied: 3 })
        ));
    }

    #[test]
    fn synthesized_half() {
        let spec = DirectionSpec::ergodic_set(vec![f("1/2")], vec![]);
        let (params, trace) = synthesize_r(&spec, 6).unwrap();
        trace.recheck(&params).unwrap();
        let st1 = &trace.stages[1];
        assert_eq!(st1.role, StageRole::Ergodic);
        assert_eq!(st1.q, &st1.p * 2u32);
        assert_eq!(trace.stages[2].role, StageRole::Preset);
        assert!(validate_v(&params, 6).unwrap().passed());
    }

    #[test]
    fn three_way_exact_stages() {
        let spec = DirectionSpec::three_way(vec![], vec![f("1/2")], vec![]);
        let (params, trace) = synthesize_three_way(&spec, 6).unwrap();
        trace.recheck(&params).unwrap();
        for rec in trace.stages.iter().filter(|r| r.role == StageRole::Exact) {
            assert_eq!(rec.q, &rec.p * 2u32);
            assert!(rec.q.is_even());
        }
    }

    #[test]
    fn tampered_trace_is_rejected() {
        let spec = DirectionSpec::ergodic_set(vec![f("1/2")], vec![]);
        let (params, mut trace) = synthesize_r(&spec, 3).unwrap();
        trace.stages[1].delta = Some(BigRational::from_integer(0.into()));
        assert!(matches!(trace.recheck(&params), Err(Error::InconsistentCertificate(_))));
    }

    #[test]
    fn short_complement_is_an_error() {
        let spec = DirectionSpec::ergodic_set(vec![f("1/2")], vec![f("1/3")]);
        assert!(matches!(
            synthesize_r(&spec, 1),
            Err(Error::InsufficientComplement { needed: 2, supplied: 1 })
        ));
    }
}
