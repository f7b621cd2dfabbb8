//! Parameters of the four-cut family.
//!
//! Column `G_{n+1}` is built from four copies of `G_n` (height `H_n`) carrying
//! `a_n, b_n, c_n, d_n` spacers. Derived values: `p = H + a`, `l = H + b`,
//! `q = H + c`, `m = H + d`, `h_{n+1} = p + l + q + H` and
//! `H_{n+1} = p + l + q + m`, with `H_0 = h_0 = 1`.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};

/// Per-stage values for one of `a, b, c, d`: an explicit prefix, then an optional rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(
        default,
        skip_serializing_if = "Vec::is_empty",
        with = "crate::serde_util::biguint_vec"
    )]
    pub prefix: Vec<BigUint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<Expr>,
}

impl Generator {
    pub fn rule(expr: &str) -> Result<Self> {
        Ok(Generator {
            prefix: Vec::new(),
            rule: Some(expr.parse()?),
        })
    }

    pub fn prefix<I: IntoIterator<Item = u64>>(values: I) -> Self {
        Generator {
            prefix: values.into_iter().map(BigUint::from).collect(),
            rule: None,
        }
    }

    pub fn constant(v: u64) -> Self {
        Generator {
            prefix: Vec::new(),
            rule: Some(Expr::Num(BigInt::from(v))),
        }
    }

    /// Stages this generator can produce; `None` means unbounded.
    pub fn horizon(&self) -> Option<u32> {
        match self.rule {
            Some(_) => None,
            None => Some(self.prefix.len() as u32),
        }
    }

    fn value(&self, name: &str, n: u32, env: &Env) -> Result<BigUint> {
        if let Some(v) = self.prefix.get(n as usize) {
            return Ok(v.clone());
        }
        let rule = self.rule.as_ref().ok_or_else(|| Error::StageUnavailable {
            stage: n,
            reason: format!(
                "generator for `{name}` has {} explicit values and no rule",
                self.prefix.len()
            ),
        })?;
        let v = rule.eval(env).map_err(|e| Error::Rule {
            stage: n,
            param: name.to_string(),
            message: format!("`{rule}`: {e}"),
        })?;
        if !v.is_integer() || v.is_negative() {
            return Err(Error::Rule {
                stage: n,
                param: name.to_string(),
                message: format!("`{rule}` evaluated to {v}, expected a non-negative integer"),
            });
        }
        Ok(v.to_integer().to_biguint().expect("checked non-negative"))
    }
}

/// Spacer generators for the four-cut family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AfsParams {
    pub a: Generator,
    pub b: Generator,
    pub c: Generator,
    pub d: Generator,
}

/// All values attached to one stage `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AfsStage {
    pub n: u32,
    /// Column height `H_n`.
    pub big_h: BigUint,
    /// Marker `h_n`.
    pub h: BigUint,
    pub a: BigUint,
    pub b: BigUint,
    pub c: BigUint,
    pub d: BigUint,
    pub p: BigUint,
    pub l: BigUint,
    pub q: BigUint,
    pub m: BigUint,
}

impl AfsStage {
    pub fn next_big_h(&self) -> BigUint {
        &self.p + &self.l + &self.q + &self.m
    }

    pub fn next_h(&self) -> BigUint {
        &self.p + &self.l + &self.q + &self.big_h
    }

    /// Copy offsets of `G_n` inside `G_{n+1}`.
    pub fn offsets(&self) -> [BigUint; 4] {
        [
            BigUint::zero(),
            self.p.clone(),
            &self.p + &self.l,
            &self.p + &self.l + &self.q,
        ]
    }
}

impl fmt::Display for AfsStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} H={} h={} a={} b={} c={} d={} p={} l={} q={} m={}",
            self.n, self.big_h, self.h, self.a, self.b, self.c, self.d, self.p, self.l, self.q, self.m
        )
    }
}

pub(crate) fn int(v: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, v.clone())
}

impl AfsParams {
    pub fn new(a: Generator, b: Generator, c: Generator, d: Generator) -> Self {
        AfsParams { a, b, c, d }
    }

    /// Constant spacer counts at every stage.
    pub fn constant(a: u64, b: u64, c: u64, d: u64) -> Self {
        AfsParams::new(
            Generator::constant(a),
            Generator::constant(b),
            Generator::constant(c),
            Generator::constant(d),
        )
    }

    /// Rule-based family from four expressions.
    pub fn from_rules(a: &str, b: &str, c: &str, d: &str) -> Result<Self> {
        Ok(AfsParams::new(
            Generator::rule(a)?,
            Generator::rule(b)?,
            Generator::rule(c)?,
            Generator::rule(d)?,
        ))
    }

    /// Last stage whose parameters exist, or `None` when all generators have rules.
    pub fn horizon(&self) -> Option<u32> {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .filter_map(|g| g.horizon())
            .min()
            .map(|n| n.saturating_sub(1))
    }

    fn stage_from(&self, n: u32, big_h: BigUint, h: BigUint) -> Result<AfsStage> {
        let mut env = Env::new();
        env.set(Var::N, n).set(Var::BigH, int(&big_h)).set(Var::SmallH, int(&h));
        let a = self.a.value("a", n, &env)?;
        env.set(Var::A, int(&a)).set(Var::P, int(&(&big_h + &a)));
        let c = self.c.value("c", n, &env)?;
        env.set(Var::C, int(&c)).set(Var::Q, int(&(&big_h + &c)));
        let b = self.b.value("b", n, &env)?;
        env.set(Var::B, int(&b)).set(Var::L, int(&(&big_h + &b)));
        let d = self.d.value("d", n, &env)?;
        Ok(AfsStage {
            n,
            p: &big_h + &a,
            l: &big_h + &b,
            q: &big_h + &c,
            m: &big_h + &d,
            big_h,
            h,
            a,
            b,
            c,
            d,
        })
    }

    /// Stage 0 when `prev` is `None`, otherwise the stage after `prev`.
    pub fn stage_after(&self, prev: Option<&AfsStage>) -> Result<AfsStage> {
        match prev {
            None => self.stage_from(0, BigUint::one(), BigUint::one()),
            Some(st) => self.stage_from(st.n + 1, st.next_big_h(), st.next_h()),
        }
    }

    /// Stages `0..=up_to`, computed in order.
    pub fn materialize(&self, up_to: u32) -> Result<Vec<AfsStage>> {
        let mut out: Vec<AfsStage> = Vec::with_capacity(up_to as usize + 1);
        let (mut big_h, mut h) = (BigUint::one(), BigUint::one());
        for n in 0..=up_to {
            let st = self.stage_from(n, big_h, h)?;
            big_h = st.next_big_h();
            h = st.next_h();
            out.push(st);
        }
        Ok(out)
    }

    pub fn stage(&self, n: u32) -> Result<AfsStage> {
        Ok(self.materialize(n)?.pop().expect("non-empty"))
    }

    /// `(H_n, h_n)` for `n = 0..=up_to`. Needs parameters only up to `up_to - 1`.
    pub fn heights(&self, up_to: u32) -> Result<Vec<(BigUint, BigUint)>> {
        let mut out = vec![(BigUint::one(), BigUint::one())];
        if up_to > 0 {
            for st in self.materialize(up_to - 1)? {
                out.push((st.next_big_h(), st.next_h()));
            }
        }
        Ok(out)
    }

    /// Whether `a` and `c` follow the infinite-ergodic-index preset rules.
    pub fn has_preset_rules(&self) -> bool {
        let preset = preset_infinite_ergodic_index();
        self.a.prefix.is_empty()
            && self.c.prefix.is_empty()
            && self.a.rule == preset.a.rule
            && self.c.rule == preset.c.rule
    }
}

/// Minimal-plus-one rule for `b`: `l = max(H, n(p+q+2h)+1)`.
pub const MINIMAL_B: &str = "max(0,n*(p+q+2*h)+1-H)";
/// Minimal-plus-one rule for `d`: `m = max(H, n(p+l+q+H)+1)`.
pub const MINIMAL_D: &str = "max(0,n*(p+l+q+H)+1-H)";

/// `a_n = 3h_n`, `c_n = a_n + 1`, with `b_n` and `d_n` minimal for the class-W inequalities.
pub fn preset_infinite_ergodic_index() -> AfsParams {
    AfsParams::from_rules("3*h", MINIMAL_B, "a+1", MINIMAL_D).expect("preset rules parse")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    /// `l_n > n(p_n + q_n + 2h_n)`
    LGap,
    /// `m_n > n h_{n+1}`
    MGap,
    /// `p_n >= n h_n`, the finite stand-in for `p_n / h_n -> infinity`.
    Growth,
    /// `p_n <= q_n`
    Order,
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckName::LGap => "l_n > n(p_n+q_n+2h_n)",
            CheckName::MGap => "m_n > n*h_{n+1}",
            CheckName::Growth => "p_n >= n*h_n",
            CheckName::Order => "p_n <= q_n",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub stage: u32,
    pub name: CheckName,
    pub passed: bool,
    pub lhs: BigUint,
    pub rhs: BigUint,
}

/// Per-stage outcome of the class checks. The growth entry is a certificate
/// for the enforced schema, not a proof of the limit condition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(stage: u32, name: CheckName, lhs: BigUint, rhs: BigUint, strict: bool) -> Check {
    let passed = if strict { lhs > rhs } else { lhs >= rhs };
    Check {
        stage,
        name,
        passed,
        lhs,
        rhs,
    }
}

fn w_checks(st: &AfsStage) -> Vec<Check> {
    let n = BigUint::from(st.n);
    vec![
        check(
            st.n,
            CheckName::LGap,
            st.l.clone(),
            &n * (&st.p + &st.q + &st.h * 2u32),
            true,
        ),
        check(st.n, CheckName::MGap, st.m.clone(), &n * st.next_h(), true),
        check(st.n, CheckName::Growth, st.p.clone(), &n * &st.h, false),
    ]
}

/// Class-W inequalities for stages `0..=up_to`.
pub fn validate_w(params: &AfsParams, up_to: u32) -> Result<ValidationReport> {
    let checks = params.materialize(up_to)?.iter().flat_map(w_checks).collect();
    Ok(ValidationReport { checks })
}

/// Class-V: class W plus `p_n <= q_n`.
pub fn validate_v(params: &AfsParams, up_to: u32) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for st in params.materialize(up_to)? {
        checks.extend(w_checks(&st));
        checks.push(check(st.n, CheckName::Order, st.q.clone(), st.p.clone(), false));
    }
    Ok(ValidationReport { checks })
}

/// `|q_n - 2 p_n|` against `3 h_n`, as in the non-conservativity hypothesis of the preset.
pub fn preset_gap(st: &AfsStage) -> (BigUint, BigUint) {
    let diff: BigInt = (int(&st.q) - int(&st.p) * 2u32).abs();
    (diff.to_biguint().expect("abs"), &st.h * 3u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_constant_family() {
        let params = AfsParams::constant(3, 10, 4, 20);
        let st = params.stage(0).unwrap();
        assert_eq!(st.offsets().map(|o| o.to_string()), ["0", "4", "15", "20"]);
        assert_eq!(st.next_big_h(), BigUint::from(41u32));
        assert_eq!(st.next_h(), BigUint::from(21u32));
        let hs = params.heights(1).unwrap();
        assert_eq!(hs[1], (BigUint::from(41u32), BigUint::from(21u32)));
        assert!(validate_w(&params, 0).unwrap().passed());
        assert!(validate_v(&params, 0).unwrap().passed());
    }

    #[test]
    fn order_check() {
        let bad = AfsParams::constant(4, 10, 3, 20);
        let rep = validate_v(&bad, 0).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.failures().next().unwrap().name, CheckName::Order);
    }

    #[test]
    fn boundary_l_fails() {
        // l_1 exactly n(p+q+2h) at stage 1.
        let params = AfsParams::from_rules("3*h", "max(0,n*(p+q+2*h)-H)", "a+1", MINIMAL_D).unwrap();
        let rep = validate_w(&params, 1).unwrap();
        let fail: Vec<_> = rep.failures().collect();
        assert_eq!(fail.len(), 1);
        assert_eq!((fail[0].stage, fail[0].name), (1, CheckName::LGap));
    }

    #[test]
    fn preset_heights_and_validity() {
        let preset = preset_infinite_ergodic_index();
        let st = preset.materialize(6).unwrap();
        assert_eq!((st[0].p.clone(), st[0].q.clone()), (4u32.into(), 5u32.into()));
        assert_eq!((st[1].big_h.clone(), st[1].h.clone()), (11u32.into(), 11u32.into()));
        assert_eq!((st[2].big_h.clone(), st[2].h.clone()), (414u32.into(), 212u32.into()));
        assert!(validate_v(&preset, 6).unwrap().passed());
        for s in &st {
            let (gap, bound) = preset_gap(s);
            assert!(gap >= bound, "stage {}", s.n);
        }
        assert!(preset.has_preset_rules());
        assert_eq!(preset.horizon(), None);
    }

    #[test]
    fn prefix_exhaustion_names_stage() {
        let params = AfsParams::new(
            Generator::prefix([3, 3]),
            Generator::constant(10),
            Generator::constant(4),
            Generator::constant(20),
        );
        assert_eq!(params.horizon(), Some(1));
        match params.stage(2) {
            Err(Error::StageUnavailable { stage: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rule_is_rejected() {
        let params = AfsParams::from_rules("h-5", "0", "0", "0").unwrap();
        assert!(matches!(params.stage(0), Err(Error::Rule { stage: 0, .. })));
    }
}
