//! Exact intersection counts without materializing lifted sets.
//!
//! A level `x` of stage `b` reappears at stage `M` as `x + sum_m off_m[c_m]`, one
//! position per digit string `c_{b+1..M}`. The number of pairs `(x, y)` of lifted
//! levels with `y - x = R` satisfies
//!
//! `f(m, R) = sum_{c, c'} f(m-1, R - (off_m[c'] - off_m[c]))`,
//!
//! and only differences within `(-H_{m-1}, H_{m-1})` of `R` contribute, since two
//! levels of one column are less than its height apart. The recursion is memoized
//! on `(m, R)`; a window variant carries a whole range of `R` at once.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_rational::BigRational;

use super::family::Tower;
use super::level_set::LevelSet;
use crate::error::{Error, Result};
use crate::measure::MeasureValue;

/// A level set further restricted to chosen copies at later stages.
///
/// `allowed[m]` lists the copy indices (0-based, bottom copy first) of column
/// `m - 1` inside column `m` that are kept; stages without an entry are free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub set: LevelSet,
    pub allowed: BTreeMap<u32, Vec<usize>>,
}

impl From<LevelSet> for Cylinder {
    fn from(set: LevelSet) -> Self {
        Cylinder::new(set)
    }
}

impl Cylinder {
    pub fn new(set: LevelSet) -> Self {
        Cylinder {
            set,
            allowed: BTreeMap::new(),
        }
    }

    /// Keeps only copies `digits` at stage `stage > set.stage()`; repeated calls intersect.
    pub fn restrict(mut self, stage: u32, digits: impl IntoIterator<Item = usize>) -> Result<Self> {
        if stage <= self.set.stage() {
            return Err(Error::Invalid(format!(
                "copy constraint at stage {stage} must lie above the set's stage {}",
                self.set.stage()
            )));
        }
        let mut d: Vec<usize> = digits.into_iter().collect();
        d.sort_unstable();
        d.dedup();
        let entry = self.allowed.entry(stage).or_insert_with(|| d.clone());
        entry.retain(|x| d.contains(x));
        Ok(self)
    }

    /// Largest constrained stage, or the set's own stage.
    pub fn top_stage(&self) -> u32 {
        self.allowed
            .keys()
            .next_back()
            .copied()
            .unwrap_or(self.set.stage())
            .max(self.set.stage())
    }

    pub fn measure(&self, tower: &Tower) -> Result<MeasureValue> {
        tower.validate_set(&self.set)?;
        let mut w = tower.width(self.set.stage())? * BigRational::from_integer(self.set.len().into());
        for (&m, digits) in &self.allowed {
            let cuts = tower.column(m)?.cuts;
            if let Some(bad) = digits.iter().find(|&&c| c >= cuts) {
                return Err(Error::Invalid(format!("copy {bad} does not exist at stage {m}")));
            }
            w *= BigRational::new(digits.len().into(), cuts.into());
        }
        Ok(MeasureValue::from_ratio(w))
    }
}

/// A cylinder written out explicitly at a base stage.
#[derive(Clone, Debug)]
pub(crate) struct Aligned {
    pub pos: Vec<i128>,
    pub allowed: BTreeMap<u32, Vec<usize>>,
}

impl Aligned {
    fn max(&self) -> Option<i128> {
        self.pos.last().copied()
    }

    fn digits(&self, m: u32, cuts: usize) -> Vec<usize> {
        match self.allowed.get(&m) {
            Some(d) => d.clone(),
            None => (0..cuts).collect(),
        }
    }
}

fn overflow(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

/// Lifts every cylinder explicitly to the largest of their stages.
pub(crate) fn align(tower: &Tower, cyls: &[&Cylinder]) -> Result<(u32, Vec<Aligned>)> {
    let b = cyls.iter().map(|c| c.set.stage()).max().unwrap_or(0);
    let mut out = Vec::with_capacity(cyls.len());
    for c in cyls {
        tower.validate_set(&c.set)?;
        let mut pos = c.set.positions()?;
        for m in c.set.stage() + 1..=b {
            let col = tower.column(m)?;
            let fx = col.fixed()?;
            let digits = match c.allowed.get(&m) {
                Some(d) => d.clone(),
                None => (0..col.cuts).collect(),
            };
            let mut next = Vec::with_capacity(pos.len() * digits.len());
            for &d in &digits {
                let off = *fx
                    .offsets
                    .get(d)
                    .ok_or_else(|| Error::Invalid(format!("copy {d} does not exist at stage {m}")))?;
                for &x in &pos {
                    next.push(x.checked_add(off).ok_or_else(|| overflow("lifted position"))?);
                }
            }
            pos = next;
        }
        pos.sort_unstable();
        let allowed = c.allowed.range(b + 1..).map(|(k, v)| (*k, v.clone())).collect();
        out.push(Aligned { pos, allowed });
    }
    Ok((b, out))
}

/// Smallest stage `M >= max(b, min_stage)` with `max_pos_M + lag <= H_M - 1`,
/// where `max_pos` is a stage-`b` position lifted through the top copies.
pub(crate) fn resolve_stage(tower: &Tower, b: u32, max_pos: i128, lag: i128, min_stage: u32) -> Result<u32> {
    let mut m = b;
    let mut mx = max_pos;
    loop {
        let col = tower.column(m)?;
        let fx = col.fixed()?;
        let reach = mx.checked_add(lag).ok_or_else(|| overflow("lag reach"))?;
        if m >= min_stage && reach < fx.height {
            return Ok(m);
        }
        m += 1;
        let next = tower.column(m)?;
        let last = *next.fixed()?.offsets.last().expect("non-base column has copies");
        mx = mx.checked_add(last).ok_or_else(|| overflow("lifted maximum"))?;
    }
}

type Table = Vec<(i128, u128)>;

/// Sorted, merged multiset of copy-offset differences `off[c'] - off[c]`.
fn diff_table(offsets: &[i128], from: &[usize], to: &[usize]) -> Table {
    let mut v: Vec<(i128, u128)> = Vec::with_capacity(from.len() * to.len());
    for &c in from {
        for &c2 in to {
            v.push((offsets[c2] - offsets[c], 1));
        }
    }
    merge(v)
}

fn merge(mut v: Vec<(i128, u128)>) -> Table {
    v.sort_unstable_by_key(|e| e.0);
    let mut out: Table = Vec::with_capacity(v.len());
    for (k, c) in v {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += c,
            _ => out.push((k, c)),
        }
    }
    out
}

/// Entries of a sorted table with key in `[lo, hi]`.
fn key_range(t: &[(i128, u128)], lo: i128, hi: i128) -> &[(i128, u128)] {
    let a = t.partition_point(|e| e.0 < lo);
    let b = t.partition_point(|e| e.0 <= hi);
    &t[a..b.max(a)]
}

/// Pair counts between two aligned sets, resolved at stage `top`.
pub(crate) struct PairDp {
    b: u32,
    x: Vec<i128>,
    y: Vec<i128>,
    heights: Vec<i128>,
    diffs: Vec<Table>,
    memo: HashMap<(u32, i128), u128>,
    wmemo: HashMap<(u32, i128, i128), Arc<Table>>,
}

impl PairDp {
    pub fn new(tower: &Tower, b: u32, top: u32, x: &Aligned, y: &Aligned) -> Result<Self> {
        let mut heights = Vec::new();
        let mut diffs = Vec::new();
        for m in b..=top {
            let col = tower.column(m)?;
            let fx = col.fixed()?;
            heights.push(fx.height);
            if m > b {
                diffs.push(diff_table(&fx.offsets, &x.digits(m, col.cuts), &y.digits(m, col.cuts)));
            }
        }
        Ok(PairDp {
            b,
            x: x.pos.clone(),
            y: y.pos.clone(),
            heights,
            diffs,
            memo: HashMap::new(),
            wmemo: HashMap::new(),
        })
    }

    fn h(&self, m: u32) -> i128 {
        self.heights[(m - self.b) as usize]
    }

    /// Number of pairs `(x, y)` of stage-`m` levels with `y - x = r`.
    pub fn count(&mut self, m: u32, r: i128) -> Result<u128> {
        if r.abs() >= self.h(m) {
            return Ok(0);
        }
        if m == self.b {
            let y = &self.y;
            return Ok(self
                .x
                .iter()
                .filter(|&&x| x.checked_add(r).is_some_and(|t| y.binary_search(&t).is_ok()))
                .count() as u128);
        }
        if let Some(&v) = self.memo.get(&(m, r)) {
            return Ok(v);
        }
        let hp = self.h(m - 1);
        let idx = (m - self.b - 1) as usize;
        let terms: Vec<(i128, u128)> = key_range(&self.diffs[idx], r - hp + 1, r + hp - 1).to_vec();
        let mut total: u128 = 0;
        for (e, mult) in terms {
            let sub = self.count(m - 1, r - e)?;
            let add = sub.checked_mul(mult).ok_or_else(|| overflow("pair count"))?;
            total = total.checked_add(add).ok_or_else(|| overflow("pair count"))?;
        }
        self.memo.insert((m, r), total);
        Ok(total)
    }

    /// Nonzero pair counts for every `r` in `[lo, hi]` at stage `m`, sorted by `r`.
    pub fn window(&mut self, m: u32, lo: i128, hi: i128) -> Result<Arc<Table>> {
        let h = self.h(m);
        let (lo, hi) = (lo.max(1 - h), hi.min(h - 1));
        if lo > hi {
            return Ok(Arc::new(Vec::new()));
        }
        if let Some(t) = self.wmemo.get(&(m, lo, hi)) {
            return Ok(t.clone());
        }
        let out = if m == self.b {
            let mut v = Vec::new();
            for &x in &self.x {
                let a = self.y.partition_point(|&y| y < x + lo);
                let bnd = self.y.partition_point(|&y| y <= x + hi);
                for &y in &self.y[a..bnd.max(a)] {
                    v.push((y - x, 1u128));
                }
            }
            merge(v)
        } else {
            let hp = self.h(m - 1);
            let idx = (m - self.b - 1) as usize;
            let terms: Vec<(i128, u128)> = key_range(&self.diffs[idx], lo - hp + 1, hi + hp - 1).to_vec();
            let mut v = Vec::new();
            for (e, mult) in terms {
                let sub = self.window(m - 1, lo - e, hi - e)?;
                for &(r, c) in sub.iter() {
                    v.push((r + e, c.checked_mul(mult).ok_or_else(|| overflow("pair count"))?));
                }
            }
            merge_checked(v)?
        };
        let out = Arc::new(out);
        self.wmemo.insert((m, lo, hi), out.clone());
        Ok(out)
    }
}

fn merge_checked(mut v: Vec<(i128, u128)>) -> Result<Table> {
    v.sort_unstable_by_key(|e| e.0);
    let mut out: Table = Vec::with_capacity(v.len());
    for (k, c) in v {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 = last.1.checked_add(c).ok_or_else(|| overflow("pair count"))?,
            _ => out.push((k, c)),
        }
    }
    Ok(out)
}

/// Triple counts `#{x in X : x + r1 in Y, x + r2 in Z}`.
pub(crate) struct TripleDp {
    b: u32,
    x: Vec<i128>,
    y: Vec<i128>,
    z: Vec<i128>,
    heights: Vec<i128>,
    /// Per stage: groups `(e1, [(e2, mult)])` sorted by `e1` then `e2`.
    diffs: Vec<Vec<(i128, Table)>>,
    memo: HashMap<(u32, i128, i128), u128>,
}

impl TripleDp {
    pub fn new(tower: &Tower, b: u32, top: u32, sets: [&Aligned; 3]) -> Result<Self> {
        let mut heights = Vec::new();
        let mut diffs = Vec::new();
        for m in b..=top {
            let col = tower.column(m)?;
            let fx = col.fixed()?;
            heights.push(fx.height);
            if m > b {
                let [dx, dy, dz] = sets.map(|s| s.digits(m, col.cuts));
                let mut pairs: Vec<((i128, i128), u128)> = Vec::new();
                for &c in &dx {
                    for &c1 in &dy {
                        for &c2 in &dz {
                            let o = &fx.offsets;
                            pairs.push(((o[c1] - o[c], o[c2] - o[c]), 1));
                        }
                    }
                }
                pairs.sort_unstable_by_key(|p| p.0);
                let mut groups: Vec<(i128, Table)> = Vec::new();
                for ((e1, e2), c) in pairs {
                    match groups.last_mut() {
                        Some((k, t)) if *k == e1 => match t.last_mut() {
                            Some(last) if last.0 == e2 => last.1 += c,
                            _ => t.push((e2, c)),
                        },
                        _ => groups.push((e1, vec![(e2, c)])),
                    }
                }
                diffs.push(groups);
            }
        }
        Ok(TripleDp {
            b,
            x: sets[0].pos.clone(),
            y: sets[1].pos.clone(),
            z: sets[2].pos.clone(),
            heights,
            diffs,
            memo: HashMap::new(),
        })
    }

    fn h(&self, m: u32) -> i128 {
        self.heights[(m - self.b) as usize]
    }

    pub fn count(&mut self, m: u32, r1: i128, r2: i128) -> Result<u128> {
        let h = self.h(m);
        if r1.abs() >= h || r2.abs() >= h {
            return Ok(0);
        }
        if m == self.b {
            let (y, z) = (&self.y, &self.z);
            return Ok(self
                .x
                .iter()
                .filter(|&&x| y.binary_search(&(x + r1)).is_ok() && z.binary_search(&(x + r2)).is_ok())
                .count() as u128);
        }
        if let Some(&v) = self.memo.get(&(m, r1, r2)) {
            return Ok(v);
        }
        let hp = self.h(m - 1);
        let idx = (m - self.b - 1) as usize;
        let groups = &self.diffs[idx];
        let a = groups.partition_point(|g| g.0 <= r1 - hp);
        let bnd = groups.partition_point(|g| g.0 < r1 + hp);
        let mut terms = Vec::new();
        for (e1, inner) in &groups[a..bnd.max(a)] {
            for &(e2, mult) in key_range(inner, r2 - hp + 1, r2 + hp - 1) {
                terms.push((*e1, e2, mult));
            }
        }
        let mut total: u128 = 0;
        for (e1, e2, mult) in terms {
            let sub = self.count(m - 1, r1 - e1, r2 - e2)?;
            let add = sub.checked_mul(mult).ok_or_else(|| overflow("triple count"))?;
            total = total.checked_add(add).ok_or_else(|| overflow("triple count"))?;
        }
        self.memo.insert((m, r1, r2), total);
        Ok(total)
    }
}

/// Exact lag table `j -> mu(T^j X ∩ Y)` over a range, nonzero entries only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagTable {
    /// Stage at which `counts` are expressed.
    pub stage: u32,
    pub width: BigRational,
    pub counts: Vec<(i128, u128)>,
}

impl LagTable {
    pub fn count(&self, lag: i128) -> u128 {
        match self.counts.binary_search_by_key(&lag, |e| e.0) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    pub fn value(&self, lag: i128) -> MeasureValue {
        MeasureValue::from_ratio(&self.width * BigRational::from_integer(self.count(lag).into()))
    }

    pub fn lags(&self) -> impl Iterator<Item = i128> + '_ {
        self.counts.iter().map(|e| e.0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }
}

impl Tower {
    /// Pair count for `x + lag ∈ Y`, `lag >= 0`, at the minimal resolving stage.
    pub(crate) fn pair_count(&self, x: &Cylinder, y: &Cylinder, lag: i128) -> Result<(u128, u32)> {
        debug_assert!(lag >= 0);
        let (b, al) = align(self, &[x, y])?;
        let Some(mx) = al[0].max() else {
            return Ok((0, b));
        };
        let min_stage = x.top_stage().max(y.top_stage());
        let top = resolve_stage(self, b, mx, lag, min_stage)?;
        let mut dp = PairDp::new(self, b, top, &al[0], &al[1])?;
        Ok((dp.count(top, lag)?, top))
    }

    /// `mu(T^j X ∩ Y)` for cylinders.
    pub fn cylinder_correlation(&self, x: &Cylinder, y: &Cylinder, j: i128) -> Result<MeasureValue> {
        let (count, stage) = if j >= 0 {
            self.pair_count(x, y, j)?
        } else {
            self.pair_count(y, x, -j)?
        };
        let w = self.width(stage)?;
        Ok(MeasureValue::from_ratio(w * BigRational::from_integer(count.into())))
    }

    /// Lag table for `0 <= lo <= hi`, resolved at one stage.
    fn forward_table(&self, x: &Cylinder, y: &Cylinder, lo: i128, hi: i128) -> Result<LagTable> {
        let (b, al) = align(self, &[x, y])?;
        let min_stage = x.top_stage().max(y.top_stage());
        let Some(mx) = al[0].max() else {
            return Ok(LagTable {
                stage: b,
                width: self.width(b)?,
                counts: Vec::new(),
            });
        };
        let top = resolve_stage(self, b, mx, hi, min_stage)?;
        let mut dp = PairDp::new(self, b, top, &al[0], &al[1])?;
        let counts = dp.window(top, lo, hi)?.as_ref().clone();
        Ok(LagTable {
            stage: top,
            width: self.width(top)?,
            counts,
        })
    }

    /// Re-expresses counts at a later stage (each level splits into `cuts` copies).
    fn rescale(&self, t: LagTable, stage: u32) -> Result<LagTable> {
        let mut factor: u128 = 1;
        for m in t.stage + 1..=stage {
            factor = factor
                .checked_mul(self.column(m)?.cuts as u128)
                .ok_or_else(|| overflow("rescale"))?;
        }
        let counts = t
            .counts
            .into_iter()
            .map(|(k, c)| c.checked_mul(factor).map(|c| (k, c)).ok_or_else(|| overflow("rescale")))
            .collect::<Result<_>>()?;
        Ok(LagTable {
            stage,
            width: self.width(stage)?,
            counts,
        })
    }

    /// Every nonzero `mu(T^j X ∩ Y)` with `lo <= j <= hi`.
    pub fn correlation_table(&self, x: &Cylinder, y: &Cylinder, lo: i128, hi: i128) -> Result<LagTable> {
        if lo > hi {
            let b = x.set.stage().max(y.set.stage());
            return Ok(LagTable {
                stage: b,
                width: self.width(b)?,
                counts: Vec::new(),
            });
        }
        let pos = (hi >= 0).then(|| self.forward_table(x, y, lo.max(0), hi)).transpose()?;
        let neg = (lo < 0)
            .then(|| -> Result<LagTable> {
                let mut t = self.forward_table(y, x, (-hi).max(1), -lo)?;
                t.counts = t.counts.into_iter().rev().map(|(k, c)| (-k, c)).collect();
                Ok(t)
            })
            .transpose()?;
        match (neg, pos) {
            (Some(n), Some(p)) => {
                let stage = n.stage.max(p.stage);
                let n = self.rescale(n, stage)?;
                let mut p = self.rescale(p, stage)?;
                let mut counts = n.counts;
                counts.append(&mut p.counts);
                Ok(LagTable {
                    stage,
                    width: p.width,
                    counts,
                })
            }
            (Some(t), None) | (None, Some(t)) => Ok(t),
            (None, None) => unreachable!("lo <= hi"),
        }
    }

    /// `mu({x : x + l_k ∈ S_k for k = 0, 1, 2})`, that is `mu(∩ T^{-l_k} S_k)`.
    pub fn triple_measure(&self, parts: [(&Cylinder, i128); 3]) -> Result<MeasureValue> {
        let min = parts.iter().map(|p| p.1).min().expect("three parts");
        let mut order: Vec<(&Cylinder, i128)> = parts.iter().map(|&(c, l)| (c, l - min)).collect();
        // The part at lag 0 becomes the anchor.
        order.sort_by_key(|p| p.1);
        let cyls: Vec<&Cylinder> = order.iter().map(|p| p.0).collect();
        let (b, al) = align(self, &cyls)?;
        let Some(mx) = al[0].max() else {
            return Ok(MeasureValue::zero());
        };
        let (r1, r2) = (order[1].1, order[2].1);
        let min_stage = cyls.iter().map(|c| c.top_stage()).max().expect("three");
        let top = resolve_stage(self, b, mx, r2, min_stage)?;
        let mut dp = TripleDp::new(self, b, top, [&al[0], &al[1], &al[2]])?;
        let count = dp.count(top, r1, r2)?;
        let w = self.width(top)?;
        Ok(MeasureValue::from_ratio(w * BigRational::from_integer(count.into())))
    }
}
