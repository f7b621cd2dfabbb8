//! A deliberately naive reference simulator.
//!
//! Columns are rebuilt from the construction recipes with plain `u64`
//! arithmetic, and a level set is expanded into the explicit list of its
//! positions in a higher column. Measures are point counts times the level
//! width. Nothing here touches the library's geometry code.

#![allow(dead_code)]

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;

pub struct Naive {
    base: u32,
    /// `heights[k]` is the height of column `base + k`.
    heights: Vec<u64>,
    /// `offsets[k]` places the copies of column `base + k` inside column `base + k + 1`.
    offsets: Vec<Vec<u64>>,
    /// `markers[k]` is `h` of column `base + k` (equal to the height for `V_L`).
    markers: Vec<u64>,
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Strictly increasing positive `l`-tuples, by coordinate sum and then by the
/// last coordinate, the one before it, and so on.
pub fn listed_vectors(l: usize, how_many: usize) -> Vec<Vec<u64>> {
    let bound = (how_many + l + 2) as u64;
    let mut all = Vec::new();
    let mut cur = Vec::new();
    fn rec(l: usize, lo: u64, bound: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for x in lo..=bound {
            cur.push(x);
            rec(l, x + 1, bound, cur, out);
            cur.pop();
        }
    }
    rec(l, 1, bound, &mut cur, &mut all);
    all.sort_by_key(|v| {
        let s: u64 = v.iter().sum();
        (s, v.iter().rev().copied().collect::<Vec<_>>())
    });
    all.truncate(how_many);
    all
}

impl Naive {
    /// Four-cut family from a spacer rule `(n, H_n, h_n) -> (a, b, c, d)`.
    pub fn four_cut(up_to: u32, rule: impl Fn(u64, u64, u64) -> [u64; 4]) -> Self {
        let (mut heights, mut markers, mut offsets) = (vec![1u64], vec![1u64], Vec::new());
        for n in 0..up_to {
            let (big_h, h) = (heights[n as usize], markers[n as usize]);
            let [a, b, c, d] = rule(n as u64, big_h, h);
            let (p, l, q, m) = (big_h + a, big_h + b, big_h + c, big_h + d);
            offsets.push(vec![0, p, p + l, p + l + q]);
            heights.push(p + l + q + m);
            markers.push(p + l + q + big_h);
        }
        Naive {
            base: 0,
            heights,
            offsets,
            markers,
        }
    }

    /// `a = 3h`, `c = a + 1`, `l` and `m` one past the class bounds.
    pub fn preset(up_to: u32) -> Self {
        Naive::four_cut(up_to, |n, big_h, h| {
            let a = 3 * h;
            let c = a + 1;
            let (p, q) = (big_h + a, big_h + c);
            let l = (n * (p + q + 2 * h) + 1).max(big_h);
            let m = (n * (p + l + q + big_h) + 1).max(big_h);
            [a, l - big_h, c, m - big_h]
        })
    }

    pub fn constant(up_to: u32, spacers: [u64; 4]) -> Self {
        Naive::four_cut(up_to, |_, _, _| spacers)
    }

    /// `V_L` with cut counts `r(n)`, built by stacking subcolumns one at a time.
    pub fn vl(l: usize, up_to: u32, r: impl Fn(u32) -> u64) -> Self {
        let vectors = listed_vectors(l, 8);
        let (mut heights, mut offsets) = (vec![1u64], Vec::new());
        for n in 1..up_to {
            let h = *heights.last().unwrap();
            let v = &vectors[n.trailing_zeros() as usize];
            let sigma: u64 = v.iter().sum();
            let rn = r(n);
            let mut spacers = vec![0u64; rn as usize];
            for (i, s) in spacers.iter_mut().enumerate() {
                let sub = i as u64 + 1;
                if sub < rn - l as u64 {
                    *s = (2 * l as u64 + 1) * h + sigma;
                } else if sub < rn {
                    *s = h + v[(sub - (rn - l as u64 - 1)) as usize - 1];
                }
            }
            let mut copy = Vec::new();
            let mut top = 0;
            for s in spacers {
                copy.push(top);
                top += h + s;
            }
            offsets.push(copy);
            heights.push(2 * top);
        }
        Naive {
            base: 1,
            markers: heights.clone(),
            heights,
            offsets,
        }
    }

    pub fn top(&self) -> u32 {
        self.base + self.heights.len() as u32 - 1
    }

    pub fn height(&self, n: u32) -> u64 {
        self.heights[(n - self.base) as usize]
    }

    pub fn marker(&self, n: u32) -> u64 {
        self.markers[(n - self.base) as usize]
    }

    pub fn copies(&self, n: u32) -> &[u64] {
        &self.offsets[(n - self.base) as usize]
    }

    /// Width of one level of column `m`.
    pub fn width(&self, m: u32) -> BigRational {
        let cuts: u64 = (self.base..m).map(|n| self.copies(n).len() as u64).product();
        ratio(1, cuts)
    }

    /// Positions in column `m` of the levels `indices` of column `stage`.
    pub fn positions(&self, stage: u32, indices: &[u64], m: u32) -> Vec<u64> {
        let mut cur = indices.to_vec();
        for n in stage..m {
            cur = self
                .copies(n)
                .iter()
                .flat_map(|o| cur.iter().map(move |x| o + x))
                .collect();
        }
        cur.sort_unstable();
        cur
    }

    /// `mu(∩_k T^{s_k} A_k)` for sets `(stage, indices)` with shifts `s_k`, counted
    /// in column `m`, or `None` when some orbit segment leaves that column.
    pub fn intersection(&self, parts: &[(u32, &[u64], i128)], m: u32) -> Option<BigRational> {
        let s_max = parts.iter().map(|p| p.2).max()?;
        let s_min = parts.iter().map(|p| p.2).min()?;
        let anchor = parts.iter().position(|p| p.2 == s_max)?;
        let lists: Vec<HashSet<u64>> = parts
            .iter()
            .map(|(stage, idx, _)| self.positions(*stage, idx, m).into_iter().collect())
            .collect();
        let (a_stage, a_idx, _) = parts[anchor];
        let anchor_pos = self.positions(a_stage, a_idx, m);
        let reach = (s_max - s_min) as u128;
        if *anchor_pos.last()? as u128 + reach >= self.height(m) as u128 {
            return None;
        }
        // A point y of the intersection has T^{-s_k} y in A_k; write w = T^{-s_max} y.
        let count = anchor_pos
            .iter()
            .filter(|&&w| {
                parts
                    .iter()
                    .zip(&lists)
                    .all(|(p, set)| set.contains(&(w + (s_max - p.2) as u64)))
            })
            .count() as u64;
        Some(ratio(count, 1) * self.width(m))
    }

    /// The first column at or above `from` where the query is exact.
    fn exact(&self, from: u32, f: impl Fn(u32) -> Option<BigRational>) -> Option<BigRational> {
        (from..=self.top()).find_map(f)
    }

    /// `mu(T^j A ∩ B)`.
    pub fn correlation(&self, a: (u32, &[u64]), b: (u32, &[u64]), j: i128) -> Option<BigRational> {
        self.exact(a.0.max(b.0), |m| self.intersection(&[(a.0, a.1, j), (b.0, b.1, 0)], m))
    }

    /// `mu(T^{pi} A ∩ T^{qi} A ∩ A)`.
    pub fn triple(&self, a: (u32, &[u64]), p: i128, q: i128, i: i128) -> Option<BigRational> {
        self.exact(a.0, |m| {
            self.intersection(&[(a.0, a.1, p * i), (a.0, a.1, q * i), (a.0, a.1, 0)], m)
        })
    }

    /// `{0 < i <= horizon : mu(T^{pi} A ∩ B1) mu(T^{qi} A ∩ A) > 0}` with the products,
    /// where `B1` is `A` or, when `shifted`, `TA`. `None` if some lag is not exact.
    pub fn lambda(
        &self,
        a: (u32, &[u64]),
        p: i128,
        q: i128,
        horizon: i128,
        shifted: bool,
    ) -> Option<Vec<(u64, BigRational)>> {
        let first: Vec<u64> = if shifted {
            a.1.iter().map(|x| x + 1).collect()
        } else {
            a.1.to_vec()
        };
        let lags = [p, q, p * horizon, q * horizon];
        let (lag_min, lag_max) = (*lags.iter().min()?, *lags.iter().max()?);
        let m = (a.0..=self.top()).find(|&m| {
            let pos = self.positions(a.0, a.1, m);
            let lo = *pos.first().unwrap() as i128;
            let hi = *pos.last().unwrap() as i128;
            lo + lag_min >= 0 && hi + lag_max < self.height(m) as i128
        })?;
        let src = self.positions(a.0, a.1, m);
        let tgt1: HashSet<u64> = self.positions(a.0, &first, m).into_iter().collect();
        let tgt2: HashSet<u64> = src.iter().copied().collect();
        let count = |set: &HashSet<u64>, lag: i128| {
            src.iter()
                .filter(|&&x| set.contains(&((x as i128 + lag) as u64)))
                .count() as u64
        };
        let mut out = Vec::new();
        for i in 1..=horizon {
            let c1 = count(&tgt1, p * i);
            if c1 == 0 {
                continue;
            }
            let c2 = count(&tgt2, q * i);
            if c2 > 0 {
                let w = self.width(m);
                out.push((i as u64, ratio(c1, 1) * &w * ratio(c2, 1) * &w));
            }
        }
        Some(out)
    }
}
