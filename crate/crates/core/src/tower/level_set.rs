use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::family::Tower;
use crate::error::{Error, Result};
use crate::measure::MeasureValue;

/// A finite union of levels of one column, by bottom-based 0-based index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct LevelSet {
    stage: u32,
    indices: Vec<u128>,
}

impl LevelSet {
    /// Sorts and deduplicates; range checks happen against a tower (see [`Tower::level_set`]).
    pub fn new(stage: u32, indices: impl IntoIterator<Item = u128>) -> Self {
        let mut indices: Vec<u128> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        LevelSet { stage, indices }
    }

    pub fn single(stage: u32, index: u128) -> Self {
        LevelSet {
            stage,
            indices: vec![index],
        }
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn indices(&self) -> &[u128] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: u128) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn min(&self) -> Option<u128> {
        self.indices.first().copied()
    }

    pub fn max(&self) -> Option<u128> {
        self.indices.last().copied()
    }

    pub(crate) fn positions(&self) -> Result<Vec<i128>> {
        self.indices
            .iter()
            .map(|&i| i128::try_from(i).map_err(|_| Error::Overflow(format!("level index {i} exceeds 127 bits"))))
            .collect()
    }

    /// Every index shifted by `j`; the caller guarantees the range.
    pub(crate) fn shifted(&self, j: i128) -> LevelSet {
        LevelSet {
            stage: self.stage,
            indices: self.indices.iter().map(|&i| (i as i128 + j) as u128).collect(),
        }
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.stage)?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl Tower {
    /// A level set checked against the column height at `stage`.
    pub fn level_set(&self, stage: u32, indices: impl IntoIterator<Item = u128>) -> Result<LevelSet> {
        let set = LevelSet::new(stage, indices);
        self.validate_set(&set)?;
        Ok(set)
    }

    pub fn validate_set(&self, set: &LevelSet) -> Result<()> {
        let height = self.height(set.stage)?;
        if let Some(max) = set.max() {
            if BigUint::from(max) >= height {
                return Err(Error::IndexOutOfRange {
                    stage: set.stage,
                    index: max.to_string(),
                    height: height.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn measure(&self, set: &LevelSet) -> Result<MeasureValue> {
        let w = self.width(set.stage)?;
        Ok(MeasureValue::from_ratio(
            w * num_rational::BigRational::from_integer(set.len().into()),
        ))
    }

    /// The same set written as levels of stage `m >= stage`.
    pub fn decompose(&self, set: &LevelSet, m: u32) -> Result<LevelSet> {
        if m < set.stage {
            return Err(Error::Invalid(format!(
                "cannot decompose a stage-{} set into stage {m}",
                set.stage
            )));
        }
        let mut cur: Vec<u128> = set.indices.clone();
        for s in set.stage + 1..=m {
            let col = self.column(s)?;
            let mut next = Vec::with_capacity(cur.len() * col.cuts);
            for off in &col.embed_offsets {
                let off = off
                    .to_u128()
                    .ok_or_else(|| Error::Overflow(format!("offset at stage {s}")))?;
                for &x in &cur {
                    next.push(
                        x.checked_add(off)
                            .ok_or_else(|| Error::Overflow(format!("position at stage {s}")))?,
                    );
                }
            }
            cur = next;
        }
        Ok(LevelSet::new(m, cur))
    }

    /// `T^j(A)` as a level set at the smallest stage where the shift stays inside the column.
    ///
    /// For `j < 0` the bottom copy of every column sits at offset 0, so the lowest
    /// index never grows under lifting; if `min + j < 0` the image is not a finite
    /// union of levels and an error is returned.
    pub fn apply_power(&self, set: &LevelSet, j: i128) -> Result<LevelSet> {
        self.validate_set(set)?;
        if j == 0 || set.is_empty() {
            return Ok(set.clone());
        }
        if j < 0 {
            let min = set.min().expect("non-empty") as i128;
            if min + j < 0 {
                return Err(Error::Unrepresentable(format!(
                    "T^{j} of a set whose lowest level is {min} at stage {} leaves every column from below",
                    set.stage
                )));
            }
            return Ok(set.shifted(j));
        }
        let max = i128::try_from(set.max().expect("non-empty")).map_err(|_| Error::Overflow("level index".into()))?;
        let m = super::engine::resolve_stage(self, set.stage, max, j, set.stage)?;
        Ok(self.decompose(set, m)?.shifted(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afs::AfsParams;

    #[test]
    fn decompose_and_shift() {
        let t = Tower::afs(AfsParams::constant(3, 10, 4, 20));
        let a = t.level_set(0, [0]).unwrap();
        let lifted = t.decompose(&a, 1).unwrap();
        assert_eq!(lifted.indices(), &[0, 4, 15, 20]);
        assert_eq!(t.decompose(&a, 0).unwrap(), a);
        let shifted = t.apply_power(&lifted, 4).unwrap();
        assert_eq!(shifted, LevelSet::new(1, [4, 8, 19, 24]));
        assert_eq!(t.apply_power(&shifted, -4).unwrap(), lifted);
        assert!(matches!(t.apply_power(&a, -1), Err(Error::Unrepresentable(_))));
        assert_eq!(t.measure(&lifted).unwrap(), t.measure(&a).unwrap());
        assert!(t.level_set(1, [41]).is_err());
    }
}
