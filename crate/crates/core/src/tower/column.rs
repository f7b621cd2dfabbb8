use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// One stage of a tower.
///
/// `embed_offsets[c]` is the bottom position of copy `c` of the previous column;
/// `cuts` is the number of such copies (0 at the base stage). Spacer ranges are
/// half-open `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Column {
    pub stage: u32,
    #[serde(with = "crate::serde_util::biguint")]
    pub height: BigUint,
    #[serde(with = "crate::serde_util::biguint_vec")]
    pub embed_offsets: Vec<BigUint>,
    #[serde(serialize_with = "ser_ranges")]
    pub spacer_ranges: Vec<(BigUint, BigUint)>,
    pub cuts: usize,
    #[serde(skip)]
    fixed: Option<Fixed>,
}

fn ser_ranges<S: serde::Serializer>(v: &[(BigUint, BigUint)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (a, b) in v {
        seq.serialize_element(&[a.to_string(), b.to_string()])?;
    }
    seq.end()
}

/// Machine-integer mirror of the geometry, when it fits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Fixed {
    pub height: i128,
    pub offsets: Vec<i128>,
}

impl Column {
    pub fn base(stage: u32) -> Self {
        Column::from_layout(stage, &BigUint::zero(), Vec::new(), BigUint::from(1u32))
    }

    /// Builds a column from copy offsets; spacers fill every gap.
    pub fn from_layout(stage: u32, prev_height: &BigUint, embed_offsets: Vec<BigUint>, height: BigUint) -> Self {
        let mut spacer_ranges = Vec::new();
        let mut cursor = BigUint::zero();
        for off in &embed_offsets {
            if *off > cursor {
                spacer_ranges.push((cursor.clone(), off.clone()));
            }
            cursor = off + prev_height;
        }
        if embed_offsets.is_empty() {
            // Base column: a single level, no spacers.
            cursor = height.clone();
        }
        if height > cursor {
            spacer_ranges.push((cursor, height.clone()));
        }
        let fixed = height.to_i128().and_then(|h| {
            let offsets = embed_offsets.iter().map(|o| o.to_i128()).collect::<Option<Vec<_>>>()?;
            Some(Fixed { height: h, offsets })
        });
        Column {
            stage,
            cuts: embed_offsets.len(),
            height,
            embed_offsets,
            spacer_ranges,
            fixed,
        }
    }

    pub(crate) fn fixed(&self) -> Result<&Fixed> {
        self.fixed.as_ref().ok_or_else(|| {
            Error::Overflow(format!(
                "stage {} has height {} which exceeds 128-bit positions",
                self.stage, self.height
            ))
        })
    }

    pub fn spacer_count(&self) -> BigUint {
        self.spacer_ranges.iter().map(|(a, b)| b - a).sum()
    }

    /// Copies and spacers partition `[0, height)` exactly.
    pub fn tiles(&self, prev_height: &BigUint) -> bool {
        let mut pieces: Vec<(BigUint, BigUint)> = self
            .embed_offsets
            .iter()
            .map(|o| (o.clone(), o + prev_height))
            .chain(self.spacer_ranges.iter().cloned())
            .collect();
        if self.embed_offsets.is_empty() {
            pieces.push((BigUint::zero(), self.height.clone()));
        }
        pieces.sort();
        let mut cursor = BigUint::zero();
        for (a, b) in pieces {
            if a != cursor || b <= a {
                return false;
            }
            cursor = b;
        }
        cursor == self.height
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: u32) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn layout_spacers() {
        let col = Column::from_layout(1, &b(1), vec![b(0), b(4), b(15), b(20)], b(41));
        assert_eq!(col.cuts, 4);
        assert_eq!(
            col.spacer_ranges,
            vec![(b(1), b(4)), (b(5), b(15)), (b(16), b(20)), (b(21), b(41))]
        );
        assert!(col.tiles(&b(1)));
        assert_eq!(col.spacer_count(), b(37));
        assert!(Column::base(0).tiles(&b(0)));
    }
}
