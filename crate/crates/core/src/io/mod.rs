//! Family files, reports, CSV and level-set arguments.

mod family_file;
mod report;

pub use family_file::{FamilyFile, FORMAT_VERSION};
pub use report::{parse_report, to_csv, Report};

use crate::error::ParseError;
use crate::tower::LevelSet;

/// Parses `stage:i,j,lo..hi` into a level set; ranges are inclusive.
pub fn parse_level_set(s: &str) -> Result<LevelSet, ParseError> {
    let err = || ParseError::LevelSpec(s.to_string());
    let (stage, rest) = s.split_once(':').ok_or_else(err)?;
    let stage: u32 = stage.trim().parse().map_err(|_| err())?;
    let mut indices = Vec::new();
    for part in rest.split(',') {
        let part = part.trim();
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: u128 = lo.parse().map_err(|_| err())?;
                let hi: u128 = hi.parse().map_err(|_| err())?;
                if lo > hi || hi - lo > 1 << 24 {
                    return Err(err());
                }
                indices.extend(lo..=hi);
            }
            None => indices.push(part.parse().map_err(|_| err())?),
        }
    }
    Ok(LevelSet::new(stage, indices))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_specs() {
        let s = parse_level_set("2:0,3..5").unwrap();
        assert_eq!((s.stage(), s.indices()), (2, &[0u128, 3, 4, 5][..]));
        for bad in ["", "2", "x:1", "1:", "1:3..2", "1:a"] {
            assert!(parse_level_set(bad).is_err(), "{bad}");
        }
    }
}
