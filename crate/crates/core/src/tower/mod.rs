//! Columns, level sets and exact correlation measures.

mod column;
mod correlation;
pub(crate) mod engine;
mod family;
mod level_set;

pub use column::Column;
pub use engine::{Cylinder, LagTable};
pub use family::{FamilySpec, StageHeights, Tower};
pub use level_set::LevelSet;
