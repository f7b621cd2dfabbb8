//! Exact construction and analysis of rank-one infinite measure-preserving towers.
//!
//! Two families are supported: a four-cut family whose product powers
//! `T^p x T^q` can be steered into ergodic, conservative-not-ergodic or
//! not-conservative regimes, and the `V_L` family whose ergodic index is read off
//! a series of cut counts. All measures are exact rationals.

pub mod afs;
pub mod ergodic_index;
pub mod error;
pub mod expr;
pub mod io;
pub mod measure;
pub mod par;
pub mod product;
mod serde_util;
pub mod synthesis;
pub mod tower;

pub use afs::{preset_infinite_ergodic_index, validate_v, validate_w, AfsParams, AfsStage, Generator};
pub use error::{Error, ParseError, Result};
pub use measure::{Fraction, MeasureValue};
pub use par::Execution;
pub use tower::{Column, Cylinder, FamilySpec, LagTable, LevelSet, StageHeights, Tower};
