use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use super::column::Column;
use crate::afs::{AfsParams, AfsStage};
use crate::ergodic_index::vl::{vl_layout, VlSpec};
use crate::error::{Error, Result};

/// A construction family: the four-cut family or a `V_L` family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Afs4(AfsParams),
    Vl(VlSpec),
}

impl FamilySpec {
    /// First stage with a column: 0 for the four-cut family, 1 for `V_L`.
    pub fn base_stage(&self) -> u32 {
        match self {
            FamilySpec::Afs4(_) => 0,
            FamilySpec::Vl(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FamilySpec::Afs4(_) => "afs4",
            FamilySpec::Vl(_) => "vl",
        }
    }
}

/// Column height and, for the four-cut family, the marker `h_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageHeights {
    pub stage: u32,
    pub column_height: BigUint,
    /// `h_n`; equals the column height for `V_L` families.
    pub marker: BigUint,
}

#[derive(Default)]
struct State {
    columns: Vec<Arc<Column>>,
    widths: Vec<BigRational>,
    markers: Vec<BigUint>,
    afs: Vec<AfsStage>,
    last_cut: Option<u64>,
}

/// Lazily built, immutable columns of one family.
///
/// Columns are cached by stage; concurrent readers share them and concurrent
/// builders extend the cache idempotently under a write lock.
pub struct Tower {
    spec: FamilySpec,
    state: RwLock<State>,
}

impl std::fmt::Debug for Tower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tower").field("spec", &self.spec).finish()
    }
}

impl Tower {
    pub fn new(spec: FamilySpec) -> Self {
        Tower {
            spec,
            state: RwLock::new(State::default()),
        }
    }

    pub fn afs(params: AfsParams) -> Self {
        Tower::new(FamilySpec::Afs4(params))
    }

    pub fn vl(spec: VlSpec) -> Self {
        Tower::new(FamilySpec::Vl(spec))
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn base_stage(&self) -> u32 {
        self.spec.base_stage()
    }

    fn check_stage(&self, n: u32) -> Result<usize> {
        let base = self.base_stage();
        if n < base {
            return Err(Error::StageUnavailable {
                stage: n,
                reason: format!("{} families start at stage {base}", self.spec.kind()),
            });
        }
        Ok((n - base) as usize)
    }

    fn ensure(&self, n: u32) -> Result<usize> {
        let idx = self.check_stage(n)?;
        if self.state.read().expect("tower lock").columns.len() > idx {
            return Ok(idx);
        }
        let mut st = self.state.write().expect("tower lock");
        while st.columns.len() <= idx {
            self.extend(&mut st)?;
        }
        Ok(idx)
    }

    fn extend(&self, st: &mut State) -> Result<()> {
        let base = self.base_stage();
        let Some(prev) = st.columns.last().cloned() else {
            st.columns.push(Arc::new(Column::base(base)));
            st.widths.push(BigRational::one());
            st.markers.push(BigUint::one());
            return Ok(());
        };
        let s = prev.stage;
        let (col, marker) = match &self.spec {
            FamilySpec::Afs4(params) => {
                let stage = params.stage_after(st.afs.last())?;
                let col = Column::from_layout(s + 1, &prev.height, stage.offsets().to_vec(), stage.next_big_h());
                let marker = stage.next_h();
                st.afs.push(stage);
                (col, marker)
            }
            FamilySpec::Vl(spec) => {
                if let Some(hz) = spec.horizon {
                    if s + 1 > hz {
                        return Err(Error::StageUnavailable {
                            stage: s + 1,
                            reason: format!("beyond the materialization horizon {hz}"),
                        });
                    }
                }
                let r = spec.check_stage(s, st.last_cut)?;
                let (_, v) = spec.s(s)?;
                let lay = vl_layout(&prev.height, r, &v);
                st.last_cut = Some(r);
                let marker = lay.height.clone();
                (
                    Column::from_layout(s + 1, &prev.height, lay.offsets, lay.height),
                    marker,
                )
            }
        };
        let w = st.widths.last().expect("base width") / BigRational::from_integer(col.cuts.into());
        st.widths.push(w);
        st.markers.push(marker);
        st.columns.push(Arc::new(col));
        Ok(())
    }

    /// The column at stage `n`, building and caching earlier stages as needed.
    pub fn column(&self, n: u32) -> Result<Arc<Column>> {
        let idx = self.ensure(n)?;
        Ok(self.state.read().expect("tower lock").columns[idx].clone())
    }

    /// Column height at stage `n` (`H_n` or `h_n`).
    pub fn height(&self, n: u32) -> Result<BigUint> {
        Ok(self.column(n)?.height.clone())
    }

    /// `h_n`: the four-cut marker, or the column height for `V_L`.
    pub fn marker(&self, n: u32) -> Result<BigUint> {
        let idx = self.ensure(n)?;
        Ok(self.state.read().expect("tower lock").markers[idx].clone())
    }

    /// Width of one level at stage `n`.
    pub fn width(&self, n: u32) -> Result<BigRational> {
        let idx = self.ensure(n)?;
        Ok(self.state.read().expect("tower lock").widths[idx].clone())
    }

    /// Parameters of stage `n` of a four-cut family.
    pub fn afs_stage(&self, n: u32) -> Result<AfsStage> {
        if !matches!(self.spec, FamilySpec::Afs4(_)) {
            return Err(Error::Invalid("not a four-cut family".into()));
        }
        self.ensure(n + 1)?;
        Ok(self.state.read().expect("tower lock").afs[n as usize].clone())
    }

    /// Cut count `r_n` of a `V_L` family (copies of `C_n` inside `C_{n+1}`).
    pub fn cuts_after(&self, n: u32) -> Result<usize> {
        Ok(self.column(n + 1)?.cuts)
    }

    pub fn heights(&self, up_to: u32) -> Result<Vec<StageHeights>> {
        (self.base_stage()..=up_to)
            .map(|n| {
                Ok(StageHeights {
                    stage: n,
                    column_height: self.height(n)?,
                    marker: self.marker(n)?,
                })
            })
            .collect()
    }

    /// Largest stage built so far.
    pub fn built_stage(&self) -> Option<u32> {
        self.state.read().expect("tower lock").columns.last().map(|c| c.stage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic_index::vl::CutRule;

    #[test]
    fn afs_example() {
        let t = Tower::afs(AfsParams::constant(3, 10, 4, 20));
        let c0 = t.column(0).unwrap();
        assert_eq!((c0.height.clone(), c0.cuts), (BigUint::one(), 0));
        let c1 = t.column(1).unwrap();
        let offs: Vec<String> = c1.embed_offsets.iter().map(|o| o.to_string()).collect();
        assert_eq!(offs, ["0", "4", "15", "20"]);
        assert_eq!(c1.height, BigUint::from(41u32));
        assert_eq!(t.marker(1).unwrap(), BigUint::from(21u32));
        assert_eq!(t.width(2).unwrap(), BigRational::new(1.into(), 16.into()));
    }

    #[test]
    fn vl_example() {
        let t = Tower::vl(VlSpec::new(1, CutRule::Constant { value: 2 }));
        assert!(matches!(t.column(0), Err(Error::StageUnavailable { stage: 0, .. })));
        let c2 = t.column(2).unwrap();
        let offs: Vec<String> = c2.embed_offsets.iter().map(|o| o.to_string()).collect();
        assert_eq!(offs, ["0", "3"]);
        assert_eq!(c2.height, BigUint::from(8u32));
        let sp: Vec<(String, String)> = c2
            .spacer_ranges
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(sp, [("1".into(), "3".into()), ("4".into(), "8".into())]);
        assert_eq!(t.width(3).unwrap(), BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn vl_schema_error() {
        let t = Tower::vl(VlSpec::new(2, CutRule::Constant { value: 2 }));
        assert!(matches!(t.column(2), Err(Error::Schema { stage: 1, .. })));
    }
}
