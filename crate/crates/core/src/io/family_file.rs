//! JSON family files: `{format_version, kind, params, trace?}`.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::afs::AfsParams;
use crate::ergodic_index::vl::VlSpec;
use crate::error::{Error, ParseError, Result};
use crate::synthesis::SynthesisTrace;
use crate::tower::{FamilySpec, Tower};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyFile {
    pub family: FamilySpec,
    pub trace: Option<SynthesisTrace>,
}

fn bad(msg: impl Into<String>) -> Error {
    ParseError::FamilyFile(msg.into()).into()
}

impl FamilyFile {
    pub fn new(family: FamilySpec) -> Self {
        FamilyFile { family, trace: None }
    }

    pub fn with_trace(params: AfsParams, trace: SynthesisTrace) -> Self {
        FamilyFile {
            family: FamilySpec::Afs4(params),
            trace: Some(trace),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(bad("empty document"));
        }
        let value: Value = serde_json::from_str(text)?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(mut obj) = value else {
            return Err(bad("top level must be an object"));
        };
        match obj.remove("format_version") {
            Some(Value::Number(n)) if n.as_u64() == Some(FORMAT_VERSION) => {}
            Some(other) => return Err(bad(format!("unsupported format_version {other}"))),
            None => return Err(bad("missing format_version")),
        }
        let kind = match obj.remove("kind") {
            Some(Value::String(s)) => s,
            _ => return Err(bad("missing string field `kind`")),
        };
        let params = obj.remove("params").ok_or_else(|| bad("missing field `params`"))?;
        let trace = obj.remove("trace");
        if let Some(extra) = obj.keys().next() {
            return Err(bad(format!("unknown field `{extra}`")));
        }
        let family = match kind.as_str() {
            "afs4" => FamilySpec::Afs4(serde_json::from_value(params).map_err(|e| bad(format!("afs4 params: {e}")))?),
            "vl" => {
                FamilySpec::Vl(serde_json::from_value::<VlSpec>(params).map_err(|e| bad(format!("vl params: {e}")))?)
            }
            other => return Err(bad(format!("unknown kind `{other}`; expected `afs4` or `vl`"))),
        };
        let trace = match trace {
            None | Some(Value::Null) => None,
            Some(t) => {
                if !matches!(family, FamilySpec::Afs4(_)) {
                    return Err(bad("only afs4 families carry a synthesis trace"));
                }
                Some(serde_json::from_value(t).map_err(|e| bad(format!("trace: {e}")))?)
            }
        };
        Ok(FamilyFile { family, trace })
    }

    pub fn to_value(&self) -> Value {
        let params = match &self.family {
            FamilySpec::Afs4(p) => serde_json::to_value(p),
            FamilySpec::Vl(v) => serde_json::to_value(v),
        }
        .expect("family parameters serialize");
        let mut obj = Map::new();
        obj.insert("format_version".into(), json!(FORMAT_VERSION));
        obj.insert("kind".into(), json!(self.family.kind()));
        obj.insert("params".into(), params);
        if let Some(t) = &self.trace {
            obj.insert("trace".into(), serde_json::to_value(t).expect("trace serializes"));
        }
        Value::Object(obj)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("value serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the compact, key-sorted serialization.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(&self.to_value()).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn tower(&self) -> Tower {
        Tower::new(self.family.clone())
    }

    pub fn afs_params(&self) -> Option<&AfsParams> {
        match &self.family {
            FamilySpec::Afs4(p) => Some(p),
            FamilySpec::Vl(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afs::preset_infinite_ergodic_index;
    use crate::ergodic_index::vl::CutRule;
    use crate::measure::Fraction;
    use crate::synthesis::{synthesize_r, DirectionSpec};

    #[test]
    fn round_trips() {
        let files = [
            FamilyFile::new(FamilySpec::Afs4(preset_infinite_ergodic_index())),
            FamilyFile::new(FamilySpec::Afs4(AfsParams::constant(3, 10, 4, 20))),
            FamilyFile::new(FamilySpec::Vl(VlSpec::new(2, CutRule::Geometric { c: 6, beta: 2 }))),
        ];
        for f in files {
            let back = FamilyFile::parse(&f.to_json_pretty()).unwrap();
            assert_eq!(back, f);
            assert_eq!(back.digest(), f.digest());
        }
        let (params, trace) = synthesize_r(
            &DirectionSpec::ergodic_set(vec![Fraction::direction(1, 2).unwrap()], vec![]),
            4,
        )
        .unwrap();
        let f = FamilyFile::with_trace(params, trace);
        assert_eq!(FamilyFile::parse(&f.to_json_pretty()).unwrap(), f);
    }

    #[test]
    fn malformed_documents() {
        for text in [
            "",
            "[]",
            r#"{"kind":"afs4","params":{}}"#,
            r#"{"format_version":1,"kind":"x","params":{}}"#,
        ] {
            let err = FamilyFile::parse(text).unwrap_err();
            assert!(err.is_parse(), "{text}: {err}");
        }
    }
}
