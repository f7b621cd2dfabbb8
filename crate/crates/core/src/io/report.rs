//! Line-oriented reports and CSV tables.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// `key=value` lines after a `#` header, closed by a `RESULT=` line.
///
/// The header carries the tool name and version only, so identical inputs
/// render byte-identical documents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    command: String,
    digest: Option<String>,
    entries: Vec<(String, String)>,
}

fn clean(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn digest(mut self, digest: impl Into<String>) -> Self {
        self.digest = Some(digest.into());
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self, result: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# rankone {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(out, "command={}", clean(&self.command)).unwrap();
        if let Some(d) = &self.digest {
            writeln!(out, "family_digest={d}").unwrap();
        }
        for (k, v) in &self.entries {
            writeln!(out, "{}={}", clean(k), clean(v)).unwrap();
        }
        writeln!(out, "RESULT={}", clean(result)).unwrap();
        out
    }
}

/// Reads back the `key=value` pairs of a rendered report, skipping the header.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// A CSV document with a header row and LF line endings.
pub fn to_csv<R, I, S>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_shape() {
        let mut r = Report::new("build --stage 1").digest("abc");
        r.push("H_1", 41).push("note", "two\nlines");
        let text = r.render("PASS");
        assert!(text.starts_with("# rankone "));
        assert!(text.ends_with("RESULT=PASS\n"));
        let kv = parse_report(&text);
        assert_eq!(kv[2], ("H_1".to_string(), "41".to_string()));
        assert_eq!(kv[3].1, "two lines");
    }

    #[test]
    fn csv_shape() {
        let s = to_csv(&["lag", "value"], [["0", "1/1"], ["4", "1/4"]]).unwrap();
        assert_eq!(s, "lag,value\n0,1/1\n4,1/4\n");
    }
}
