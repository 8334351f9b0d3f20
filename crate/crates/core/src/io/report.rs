use super::{read_text, write_text, IoError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

/// JSON envelope: `{"format": "surfdom.<kind>", "version": 1, "data": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport<T> {
    pub format: String,
    pub version: u32,
    pub data: T,
}

pub fn write_json_report<T: Serialize>(path: &Path, kind: &str, data: &T) -> Result<(), IoError> {
    let report = JsonReport { format: format!("surfdom.{kind}"), version: FORMAT_VERSION, data };
    let mut s = serde_json::to_string_pretty(&report)?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json_report<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, IoError> {
    let report: JsonReport<T> = serde_json::from_str(&read_text(path)?)?;
    let expected = format!("surfdom.{kind}");
    if report.format != expected || report.version != FORMAT_VERSION {
        return Err(IoError::Config(format!(
            "{}: expected {expected} v{FORMAT_VERSION}, found {} v{}",
            path.display(),
            report.format,
            report.version
        )));
    }
    Ok(report.data)
}

/// CSV table preceded by a `# surfdom <kind> v1` comment line. Rows must be
/// flat records.
pub fn write_csv_report<T: Serialize>(path: &Path, kind: &str, rows: &[T]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8");
    write_text(path, &format!("# surfdom {kind} v{FORMAT_VERSION}\n{body}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        step: usize,
        value: f64,
    }

    #[test]
    fn json_round_trip_and_kind_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_json_report(&p, "test", &vec![1.0, 2.5]).unwrap();
        assert_eq!(read_json_report::<Vec<f64>>(&p, "test").unwrap(), vec![1.0, 2.5]);
        assert!(read_json_report::<Vec<f64>>(&p, "other").is_err());
    }

    #[test]
    fn csv_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let rows = [Row { step: 0, value: 0.1 }, Row { step: 1, value: 1.0 / 3.0 }];
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        write_csv_report(&a, "rows", &rows).unwrap();
        write_csv_report(&b, "rows", &rows).unwrap();
        let text = std::fs::read(&a).unwrap();
        assert_eq!(text, std::fs::read(&b).unwrap());
        assert!(String::from_utf8(text).unwrap().starts_with("# surfdom rows v1\nstep,value\n"));
    }
}
