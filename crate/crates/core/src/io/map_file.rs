use super::{content_lines, expect_header, fmt_f, parse_err, parse_floats, read_text, write_text, IoError};
use crate::harmonic::{EquivariantMap, IterationRecord, MapValues, TargetSpace};
use crate::hyperbolic::Point;
use crate::teichmueller::Mesh;
use std::path::Path;

const HEADER: &str = "# surfdom map v1";
pub(crate) const LOG_HEADER: &str = "# surfdom iterations v1";

/// Per-vertex target coordinates of an equivariant map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub target: TargetSpace,
    pub values: MapValues,
}

pub fn write_map(path: &Path, mesh: &Mesh, map: &EquivariantMap) -> Result<(), IoError> {
    let mut s = format!("{HEADER}\n");
    match map.target {
        TargetSpace::HyperbolicPlane { scale } => s.push_str(&format!("target plane {}\n", fmt_f(scale))),
        TargetSpace::RealLine => s.push_str("target line\n"),
    }
    if let Some(v) = map.plane_values(mesh) {
        s.push_str(&format!("vertices {}\n", v.len()));
        for p in v {
            s.push_str(&format!("{} {}\n", fmt_f(p.x), fmt_f(p.y)));
        }
    } else if let Some(v) = map.line_values(mesh) {
        s.push_str(&format!("vertices {}\n", v.len()));
        for t in v {
            s.push_str(&format!("{}\n", fmt_f(t)));
        }
    }
    write_text(path, &s)
}

pub fn read_map(path: &Path) -> Result<MapFile, IoError> {
    parse_map(&read_text(path)?)
}

pub fn parse_map(text: &str) -> Result<MapFile, IoError> {
    expect_header(text, HEADER)?;
    let mut lines = content_lines(text);
    let (tl, t) = lines.next().ok_or_else(|| parse_err(1, "missing target line"))?;
    let fields: Vec<&str> = t.split_whitespace().collect();
    let target = match fields.as_slice() {
        ["target", "plane", s] => {
            let scale = parse_floats(tl, &[s], 1)?[0];
            if !(scale > 0.0) {
                return Err(parse_err(tl, format!("target scale must be positive, got {scale}")));
            }
            TargetSpace::HyperbolicPlane { scale }
        }
        ["target", "line"] => TargetSpace::RealLine,
        _ => return Err(parse_err(tl, format!("expected `target plane <scale>` or `target line`, found {t:?}"))),
    };
    let (nl, n) = lines.next().ok_or_else(|| parse_err(tl, "missing vertex count"))?;
    let count: usize = n
        .strip_prefix("vertices")
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(|| parse_err(nl, format!("expected `vertices <n>`, found {n:?}")))?;
    let rows: Vec<(usize, &str)> = lines.collect();
    if rows.len() != count {
        return Err(parse_err(rows.last().map_or(nl, |r| r.0), format!("expected {count} vertex rows, found {}", rows.len())));
    }
    let values = match target {
        TargetSpace::HyperbolicPlane { .. } => {
            let mut v = Vec::with_capacity(count);
            for (ln, l) in rows {
                let f = parse_floats(ln, &l.split_whitespace().collect::<Vec<_>>(), 2)?;
                v.push(Point::new(f[0], f[1]).map_err(|e| parse_err(ln, e.to_string()))?);
            }
            MapValues::Plane(v)
        }
        TargetSpace::RealLine => {
            let mut v = Vec::with_capacity(count);
            for (ln, l) in rows {
                v.push(parse_floats(ln, &l.split_whitespace().collect::<Vec<_>>(), 1)?[0]);
            }
            MapValues::Line(v)
        }
    };
    Ok(MapFile { target, values })
}

/// Solver iteration log as CSV with columns iter, E, gradient_norm, step.
pub fn write_iteration_log(path: &Path, log: &[IterationRecord]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iter", "E", "gradient_norm", "step"])?;
    for r in log {
        w.write_record([r.iter.to_string(), fmt_f(r.energy), fmt_f(r.gradient_norm), fmt_f(r.step)])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8");
    write_text(path, &format!("{LOG_HEADER}\n{body}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_plane_map() {
        let m = parse_map(&format!("{HEADER}\ntarget plane 2\nvertices 2\n0 1\n0.5 2\n")).unwrap();
        assert_eq!(m.target, TargetSpace::HyperbolicPlane { scale: 2.0 });
        assert_eq!(m.values, MapValues::Plane(vec![Point::new(0.0, 1.0).unwrap(), Point::new(0.5, 2.0).unwrap()]));
        assert!(matches!(parse_map(&format!("{HEADER}\ntarget plane 1\nvertices 1\n0 -1\n")), Err(IoError::Parse { line: 4, .. })));
    }

    #[test]
    fn log_is_readable_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log.csv");
        let log = vec![IterationRecord { iter: 0, energy: 1.5, gradient_norm: 0.1, step: 0.0 }];
        write_iteration_log(&p, &log).unwrap();
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&p).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["iter", "E", "gradient_norm", "step"]);
        let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
        assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.5);
    }
}
