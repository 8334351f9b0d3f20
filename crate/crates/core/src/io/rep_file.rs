use super::{content_lines, expect_header, fmt_f, parse_err, parse_floats, read_text, write_text, IoError};
use crate::hyperbolic::MoebiusMap;
use crate::surface::{SurfaceRep, Word};
use std::path::Path;

pub(crate) const HEADER: &str = "# surfdom representation v1";

/// Largest relator residual accepted without `allow_residual`.
pub const RELATOR_TOL: f64 = 1e-6;

/// Serialise a representation: header, genus line, then one row
/// `label m11 m12 m21 m22` per generator.
pub fn format_rep(rep: &SurfaceRep) -> String {
    let mut s = format!("{HEADER}\ngenus {}\n", rep.genus);
    s.push_str(&generator_rows(rep));
    s
}

pub(crate) fn generator_rows(rep: &SurfaceRep) -> String {
    let mut s = String::new();
    for (k, m) in rep.images.iter().enumerate() {
        let label = if k % 2 == 0 { 'a' } else { 'b' };
        s.push_str(&format!("{label}{} {} {} {} {}\n", k / 2 + 1, fmt_f(m.a), fmt_f(m.b), fmt_f(m.c), fmt_f(m.d)));
    }
    s
}

pub fn write_rep(path: &Path, rep: &SurfaceRep) -> Result<(), IoError> {
    write_text(path, &format_rep(rep))
}

pub fn read_rep(path: &Path, allow_residual: bool) -> Result<SurfaceRep, IoError> {
    parse_rep(&read_text(path)?, allow_residual)
}

/// Parse a representation file. Matrices are renormalised to determinant 1
/// and canonical sign.
pub fn parse_rep(text: &str, allow_residual: bool) -> Result<SurfaceRep, IoError> {
    expect_header(text, HEADER)?;
    let mut lines = content_lines(text);
    let (ln, first) = lines.next().ok_or_else(|| parse_err(1, "missing genus line"))?;
    let genus = parse_genus(ln, first)?;
    let rep = parse_generator_rows(lines, genus, ln)?;
    let res = rep.relator_residual();
    if res > RELATOR_TOL && !allow_residual {
        return Err(IoError::Residual(res));
    }
    Ok(rep)
}

pub(crate) fn parse_genus(line: usize, s: &str) -> Result<usize, IoError> {
    let fields: Vec<&str> = s.split_whitespace().collect();
    match fields.as_slice() {
        ["genus", g] => {
            let g: usize = g.parse().map_err(|_| parse_err(line, format!("bad genus {g:?}")))?;
            if g < 2 {
                return Err(parse_err(line, format!("genus must be at least 2, got {g}")));
            }
            Ok(g)
        }
        _ => Err(parse_err(line, format!("expected `genus <g>`, found {s:?}"))),
    }
}

/// Read exactly 2·genus generator rows from `lines`; `last` is the line
/// number to blame when rows are missing.
pub(crate) fn parse_generator_rows<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    genus: usize,
    last: usize,
) -> Result<SurfaceRep, IoError> {
    let mut images: Vec<Option<MoebiusMap>> = vec![None; 2 * genus];
    let mut last = last;
    for (ln, l) in lines.take(2 * genus) {
        last = ln;
        let fields: Vec<&str> = l.split_whitespace().collect();
        let Some((label, nums)) = fields.split_first() else {
            return Err(parse_err(ln, "empty row"));
        };
        let word = Word::parse(label, genus).map_err(|_| parse_err(ln, format!("unknown generator {label:?}")))?;
        let gen = match word.letters() {
            [l] if !l.inv => l.gen as usize,
            _ => return Err(parse_err(ln, format!("unknown generator {label:?}"))),
        };
        let v = parse_floats(ln, nums, 4)?;
        let m = MoebiusMap::new(v[0], v[1], v[2], v[3]).map_err(|e| parse_err(ln, format!("matrix row for {label}: {e}")))?;
        if images[gen].replace(m).is_some() {
            return Err(parse_err(ln, format!("generator {label} given twice")));
        }
    }
    let mut out = Vec::with_capacity(2 * genus);
    for (k, m) in images.into_iter().enumerate() {
        let label = if k % 2 == 0 { 'a' } else { 'b' };
        out.push(m.ok_or_else(|| parse_err(last, format!("missing generator {label}{}", k / 2 + 1)))?);
    }
    Ok(SurfaceRep::new(genus, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teichmueller::{fn_to_holonomy, FNCoords};

    fn fuchsian() -> SurfaceRep {
        fn_to_holonomy(&FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap()).unwrap()
    }

    #[test]
    fn round_trip() {
        let rep = fuchsian();
        let back = parse_rep(&format_rep(&rep), false).unwrap();
        // the reader renormalises, which may move the last bit
        for (a, b) in back.images.iter().zip(&rep.images) {
            assert!(a.distance(b) < 1e-14, "{a:?} {b:?}");
        }
    }

    #[test]
    fn malformed_row_names_line() {
        let text = format_rep(&fuchsian()).replacen("b1 ", "b1 1.0 oops ", 1);
        match parse_rep(&text, false) {
            Err(IoError::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("oops") || msg.contains("expected 4"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn renormalises_determinant() {
        let text = format!("{HEADER}\ngenus 2\na1 2 0 0 2\nb1 1 0 0 1\na2 1 0 0 1\nb2 -3 0 0 -3\n");
        assert_eq!(parse_rep(&text, false).unwrap(), SurfaceRep::trivial(2));
    }

    #[test]
    fn rejects_relator_violation_unless_allowed() {
        let text = format!("{HEADER}\ngenus 2\na1 2 0 0 0.5\nb1 1 1 0 1\na2 1 0 0 1\nb2 1 0 0 1\n");
        assert!(matches!(parse_rep(&text, false), Err(IoError::Residual(_))));
        assert!(parse_rep(&text, true).is_ok());
    }

    #[test]
    fn missing_and_duplicate_generators() {
        let text = format!("{HEADER}\ngenus 2\na1 1 0 0 1\na1 1 0 0 1\n");
        assert!(matches!(parse_rep(&text, false), Err(IoError::Parse { line: 4, .. })));
        let text = format!("{HEADER}\ngenus 2\na1 1 0 0 1\n");
        assert!(matches!(parse_rep(&text, false), Err(IoError::Parse { line: 3, .. })));
        assert!(matches!(parse_rep("genus 2\n", false), Err(IoError::Parse { line: 1, .. })));
    }
}
