use super::rep_file::{generator_rows, parse_generator_rows, parse_genus};
use super::{content_lines, expect_header, fmt_f, parse_err, parse_floats, read_text, write_text, IoError};
use crate::hyperbolic::{dist, Point};
use crate::surface::{SurfaceRep, Word};
use crate::teichmueller::{EdgePairing, Mesh, TeichError};
use std::path::Path;

const HEADER: &str = "# surfdom mesh v1";
const SECTIONS: [&str; 5] = ["holonomy", "vertices", "faces", "pairings", "conformal"];

/// Relative tolerance between stored and recomputed conformal factors.
const CONFORMAL_TOL: f64 = 1e-9;

/// Raw contents of a mesh file, before any geometric validation.
#[derive(Debug, Clone)]
pub struct MeshParts {
    pub holonomy: SurfaceRep,
    pub vertices: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
    pub pairings: Vec<EdgePairing>,
    pub conformal: Vec<f64>,
}

impl MeshParts {
    /// Largest distance between a paired vertex and the holonomy image of
    /// its partner edge endpoint. Zero up to roundoff for a valid mesh.
    pub fn pairing_error(&self) -> f64 {
        let n = self.vertices.len();
        let mut worst: f64 = 0.0;
        for p in &self.pairings {
            let g = self.holonomy.evaluate(&p.word);
            for i in 0..2 {
                if p.edge[i] >= n || p.partner[i] >= n {
                    return f64::INFINITY;
                }
                worst = worst.max(dist(g.apply(self.vertices[p.edge[i]]), self.vertices[p.partner[i]]));
            }
        }
        worst
    }

    pub fn into_mesh(self) -> Result<Mesh, IoError> {
        let stored = self.conformal;
        let mesh = Mesh::from_parts(self.holonomy, self.vertices, self.faces, self.pairings)?;
        if stored.len() != mesh.faces.len() {
            return Err(TeichError::InvalidMesh(format!("{} conformal factors for {} faces", stored.len(), mesh.faces.len())).into());
        }
        for (f, (a, b)) in stored.iter().zip(&mesh.conformal).enumerate() {
            if (a - b).abs() > CONFORMAL_TOL * b.abs() {
                return Err(TeichError::InvalidMesh(format!("face {f}: stored conformal factor {a} disagrees with {b}")).into());
            }
        }
        Ok(mesh)
    }
}

pub fn write_mesh(path: &Path, mesh: &Mesh) -> Result<(), IoError> {
    let mut s = format!("{HEADER}\ngenus {}\n[holonomy]\n", mesh.genus);
    s.push_str(&generator_rows(&mesh.holonomy));
    s.push_str("[vertices]\n");
    for v in &mesh.vertices {
        s.push_str(&format!("{} {}\n", fmt_f(v.x), fmt_f(v.y)));
    }
    s.push_str("[faces]\n");
    for [a, b, c] in &mesh.faces {
        s.push_str(&format!("{a} {b} {c}\n"));
    }
    s.push_str("[pairings]\n");
    for p in &mesh.pairings {
        s.push_str(&format!("{} {} {} {} {}\n", p.edge[0], p.edge[1], p.partner[0], p.partner[1], p.word));
    }
    s.push_str("[conformal]\n");
    for a in &mesh.conformal {
        s.push_str(&format!("{}\n", fmt_f(*a)));
    }
    write_text(path, &s)
}

pub fn read_mesh_parts(path: &Path) -> Result<MeshParts, IoError> {
    parse_mesh_parts(&read_text(path)?)
}

/// Read and validate a mesh file; inconsistent pairings are an error.
pub fn read_mesh(path: &Path) -> Result<Mesh, IoError> {
    read_mesh_parts(path)?.into_mesh()
}

pub fn parse_mesh(text: &str) -> Result<Mesh, IoError> {
    parse_mesh_parts(text)?.into_mesh()
}

fn parse_indices<const N: usize>(line: usize, fields: &[&str]) -> Result<[usize; N], IoError> {
    if fields.len() != N {
        return Err(parse_err(line, format!("expected {N} indices, found {}", fields.len())));
    }
    let mut out = [0; N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f.parse().map_err(|_| parse_err(line, format!("bad index {f:?}")))?;
    }
    Ok(out)
}

fn parse_mesh_parts(text: &str) -> Result<MeshParts, IoError> {
    expect_header(text, HEADER)?;
    let mut lines = content_lines(text).peekable();
    let (gl, g) = lines.next().ok_or_else(|| parse_err(1, "missing genus line"))?;
    let genus = parse_genus(gl, g)?;
    let mut sections: Vec<(usize, &str, Vec<(usize, &str)>)> = Vec::new();
    for (ln, l) in lines {
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let expected = SECTIONS.get(sections.len()).copied().unwrap_or("end of file");
            if name != expected {
                return Err(parse_err(ln, format!("expected section [{expected}], found [{name}]")));
            }
            sections.push((ln, name, Vec::new()));
        } else if let Some(last) = sections.last_mut() {
            last.2.push((ln, l));
        } else {
            return Err(parse_err(ln, "data before the first section"));
        }
    }
    if sections.len() != SECTIONS.len() {
        let end = text.lines().count();
        return Err(parse_err(end, format!("missing section [{}]", SECTIONS[sections.len()])));
    }
    let (hl, _, hrows) = &sections[0];
    if hrows.len() != 2 * genus {
        return Err(parse_err(*hl, format!("[holonomy] needs {} rows, found {}", 2 * genus, hrows.len())));
    }
    let holonomy = parse_generator_rows(hrows.iter().copied(), genus, *hl)?;
    let mut vertices = Vec::new();
    for &(ln, l) in &sections[1].2 {
        let v = parse_floats(ln, &l.split_whitespace().collect::<Vec<_>>(), 2)?;
        vertices.push(Point::new(v[0], v[1]).map_err(|e| parse_err(ln, e.to_string()))?);
    }
    let mut faces = Vec::new();
    for &(ln, l) in &sections[2].2 {
        faces.push(parse_indices::<3>(ln, &l.split_whitespace().collect::<Vec<_>>())?);
    }
    let mut pairings = Vec::new();
    for &(ln, l) in &sections[3].2 {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(ln, format!("expected 4 indices and a word, found {} fields", fields.len())));
        }
        let [a, b, c, d] = parse_indices::<4>(ln, &fields[..4])?;
        let word = Word::parse(fields[4], genus).map_err(|e| parse_err(ln, e.to_string()))?;
        pairings.push(EdgePairing { edge: [a, b], partner: [c, d], word });
    }
    let mut conformal = Vec::new();
    for &(ln, l) in &sections[4].2 {
        conformal.push(parse_floats(ln, &l.split_whitespace().collect::<Vec<_>>(), 1)?[0]);
    }
    Ok(MeshParts { holonomy, vertices, faces, pairings, conformal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teichmueller::{build_mesh, FNCoords};

    fn mesh() -> Mesh {
        build_mesh(&FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap(), 0.8).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = mesh();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        write_mesh(&p, &m).unwrap();
        let parts = read_mesh_parts(&p).unwrap();
        assert!(parts.pairing_error() < 1e-9);
        let back = parts.into_mesh().unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.faces, m.faces);
        assert_eq!(back.conformal, m.conformal);
    }

    #[test]
    fn corrupted_vertex_breaks_pairing() {
        let m = mesh();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        write_mesh(&p, &m).unwrap();
        let v = m.pairings[0].partner[0];
        let mut parts = read_mesh_parts(&p).unwrap();
        parts.vertices[v].x += 0.05;
        assert!(parts.pairing_error() > 1e-3);
        assert!(parts.into_mesh().is_err());
    }

    #[test]
    fn section_order_enforced() {
        let text = format!("{HEADER}\ngenus 2\n[vertices]\n");
        assert!(matches!(parse_mesh(&text), Err(IoError::Parse { line: 3, .. })));
    }
}
