//! Point location in an equivariant mesh: find the face lift containing a
//! point of ℍ² together with the deck transformation bringing it there.

use super::{dirichlet_domain, Mesh, TeichError};
use crate::hyperbolic::{dist, MoebiusMap, Point};
use std::collections::HashSet;

const GRID: usize = 64;

pub struct Locator {
    /// Conjugator moving i to the centre of the mesh.
    centre: MoebiusMap,
    sides: Vec<MoebiusMap>,
    candidates: Vec<MoebiusMap>,
    tris: Vec<[[f64; 3]; 3]>,
    grid: Vec<Vec<usize>>,
}

/// Result of a location query: `transform · p` lies in face `face`.
#[derive(Debug, Clone, Copy)]
pub struct Located {
    pub face: usize,
    pub transform: MoebiusMap,
    /// Smallest normalised edge test value; negative means p was outside every lift.
    pub inside: f64,
}

fn det3(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn cell(x: f64) -> usize {
    (((x + 1.0) * 0.5 * GRID as f64).floor().max(0.0) as usize).min(GRID - 1)
}

impl Locator {
    pub fn new(mesh: &Mesh) -> Result<Self, TeichError> {
        let hs: Vec<[f64; 3]> = mesh.vertices.iter().map(|p| p.to_hyperboloid()).collect();
        let mut s = [0.0; 3];
        for h in &hs {
            for k in 0..3 {
                s[k] += h[k];
            }
        }
        let n = (s[0] * s[0] - s[1] * s[1] - s[2] * s[2]).sqrt();
        let c = Point::from_hyperboloid([s[0] / n, s[1] / n, s[2] / n]);
        let centre = MoebiusMap::moving_i_to(c);
        let ci = centre.inverse();
        let local = mesh.holonomy.conjugate(&ci);
        let dom = dirichlet_domain(&local)?;
        let sides: Vec<MoebiusMap> = dom.side_elements.iter().map(|g| g.matrix).collect();
        let verts: Vec<Point> = mesh.vertices.iter().map(|p| ci.apply(*p)).collect();
        let reach = verts.iter().map(|p| dist(*p, Point::i())).fold(0.0, f64::max);
        let dom_r = dom.vertices.iter().map(|p| dist(*p, Point::i())).fold(0.0, f64::max);
        let bound = reach + 2.0 * dom_r + 1e-6;
        let key = |g: &MoebiusMap| {
            let p = g.apply(Point::i());
            ((p.x * 1e7).round() as i64, (p.y.ln() * 1e7).round() as i64)
        };
        let mut seen = HashSet::new();
        seen.insert(key(&MoebiusMap::identity()));
        let mut candidates = vec![MoebiusMap::identity()];
        let mut layer = candidates.clone();
        while !layer.is_empty() {
            let mut next = Vec::new();
            for g in &layer {
                for s in &sides {
                    let h = *s * *g;
                    if dist(h.apply(Point::i()), Point::i()) <= bound && seen.insert(key(&h)) {
                        next.push(h);
                    }
                }
            }
            candidates.extend(next.iter().copied());
            layer = next;
        }
        candidates.sort_by(|a, b| dist(a.apply(Point::i()), Point::i()).total_cmp(&dist(b.apply(Point::i()), Point::i())));
        let tris: Vec<[[f64; 3]; 3]> = mesh.faces.iter().map(|f| f.map(|v| verts[v].to_hyperboloid())).collect();
        let mut grid = vec![Vec::new(); GRID * GRID];
        for (fi, f) in mesh.faces.iter().enumerate() {
            let d = f.map(|v| verts[v].to_disk());
            let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for z in &d {
                x0 = x0.min(z.re);
                x1 = x1.max(z.re);
                y0 = y0.min(z.im);
                y1 = y1.max(z.im);
            }
            let m = 0.1 * (x1 - x0).max(y1 - y0) + 1e-9;
            for i in cell(x0 - m)..=cell(x1 + m) {
                for j in cell(y0 - m)..=cell(y1 + m) {
                    grid[i * GRID + j].push(fi);
                }
            }
        }
        Ok(Locator { centre, sides, candidates, tris, grid })
    }

    fn test(&self, f: usize, q: &[f64; 3]) -> f64 {
        let t = &self.tris[f];
        let nq = norm(q);
        [(0, 1), (1, 2), (2, 0)]
            .iter()
            .map(|&(a, b)| det3(&t[a], &t[b], q) / (norm(&t[a]) * norm(&t[b]) * nq))
            .fold(f64::MAX, f64::min)
    }

    pub fn locate(&self, p: Point) -> Located {
        let ci = self.centre.inverse();
        let mut q = ci.apply(p);
        let mut red = MoebiusMap::identity();
        for _ in 0..1000 {
            let d0 = dist(q, Point::i());
            let better = self.sides.iter().find(|g| dist(q, g.apply(Point::i())) < d0 - 1e-12);
            match better {
                Some(g) => {
                    let gi = g.inverse();
                    q = gi.apply(q);
                    red = gi * red;
                }
                None => break,
            }
        }
        let mut best: Option<(f64, usize, MoebiusMap)> = None;
        for d in &self.candidates {
            let r = d.apply(q);
            let z = r.to_disk();
            let h = r.to_hyperboloid();
            for &f in &self.grid[cell(z.re) * GRID + cell(z.im)] {
                let v = self.test(f, &h);
                if best.as_ref().map(|b| v > b.0).unwrap_or(true) {
                    best = Some((v, f, *d));
                }
            }
            if best.as_ref().map(|b| b.0 >= 0.0).unwrap_or(false) {
                break;
            }
        }
        let (inside, face, d) = best.unwrap_or((f64::MIN, 0, MoebiusMap::identity()));
        Located { face, transform: self.centre * d * red * ci, inside }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teichmueller::{build_mesh, FNCoords};

    #[test]
    fn locates_translates() {
        let m = build_mesh(&FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap(), 0.5).unwrap();
        let loc = Locator::new(&m).unwrap();
        let rep = m.holonomy.clone();
        let g = rep.evaluate(&crate::surface::Word::parse("a1B2a2", 2).unwrap());
        for (fi, f) in m.faces.iter().enumerate().step_by(37) {
            let c = crate::teichmueller::centroid(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]);
            let l = loc.locate(g.apply(c));
            assert_eq!(l.face, fi);
            assert!(l.inside > 0.0);
            assert!(dist(l.transform.apply(g.apply(c)), c) < 1e-8);
        }
    }
}
