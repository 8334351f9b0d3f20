use super::TeichError;
use crate::hyperbolic::{angle_at_vertex, MoebiusMap, Point};
use crate::surface::{SurfaceRep, Word};
use std::collections::HashSet;
use std::f64::consts::PI;

/// Longest word considered while building the domain.
const MAX_WORD: usize = 12;

#[derive(Debug, Clone)]
pub struct GroupElement {
    pub word: Word,
    pub matrix: MoebiusMap,
    /// Hyperboloid coordinates of the orbit point g·i.
    orbit: [f64; 3],
}

impl GroupElement {
    fn new(word: Word, matrix: MoebiusMap) -> Self {
        let orbit = matrix.apply(Point::i()).to_hyperboloid();
        GroupElement { word, matrix, orbit }
    }

    fn key(&self) -> (i64, i64) {
        let p = self.matrix.apply(Point::i());
        ((p.x * 1e8).round() as i64, (p.y.ln() * 1e8).round() as i64)
    }

    fn displacement(&self) -> f64 {
        self.orbit[0].max(1.0).acosh()
    }
}

/// Dirichlet domain centred at i: a compact convex polygon whose sides are
/// paired by group elements.
#[derive(Debug, Clone)]
pub struct DirichletDomain {
    /// Vertices in counter-clockwise order.
    pub vertices: Vec<Point>,
    /// Side k runs from vertex k to vertex k+1 and lies on the bisector of i and g_k·i.
    pub side_elements: Vec<GroupElement>,
    /// partner[k] is the side whose element is g_k⁻¹; g_k⁻¹ maps side k onto it.
    pub partner: Vec<usize>,
    pub area: f64,
}

#[derive(Clone, Copy)]
struct KVertex {
    k: [f64; 2],
    /// element label of the edge starting at this vertex
    label: Option<usize>,
}

fn clip(poly: &[KVertex], n: [f64; 3], label: usize) -> Vec<KVertex> {
    let s = |v: &KVertex| n[1] * v.k[0] + n[2] * v.k[1] - n[0];
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let nxt = poly[(i + 1) % poly.len()];
        let (sc, sn) = (s(&cur), s(&nxt));
        let cross = || {
            let t = sc / (sc - sn);
            [cur.k[0] + t * (nxt.k[0] - cur.k[0]), cur.k[1] + t * (nxt.k[1] - cur.k[1])]
        };
        if sc <= 0.0 {
            out.push(cur);
            if sn > 0.0 {
                out.push(KVertex { k: cross(), label: Some(label) });
            }
        } else if sn <= 0.0 {
            out.push(KVertex { k: cross(), label: cur.label });
        }
    }
    // drop degenerate edges
    let mut cleaned: Vec<KVertex> = Vec::with_capacity(out.len());
    for i in 0..out.len() {
        let nxt = out[(i + 1) % out.len()];
        let d = (out[i].k[0] - nxt.k[0]).hypot(out[i].k[1] - nxt.k[1]);
        if d > 1e-13 {
            cleaned.push(out[i]);
        }
    }
    cleaned
}

fn klein_to_point(k: [f64; 2]) -> Point {
    let s = (1.0 - k[0] * k[0] - k[1] * k[1]).max(1e-300).sqrt();
    Point::from_hyperboloid([1.0 / s, k[0] / s, k[1] / s])
}

fn polygon_area(pts: &[Point]) -> Option<f64> {
    let n = pts.len();
    let mut sum = 0.0;
    for i in 0..n {
        sum += angle_at_vertex(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]).ok()?;
    }
    Some((n as f64 - 2.0) * PI - sum)
}

struct Builder {
    elements: Vec<GroupElement>,
    keys: HashSet<(i64, i64)>,
    poly: Vec<KVertex>,
}

impl Builder {
    fn add(&mut self, e: GroupElement) -> bool {
        if e.displacement() < 1e-6 || e.word.len() > MAX_WORD {
            return false;
        }
        if !self.keys.insert(e.key()) {
            return false;
        }
        let n = [e.orbit[0] - 1.0, e.orbit[1], e.orbit[2]];
        let idx = self.elements.len();
        self.elements.push(e);
        self.poly = clip(&self.poly, n, idx);
        true
    }

    fn compact(&self) -> bool {
        self.poly.len() >= 3
            && self.poly.iter().all(|v| v.label.is_some() && v.k[0].hypot(v.k[1]) < 1.0 - 1e-12)
    }

    fn radius(&self) -> f64 {
        self.poly
            .iter()
            .map(|v| crate::hyperbolic::dist(Point::i(), klein_to_point(v.k)))
            .fold(0.0, f64::max)
    }
}

/// Builds the Dirichlet domain of a Fuchsian representation centred at i.
pub fn dirichlet_domain(rep: &SurfaceRep) -> Result<DirichletDomain, TeichError> {
    let target = 4.0 * PI * (rep.genus as f64 - 1.0);
    let group = rep.group();
    let big = 4.0;
    let mut b = Builder {
        elements: Vec::new(),
        keys: HashSet::new(),
        poly: [[-big, -big], [big, -big], [big, big], [-big, big]]
            .iter()
            .map(|k| KVertex { k: *k, label: None })
            .collect(),
    };
    for w in group.enumerate_ball(3, usize::MAX)? {
        let m = rep.evaluate(&w);
        b.add(GroupElement::new(w, m));
    }
    let gens: Vec<GroupElement> = group
        .letters()
        .into_iter()
        .map(|l| {
            let w = Word(vec![l]);
            let m = rep.evaluate(&w);
            GroupElement::new(w, m)
        })
        .collect();
    for _round in 0..30 {
        if b.compact() {
            let pts: Vec<Point> = b.poly.iter().map(|v| klein_to_point(v.k)).collect();
            if let Some(area) = polygon_area(&pts) {
                if (area - target).abs() < 1e-8 * target {
                    return finish(&b, pts, area);
                }
            }
        }
        let bound = if b.compact() { 2.0 * b.radius() + 1e-6 } else { f64::INFINITY };
        let sides: Vec<usize> = b.poly.iter().filter_map(|v| v.label).collect();
        let mut pool: Vec<GroupElement> = sides.iter().map(|&s| b.elements[s].clone()).collect();
        pool.extend(gens.iter().cloned());
        let mut new = Vec::new();
        for &s in &sides {
            let e = b.elements[s].clone();
            for t in &pool {
                let w = e.word.concat(&t.word);
                if w.len() > MAX_WORD {
                    continue;
                }
                let g = GroupElement::new(w, (e.matrix * t.matrix).renormalized());
                if g.displacement() <= bound {
                    new.push(g);
                }
            }
        }
        new.sort_by(|a, c| a.displacement().total_cmp(&c.displacement()));
        let mut added = false;
        for g in new {
            added |= b.add(g);
        }
        if !added {
            break;
        }
    }
    Err(TeichError::DomainConstructionFailed("polygon did not close up to the expected area".into()))
}

fn finish(b: &Builder, pts: Vec<Point>, area: f64) -> Result<DirichletDomain, TeichError> {
    let side_elements: Vec<GroupElement> =
        b.poly.iter().map(|v| b.elements[v.label.expect("compact")].clone()).collect();
    let n = side_elements.len();
    let mut partner = vec![usize::MAX; n];
    for k in 0..n {
        let inv = side_elements[k].matrix.inverse();
        let found = (0..n).find(|&j| side_elements[j].matrix.approx_eq(&inv, 1e-7));
        let j = found.ok_or_else(|| TeichError::DomainConstructionFailed(format!("side {k} is unpaired")))?;
        // g_k⁻¹ maps side k onto side j with reversed orientation
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let (p2, q2) = (pts[j], pts[(j + 1) % n]);
        let d1 = crate::hyperbolic::dist(inv.apply(p), q2) + crate::hyperbolic::dist(inv.apply(q), p2);
        if d1 > 1e-7 {
            return Err(TeichError::DomainConstructionFailed(format!("side {k} does not map onto side {j} ({d1:e})")));
        }
        partner[k] = j;
    }
    Ok(DirichletDomain { vertices: pts, side_elements, partner, area })
}
