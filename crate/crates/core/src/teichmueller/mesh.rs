use super::{dirichlet_domain, fn_to_holonomy, DirichletDomain, FNCoords, TeichError};
use crate::hyperbolic::{dist, minkowski, signed_triangle_area, MoebiusMap, Point};
use crate::surface::{SurfaceRep, Word};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};
use std::collections::{HashMap, HashSet, VecDeque};

/// Identification of two boundary edges of the fundamental domain:
/// `partner[i] = holonomy(word) · edge[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePairing {
    pub edge: [usize; 2],
    pub partner: [usize; 2],
    pub word: Word,
}

/// Geodesic triangulation of a fundamental domain with side pairings.
///
/// Vertices identified by the pairings form a class; each vertex is the image
/// of its class representative under the holonomy of `vertex_word`.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub genus: usize,
    pub holonomy: SurfaceRep,
    pub vertices: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
    pub pairings: Vec<EdgePairing>,
    /// Conformal factor α = 1/y² of the face centroid in the z-chart.
    pub conformal: Vec<f64>,
    pub face_area: Vec<f64>,
    pub class_of: Vec<usize>,
    pub class_rep: Vec<usize>,
    pub vertex_word: Vec<Word>,
}

fn uf_words(n: usize, pairings: &[EdgePairing]) -> (Vec<usize>, Vec<usize>, Vec<Word>) {
    let mut adj: Vec<Vec<(usize, Word)>> = vec![Vec::new(); n];
    for p in pairings {
        for i in 0..2 {
            adj[p.edge[i]].push((p.partner[i], p.word.clone()));
            adj[p.partner[i]].push((p.edge[i], p.word.inverse()));
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut words = vec![Word::empty(); n];
    let mut reps = Vec::new();
    for s in 0..n {
        if class_of[s] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(s);
        class_of[s] = c;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for (u, w) in &adj[v] {
                if class_of[*u] == usize::MAX {
                    class_of[*u] = c;
                    words[*u] = w.concat(&words[v]);
                    queue.push_back(*u);
                }
            }
        }
    }
    (class_of, reps, words)
}

/// Hyperboloid centroid of a triangle, as a point.
pub fn centroid(a: Point, b: Point, c: Point) -> Point {
    let (p, q, r) = (a.to_hyperboloid(), b.to_hyperboloid(), c.to_hyperboloid());
    let s = [p[0] + q[0] + r[0], p[1] + q[1] + r[1], p[2] + q[2] + r[2]];
    let n = (-minkowski(&s, &s)).sqrt();
    Point::from_hyperboloid([s[0] / n, s[1] / n, s[2] / n])
}

impl Mesh {
    /// Assemble a mesh and derive classes, conformal factors and areas.
    pub fn from_parts(
        holonomy: SurfaceRep,
        vertices: Vec<Point>,
        faces: Vec<[usize; 3]>,
        pairings: Vec<EdgePairing>,
    ) -> Result<Self, TeichError> {
        let n = vertices.len();
        if faces.iter().flatten().chain(pairings.iter().flat_map(|p| p.edge.iter().chain(&p.partner))).any(|&v| v >= n) {
            return Err(TeichError::InvalidMesh("vertex index out of range".into()));
        }
        let (class_of, class_rep, vertex_word) = uf_words(n, &pairings);
        let mut face_area = Vec::with_capacity(faces.len());
        let mut conformal = Vec::with_capacity(faces.len());
        for (k, f) in faces.iter().enumerate() {
            let [a, b, c] = f.map(|i| vertices[i]);
            let area = signed_triangle_area(a, b, c);
            if !(area > 0.0) {
                return Err(TeichError::InvalidMesh(format!("face {k} is not positively oriented")));
            }
            face_area.push(area);
            let m = centroid(a, b, c);
            conformal.push(1.0 / (m.y * m.y));
        }
        let mesh = Mesh {
            genus: holonomy.genus,
            holonomy,
            vertices,
            faces,
            pairings,
            conformal,
            face_area,
            class_of,
            class_rep,
            vertex_word,
        };
        let dev = mesh.pairing_deviation();
        if dev > 1e-7 {
            return Err(TeichError::InvalidMesh(format!("pairings inconsistent with holonomy ({dev:e})")));
        }
        Ok(mesh)
    }

    pub fn num_classes(&self) -> usize {
        self.class_rep.len()
    }

    pub fn total_area(&self) -> f64 {
        self.face_area.iter().sum()
    }

    /// Holonomy images of every vertex word.
    pub fn vertex_matrices(&self, rep: &SurfaceRep) -> Vec<MoebiusMap> {
        let mut cache: HashMap<&Word, MoebiusMap> = HashMap::new();
        self.vertex_word.iter().map(|w| *cache.entry(w).or_insert_with(|| rep.evaluate(w))).collect()
    }

    /// Largest distance between a vertex and the holonomy image of its class representative.
    pub fn pairing_deviation(&self) -> f64 {
        let mats = self.vertex_matrices(&self.holonomy);
        (0..self.vertices.len())
            .map(|v| dist(mats[v].apply(self.vertices[self.class_rep[self.class_of[v]]]), self.vertices[v]))
            .fold(0.0, f64::max)
    }

    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut set = HashSet::new();
        for f in &self.faces {
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                set.insert([a.min(b), a.max(b)]);
            }
        }
        let mut v: Vec<[usize; 2]> = set.into_iter().collect();
        v.sort();
        v
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges().iter().map(|[a, b]| dist(self.vertices[*a], self.vertices[*b])).fold(0.0, f64::max)
    }

    /// Class representative positions (the identity map on this mesh).
    pub fn identity_values(&self) -> Vec<Point> {
        self.class_rep.iter().map(|&v| self.vertices[v]).collect()
    }

    /// The mesh pushed forward by an equivariant vertex map for `rep`.
    pub fn transported(&self, rep: &SurfaceRep, class_values: &[Point]) -> Result<Mesh, TeichError> {
        let mats = self.vertex_matrices(rep);
        let vertices = (0..self.vertices.len()).map(|v| mats[v].apply(class_values[self.class_of[v]])).collect();
        Mesh::from_parts(rep.clone(), vertices, self.faces.clone(), self.pairings.clone())
    }
}

/// Point at fraction t along the geodesic from p to q.
fn geodesic_point(p: Point, q: Point, t: f64) -> Point {
    let d = dist(p, q);
    if d < 1e-15 {
        return p;
    }
    let (a, b) = (p.to_hyperboloid(), q.to_hyperboloid());
    let (s0, s1) = (((1.0 - t) * d).sinh() / d.sinh(), (t * d).sinh() / d.sinh());
    Point::from_hyperboloid([s0 * a[0] + s1 * b[0], s0 * a[1] + s1 * b[1], s0 * a[2] + s1 * b[2]])
}

fn point_in_polygon(p: Complex64, poly: &[Complex64]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Triangulate the Dirichlet domain of `rep` with geodesic edges no longer than `target_edge`.
pub fn mesh_from_rep(rep: &SurfaceRep, target_edge: f64) -> Result<Mesh, TeichError> {
    if !(target_edge > 0.0) {
        return Err(TeichError::InvalidMesh("target edge must be positive".into()));
    }
    let dom = dirichlet_domain(rep)?;
    mesh_from_domain(rep, &dom, target_edge)
}

pub fn mesh_from_domain(rep: &SurfaceRep, dom: &DirichletDomain, h: f64) -> Result<Mesh, TeichError> {
    let ns = dom.vertices.len();
    let mut pos: Vec<Point> = dom.vertices.clone();
    // interior points of each side, in side order
    let mut side_pts: Vec<Vec<usize>> = vec![Vec::new(); ns];
    for k in 0..ns {
        let j = dom.partner[k];
        if k < j {
            let (p, q) = (dom.vertices[k], dom.vertices[(k + 1) % ns]);
            let n = (dist(p, q) / h).ceil().max(1.0) as usize;
            for i in 1..n {
                side_pts[k].push(pos.len());
                pos.push(geodesic_point(p, q, i as f64 / n as f64));
            }
        } else {
            // g_j⁻¹ maps side j onto side k reversed
            let g = dom.side_elements[j].matrix.inverse();
            let src = side_pts[j].clone();
            for &v in src.iter().rev() {
                side_pts[k].push(pos.len());
                pos.push(g.apply(pos[v]));
            }
        }
    }
    let boundary: Vec<usize> = (0..ns)
        .flat_map(|k| std::iter::once(k).chain(side_pts[k].iter().copied()))
        .collect();
    let mut pairings = Vec::new();
    for k in 0..ns {
        let j = dom.partner[k];
        let side = |s: usize| -> Vec<usize> {
            std::iter::once(s).chain(side_pts[s].iter().copied()).chain(std::iter::once((s + 1) % ns)).collect()
        };
        if k < j {
            let (lk, lj) = (side(k), side(j));
            let n = lk.len() - 1;
            let word = dom.side_elements[k].word.inverse();
            for i in 0..n {
                pairings.push(EdgePairing {
                    edge: [lk[i], lk[i + 1]],
                    partner: [lj[n - i], lj[n - i - 1]],
                    word: word.clone(),
                });
            }
        }
    }
    // interior points on rings about i, kept away from the sides
    let normals: Vec<[f64; 3]> = dom
        .side_elements
        .iter()
        .map(|e| {
            let q = e.matrix.apply(Point::i()).to_hyperboloid();
            let n = [q[0] - 1.0, q[1], q[2]];
            let len = minkowski(&n, &n).sqrt();
            [n[0] / len, n[1] / len, n[2] / len]
        })
        .collect();
    let margin = (0.5 * h).sinh();
    let inside = |p: Point| {
        let x = p.to_hyperboloid();
        normals.iter().all(|n| minkowski(&x, n) <= -margin)
    };
    let rmax = dom.vertices.iter().map(|v| dist(Point::i(), *v)).fold(0.0, f64::max);
    let mut interior = vec![Point::i()];
    let mut k = 1;
    while k as f64 * h < rmax {
        let r = k as f64 * h;
        let m = ((2.0 * std::f64::consts::PI * r.sinh() / h).round() as usize).max(6);
        for i in 0..m {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64 + 0.5 * k as f64;
            let w = Complex64::from_polar((r / 2.0).tanh(), th);
            let p = Point::from_disk(w).map_err(|e| TeichError::InvalidMesh(e.to_string()))?;
            if inside(p) {
                interior.push(p);
            }
        }
        k += 1;
    }
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handle_to_idx: HashMap<usize, usize> = HashMap::new();
    fn insert(
        cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>,
        map: &mut HashMap<usize, usize>,
        p: Point,
        idx: usize,
    ) -> Result<spade::handles::FixedVertexHandle, TeichError> {
        let w = p.to_disk();
        let hnd = cdt.insert(Point2::new(w.re, w.im)).map_err(|e| TeichError::InvalidMesh(format!("{e:?}")))?;
        if map.insert(hnd.index(), idx).is_some() {
            return Err(TeichError::InvalidMesh("duplicate mesh point".into()));
        }
        Ok(hnd)
    }
    let mut handles = Vec::with_capacity(pos.len());
    for v in 0..pos.len() {
        handles.push(insert(&mut cdt, &mut handle_to_idx, pos[v], v)?);
    }
    for i in 0..boundary.len() {
        let (a, b) = (boundary[i], boundary[(i + 1) % boundary.len()]);
        cdt.add_constraint(handles[a], handles[b]);
    }
    for p in interior {
        let idx = pos.len();
        pos.push(p);
        insert(&mut cdt, &mut handle_to_idx, p, idx)?;
    }
    let chord: Vec<Complex64> = boundary.iter().map(|&v| pos[v].to_disk()).collect();
    let inner_faces = |cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>| -> Vec<[usize; 3]> {
        cdt.inner_faces()
            .filter_map(|f| {
                let ps = f.positions();
                let c = Complex64::new((ps[0].x + ps[1].x + ps[2].x) / 3.0, (ps[0].y + ps[1].y + ps[2].y) / 3.0);
                if point_in_polygon(c, &chord) {
                    Some(f.vertices().map(|v| v.fix().index()))
                } else {
                    None
                }
            })
            .collect()
    };
    loop {
        let mut splits: Vec<[usize; 2]> = Vec::new();
        let mut seen = HashSet::new();
        for f in inner_faces(&cdt) {
            for i in 0..3 {
                let (a, b) = (f[i].min(f[(i + 1) % 3]), f[i].max(f[(i + 1) % 3]));
                if !seen.insert((a, b)) {
                    continue;
                }
                let (pa, pb) = (pos[handle_to_idx[&a]], pos[handle_to_idx[&b]]);
                if dist(pa, pb) > h {
                    let ha = spade::handles::FixedVertexHandle::from_index(a);
                    let hb = spade::handles::FixedVertexHandle::from_index(b);
                    let constrained = cdt.get_edge_from_neighbors(ha, hb).map(|e| cdt.is_constraint_edge(e.as_undirected().fix())).unwrap_or(false);
                    if !constrained {
                        splits.push([a, b]);
                    }
                }
            }
        }
        if splits.is_empty() {
            break;
        }
        for [a, b] in splits {
            let p = geodesic_point(pos[handle_to_idx[&a]], pos[handle_to_idx[&b]], 0.5);
            let idx = pos.len();
            pos.push(p);
            insert(&mut cdt, &mut handle_to_idx, p, idx)?;
        }
    }
    let faces: Vec<[usize; 3]> = inner_faces(&cdt).into_iter().map(|f| f.map(|h| handle_to_idx[&h])).collect();
    // drop points that ended up outside every face
    let mut used = vec![false; pos.len()];
    for f in &faces {
        for &v in f {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; pos.len()];
    let mut vertices = Vec::new();
    for v in 0..pos.len() {
        if used[v] {
            remap[v] = vertices.len();
            vertices.push(pos[v]);
        }
    }
    let faces = faces.into_iter().map(|f| f.map(|v| remap[v])).collect();
    let pairings = pairings
        .into_iter()
        .map(|p| EdgePairing { edge: p.edge.map(|v| remap[v]), partner: p.partner.map(|v| remap[v]), word: p.word })
        .collect();
    let mesh = Mesh::from_parts(rep.clone(), vertices, faces, pairings)?;
    let expected = 4.0 * std::f64::consts::PI * (rep.genus as f64 - 1.0);
    let area = mesh.total_area();
    if (area - expected).abs() > 1e-8 * expected {
        return Err(TeichError::InvalidMesh(format!("triangulated area {area} differs from {expected}")));
    }
    Ok(mesh)
}

/// Mesh of the hyperbolic structure with Fenchel–Nielsen coordinates `x`.
pub fn build_mesh(x: &FNCoords, target_edge: f64) -> Result<Mesh, TeichError> {
    mesh_from_rep(&fn_to_holonomy(x)?, target_edge)
}
