use super::face::{barycentric_gradients, face_energy, face_energy_grad, face_pullback, FaceFrame};
use super::hopf::Sym2;
use super::precond::SparseSpd;
use super::{EnergyReport, EquivariantMap, HarmonicError, HarmonicSolution, IterationRecord, MapValues, TargetSpace};
use crate::hyperbolic::{geodesic_chart, MoebiusMap, Point};
use crate::surface::{detect_parabolic, FixedPoint, ParabolicData, SurfaceRep};
use crate::teichmueller::Mesh;

/// Energy used to normalise gradient norms; the floor keeps constant maps
/// from demanding a gradient below roundoff.
fn energy_scale(e: f64, area: f64) -> f64 {
    e.abs().max(1e-6 * area)
}

/// Iterations without energy decrease before the descent gives up.
const STALL_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    /// Stop when |grad| ≤ tol · max(E, 1e-6 · area).
    pub tol: f64,
    pub max_iter: usize,
    /// Conjugate-gradient restart period.
    pub restart: usize,
    /// Mass shift of the Laplacian preconditioner.
    pub shift: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 20_000, restart: 50, shift: 1.0 }
    }
}

/// Mesh-dependent data shared by all solves on one mesh.
pub struct Discretization {
    pub frames: Vec<FaceFrame>,
    pub face_classes: Vec<[usize; 3]>,
    n_classes: usize,
    stiffness: Vec<(usize, usize, f64)>,
    mass: Vec<f64>,
    plane_pc: Option<(f64, SparseSpd)>,
    line: Option<(Vec<Option<usize>>, SparseSpd)>,
}

impl Discretization {
    pub fn new(mesh: &Mesh) -> Self {
        let frames: Vec<FaceFrame> = mesh.faces.iter().map(|f| FaceFrame::new(f.map(|v| mesh.vertices[v]))).collect();
        let face_classes: Vec<[usize; 3]> = mesh.faces.iter().map(|f| f.map(|v| mesh.class_of[v])).collect();
        let n = mesh.num_classes();
        let mut stiffness = Vec::with_capacity(9 * frames.len());
        let mut mass = vec![0.0; n];
        for (fr, fc) in frames.iter().zip(&face_classes) {
            let g = barycentric_gradients(fr);
            for i in 0..3 {
                mass[fc[i]] += fr.area / 3.0;
                for j in 0..3 {
                    stiffness.push((fc[i], fc[j], fr.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
                }
            }
        }
        Discretization { frames, face_classes, n_classes: n, stiffness, mass, plane_pc: None, line: None }
    }

    pub fn num_classes(&self) -> usize {
        self.n_classes
    }

    fn plane_preconditioner(&mut self, shift: f64) -> Result<&SparseSpd, HarmonicError> {
        if self.plane_pc.as_ref().map(|(s, _)| *s != shift).unwrap_or(true) {
            let mut t = self.stiffness.clone();
            for (i, m) in self.mass.iter().enumerate() {
                t.push((i, i, shift * m));
            }
            let pc = SparseSpd::new(self.n_classes, &t).ok_or(HarmonicError::Factorisation)?;
            self.plane_pc = Some((shift, pc));
        }
        Ok(&self.plane_pc.as_ref().unwrap().1)
    }

    fn line_system(&mut self, fixed: usize) -> Result<&(Vec<Option<usize>>, SparseSpd), HarmonicError> {
        let rebuild = match &self.line {
            Some((idx, _)) => idx[fixed].is_some(),
            None => true,
        };
        if rebuild {
            let mut idx = vec![None; self.n_classes];
            let mut k = 0;
            for (c, slot) in idx.iter_mut().enumerate() {
                if c != fixed {
                    *slot = Some(k);
                    k += 1;
                }
            }
            let t: Vec<(usize, usize, f64)> = self
                .stiffness
                .iter()
                .filter_map(|&(i, j, v)| Some((idx[i]?, idx[j]?, v)))
                .collect();
            let chol = SparseSpd::new(k, &t).ok_or(HarmonicError::Factorisation)?;
            self.line = Some((idx, chol));
        }
        Ok(self.line.as_ref().unwrap())
    }
}

struct PlaneProblem<'a> {
    disc: &'a Discretization,
    mats: Vec<MoebiusMap>,
    faces: &'a [[usize; 3]],
}

impl PlaneProblem<'_> {
    fn face_coords(&self, f: usize, u: &[Point]) -> [f64; 6] {
        let fv = &self.faces[f];
        let fc = &self.disc.face_classes[f];
        let mut z = [0.0; 6];
        for i in 0..3 {
            let p = self.mats[fv[i]].apply(u[fc[i]]);
            z[2 * i] = p.x;
            z[2 * i + 1] = p.y;
        }
        z
    }

    fn energy(&self, u: &[Point]) -> f64 {
        (0..self.faces.len()).map(|f| face_energy(&self.disc.frames[f], &self.face_coords(f, u))).sum()
    }

    /// Energy and Riemannian gradient in orthonormal frames (ξ-coordinates).
    fn energy_grad(&self, u: &[Point]) -> (f64, Vec<[f64; 2]>) {
        let mut g = vec![[0.0; 2]; u.len()];
        let mut e = 0.0;
        for f in 0..self.faces.len() {
            let z = self.face_coords(f, u);
            let (ef, gf) = face_energy_grad(&self.disc.frames[f], &z);
            e += ef;
            let fv = &self.faces[f];
            let fc = &self.disc.face_classes[f];
            for i in 0..3 {
                let d = self.mats[fv[i]].derivative(u[fc[i]].to_complex());
                let (gx, gy) = (gf[2 * i], gf[2 * i + 1]);
                g[fc[i]][0] += d.re * gx + d.im * gy;
                g[fc[i]][1] += -d.im * gx + d.re * gy;
            }
        }
        for (gi, p) in g.iter_mut().zip(u) {
            gi[0] *= p.y;
            gi[1] *= p.y;
        }
        (e, g)
    }
}

fn retract(u: &[Point], d: &[[f64; 2]], s: f64) -> Vec<Point> {
    u.iter()
        .zip(d)
        .map(|(p, v)| Point { x: p.x + p.y * s * v[0], y: p.y * (s * v[1]).exp() })
        .collect()
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).sum()
}

fn apply_pc(pc: &SparseSpd, g: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let cols = pc.solve(&[g.iter().map(|v| v[0]).collect(), g.iter().map(|v| v[1]).collect()]);
    cols[0].iter().zip(&cols[1]).map(|(a, b)| [*a, *b]).collect()
}

fn reps_close(a: &SurfaceRep, b: &SurfaceRep) -> bool {
    a.genus == b.genus && a.images.iter().zip(&b.images).all(|(x, y)| x.approx_eq(y, 1e-12))
}

/// Default initial values for a plane solve.
fn default_init(mesh: &Mesh, rep: &SurfaceRep, fixed: Option<&ParabolicData>) -> Vec<Point> {
    if let Some(FixedPoint::Interior(q)) = fixed.map(|d| d.fixed_point) {
        return vec![q; mesh.num_classes()];
    }
    if reps_close(rep, &mesh.holonomy) || crate::surface::euler_class(rep).map(|e| e != 0).unwrap_or(false) {
        mesh.identity_values()
    } else {
        vec![Point::i(); mesh.num_classes()]
    }
}

/// Equivariant harmonic map to ℍ² (or a rescaled copy) by preconditioned
/// nonlinear conjugate gradients.
pub fn solve_harmonic(
    mesh: &Mesh,
    disc: &mut Discretization,
    rep: &SurfaceRep,
    target: TargetSpace,
    init: Option<&[Point]>,
    opts: &SolverOptions,
) -> Result<HarmonicSolution, HarmonicError> {
    let scale = match target {
        TargetSpace::HyperbolicPlane { scale } => scale,
        TargetSpace::RealLine => {
            let data = detect_parabolic(rep, 1e-8).filter(|d| d.is_boundary()).ok_or(HarmonicError::ParabolicTarget)?;
            return solve_line(mesh, disc, rep, &data);
        }
    };
    if !(scale >= 1.0) {
        return Err(HarmonicError::BadScale(scale));
    }
    let fixed = detect_parabolic(rep, 1e-8);
    if fixed.as_ref().map(|d| d.is_boundary()).unwrap_or(false) {
        return Err(HarmonicError::ParabolicTarget);
    }
    let mut u: Vec<Point> = match init {
        Some(v) => {
            if v.len() != mesh.num_classes() {
                return Err(HarmonicError::BadInit { got: v.len(), expected: mesh.num_classes() });
            }
            v.to_vec()
        }
        None => default_init(mesh, rep, fixed.as_ref()),
    };
    disc.plane_preconditioner(opts.shift)?;
    let disc: &Discretization = disc;
    let area = mesh.total_area();
    let pc = &disc.plane_pc.as_ref().unwrap().1;
    let prob = PlaneProblem { disc, mats: mesh.vertex_matrices(rep), faces: &mesh.faces };
    let (mut e, mut g) = prob.energy_grad(&u);
    let mut z = apply_pc(pc, &g);
    let mut d: Vec<[f64; 2]> = z.iter().map(|v| [-v[0], -v[1]]).collect();
    let mut history = vec![e];
    let mut log = vec![IterationRecord { iter: 0, energy: e, gradient_norm: dot(&g, &g).sqrt(), step: 0.0 }];
    let mut it = 0;
    let mut converged = false;
    let mut best = e;
    let mut stall = 0;
    loop {
        let gn = dot(&g, &g).sqrt();
        if gn <= opts.tol * energy_scale(e, area) {
            converged = true;
            break;
        }
        if it >= opts.max_iter || stall >= STALL_LIMIT {
            break;
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = z.iter().map(|v| [-v[0], -v[1]]).collect();
            slope = dot(&g, &d);
        }
        let dmax = d.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
        let mut s = 1.0_f64.min(0.5 / dmax.max(1e-300));
        let mut accepted = None;
        for _ in 0..60 {
            let u1 = retract(&u, &d, s);
            let e1 = prob.energy(&u1);
            if e1 <= e + 1e-4 * s * slope {
                accepted = Some(u1);
                break;
            }
            // roundoff regime: accept if the directional derivative has dropped
            if (e1 - e).abs() <= 1e-13 * e.abs().max(1.0) {
                let (_, g1) = prob.energy_grad(&u1);
                if dot(&g1, &d).abs() <= 0.9 * slope.abs() {
                    accepted = Some(u1);
                    break;
                }
            }
            s *= 0.5;
        }
        let Some(u1) = accepted else {
            // no progress possible along any direction tried
            break;
        };
        u = u1;
        let (e1, g1) = prob.energy_grad(&u);
        let z1 = apply_pc(pc, &g1);
        let denom = dot(&g, &z);
        let mut beta = if denom > 0.0 {
            let num: f64 = g1.iter().zip(&z1).zip(&z).map(|((a, b), c)| a[0] * (b[0] - c[0]) + a[1] * (b[1] - c[1])).sum();
            (num / denom).max(0.0)
        } else {
            0.0
        };
        it += 1;
        if it % opts.restart == 0 {
            beta = 0.0;
        }
        d = z1.iter().zip(&d).map(|(zv, dv)| [-zv[0] + beta * dv[0], -zv[1] + beta * dv[1]]).collect();
        e = e1;
        g = g1;
        z = z1;
        if e < best - 1e-14 * best.abs().max(1.0) {
            best = e;
            stall = 0;
        } else {
            stall += 1;
        }
        history.push(e);
        log.push(IterationRecord { iter: it, energy: e, gradient_norm: dot(&g, &g).sqrt(), step: s });
    }
    let factor = target.energy_factor();
    let gn = dot(&g, &g).sqrt() / energy_scale(e, area);
    let map = EquivariantMap {
        target,
        rep: rep.clone(),
        values: MapValues::Plane(u.clone()),
        morphism: None,
        axis: None,
    };
    let report = plane_report(&prob, &u, factor, gn);
    let sol = HarmonicSolution {
        map,
        report,
        iterations: it,
        converged,
        energy_history: history.into_iter().map(|v| v * factor).collect(),
        log: log
            .into_iter()
            .map(|r| IterationRecord { energy: r.energy * factor, gradient_norm: r.gradient_norm * factor, ..r })
            .collect(),
    };
    if converged {
        Ok(sol)
    } else {
        Err(HarmonicError::MaxIterations { iterations: it, gradient_norm: gn, best: Box::new(sol) })
    }
}

fn plane_report(prob: &PlaneProblem, u: &[Point], factor: f64, gradient_norm: f64) -> EnergyReport {
    let n = prob.faces.len();
    let mut density = Vec::with_capacity(n);
    let mut pullbacks = Vec::with_capacity(n);
    let mut total = 0.0;
    for f in 0..n {
        let zc = prob.face_coords(f, u);
        let fr = &prob.disc.frames[f];
        let ef = face_energy(fr, &zc);
        total += ef;
        density.push(ef / fr.area * factor);
        let h = face_pullback(fr, &zc);
        pullbacks.push(Sym2 { xx: h[0] * factor, xy: h[1] * factor, yy: h[2] * factor });
    }
    EnergyReport { density, total: total * factor, pullbacks, gradient_norm }
}

/// Energy report of the equivariant plane map with the given class values.
pub fn total_energy(mesh: &Mesh, disc: &Discretization, rep: &SurfaceRep, target: TargetSpace, values: &[Point]) -> Result<EnergyReport, HarmonicError> {
    if values.len() != disc.num_classes() {
        return Err(HarmonicError::BadInit { got: values.len(), expected: disc.num_classes() });
    }
    let prob = PlaneProblem { disc, mats: mesh.vertex_matrices(rep), faces: &mesh.faces };
    let (e, g) = prob.energy_grad(values);
    Ok(plane_report(&prob, values, target.energy_factor(), dot(&g, &g).sqrt() / energy_scale(e, mesh.total_area())))
}

/// Harmonic m-equivariant function to ℝ for a representation fixing a boundary
/// point, normalised to vanish at mesh vertex 0.
pub fn solve_line(
    mesh: &Mesh,
    disc: &mut Discretization,
    rep: &SurfaceRep,
    data: &ParabolicData,
) -> Result<HarmonicSolution, HarmonicError> {
    let m = &data.morphism;
    let offs: Vec<f64> = mesh.vertex_word.iter().map(|w| super::word_morphism(m, w)).collect();
    let c0 = mesh.class_of[0];
    let fixed_val = -offs[0];
    let n = disc.num_classes();
    let mut b = vec![0.0; n];
    for (f, fr) in disc.frames.iter().enumerate() {
        let gr = barycentric_gradients(fr);
        let fv = &mesh.faces[f];
        let fc = &disc.face_classes[f];
        let mut a = [0.0; 2];
        for i in 0..3 {
            let v = offs[fv[i]] + if fc[i] == c0 { fixed_val } else { 0.0 };
            a[0] += v * gr[i][0];
            a[1] += v * gr[i][1];
        }
        for i in 0..3 {
            b[fc[i]] -= fr.area * (gr[i][0] * a[0] + gr[i][1] * a[1]);
        }
    }
    let (idx, chol) = disc.line_system(c0)?;
    let mut rhs = vec![0.0; n - 1];
    for c in 0..n {
        if let Some(k) = idx[c] {
            rhs[k] = b[c];
        }
    }
    let x = &chol.solve(&[rhs])[0];
    let mut u = vec![0.0; n];
    for c in 0..n {
        u[c] = match idx[c] {
            Some(k) => x[k],
            None => fixed_val,
        };
    }
    let mut density = Vec::with_capacity(mesh.faces.len());
    let mut pullbacks = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    let mut grad = vec![0.0; n];
    for (f, fr) in disc.frames.iter().enumerate() {
        let gr = barycentric_gradients(fr);
        let fv = &mesh.faces[f];
        let fc = &disc.face_classes[f];
        let mut a = [0.0; 2];
        for i in 0..3 {
            let v = u[fc[i]] + offs[fv[i]];
            a[0] += v * gr[i][0];
            a[1] += v * gr[i][1];
        }
        let e = 0.5 * (a[0] * a[0] + a[1] * a[1]);
        total += e * fr.area;
        density.push(e);
        for i in 0..3 {
            grad[fc[i]] += fr.area * (gr[i][0] * a[0] + gr[i][1] * a[1]);
        }
        let j = fr.jac;
        let w = [a[0] * j[0][0] + a[1] * j[1][0], a[0] * j[0][1] + a[1] * j[1][1]];
        pullbacks.push(Sym2 { xx: w[0] * w[0], xy: w[0] * w[1], yy: w[1] * w[1] });
    }
    grad[c0] = 0.0;
    let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt() / energy_scale(total, mesh.total_area());
    let axis = data.axis.map(|(p, q)| geodesic_chart(p, q));
    let map = EquivariantMap {
        target: TargetSpace::RealLine,
        rep: rep.clone(),
        values: MapValues::Line(u),
        morphism: Some(m.clone()),
        axis,
    };
    Ok(HarmonicSolution {
        map,
        report: EnergyReport { density, total, pullbacks, gradient_norm: gn },
        iterations: 1,
        converged: true,
        energy_history: vec![total],
        log: vec![IterationRecord { iter: 0, energy: total, gradient_norm: gn * total, step: 0.0 }],
    })
}

/// Harmonic map for any representation: line-valued when the image fixes a
/// boundary point, plane-valued otherwise.
pub fn solve_equivariant(
    mesh: &Mesh,
    disc: &mut Discretization,
    rep: &SurfaceRep,
    init: Option<&[Point]>,
    opts: &SolverOptions,
) -> Result<HarmonicSolution, HarmonicError> {
    match detect_parabolic(rep, 1e-8) {
        Some(d) if d.is_boundary() => solve_line(mesh, disc, rep, &d),
        _ => solve_harmonic(mesh, disc, rep, TargetSpace::plane(), init, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teichmueller::{build_mesh, FNCoords};

    fn mesh(h: f64) -> Mesh {
        build_mesh(&FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap(), h).unwrap()
    }

    #[test]
    fn identity_is_fixed() {
        let m = mesh(0.4);
        let mut d = Discretization::new(&m);
        let s = solve_harmonic(&m, &mut d, &m.holonomy.clone(), TargetSpace::plane(), None, &SolverOptions::default()).unwrap();
        assert!(s.converged);
        assert!((s.report.total - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn gradient_is_consistent() {
        let m = mesh(0.5);
        let d = Discretization::new(&m);
        let rep = crate::teichmueller::fn_to_holonomy(&FNCoords::new(vec![2.5, 2.0, 3.0], vec![0.0, 0.5, -0.3]).unwrap()).unwrap();
        let prob = PlaneProblem { disc: &d, mats: m.vertex_matrices(&rep), faces: &m.faces };
        let u = m.identity_values();
        let (_, g) = prob.energy_grad(&u);
        let dir: Vec<[f64; 2]> = (0..u.len()).map(|k| [((k * 7) as f64).sin(), ((k * 3) as f64).cos()]).collect();
        let h = 1e-6;
        let fd = (prob.energy(&retract(&u, &dir, h)) - prob.energy(&retract(&u, &dir, -h))) / (2.0 * h);
        assert!((fd - dot(&g, &dir)).abs() < 1e-6 * fd.abs().max(1.0), "{fd} {}", dot(&g, &dir));
    }

    #[test]
    fn solves_other_fuchsian_target() {
        let m = mesh(0.4);
        let mut d = Discretization::new(&m);
        let rep = crate::teichmueller::fn_to_holonomy(&FNCoords::new(vec![2.5, 2.0, 3.0], vec![0.0, 0.5, -0.3]).unwrap()).unwrap();
        let s = solve_harmonic(&m, &mut d, &rep, TargetSpace::plane(), None, &SolverOptions::default()).unwrap();
        eprintln!("iterations {} energy {}", s.iterations, s.report.total);
        assert!(s.report.total > 4.0 * std::f64::consts::PI);
        for w in s.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0]);
        }
    }
}
