use super::{accept, eval_F, minimize_F, FunctionalEval, PsiError, PsiOptions, Workspace};
use crate::harmonic::{
    face_map_jacobian, hopf_differential, solve_equivariant, solve_harmonic, Discretization, HarmonicSolution, MapValues,
    Sym2, TargetSpace,
};
use crate::hyperbolic::{MoebiusMap, Point};
use crate::surface::SurfaceRep;
use crate::teichmueller::{build_mesh, centroid, fn_to_holonomy, wp_norm, wp_pair, FNCoords, Locator, Mesh, QuadDiff};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

/// Hopf mismatch per unit of √area above which X1 is rejected as a critical point.
pub const NOT_CRITICAL_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientCheck {
    pub x: FNCoords,
    /// Central differences of F along the FN coordinates.
    pub fd: Vec<f64>,
    /// Re⟨-Φ(X,j0) + Φ(X,ρ), ψ_k⟩ with ψ_k the k-th coordinate variation of Φ(X, ·).
    pub pairing: Vec<f64>,
    /// Least-squares constant c in fd ≈ c·pairing at this point.
    pub fitted: f64,
    /// |fd - c·pairing| / |fd| with the fitted constant.
    pub mismatch: f64,
}

fn fit(fd: &[f64], p: &[f64]) -> f64 {
    let pp: f64 = p.iter().map(|v| v * v).sum();
    if pp == 0.0 {
        0.0
    } else {
        fd.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / pp
    }
}

fn mismatch(fd: &[f64], p: &[f64], c: f64) -> f64 {
    let num: f64 = fd.iter().zip(p).map(|(a, b)| (a - c * b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = fd.iter().map(|a| a * a).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn plane_hopf(mesh: &Mesh, disc: &mut Discretization, rep: &SurfaceRep, opts: &PsiOptions) -> Result<QuadDiff, PsiError> {
    let s = accept(solve_harmonic(mesh, disc, rep, TargetSpace::plane(), None, &opts.solver))?;
    Ok(hopf_differential(&s.report.pullbacks))
}

/// Compares finite differences of F with the WP pairing of the Hopf-difference
/// gradient against numerically computed coordinate variations of Φ(X, ·).
pub fn wp_gradient_check(x: &FNCoords, j0: &SurfaceRep, rho: &SurfaceRep, opts: &PsiOptions) -> Result<GradientCheck, PsiError> {
    let mut ws = Workspace::new(j0, opts)?;
    let mut sample = ws.sample(x, rho)?;
    let ev = sample.eval()?;
    let fd = ws.fd_gradient(&x.to_vec(), rho, opts.fd_step)?;
    let s = opts.fd_step;
    let mut pairing = Vec::with_capacity(fd.len());
    for k in 0..fd.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += s;
        xm[k] -= s;
        let pp = plane_hopf(&sample.mesh, &mut sample.disc, &fn_to_holonomy(&FNCoords::from_vec(&xp)?)?, opts)?;
        let pm = plane_hopf(&sample.mesh, &mut sample.disc, &fn_to_holonomy(&FNCoords::from_vec(&xm)?)?, opts)?;
        let psi = pp.sub(&pm).scale(1.0 / (2.0 * s));
        pairing.push(wp_pair(&ev.grad, &psi, &sample.mesh)?.re);
    }
    let fitted = fit(&fd, &pairing);
    let mismatch = mismatch(&fd, &pairing, fitted);
    Ok(GradientCheck { x: x.clone(), fd, pairing, fitted, mismatch })
}

/// One global constant fitted over several checks and the worst relative mismatch under it.
pub fn calibrate_gradient(checks: &[GradientCheck]) -> (f64, f64) {
    let fd: Vec<f64> = checks.iter().flat_map(|c| c.fd.iter().copied()).collect();
    let p: Vec<f64> = checks.iter().flat_map(|c| c.pairing.iter().copied()).collect();
    let c = fit(&fd, &p);
    let worst = checks.iter().map(|k| mismatch(&k.fd, &k.pairing, c)).fold(0.0, f64::max);
    (c, worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProperRow {
    pub x: FNCoords,
    pub f: f64,
    pub e_j0: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks F(X) ≥ (1 - λ)·E(X, j0) - 2·mesh_tol·E(X, j0) on sample points.
pub fn verify_properness_bound(
    j0: &SurfaceRep,
    rho: &SurfaceRep,
    samples: &[FNCoords],
    lip_upper: f64,
    opts: &PsiOptions,
) -> Result<Vec<ProperRow>, PsiError> {
    samples
        .iter()
        .map(|x| {
            let e = eval_F(x, j0, rho, opts)?;
            let bound = (1.0 - lip_upper) * e.e_j0 - 2.0 * opts.mesh_tol * e.e_j0;
            Ok(ProperRow { x: x.clone(), f: e.f, e_j0: e.e_j0, bound, holds: e.f >= bound })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyIdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_mismatch: f64,
    pub f_x1: f64,
    pub f_x2: f64,
    /// F(X2) ≥ F(X1).
    pub monotone: bool,
    /// WP norm of Φ(X1, j0) - Φ(X1, ρ).
    pub hopf_mismatch: f64,
    /// Location queries that fell outside every face lift.
    pub location_misses: usize,
}

type M2 = Matrix2<f64>;

fn mat(j: [[f64; 2]; 2]) -> M2 {
    M2::new(j[0][0], j[0][1], j[1][0], j[1][1])
}

fn sym(h: &Sym2) -> M2 {
    M2::new(h.xx, h.xy, h.xy, h.yy)
}

fn moebius_jac(t: &MoebiusMap, p: Point) -> M2 {
    let d = t.derivative(p.to_complex());
    M2::new(d.re, -d.im, d.im, d.re)
}

/// A solved plane map with its per-vertex values and its image mesh.
struct Pushed {
    vals: Vec<Point>,
    image: Mesh,
    locator: Locator,
}

impl Pushed {
    fn new(mesh: &Mesh, sol: &HarmonicSolution, target: &SurfaceRep) -> Result<Self, PsiError> {
        let MapValues::Plane(u) = &sol.map.values else { unreachable!("plane target") };
        let vals = sol.map.plane_values(mesh).expect("plane values");
        let image = mesh.transported(target, u)?;
        let locator = Locator::new(&image)?;
        Ok(Pushed { vals, image, locator })
    }

    fn jac(&self, mesh: &Mesh, f: usize, z: Point) -> (Point, M2) {
        let src = mesh.faces[f].map(|v| mesh.vertices[v]);
        let dst = mesh.faces[f].map(|v| self.vals[v]);
        let (w, j) = face_map_jacobian(src, dst, z);
        (w, mat(j))
    }

    /// Source point of face f mapped to q.
    fn invert(&self, mesh: &Mesh, f: usize, q: Point) -> Point {
        let [a, b, c] = mesh.faces[f].map(|v| mesh.vertices[v]);
        let mut z = centroid(a, b, c);
        for _ in 0..6 {
            let (w, j) = self.jac(mesh, f, z);
            let Some(ji) = j.try_inverse() else { break };
            let d = ji * nalgebra::Vector2::new(q.x - w.x, q.y - w.y);
            z = Point { x: z.x + d[0], y: (z.y + d[1]).max(0.5 * z.y) };
            if d.norm() < 1e-14 * z.y {
                break;
            }
        }
        z
    }
}

fn face_centroid(mesh: &Mesh, f: usize) -> Point {
    let [a, b, c] = mesh.faces[f].map(|v| mesh.vertices[v]);
    centroid(a, b, c)
}

/// Evaluates both sides of the energy comparison identity at a critical point X1
/// and another point X2. The left side is integrated over a mesh of X2, the
/// right side over a mesh of X1; the metric g2 is carried to X1 through the
/// harmonic maps of both surfaces to j0.
pub fn verify_energy_identity(
    x1: &FNCoords,
    x2: &FNCoords,
    j0: &SurfaceRep,
    rho: &SurfaceRep,
    opts: &PsiOptions,
) -> Result<EnergyIdentityReport, PsiError> {
    let m1 = build_mesh(x1, opts.target_edge)?;
    let m2 = build_mesh(x2, opts.target_edge)?;
    let mut d1 = Discretization::new(&m1);
    let mut d2 = Discretization::new(&m2);
    let u1 = accept(solve_harmonic(&m1, &mut d1, j0, TargetSpace::plane(), None, &opts.solver))?;
    let f1 = accept(solve_equivariant(&m1, &mut d1, rho, None, &opts.solver))?;
    let u2 = accept(solve_harmonic(&m2, &mut d2, j0, TargetSpace::plane(), None, &opts.solver))?;
    let f2 = accept(solve_equivariant(&m2, &mut d2, rho, None, &opts.solver))?;

    let phi_diff = hopf_differential(&u1.report.pullbacks).sub(&hopf_differential(&f1.report.pullbacks));
    let hopf_mismatch = wp_norm(&phi_diff, &m1)?;
    if hopf_mismatch > NOT_CRITICAL_TOL * m1.total_area().sqrt() {
        return Err(PsiError::NotCritical { mismatch: hopf_mismatch });
    }
    let p1 = Pushed::new(&m1, &u1, j0)?;
    let p2 = Pushed::new(&m2, &u2, j0)?;
    let mut misses = 0;
    let rho_zero = f1.report.total == 0.0 && f2.report.total == 0.0;

    // right side on X1
    let mut rhs = 0.0;
    for i in 0..m1.faces.len() {
        let c = face_centroid(&m1, i);
        let a1 = 1.0 / (c.y * c.y);
        let (p, j1) = p1.jac(&m1, i, c);
        let e0 = 0.5 * (j1.transpose() * j1).trace() / (p.y * p.y) / a1;
        let ef = 0.5 * f1.report.pullbacks[i].trace() / a1;
        let loc = p2.locator.locate(p);
        if loc.inside < -1e-9 {
            misses += 1;
        }
        let q = loc.transform.apply(p);
        let z = p2.invert(&m2, loc.face, q);
        let (_, j2) = p2.jac(&m2, loc.face, z);
        let Some(j2i) = j2.try_inverse() else { continue };
        let a = j2i * moebius_jac(&loc.transform, p) * j1;
        let g2 = a.transpose() * a / (z.y * z.y);
        let e = g2.trace() / (2.0 * a1);
        let det = g2.determinant() / (a1 * a1);
        rhs += m1.face_area[i] * e / det.sqrt() * (e0 - ef);
    }

    // left side on X2
    let mut lhs = 0.0;
    for k in 0..m2.faces.len() {
        let a2 = m2.conformal[k];
        let mut term = 0.5 * u2.report.pullbacks[k].trace() / a2;
        if !rho_zero {
            let c = face_centroid(&m2, k);
            let (p, j2) = p2.jac(&m2, k, c);
            let loc = p1.locator.locate(p);
            if loc.inside < -1e-9 {
                misses += 1;
            }
            let mf = loc.face;
            let (_, j1) = p1.jac(&m1, mf, face_centroid(&m1, mf));
            if let Some(j1i) = j1.try_inverse() {
                let b = j1i * moebius_jac(&loc.transform, p) * j2;
                let h = b.transpose() * sym(&f1.report.pullbacks[mf]) * b;
                term -= 0.5 * h.trace() / a2;
            }
        }
        lhs += m2.face_area[k] * term;
    }
    let f_x1 = u1.report.total - f1.report.total;
    let f_x2 = u2.report.total - f2.report.total;
    let _ = &p1.image;
    Ok(EnergyIdentityReport {
        lhs,
        rhs,
        relative_mismatch: (lhs - rhs).abs() / lhs.abs().max(1e-300),
        f_x1,
        f_x2,
        monotone: f_x2 >= f_x1,
        hopf_mismatch,
        location_misses: misses,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityStep {
    pub step: usize,
    pub argmin: FNCoords,
    pub f_min: f64,
    /// Max-norm FN distance to the previous argmin.
    pub displacement: f64,
}

/// Minimisers of F along a path of (j0, ρ) pairs, warm-started from the previous step.
pub fn minimizer_continuity_experiment(
    path: &[(SurfaceRep, SurfaceRep)],
    init: &FNCoords,
    opts: &PsiOptions,
) -> Result<Vec<ContinuityStep>, PsiError> {
    let mut out: Vec<ContinuityStep> = Vec::with_capacity(path.len());
    let mut start = init.clone();
    for (step, (j0, rho)) in path.iter().enumerate() {
        let r = match minimize_F(j0, rho, &start, opts) {
            Ok(r) => r,
            Err(PsiError::MaxIterations { best }) => *best,
            Err(e) => return Err(e),
        };
        let displacement = out
            .last()
            .map(|p| p.argmin.to_vec().iter().zip(r.argmin.to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .unwrap_or(0.0);
        start = r.argmin.clone();
        out.push(ContinuityStep { step, argmin: r.argmin, f_min: r.f_min, displacement });
    }
    Ok(out)
}

/// E(X, j0) along the FN ray base + t·direction.
pub fn energy_along_ray(
    j0: &SurfaceRep,
    base: &FNCoords,
    direction: &[f64],
    ts: &[f64],
    opts: &PsiOptions,
) -> Result<Vec<(f64, f64)>, PsiError> {
    let triv = SurfaceRep::trivial(j0.genus);
    ts.iter()
        .map(|t| {
            let v: Vec<f64> = base.to_vec().iter().zip(direction).map(|(a, d)| a + t * d).collect();
            let e: FunctionalEval = eval_F(&FNCoords::from_vec(&v)?, j0, &triv, opts)?;
            Ok((*t, e.e_j0))
        })
        .collect()
}
