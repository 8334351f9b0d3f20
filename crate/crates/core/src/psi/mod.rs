//! The functional F(X) = E(X, j0) - E(X, ρ) over Teichmüller space in
//! Fenchel–Nielsen coordinates, its minimisation (the inverse of Ψ_ρ), the
//! forward map Ψ_ρ and the associated verification experiments.
//!
//! Meshes for nearby points X are produced by pushing a reference mesh of j0
//! forward along the harmonic map to hol(X). All meshes of one run then share
//! their combinatorics, which keeps F smooth enough for finite differences.

mod experiments;
mod forward;

pub use experiments::{
    calibrate_gradient, energy_along_ray, minimizer_continuity_experiment, verify_energy_identity,
    verify_properness_bound, wp_gradient_check, ContinuityStep, EnergyIdentityReport, GradientCheck, ProperRow,
};
pub use forward::{psi_forward, PsiForward};

use crate::harmonic::{
    hopf_differential, solve_equivariant, solve_harmonic, Discretization, HarmonicError, HarmonicSolution, MapValues,
    SolverOptions, TargetSpace,
};
use crate::hyperbolic::Point;
use crate::lipschitz::LipError;
use crate::surface::SurfaceRep;
use crate::teichmueller::{build_mesh, fn_to_holonomy, mesh_from_rep, wp_norm, FNCoords, Mesh, QuadDiff, TeichError, MIN_LENGTH};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PsiError {
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Teich(#[from] TeichError),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error("no convergence after {} iterations (gradient norm {:e})", .best.iterations, .best.grad_norm_at_exit)]
    MaxIterations { best: Box<PsiResult> },
    #[error("residual stalled at relative size {relative:e} above the tolerance")]
    ResidualFloor { best: Box<PsiForward>, relative: f64 },
    #[error("X1 is not a critical point: Hopf mismatch {mismatch:e}")]
    NotCritical { mismatch: f64 },
    #[error("Fenchel–Nielsen dimension {got} does not match genus {genus}")]
    Dimension { got: usize, genus: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiOptions {
    pub target_edge: f64,
    /// Step of the central differences in FN coordinates.
    pub fd_step: f64,
    /// Exit when the FN gradient of F is below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Relative Hopf residual accepted by the forward map.
    pub forward_tol: f64,
    pub forward_max_iter: usize,
    /// Relative accuracy attributed to the mesh (slack of the properness guard).
    pub mesh_tol: f64,
    /// Upper Lipschitz estimate used by the properness guard, if known.
    pub lip_upper: Option<f64>,
    pub solver: SolverOptions,
}

impl Default for PsiOptions {
    fn default() -> Self {
        PsiOptions {
            target_edge: 0.4,
            fd_step: 1e-3,
            grad_tol: 1e-5,
            max_iter: 200,
            forward_tol: 1e-3,
            forward_max_iter: 30,
            mesh_tol: 1e-2,
            lip_upper: None,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalEval {
    pub x: FNCoords,
    pub e_j0: f64,
    pub e_rho: f64,
    pub f: f64,
    /// -Φ(X, j0) + Φ(X, ρ) on the faces of the mesh used at X.
    #[serde(skip)]
    pub grad: QuadDiff,
    pub grad_fd: Option<Vec<f64>>,
    /// WP norm of `grad`.
    pub hopf_mismatch: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiResult {
    pub argmin: FNCoords,
    pub f_min: f64,
    pub grad_norm_at_exit: f64,
    pub iterations: usize,
    pub path: Vec<FunctionalEval>,
    pub converged: bool,
    /// WP norm of Φ(X*, j0) - Φ(X*, ρ).
    pub hopf_mismatch: f64,
    pub warnings: Vec<String>,
}

/// Both harmonic solves at one point, on one mesh.
pub struct Sample {
    pub x: FNCoords,
    pub mesh: Mesh,
    pub disc: Discretization,
    pub sol_j0: HarmonicSolution,
    pub sol_rho: HarmonicSolution,
}

impl Sample {
    pub fn eval(&self) -> Result<FunctionalEval, PsiError> {
        let grad = hopf_differential(&self.sol_rho.report.pullbacks).sub(&hopf_differential(&self.sol_j0.report.pullbacks));
        let hopf_mismatch = wp_norm(&grad, &self.mesh)?;
        let (e_j0, e_rho) = (self.sol_j0.report.total, self.sol_rho.report.total);
        Ok(FunctionalEval { x: self.x.clone(), e_j0, e_rho, f: e_j0 - e_rho, grad, grad_fd: None, hopf_mismatch })
    }
}

pub(crate) fn accept(r: Result<HarmonicSolution, HarmonicError>) -> Result<HarmonicSolution, PsiError> {
    match r {
        Ok(s) => Ok(s),
        Err(HarmonicError::MaxIterations { best, .. }) => Ok(*best),
        Err(e) => Err(e.into()),
    }
}

fn plane_init(sol: &HarmonicSolution) -> Option<Vec<Point>> {
    match &sol.map.values {
        MapValues::Plane(u) => Some(u.clone()),
        MapValues::Line(_) => None,
    }
}

fn usable<'a>(v: &'a Option<Vec<Point>>, n: usize) -> Option<&'a [Point]> {
    v.as_deref().filter(|u| u.len() == n)
}

/// Solves E(X, j0) and E(X, ρ) on a mesh whose holonomy represents X.
pub(crate) fn solve_pair(
    x: &FNCoords,
    mesh: Mesh,
    j0: &SurfaceRep,
    rho: &SurfaceRep,
    init_j0: Option<&[Point]>,
    init_rho: Option<&[Point]>,
    opts: &SolverOptions,
) -> Result<Sample, PsiError> {
    let mut disc = Discretization::new(&mesh);
    let sol_j0 = accept(solve_harmonic(&mesh, &mut disc, j0, TargetSpace::plane(), init_j0, opts))?;
    let sol_rho = accept(solve_equivariant(&mesh, &mut disc, rho, init_rho, opts))?;
    Ok(Sample { x: x.clone(), mesh, disc, sol_j0, sol_rho })
}

/// F at X on a freshly built mesh of X.
#[allow(non_snake_case)]
pub fn eval_F(x: &FNCoords, j0: &SurfaceRep, rho: &SurfaceRep, opts: &PsiOptions) -> Result<FunctionalEval, PsiError> {
    let mesh = build_mesh(x, opts.target_edge)?;
    solve_pair(x, mesh, j0, rho, None, None, &opts.solver)?.eval()
}

pub(crate) fn valid(v: &[f64], genus: usize) -> bool {
    v[..3 * genus - 3].iter().all(|l| *l > MIN_LENGTH)
}

/// Reference mesh of j0 and warm starts shared by the evaluations of one run.
pub struct Workspace {
    pub j0: SurfaceRep,
    pub opts: PsiOptions,
    reference: Mesh,
    ref_disc: Discretization,
    warm_transport: Option<Vec<Point>>,
    warm_j0: Option<Vec<Point>>,
    warm_rho: Option<Vec<Point>>,
}

impl Workspace {
    pub fn new(j0: &SurfaceRep, opts: &PsiOptions) -> Result<Self, PsiError> {
        let reference = mesh_from_rep(j0, opts.target_edge)?;
        let ref_disc = Discretization::new(&reference);
        Ok(Workspace {
            j0: j0.clone(),
            opts: opts.clone(),
            reference,
            ref_disc,
            warm_transport: None,
            warm_j0: None,
            warm_rho: None,
        })
    }

    pub fn genus(&self) -> usize {
        self.j0.genus
    }

    /// The reference mesh pushed forward to hol(X); falls back to a fresh mesh of X
    /// if the push-forward folds a face.
    pub fn mesh_at(&mut self, x: &FNCoords) -> Result<Mesh, PsiError> {
        let hol = fn_to_holonomy(x)?;
        let n = self.reference.num_classes();
        let init = usable(&self.warm_transport, n).map(|u| u.to_vec());
        let t = accept(solve_harmonic(&self.reference, &mut self.ref_disc, &hol, TargetSpace::plane(), init.as_deref(), &self.opts.solver))?;
        let MapValues::Plane(u) = &t.map.values else { unreachable!("plane target") };
        match self.reference.transported(&hol, u) {
            Ok(m) => {
                self.warm_transport = Some(u.clone());
                Ok(m)
            }
            Err(TeichError::InvalidMesh(_)) => Ok(build_mesh(x, self.opts.target_edge)?),
            Err(e) => Err(e.into()),
        }
    }

    pub fn sample(&mut self, x: &FNCoords, rho: &SurfaceRep) -> Result<Sample, PsiError> {
        let mesh = self.mesh_at(x)?;
        let n = mesh.num_classes();
        let init_j0 = usable(&self.warm_j0, n)
            .map(|u| u.to_vec())
            .or_else(|| (n == self.reference.num_classes()).then(|| self.reference.identity_values()));
        let init_rho = usable(&self.warm_rho, n).map(|u| u.to_vec());
        let j0 = self.j0.clone();
        let s = solve_pair(x, mesh, &j0, rho, init_j0.as_deref(), init_rho.as_deref(), &self.opts.solver)?;
        self.warm_j0 = plane_init(&s.sol_j0);
        self.warm_rho = plane_init(&s.sol_rho);
        Ok(s)
    }

    pub fn eval(&mut self, x: &FNCoords, rho: &SurfaceRep) -> Result<FunctionalEval, PsiError> {
        self.sample(x, rho)?.eval()
    }

    pub fn f_value(&mut self, x: &[f64], rho: &SurfaceRep) -> Result<f64, PsiError> {
        Ok(self.eval(&FNCoords::from_vec(x)?, rho)?.f)
    }

    /// Central differences of F along the FN coordinates (one-sided next to
    /// the boundary of the length domain).
    pub fn fd_gradient(&mut self, x: &[f64], rho: &SurfaceRep, step: f64) -> Result<Vec<f64>, PsiError> {
        let g = self.genus();
        let mut out = Vec::with_capacity(x.len());
        let mut f0 = None;
        for k in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += step;
            xm[k] -= step;
            let fp = self.f_value(&xp, rho)?;
            if valid(&xm, g) {
                let fm = self.f_value(&xm, rho)?;
                out.push((fp - fm) / (2.0 * step));
            } else {
                let f = match f0 {
                    Some(v) => v,
                    None => {
                        let v = self.f_value(x, rho)?;
                        f0 = Some(v);
                        v
                    }
                };
                out.push((fp - f) / step);
            }
        }
        Ok(out)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimises F over FN coordinates by BFGS on finite-difference gradients.
/// The minimiser is Ψ_ρ⁻¹(j0).
#[allow(non_snake_case)]
pub fn minimize_F(j0: &SurfaceRep, rho: &SurfaceRep, init: &FNCoords, opts: &PsiOptions) -> Result<PsiResult, PsiError> {
    let genus = j0.genus;
    if init.dim() != 6 * genus - 6 {
        return Err(PsiError::Dimension { got: init.dim(), genus });
    }
    let mut ws = Workspace::new(j0, opts)?;
    let n = init.dim();
    let mut x = init.to_vec();
    let mut fe = ws.eval(init, rho)?;
    let mut g = ws.fd_gradient(&x, rho, opts.fd_step)?;
    fe.grad_fd = Some(g.clone());
    let mut warnings = Vec::new();
    let guard = |fe: &FunctionalEval, warnings: &mut Vec<String>| {
        if let Some(l) = opts.lip_upper {
            let bound = (1.0 - l) * fe.e_j0 - 2.0 * opts.mesh_tol * fe.e_j0;
            if fe.f < bound {
                warnings.push(format!("NotProper: F = {} below (1 - λ)E - slack = {} at {:?}", fe.f, bound, fe.x.to_vec()));
            }
        }
    };
    guard(&fe, &mut warnings);
    let mut path = vec![fe.clone()];
    let mut h = vec![vec![0.0; n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut converged = false;
    let mut it = 0;
    let mut fresh = true;
    while it < opts.max_iter {
        if norm(&g) < opts.grad_tol {
            converged = true;
            break;
        }
        let mut d: Vec<f64> = h.iter().map(|row| -dotv(row, &g)).collect();
        if dotv(&d, &g) >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            fresh = true;
        }
        let slope = dotv(&d, &g);
        let dmax = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut t = (0.5 / dmax).min(1.0);
        let mut accepted = None;
        for _ in 0..40 {
            let x1: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            if valid(&x1, genus) {
                if let Ok(e1) = ws.eval(&FNCoords::from_vec(&x1)?, rho) {
                    if e1.f <= fe.f + 1e-4 * t * slope {
                        accepted = Some((x1, e1));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((x1, mut e1)) = accepted else {
            break;
        };
        it += 1;
        let g1 = ws.fd_gradient(&x1, rho, opts.fd_step)?;
        let s: Vec<f64> = x1.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g1.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dotv(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                let scale = sy / dotv(&y, &y);
                for (i, row) in h.iter_mut().enumerate() {
                    row.iter_mut().for_each(|v| *v = 0.0);
                    row[i] = scale;
                }
                fresh = false;
            }
            let hy: Vec<f64> = h.iter().map(|row| dotv(row, &y)).collect();
            let yhy = dotv(&y, &hy);
            let rho_k = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += -rho_k * (s[i] * hy[j] + hy[i] * s[j]) + (rho_k * rho_k * yhy + rho_k) * s[i] * s[j];
                }
            }
        }
        x = x1;
        g = g1;
        e1.grad_fd = Some(g.clone());
        guard(&e1, &mut warnings);
        fe = e1;
        path.push(fe.clone());
    }
    let result = PsiResult {
        argmin: FNCoords::from_vec(&x)?,
        f_min: fe.f,
        grad_norm_at_exit: norm(&g),
        iterations: it,
        path,
        converged,
        hopf_mismatch: fe.hopf_mismatch,
        warnings,
    };
    if converged {
        Ok(result)
    } else if it >= opts.max_iter {
        Err(PsiError::MaxIterations { best: Box::new(result) })
    } else {
        // line search stalled: the gradient is at the finite-difference noise floor
        Ok(result)
    }
}

/// Runs `minimize_F` from several starting points and returns the results and
/// the largest FN distance between two minimisers.
pub fn uniqueness_probe(
    j0: &SurfaceRep,
    rho: &SurfaceRep,
    inits: &[FNCoords],
    opts: &PsiOptions,
) -> Result<(Vec<PsiResult>, f64), PsiError> {
    let mut res = Vec::with_capacity(inits.len());
    for x in inits {
        res.push(minimize_F(j0, rho, x, opts)?);
    }
    let mut spread = 0.0_f64;
    for a in &res {
        for b in &res {
            let d = a.argmin.to_vec().iter().zip(b.argmin.to_vec()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            spread = spread.max(d);
        }
    }
    Ok((res, spread))
}
