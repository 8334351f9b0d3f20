use super::{accept, valid, PsiError, PsiOptions};
use crate::harmonic::{hopf_differential, solve_equivariant, solve_harmonic, Discretization, MapValues, TargetSpace};
use crate::hyperbolic::Point;
use crate::surface::SurfaceRep;
use crate::teichmueller::{build_mesh, fn_to_holonomy, FNCoords, Mesh, QuadDiff};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiForward {
    pub coords: FNCoords,
    /// WP norm of Φ(X, j) - Φ(X, ρ).
    pub residual: f64,
    /// `residual` over max(WP norm of Φ(X, ρ), 1e-8·area).
    pub relative: f64,
    /// Part of the residual inside the span of the coordinate derivatives,
    /// relative to the WP norm of Φ(X, ρ).
    pub projected_relative: f64,
    pub iterations: usize,
}

fn weighted(phi: &QuadDiff, mesh: &Mesh) -> DVector<f64> {
    let mut v = DVector::zeros(2 * phi.coeffs.len());
    for (f, c) in phi.coeffs.iter().enumerate() {
        let w = mesh.face_area[f].sqrt() / mesh.conformal[f];
        v[2 * f] = w * c.re;
        v[2 * f + 1] = w * c.im;
    }
    v
}

struct Target<'a> {
    mesh: &'a Mesh,
    disc: Discretization,
    phi_rho: DVector<f64>,
    warm: Option<Vec<Point>>,
    opts: &'a PsiOptions,
}

impl Target<'_> {
    fn residual(&mut self, y: &[f64]) -> Result<DVector<f64>, PsiError> {
        let hol = fn_to_holonomy(&FNCoords::from_vec(y)?)?;
        let sol = accept(solve_harmonic(self.mesh, &mut self.disc, &hol, TargetSpace::plane(), self.warm.as_deref(), &self.opts.solver))?;
        if let MapValues::Plane(u) = &sol.map.values {
            self.warm = Some(u.clone());
        }
        Ok(weighted(&hopf_differential(&sol.report.pullbacks), self.mesh) - &self.phi_rho)
    }
}

/// Ψ_ρ(X): the Fuchsian j (in FN coordinates) with Φ(X, j) = Φ(X, ρ), found by
/// Levenberg–Marquardt on the WP-weighted Hopf residual over a fixed mesh of X.
///
/// Converges when the residual, or its projection on the tangent span of
/// j ↦ Φ(X, j), is below `forward_tol` relative to Φ(X, ρ), or below 1e-8·area.
pub fn psi_forward(x: &FNCoords, rho: &SurfaceRep, opts: &PsiOptions) -> Result<PsiForward, PsiError> {
    let mesh = build_mesh(x, opts.target_edge)?;
    let mut disc = Discretization::new(&mesh);
    let sol_rho = accept(solve_equivariant(&mesh, &mut disc, rho, None, &opts.solver))?;
    let phi_rho = weighted(&hopf_differential(&sol_rho.report.pullbacks), &mesh);
    let scale = phi_rho.norm();
    let floor = 1e-8 * mesh.total_area();
    let genus = mesh.genus;
    let mut t = Target { mesh: &mesh, disc, phi_rho, warm: None, opts };
    let mut y = x.to_vec();
    let mut r = t.residual(&y)?;
    let mut mu = 1e-3;
    let mut projected = f64::INFINITY;
    let n = y.len();
    let step = 1e-4;
    for it in 0..opts.forward_max_iter {
        if r.norm() <= floor || r.norm() <= opts.forward_tol * scale {
            return finish(y, &r, 0.0, scale.max(floor), it);
        }
        let base_warm = t.warm.clone();
        let mut jac = DMatrix::zeros(r.len(), n);
        for k in 0..n {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[k] += step;
            ym[k] -= step;
            let rp = t.residual(&yp)?;
            t.warm = base_warm.clone();
            let col = if valid(&ym, genus) {
                let rm = t.residual(&ym)?;
                t.warm = base_warm.clone();
                (rp - rm) / (2.0 * step)
            } else {
                (rp - &r) / step
            };
            jac.set_column(k, &col);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        if let Some(ch) = jtj.clone().cholesky() {
            projected = (&jac * ch.solve(&jtr)).norm() / scale.max(floor);
        }
        if projected <= opts.forward_tol {
            return finish(y, &r, projected, scale.max(floor), it);
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let Some(ch) = a.cholesky() else {
                mu *= 4.0;
                continue;
            };
            let delta = -ch.solve(&jtr);
            let y1: Vec<f64> = y.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            if valid(&y1, genus) {
                if let Ok(r1) = t.residual(&y1) {
                    if r1.norm() < r.norm() {
                        y = y1;
                        r = r1;
                        mu = (mu / 3.0).max(1e-9);
                        improved = true;
                        break;
                    }
                }
            }
            t.warm = base_warm.clone();
            mu *= 4.0;
        }
        if !improved {
            let best = finish(y, &r, projected, scale.max(floor), it)?;
            return Err(PsiError::ResidualFloor { relative: best.relative, best: Box::new(best) });
        }
    }
    let best = finish(y, &r, projected, scale.max(floor), opts.forward_max_iter)?;
    Err(PsiError::ResidualFloor { relative: best.relative, best: Box::new(best) })
}

fn finish(y: Vec<f64>, r: &DVector<f64>, projected: f64, scale: f64, iterations: usize) -> Result<PsiForward, PsiError> {
    let residual = r.norm();
    Ok(PsiForward {
        coords: FNCoords::from_vec(&y)?,
        residual,
        relative: residual / scale,
        projected_relative: projected,
        iterations,
    })
}
