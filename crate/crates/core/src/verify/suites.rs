use super::{Check, VerifyOptions};
use crate::harmonic::{
    holomorphicity_residual, hopf_differential, reconstruction_residual, solve_harmonic, total_energy, Discretization, MapValues,
    SolverOptions, TargetSpace,
};
use crate::hyperbolic::{
    angle_at_vertex, boundary_angle, busemann, comparison_angle, dist, horoflow, BoundaryPoint, IsometryKind, MoebiusMap, Point, CLASSIFY_TOL,
};
use crate::lipschitz::{lip_continuity_probe, lip_estimate};
use crate::psi::{energy_along_ray, verify_energy_identity, verify_properness_bound, PsiError};
use crate::surface::SurfaceRep;
use crate::teichmueller::{build_mesh, fn_to_holonomy, FNCoords, Mesh, QuadDiff};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Genus-2 surface used as the base point of the mesh suites.
pub fn reference_surface() -> FNCoords {
    FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).expect("valid coordinates")
}

/// Random genus-2 FN point near the reference surface.
pub fn random_fn_point(rng: &mut impl Rng) -> FNCoords {
    let l = (0..3).map(|_| rng.random_range(1.7..2.8)).collect();
    let t = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
    FNCoords::new(l, t).expect("valid coordinates")
}

fn rng(opts: &VerifyOptions) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed)
}

fn random_point(rng: &mut impl Rng) -> Point {
    Point { x: rng.random_range(-3.0..3.0), y: rng.random_range(-2.0f64..2.0).exp() }
}

fn random_boundary(rng: &mut impl Rng) -> BoundaryPoint {
    if rng.random_bool(0.2) {
        BoundaryPoint::Infinity
    } else {
        BoundaryPoint::Finite(rng.random_range(-5.0..5.0))
    }
}

fn random_isometry(rng: &mut impl Rng) -> MoebiusMap {
    let p = random_point(rng);
    MoebiusMap::moving_i_to(p) * MoebiusMap::rotation(rng.random_range(0.0..2.0 * PI))
}

pub(crate) fn busemann_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = rng(opts);
    let mut out = Vec::new();

    let err = (0..20)
        .map(|k| {
            let l = 0.1 + 0.5 * k as f64;
            (MoebiusMap::diagonal(l).translation_length() - l).abs()
        })
        .fold(0.0, f64::max);
    out.push(Check::at_most("translation length", err, 1e-8, "diag(e^{l/2}, e^{-l/2}) over 20 values of l"));

    let err = (0..100)
        .map(|_| {
            let x = random_point(&mut rng);
            (busemann(BoundaryPoint::Infinity, Point::i(), x) + x.y.ln()).abs()
        })
        .fold(0.0, f64::max);
    out.push(Check::at_most("closed form at infinity", err, 1e-9, "B(x+iy) = -ln y on 100 points"));

    let mut cocycle: f64 = 0.0;
    let mut bounded: f64 = 0.0;
    for _ in 0..100 {
        let p = random_boundary(&mut rng);
        let (x0, x1, x) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        cocycle = cocycle.max((busemann(p, x0, x) - busemann(p, x0, x1) - busemann(p, x1, x)).abs());
        bounded = bounded.max(busemann(p, x0, x).abs() - dist(x0, x));
    }
    out.push(Check::at_most("cocycle identity", cocycle, 1e-9, "B(x0,x) = B(x0,x1) + B(x1,x), 100 triples"));
    out.push(Check::at_most("bounded by distance", bounded, 1e-9, "|B(x0,x)| - d(x0,x), 100 pairs"));

    let (mut lower, mut upper, mut lip) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for _ in 0..1000 {
        let p = random_boundary(&mut rng);
        let (x, y) = (random_point(&mut rng), random_point(&mut rng));
        let t = rng.random_range(0.0..5.0);
        let b = busemann(p, x, y).abs();
        let d0 = dist(x, y);
        let d = dist(horoflow(p, t, x), horoflow(p, t, y));
        let tol = 1e-9 * (1.0 + d0);
        lower = lower.min(d - b + tol);
        // the horocyclic chord 2 sinh(d/2) is what contracts by e^{-t}
        upper = upper.min(b + (-t).exp() * 2.0 * (0.5 * d0).sinh() - d + tol);
        lip = lip.min(d0 - d + tol);
    }
    out.push(Check::at_least("horoflow lower bound", lower, 0.0, "min of d(Fx,Fy) - |B_x(y)|, 1000 triples"));
    out.push(Check::at_least("horoflow upper bound", upper, 0.0, "min of |B_x(y)| + e^{-t} 2sinh(d/2) - d(Fx,Fy)"));
    out.push(Check::at_least("horoflow 1-Lipschitz", lip, 0.0, "min of d(x,y) - d(Fx,Fy)"));

    let mut spread: f64 = 0.0;
    let mut len_err: f64 = 0.0;
    for _ in 0..5 {
        let h = random_isometry(&mut rng);
        let l = rng.random_range(0.2..4.0);
        let g = h * MoebiusMap::diagonal(l) * h.inverse();
        let p = h.apply_boundary(BoundaryPoint::Infinity);
        let vals: Vec<f64> = (0..100)
            .map(|_| {
                let x = random_point(&mut rng);
                busemann(p, x, g.apply(x))
            })
            .collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        spread = spread.max(hi - lo);
        len_err = len_err.max((vals[0].abs() - g.translation_length()).abs());
    }
    out.push(Check::at_most("isometry increment spread", spread, 1e-8, "B(x, g·x) over 100 x for g fixing p"));
    out.push(Check::at_most("isometry increment length", len_err, 1e-8, "|B(x, g·x)| - l(g)"));

    let mut tested = 0;
    let mut failures = 0;
    for _ in 0..2000 {
        let g = random_isometry(&mut rng) * MoebiusMap::diagonal(rng.random_range(0.0..14.0)) * random_isometry(&mut rng);
        let x = random_point(&mut rng);
        if dist(x, g.apply(x)) < 10.0 {
            continue;
        }
        let Ok(a) = angle_at_vertex(g.inverse().apply(x), x, g.apply(x)) else { continue };
        if a >= 0.5 {
            tested += 1;
            if g.classify(CLASSIFY_TOL) != IsometryKind::Hyperbolic {
                failures += 1;
            }
        }
    }
    out.push(Check::flag(
        "hyperbolicity certificate",
        failures == 0 && tested > 0,
        format!("{tested} isometries with d(x,gx) ≥ 10 and angle ≥ 0.5, {failures} not hyperbolic"),
    ));
    out
}

pub(crate) fn angles_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = rng(opts);
    let mut out = Vec::new();

    let expected = (1f64.cosh() / (1f64.cosh() + 1.0)).acos();
    let err = comparison_angle(1.0, 1.0, 1.0).map(|a| (a - expected).abs()).unwrap_or(f64::INFINITY);
    out.push(Check::at_most("equilateral", err, 1e-12, "sides 1: arccos(cosh 1/(cosh 1 + 1))"));

    let mut worst: f64 = f64::INFINITY;
    let mut n = 0;
    while n < 1000 {
        let [x, y, z, t] = [(); 4].map(|_| random_point(&mut rng));
        let (Ok(a), Ok(b), Ok(c)) = (angle_at_vertex(y, x, t), angle_at_vertex(y, x, z), angle_at_vertex(z, x, t)) else {
            continue;
        };
        worst = worst.min(b + c - a);
        n += 1;
    }
    out.push(Check::at_least("angle triangle inequality", worst + 1e-12, 0.0, "min of ∠(y,x,z)+∠(z,x,t)-∠(y,x,t), 1000 quadruples"));

    let mut worst: f64 = f64::INFINITY;
    for _ in 0..200 {
        let x = random_point(&mut rng);
        let [p, q, r] = [(); 3].map(|_| random_boundary(&mut rng));
        if let (Ok(a), Ok(b), Ok(c)) = (boundary_angle(p, x, r), boundary_angle(p, x, q), boundary_angle(q, x, r)) {
            worst = worst.min(b + c - a);
        }
    }
    out.push(Check::at_least("boundary angle triangle inequality", worst + 1e-12, 0.0, "d_x on 200 boundary triples"));

    let base = [1.0, 1.3, 1.7];
    let mut smallest = Vec::new();
    for k in 0..6 {
        let s = base.map(|l| l * 2f64.powi(k));
        let mut a = [
            comparison_angle(s[0], s[1], s[2]).unwrap_or(f64::NAN),
            comparison_angle(s[1], s[2], s[0]).unwrap_or(f64::NAN),
            comparison_angle(s[2], s[0], s[1]).unwrap_or(f64::NAN),
        ];
        a.sort_by(f64::total_cmp);
        smallest.push([a[0], a[1]]);
    }
    let monotone = smallest.windows(2).all(|w| w[1][0] < w[0][0] && w[1][1] < w[0][1]);
    let last = smallest.last().map(|a| a[1]).unwrap_or(f64::NAN);
    out.push(Check::flag("large triangle collapse", monotone, format!("two smallest angles over 5 doublings, final {last:.3e}")));
    out
}

fn identity_values_energy(mesh: &Mesh) -> Result<f64, crate::harmonic::HarmonicError> {
    let disc = Discretization::new(mesh);
    Ok(total_energy(mesh, &disc, &mesh.holonomy, TargetSpace::plane(), &mesh.identity_values())?.total)
}

fn accept_best(r: Result<crate::harmonic::HarmonicSolution, crate::harmonic::HarmonicError>) -> Result<crate::harmonic::HarmonicSolution, crate::harmonic::HarmonicError> {
    match r {
        Err(crate::harmonic::HarmonicError::MaxIterations { best, .. }) => Ok(*best),
        r => r,
    }
}

pub(crate) fn energy_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let x = reference_surface();
    let four_pi = 4.0 * PI;
    let h = opts.target_edge;
    let (fine, coarse) = match (build_mesh(&x, h), build_mesh(&x, 2.0 * h)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![Check::error("mesh", e)],
    };
    let area_err = |m: &Mesh| (m.total_area() - four_pi).abs() / four_pi;
    out.push(Check::at_most("area", area_err(&fine), 0.01, format!("|A - 4π|/4π at edge {h}")));
    // geodesic triangles make the area exact, so compare above roundoff
    out.push(Check::flag(
        "area refinement",
        area_err(&fine) <= area_err(&coarse).max(1e-12),
        format!("error {:.3e} at {} vs {:.3e} at {h}", area_err(&coarse), 2.0 * h, area_err(&fine)),
    ));
    match identity_values_energy(&fine) {
        Ok(e) => out.push(Check::at_most("identity energy", (e - four_pi).abs() / four_pi, 0.01, format!("|E(X,X) - 4π|/4π = E {e:.10}"))),
        Err(e) => out.push(Check::error("identity energy", e)),
    }

    let mut disc = Discretization::new(&coarse);
    let so = SolverOptions::default();
    for (name, rep) in [
        ("trivial energy", SurfaceRep::trivial(2)),
        ("elliptic energy", SurfaceRep::elliptic(2, &[0.4, 1.1, -0.7, 2.0]).expect("genus 2")),
    ] {
        match solve_harmonic(&coarse, &mut disc, &rep, TargetSpace::plane(), None, &so) {
            Ok(s) => out.push(Check::at_most(name, s.report.total, 1e-12, "constant map")),
            Err(e) => out.push(Check::error(name, e)),
        }
    }

    let target = match fn_to_holonomy(&FNCoords::new(vec![2.5, 2.0, 3.0], vec![0.0, 0.5, -0.3]).expect("valid")) {
        Ok(r) => r,
        Err(e) => return [out, vec![Check::error("target", e)]].concat(),
    };
    let s1 = accept_best(solve_harmonic(&coarse, &mut disc, &target, TargetSpace::plane(), None, &so));
    let s2 = accept_best(solve_harmonic(&coarse, &mut disc, &target, TargetSpace::HyperbolicPlane { scale: 2.0 }, None, &so));
    match (s1, s2) {
        (Ok(a), Ok(b)) => {
            let e_err = (b.report.total - a.report.total / 4.0).abs() / a.report.total;
            out.push(Check::at_most("scale covariance", e_err, 1e-8, "|E_2 - E_1/4| / E_1"));
            let h_err = a
                .report
                .pullbacks
                .iter()
                .zip(&b.report.pullbacks)
                .map(|(p, q)| (p.xx / 4.0 - q.xx).abs().max((p.xy / 4.0 - q.xy).abs()).max((p.yy / 4.0 - q.yy).abs()) / p.trace().max(1e-300))
                .fold(0.0, f64::max);
            out.push(Check::at_most("pullback scale covariance", h_err, 1e-8, "pullbacks scale by 1/α²"));
            if let MapValues::Plane(u) = &a.map.values {
                let g = random_isometry(&mut rng(opts));
                let moved: Vec<Point> = u.iter().map(|p| g.apply(*p)).collect();
                match total_energy(&coarse, &disc, &target.conjugate(&g), TargetSpace::plane(), &moved) {
                    Ok(r) => out.push(Check::at_most(
                        "isometry invariance",
                        (r.total - a.report.total).abs() / a.report.total,
                        1e-8,
                        "E(g∘f) for the conjugate representation",
                    )),
                    Err(e) => out.push(Check::error("isometry invariance", e)),
                }
            }
        }
        (Err(e), _) | (_, Err(e)) => out.push(Check::error("scale covariance", e)),
    }
    out
}

/// φ = z̄ in the chart, which is far from holomorphic.
fn conj_field(mesh: &Mesh) -> QuadDiff {
    let coeffs = mesh
        .faces
        .iter()
        .map(|f| {
            let c = crate::teichmueller::centroid(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
            Complex64::new(c.x, -c.y)
        })
        .collect();
    QuadDiff { coeffs }
}

pub(crate) fn hopf_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let x = reference_surface();
    let h = opts.target_edge;
    let (fine, coarse) = match (build_mesh(&x, h), build_mesh(&x, 2.0 * h)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![Check::error("mesh", e)],
    };
    let so = SolverOptions::default();

    let mut disc = Discretization::new(&fine);
    match solve_harmonic(&fine, &mut disc, &fine.holonomy.clone(), TargetSpace::plane(), None, &so) {
        Ok(s) => {
            out.push(Check::at_most("identity gradient", s.report.gradient_norm, 1e-8, "relative gradient norm at exit"));
            let phi = hopf_differential(&s.report.pullbacks);
            let worst = phi.coeffs.iter().zip(&fine.conformal).map(|(c, a)| c.norm() / a).fold(0.0, f64::max);
            out.push(Check::at_most("identity hopf", worst, 1e-5, "max |φ|/α"));
            let rec = s
                .report
                .pullbacks
                .iter()
                .zip(&fine.conformal)
                .zip(&phi.coeffs)
                .map(|((p, a), c)| reconstruction_residual(p, *a, *c))
                .fold(0.0, f64::max);
            out.push(Check::at_most("reconstruction", rec, 1e-10, "e·g + Φ + Φ̄ vs pullback per face"));
        }
        Err(e) => out.push(Check::error("identity solve", e)),
    }

    let target = match fn_to_holonomy(&FNCoords::new(vec![2.5, 2.0, 3.0], vec![0.0, 0.5, -0.3]).expect("valid")) {
        Ok(r) => r,
        Err(e) => return [out, vec![Check::error("target", e)]].concat(),
    };
    let mut residuals = Vec::new();
    for m in [&coarse, &fine] {
        let mut d = Discretization::new(m);
        match accept_best(solve_harmonic(m, &mut d, &target, TargetSpace::plane(), None, &so)) {
            Ok(s) => {
                if m.faces.len() == coarse.faces.len() {
                    out.push(first_order(m, &d, &target, &s, opts, so.tol));
                }
                residuals.push(holomorphicity_residual(&hopf_differential(&s.report.pullbacks), m));
            }
            Err(e) => out.push(Check::error("harmonic solve", e)),
        }
    }
    if let [a, b] = residuals[..] {
        out.push(Check::at_least("holomorphicity refinement", a / b, 1.5, format!("residual {a:.3e} at {} over {b:.3e} at {h}", 2.0 * h)));
    }
    let (a, b) = (holomorphicity_residual(&conj_field(&coarse), &coarse), holomorphicity_residual(&conj_field(&fine), &fine));
    out.push(Check::at_least("conjugate field", b / a, 0.5, format!("z̄ residual {a:.3e} at {} and {b:.3e} at {h}", 2.0 * h)));
    out
}

/// Central differences of E along random unit perturbations of the class values.
fn first_order(mesh: &Mesh, disc: &Discretization, rep: &SurfaceRep, s: &crate::harmonic::HarmonicSolution, opts: &VerifyOptions, tol: f64) -> Check {
    let MapValues::Plane(u) = &s.map.values else {
        return Check::flag("first-order optimality", false, "not a plane map");
    };
    let mut rng = rng(opts);
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut d: Vec<[f64; 2]> = (0..u.len()).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let n = d.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>().sqrt();
        d.iter_mut().for_each(|v| {
            v[0] /= n;
            v[1] /= n;
        });
        let shift = |t: f64| -> Vec<Point> { u.iter().zip(&d).map(|(p, v)| Point { x: p.x + p.y * t * v[0], y: p.y * (t * v[1]).exp() }).collect() };
        let e = |t: f64| total_energy(mesh, disc, rep, TargetSpace::plane(), &shift(t)).map(|r| r.total).unwrap_or(f64::NAN);
        worst = worst.max(((e(eps) - e(-eps)) / (2.0 * eps)).abs());
    }
    let bound = 10.0 * tol * s.report.total;
    Check::at_most("first-order optimality", worst, bound, "max |dE| along 20 unit perturbations vs 10·tol·E")
}

pub(crate) fn properness_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = rng(opts);
    let x0 = reference_surface();
    let j0 = match fn_to_holonomy(&x0) {
        Ok(j) => j,
        Err(e) => return vec![Check::error("j0", e)],
    };
    let rho = SurfaceRep::common_axis(2, &[0.2, -0.1, 0.15, 0.05]).expect("genus 2");
    let upper = match build_mesh(&x0, opts.psi.target_edge).map_err(|e| e.to_string()).and_then(|m| {
        let mut d = Discretization::new(&m);
        lip_estimate(&j0, &rho, 4, &m, &mut d, &opts.psi.solver).map_err(|e| e.to_string())
    }) {
        Ok(est) => est.upper,
        Err(e) => return vec![Check::error("lip estimate", e)],
    };
    let samples: Vec<FNCoords> = (0..opts.samples).map(|_| random_fn_point(&mut rng)).collect();
    match verify_properness_bound(&j0, &rho, &samples, upper, &opts.psi) {
        Ok(rows) => {
            let slack = rows.iter().map(|r| r.f - r.bound).fold(f64::INFINITY, f64::min);
            out.push(Check::at_least("properness bound", slack, 0.0, format!("min F - (1-λ)E + slack, λ = {upper:.4}, {} samples", rows.len())));
        }
        Err(e) => out.push(Check::error("properness bound", e)),
    }
    let ts = [0.0, 0.5, 1.0, 1.5];
    match energy_along_ray(&j0, &x0, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], &ts, &opts.psi) {
        Ok(row) => {
            let rising = row.windows(2).all(|w| w[1].1 > w[0].1);
            let vals: Vec<String> = row.iter().map(|(_, e)| format!("{e:.4}")).collect();
            out.push(Check::flag("energy grows along ray", rising, format!("E(X_t, j0) = {}", vals.join(", "))));
        }
        Err(e) => out.push(Check::error("energy grows along ray", e)),
    }
    out
}

pub(crate) fn identity_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = rng(opts);
    let x1 = reference_surface();
    let j0 = match fn_to_holonomy(&x1) {
        Ok(j) => j,
        Err(e) => return vec![Check::error("j0", e)],
    };
    let triv = SurfaceRep::trivial(2);
    for k in 0..opts.samples {
        let x2 = random_fn_point(&mut rng);
        match verify_energy_identity(&x1, &x2, &j0, &triv, &opts.psi) {
            Ok(r) => {
                out.push(Check::at_most(&format!("energy identity {k}"), r.relative_mismatch, 0.03, format!("lhs {:.6} rhs {:.6}", r.lhs, r.rhs)));
                out.push(Check::flag(&format!("monotone {k}"), r.monotone, format!("F(X2) {:.6} ≥ F(X1) {:.6}", r.f_x2, r.f_x1)));
            }
            Err(PsiError::NotCritical { mismatch }) => out.push(Check::error(&format!("energy identity {k}"), format!("X1 not critical ({mismatch:e})"))),
            Err(e) => out.push(Check::error(&format!("energy identity {k}"), e)),
        }
    }
    out
}

pub(crate) fn continuity_suite(opts: &VerifyOptions) -> Vec<Check> {
    let x0 = reference_surface();
    let (j0, mesh) = match fn_to_holonomy(&x0).map_err(|e| e.to_string()).and_then(|j| build_mesh(&x0, opts.psi.target_edge).map(|m| (j, m)).map_err(|e| e.to_string())) {
        Ok(v) => v,
        Err(e) => return vec![Check::error("setup", e)],
    };
    let base = [0.2, -0.1, 0.15, 0.05];
    let steps = 10;
    let path: Vec<SurfaceRep> = (0..=steps)
        .map(|k| SurfaceRep::common_axis(2, &base.map(|t| t * k as f64 / steps as f64)).expect("genus 2"))
        .collect();
    let mut disc = Discretization::new(&mesh);
    match lip_continuity_probe(&j0, &path, 4, &mesh, &mut disc, &opts.psi.solver) {
        Ok(t) => {
            let ordered = t.rows.iter().all(|r| r.lower <= r.upper);
            let mean = |f: fn(&crate::lipschitz::ContinuityRow) -> f64| {
                let (a, b) = (f(&t.rows[0]), f(&t.rows[t.rows.len() - 1]));
                (b - a).abs() / steps as f64
            };
            vec![
                Check::flag("lower ≤ upper", ordered, format!("{} steps", t.rows.len())),
                Check::at_most("lower jumps", t.max_lower_jump, 3.0 * mean(|r| r.lower) + 1e-9, "max jump vs 3× mean step"),
                Check::at_most("upper jumps", t.max_upper_jump, 3.0 * mean(|r| r.upper) + 1e-9, "max jump vs 3× mean step"),
            ]
        }
        Err(e) => vec![Check::error("continuity probe", e)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_suites_pass() {
        let o = VerifyOptions::default();
        for c in busemann_suite(&o).into_iter().chain(angles_suite(&o)) {
            assert!(c.passed, "{c:?}");
        }
    }
}
