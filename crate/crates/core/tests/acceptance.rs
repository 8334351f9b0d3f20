//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line to
//! stderr (uncaptured) and then asserts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};
use surfdom::harmonic::{
    hopf_differential, reconstruction_residual, solve_harmonic, total_energy, Discretization, SolverOptions, TargetSpace,
};
use surfdom::hyperbolic::{angle_at_vertex, busemann, comparison_angle, dist, horoflow, BoundaryPoint, MoebiusMap, Point};
use surfdom::lipschitz::{check_domination, lip_estimate, lip_lower, scaled_lip, verdict, DominationVerdict, LipEstimate, DEFAULT_RADIUS};
use surfdom::psi::{calibrate_gradient, minimize_F, psi_forward, verify_energy_identity, wp_gradient_check, PsiError, PsiOptions, PsiResult};
use surfdom::surface::{additive_spectrum_residual, detect_parabolic, euler_class, SurfaceRep};
use surfdom::teichmueller::{build_mesh, fn_to_holonomy, FNCoords, Mesh};
use surfdom::verify::{random_fn_point, reference_surface};

/// Serialises the criteria so that each one is timed on an otherwise idle machine.
static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, pass: bool, elapsed: Duration, budget: Duration, detail: String) {
    let ok = pass && elapsed <= budget;
    let line = format!(
        "criterion {n}: {} {detail} [{:.1} s, budget {} s]\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(elapsed <= budget, "criterion {n} exceeded its time budget");
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

fn j0() -> SurfaceRep {
    fn_to_holonomy(&reference_surface()).unwrap()
}

fn max_dev(a: &FNCoords, b: &FNCoords) -> f64 {
    a.to_vec().iter().zip(b.to_vec()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_01_busemann_and_translation_length() {
    let _g = serial();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tl = (0..20).map(|k| 0.05 + 0.4 * k as f64).map(|l| (MoebiusMap::diagonal(l).translation_length() - l).abs()).fold(0.0, f64::max);
    let bz = (0..100)
        .map(|_| {
            let x = random_point(&mut rng);
            (busemann(BoundaryPoint::Infinity, Point::i(), x) + x.y.ln()).abs()
        })
        .fold(0.0, f64::max);
    // Lower bound |B_x(y)| ≤ d_t, the contraction d_t ≤ |B_x(y)| + e^{-t}·2sinh(d/2)
    // and 1-Lipschitz, with t ≥ 0.
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..1000 {
        let p = random_boundary(&mut rng);
        let (x, y) = (random_point(&mut rng), random_point(&mut rng));
        let t = rng.random_range(0.0..6.0);
        let b = busemann(p, x, y).abs();
        let d0 = dist(x, y);
        let d = dist(horoflow(p, t, x), horoflow(p, t, y));
        let tol = 1e-9 * (1.0 + d0);
        worst = worst.min(d - b + tol).min(b + (-t).exp() * 2.0 * (0.5 * d0).sinh() - d + tol).min(d0 - d + tol);
    }
    let pass = tl < 1e-8 && bz < 1e-9 && worst >= 0.0;
    report(1, pass, t0.elapsed(), Duration::from_secs(1), format!("translation length err {tl:.2e}, Busemann err {bz:.2e}, horoflow min slack {worst:.2e}"));
}

#[test]
fn criterion_02_angles() {
    let _g = serial();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
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
    let base = [1.0, 1.3, 1.7];
    let small: Vec<[f64; 2]> = (0..6)
        .map(|k| {
            let s = base.map(|l| l * 2f64.powi(k));
            let mut a = [
                comparison_angle(s[0], s[1], s[2]).unwrap(),
                comparison_angle(s[1], s[2], s[0]).unwrap(),
                comparison_angle(s[2], s[0], s[1]).unwrap(),
            ];
            a.sort_by(f64::total_cmp);
            [a[0], a[1]]
        })
        .collect();
    let monotone = small.windows(2).all(|w| w[1][0] < w[0][0] && w[1][1] < w[0][1]);
    let pass = worst >= -1e-12 && monotone;
    report(
        2,
        pass,
        t0.elapsed(),
        Duration::from_secs(1),
        format!("min triangle slack {worst:.2e}, smallest angles {:.3e} -> {:.3e} monotone {monotone}", small[0][1], small[5][1]),
    );
}

fn identity_energy(mesh: &Mesh) -> f64 {
    let disc = Discretization::new(mesh);
    total_energy(mesh, &disc, &mesh.holonomy, TargetSpace::plane(), &mesh.identity_values()).unwrap().total
}

#[test]
fn criterion_03_mesh_area_and_identity_energy() {
    let _g = serial();
    let t0 = Instant::now();
    let x = reference_surface();
    let four_pi = 4.0 * PI;
    let fine = build_mesh(&x, 0.1).unwrap();
    let coarse = build_mesh(&x, 0.2).unwrap();
    let rel = |v: f64| (v - four_pi).abs() / four_pi;
    let (a_f, a_c) = (rel(fine.total_area()), rel(coarse.total_area()));
    let (e_f, e_c) = (rel(identity_energy(&fine)), rel(identity_energy(&coarse)));
    // Both quantities are exact up to roundoff on geodesic triangles; refinement
    // is compared above a 1e-12 floor.
    let refine = a_f <= a_c.max(1e-12) && e_f <= e_c.max(1e-12);
    let pass = a_f < 0.01 && e_f < 0.01 && refine;
    report(
        3,
        pass,
        t0.elapsed(),
        Duration::from_secs(30),
        format!("{} faces, area err {a_f:.2e} (coarse {a_c:.2e}), E(X,X) err {e_f:.2e} (coarse {e_c:.2e})", fine.faces.len()),
    );
}

#[test]
fn criterion_04_identity_solve() {
    let _g = serial();
    let t0 = Instant::now();
    let mesh = build_mesh(&reference_surface(), 0.2).unwrap();
    let mut disc = Discretization::new(&mesh);
    let s = solve_harmonic(&mesh, &mut disc, &mesh.holonomy.clone(), TargetSpace::plane(), None, &SolverOptions::default()).unwrap();
    let phi = hopf_differential(&s.report.pullbacks);
    let hopf = phi.coeffs.iter().zip(&mesh.conformal).map(|(c, a)| c.norm() / a).fold(0.0, f64::max);
    let rec = s
        .report
        .pullbacks
        .iter()
        .zip(&mesh.conformal)
        .zip(&phi.coeffs)
        .map(|((p, a), c)| reconstruction_residual(p, *a, *c))
        .fold(0.0, f64::max);
    let pass = s.report.gradient_norm < 1e-8 && hopf < 1e-5 && rec < 1e-10;
    report(
        4,
        pass,
        t0.elapsed(),
        Duration::from_secs(60),
        format!("gradient {:.2e}, max|φ|/α {hopf:.2e}, reconstruction {rec:.2e}", s.report.gradient_norm),
    );
}

#[test]
fn criterion_05_euler_class() {
    let _g = serial();
    let t0 = Instant::now();
    let x = reference_surface();
    let fuchsian = fn_to_holonomy(&x).unwrap();
    let bumped: Vec<f64> = x.to_vec().iter().enumerate().map(|(k, v)| v + if k % 2 == 0 { 1e-3 } else { -1e-3 }).collect();
    let near = fn_to_holonomy(&FNCoords::from_vec(&bumped).unwrap()).unwrap();
    let e = |r: &SurfaceRep| euler_class(r).unwrap();
    let trivial = e(&SurfaceRep::trivial(2));
    let near_trivial = e(&SurfaceRep::elliptic(2, &[1e-3, -1e-3, 1e-3, 1e-3]).unwrap());
    let values = [trivial, near_trivial, e(&fuchsian), e(&near), e(&fuchsian.apply_sigma()), e(&near.apply_sigma())];
    let pass = values == [0, 0, 2, 2, -2, -2];
    report(5, pass, t0.elapsed(), Duration::from_secs(5), format!("trivial/perturbed {:?}, FN/perturbed {:?}, σ/perturbed {:?}", &values[0..2], &values[2..4], &values[4..6]));
}

#[test]
fn criterion_06_parabolic_detection() {
    let _g = serial();
    let t0 = Instant::now();
    let rho = SurfaceRep::common_axis(2, &[0.7, -0.4, 1.1, 0.25]).unwrap();
    let (detected, residual) = match detect_parabolic(&rho, 1e-8) {
        Some(d) => (d.is_boundary(), additive_spectrum_residual(&rho, &d, 3)),
        None => (false, f64::INFINITY),
    };
    let fuchsian_detected = detect_parabolic(&j0(), 1e-8).is_some();
    let pass = detected && residual < 1e-6 && !fuchsian_detected;
    report(6, pass, t0.elapsed(), Duration::from_secs(10), format!("common axis detected {detected}, residual {residual:.2e}, Fuchsian detected {fuchsian_detected}"));
}

#[test]
fn criterion_07_domination_verdicts() {
    let _g = serial();
    let t0 = Instant::now();
    let j = j0();
    let mesh = build_mesh(&reference_surface(), 0.4).unwrap();
    let mut disc = Discretization::new(&mesh);
    let so = SolverOptions::default();
    let mut ordered = true;
    let mut run = |rho: &SurfaceRep| {
        let (v, est) = check_domination(&j, rho, DEFAULT_RADIUS, &mesh, &mut disc, &so).unwrap();
        ordered &= est.lower <= est.upper;
        v
    };
    let v_triv = run(&SurfaceRep::trivial(2));
    let v_ell = run(&SurfaceRep::elliptic(2, &[0.4, 1.1, -0.7, 2.0]).unwrap());
    let v_self = run(&j);
    let other = fn_to_holonomy(&FNCoords::new(vec![2.4, 2.0, 2.9], vec![0.0, 0.3, -0.1]).unwrap()).unwrap();
    let v_other = run(&other);
    let lowers: Vec<f64> = (2..=6).map(|r| lip_lower(&j, &other, r).unwrap().0).collect();
    let monotone = lowers.windows(2).all(|w| w[1] >= w[0]);
    let strict = |v: &DominationVerdict| matches!(v, DominationVerdict::StrictlyDominated { .. });
    let self_ok = matches!(&v_self, DominationVerdict::NotDominated { witness_word } if !witness_word.is_empty());
    let pass = strict(&v_triv) && strict(&v_ell) && self_ok && ordered && monotone;
    report(
        7,
        pass,
        t0.elapsed(),
        Duration::from_secs(120),
        format!(
            "trivial {}, elliptic {}, j {}, other Fuchsian {}, lower ≤ upper {ordered}, lip_lower over radii 2..6 {:?}",
            v_triv.name(),
            v_ell.name(),
            v_self.name(),
            v_other.name(),
            lowers.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_08_gradient_of_f() {
    let _g = serial();
    let t0 = Instant::now();
    let j = j0();
    let opts = PsiOptions { target_edge: 0.2, ..PsiOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let checks: Vec<_> = (0..3)
        .map(|_| wp_gradient_check(&random_fn_point(&mut rng), &j, &SurfaceRep::trivial(2), &opts).unwrap())
        .collect();
    let (c, worst) = calibrate_gradient(&checks);
    report(8, worst < 0.05, t0.elapsed(), Duration::from_secs(600), format!("3 points at edge 0.2, calibrated constant {c:.5}, worst mismatch {worst:.2e}"));
}

fn minimise(init: &FNCoords) -> PsiResult {
    match minimize_F(&j0(), &SurfaceRep::trivial(2), init, &PsiOptions::default()) {
        Ok(r) => r,
        Err(PsiError::MaxIterations { best }) => *best,
        Err(e) => panic!("minimize_F failed: {e}"),
    }
}

fn criterion9_runs() -> &'static Vec<PsiResult> {
    static RUNS: OnceLock<Vec<PsiResult>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let inits = [[2.2, 2.1, 2.5, 0.2, 0.0, 0.3], [1.8, 2.5, 2.8, 0.5, -0.4, 0.1], [2.4, 2.4, 2.4, 0.0, 0.0, 0.0]];
        inits.iter().map(|v| minimise(&FNCoords::from_vec(v).unwrap())).collect()
    })
}

#[test]
fn criterion_09_minimiser_recovers_j0() {
    let _g = serial();
    let t0 = Instant::now();
    let x = reference_surface();
    let runs = criterion9_runs();
    let errs: Vec<f64> = runs.iter().map(|r| max_dev(&r.argmin, &x)).collect();
    let spread = runs.iter().flat_map(|a| runs.iter().map(move |b| max_dev(&a.argmin, &b.argmin))).fold(0.0, f64::max);
    let pass = errs.iter().all(|e| *e < 1e-3) && spread < 1e-2;
    report(9, pass, t0.elapsed(), Duration::from_secs(600), format!("distance to j0 per init {:?}, agreement {spread:.2e}", errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()));
}

#[test]
fn criterion_10_energy_identity() {
    let _g = serial();
    let t0 = Instant::now();
    let x1 = &criterion9_runs()[0].argmin;
    let j = j0();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for _ in 0..3 {
        let x2 = random_fn_point(&mut rng);
        let r = verify_energy_identity(x1, &x2, &j, &SurfaceRep::trivial(2), &PsiOptions::default()).unwrap();
        worst = worst.max(r.relative_mismatch);
        monotone &= r.monotone;
    }
    let pass = worst < 0.03 && monotone;
    report(10, pass, t0.elapsed(), Duration::from_secs(600), format!("worst relative mismatch {worst:.2e}, F(X2) ≥ F(X1) {monotone}"));
}

#[test]
fn criterion_11_psi_image_is_dominated() {
    let _g = serial();
    let t0 = Instant::now();
    let opts = PsiOptions::default();
    let reps = [
        ("elliptic", SurfaceRep::elliptic(2, &[0.4, 1.1, -0.7, 2.0]).unwrap()),
        ("common-axis", SurfaceRep::common_axis(2, &[0.2, -0.1, 0.15, 0.05]).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<FNCoords> = (0..3).map(|_| random_fn_point(&mut rng)).collect();
    let mut details = Vec::new();
    let mut pass = true;
    for (name, rho) in &reps {
        for x in &xs {
            let psi = match psi_forward(x, rho, &opts) {
                Ok(p) => p,
                Err(e) => {
                    pass = false;
                    details.push(format!("{name}: {e}"));
                    continue;
                }
            };
            let j = fn_to_holonomy(&psi.coords).unwrap();
            let mesh = build_mesh(&psi.coords, opts.target_edge).unwrap();
            let mut disc = Discretization::new(&mesh);
            let (v, est) = check_domination(&j, rho, DEFAULT_RADIUS, &mesh, &mut disc, &opts.solver).unwrap();
            pass &= matches!(v, DominationVerdict::StrictlyDominated { .. });
            details.push(format!("{name} {} (upper {:.3})", v.name(), est.upper));
        }
    }
    report(11, pass, t0.elapsed(), Duration::from_secs(900), details.join(", "));
}

#[test]
fn criterion_12_scaled_lip() {
    let _g = serial();
    let t0 = Instant::now();
    let est = LipEstimate {
        lower: 0.8,
        upper: 1.2,
        witness_word: None,
        witness_map: None,
        ball_radius: DEFAULT_RADIUS,
        scale: 1.0,
        mesh_edge: 0.4,
        converged: true,
    };
    let s = scaled_lip(&est, 2.0).unwrap();
    let halves = (s.lower - 0.4).abs() < 1e-12 && (s.upper - 0.6).abs() < 1e-12;
    let before = verdict(&est);
    let after = verdict(&s);
    let pass = halves && matches!(before, DominationVerdict::Inconclusive { .. }) && matches!(after, DominationVerdict::StrictlyDominated { .. });
    report(12, pass, t0.elapsed(), Duration::from_secs(1), format!("bounds ({}, {}), verdict {} -> {}", s.lower, s.upper, before.name(), after.name()));
}

#[test]
fn lip_estimate_brackets_for_nearby_surface() {
    // Not a numbered criterion: the bracket for a nearby Fuchsian target is tight.
    let _g = serial();
    let j = j0();
    let other = fn_to_holonomy(&FNCoords::new(vec![2.05, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap()).unwrap();
    let mesh = build_mesh(&reference_surface(), 0.4).unwrap();
    let mut disc = Discretization::new(&mesh);
    let est = lip_estimate(&j, &other, DEFAULT_RADIUS, &mesh, &mut disc, &SolverOptions::default()).unwrap();
    assert!(est.lower <= est.upper && est.lower >= 1.0 && est.upper < 1.2, "{} {}", est.lower, est.upper);
}
