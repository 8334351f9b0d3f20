use surfdom::harmonic::{Discretization, SolverOptions};
use surfdom::lipschitz::{check_domination, lip_continuity_probe, lip_estimate, thurston_distance, DominationVerdict, LipError};
use surfdom::surface::SurfaceRep;
use surfdom::teichmueller::{build_mesh, fn_to_holonomy, FNCoords};

fn x() -> FNCoords {
    FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap()
}

#[test]
fn thurston_distance_to_self_is_zero() {
    let j = fn_to_holonomy(&x()).unwrap();
    let m = build_mesh(&x(), 0.5).unwrap();
    let mut d = Discretization::new(&m);
    let (lo, hi) = thurston_distance(&j, &j, 4, &m, &mut d, &SolverOptions::default()).unwrap();
    assert!(lo.abs() < 1e-9 && hi.abs() < 1e-6, "{lo} {hi}");
}

#[test]
fn thurston_distance_is_asymmetric_but_positive() {
    let (x1, x2) = (x(), FNCoords::new(vec![2.4, 2.0, 2.9], vec![0.0, 0.3, -0.1]).unwrap());
    let (j1, j2) = (fn_to_holonomy(&x1).unwrap(), fn_to_holonomy(&x2).unwrap());
    let (m1, m2) = (build_mesh(&x1, 0.5).unwrap(), build_mesh(&x2, 0.5).unwrap());
    let so = SolverOptions::default();
    let (lo12, hi12) = thurston_distance(&j1, &j2, 4, &m1, &mut Discretization::new(&m1), &so).unwrap();
    let (lo21, hi21) = thurston_distance(&j2, &j1, 4, &m2, &mut Discretization::new(&m2), &so).unwrap();
    assert!(lo12 > 0.0 && lo21 > 0.0 && lo12 <= hi12 && lo21 <= hi21);
}

#[test]
fn small_common_axis_is_dominated() {
    let j = fn_to_holonomy(&x()).unwrap();
    let m = build_mesh(&x(), 0.5).unwrap();
    let mut d = Discretization::new(&m);
    let rho = SurfaceRep::common_axis(2, &[0.2, -0.1, 0.15, 0.05]).unwrap();
    let (v, est) = check_domination(&j, &rho, 4, &m, &mut d, &SolverOptions::default()).unwrap();
    assert!(matches!(v, DominationVerdict::StrictlyDominated { .. }));
    assert!(est.lower <= est.upper);
}

#[test]
fn non_fuchsian_source_is_rejected() {
    let m = build_mesh(&x(), 0.6).unwrap();
    let mut d = Discretization::new(&m);
    let e = lip_estimate(&SurfaceRep::trivial(2), &SurfaceRep::trivial(2), 3, &m, &mut d, &SolverOptions::default());
    assert!(matches!(e, Err(LipError::NotFuchsian { .. }) | Err(LipError::MeshMismatch)));
}

#[test]
fn bounds_move_continuously_along_a_family() {
    let j = fn_to_holonomy(&x()).unwrap();
    let m = build_mesh(&x(), 0.6).unwrap();
    let mut d = Discretization::new(&m);
    let path: Vec<SurfaceRep> = (0..=4).map(|k| SurfaceRep::common_axis(2, &[0.1 * k as f64, -0.05 * k as f64, 0.1, 0.0]).unwrap()).collect();
    let t = lip_continuity_probe(&j, &path, 4, &m, &mut d, &SolverOptions::default()).unwrap();
    assert_eq!(t.rows.len(), 5);
    assert!(t.max_lower_jump < 0.1 && t.max_upper_jump < 0.1);
    assert!(t.rows.iter().all(|r| r.lower <= r.upper));
}

#[test]
fn thurston_bounds_satisfy_certified_triangle_inequality() {
    // Lip(j, j'') ≤ Lip(j, j')·Lip(j', j''), so ln lower(j, j'') ≤ ln upper(j, j') + ln upper(j', j'').
    let xs = [
        x(),
        FNCoords::new(vec![2.4, 2.0, 2.9], vec![0.0, 0.3, -0.1]).unwrap(),
        FNCoords::new(vec![1.9, 2.6, 2.2], vec![0.4, 0.1, 0.2]).unwrap(),
    ];
    let js: Vec<SurfaceRep> = xs.iter().map(|c| fn_to_holonomy(c).unwrap()).collect();
    let so = SolverOptions::default();
    let d_th = |a: usize, b: usize| {
        let m = build_mesh(&xs[a], 0.6).unwrap();
        thurston_distance(&js[a], &js[b], 4, &m, &mut Discretization::new(&m), &so).unwrap()
    };
    let slack = 1e-2;
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1)] {
        let (lo_ac, _) = d_th(a, c);
        let (_, up_ab) = d_th(a, b);
        let (_, up_bc) = d_th(b, c);
        assert!(lo_ac <= up_ab + up_bc + slack, "{a}{b}{c}: {lo_ac} > {up_ab} + {up_bc}");
    }
}
