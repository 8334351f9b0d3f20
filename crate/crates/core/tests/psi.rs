use std::f64::consts::PI;
use surfdom::psi::{eval_F, psi_forward, PsiOptions};
use surfdom::surface::SurfaceRep;
use surfdom::teichmueller::{fn_to_holonomy, FNCoords};

fn x() -> FNCoords {
    FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap()
}

fn opts() -> PsiOptions {
    PsiOptions { target_edge: 0.6, ..PsiOptions::default() }
}

#[test]
fn functional_at_j0_is_area() {
    let j0 = fn_to_holonomy(&x()).unwrap();
    let e = eval_F(&x(), &j0, &SurfaceRep::trivial(2), &opts()).unwrap();
    assert!((e.f - 4.0 * PI).abs() < 1e-6, "{}", e.f);
    assert!(e.e_rho.abs() < 1e-12);
    assert!(e.hopf_mismatch < 1e-4);
}

#[test]
fn functional_grows_away_from_j0() {
    let j0 = fn_to_holonomy(&x()).unwrap();
    let far = FNCoords::new(vec![2.4, 2.0, 2.9], vec![0.0, 0.3, -0.1]).unwrap();
    let f0 = eval_F(&x(), &j0, &SurfaceRep::trivial(2), &opts()).unwrap().f;
    let f1 = eval_F(&far, &j0, &SurfaceRep::trivial(2), &opts()).unwrap().f;
    assert!(f1 > f0);
}

#[test]
fn forward_map_fixes_x_for_elliptic_rho() {
    // Φ(X, ρ) vanishes for a constant map, so Ψ_ρ(X) = X.
    let rho = SurfaceRep::elliptic(2, &[0.3, -0.2, 1.0, 0.5]).unwrap();
    let p = psi_forward(&x(), &rho, &opts()).unwrap();
    let d = p.coords.to_vec().iter().zip(x().to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-9);
}
