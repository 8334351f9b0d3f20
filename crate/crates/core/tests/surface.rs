use surfdom::surface::{detect_parabolic, euler_class, SurfaceGroup, SurfaceRep, Word};
use surfdom::teichmueller::{fn_to_holonomy, FNCoords};

fn fuchsian() -> SurfaceRep {
    fn_to_holonomy(&FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap()).unwrap()
}

#[test]
fn families_satisfy_the_relator() {
    for rep in [
        SurfaceRep::trivial(2),
        SurfaceRep::elliptic(2, &[0.1, 0.2, 0.3, 0.4]).unwrap(),
        SurfaceRep::common_axis(2, &[0.5, -0.2, 1.0, 0.1]).unwrap(),
        SurfaceRep::unipotent(2, &[0.5, -0.2, 1.0, 0.1]).unwrap(),
        fuchsian(),
    ] {
        assert!(rep.relator_residual() < 1e-10);
    }
}

#[test]
fn euler_class_of_families() {
    assert_eq!(euler_class(&SurfaceRep::elliptic(2, &[0.1, 0.2, 0.3, 0.4]).unwrap()).unwrap(), 0);
    assert_eq!(euler_class(&SurfaceRep::common_axis(2, &[0.5, -0.2, 1.0, 0.1]).unwrap()).unwrap(), 0);
    assert_eq!(euler_class(&fuchsian()).unwrap(), 2);
    assert_eq!(euler_class(&fuchsian().apply_sigma()).unwrap(), -2);
}

#[test]
fn relator_evaluates_to_identity() {
    let rep = fuchsian();
    let g = SurfaceGroup::new(2).unwrap();
    assert!(rep.evaluate(&g.relator()).is_identity(1e-9));
    assert_eq!(g.relator().len(), 8);
}

#[test]
fn word_parsing_and_inverse() {
    let w = Word::parse("a1B2A1", 2).unwrap();
    assert_eq!(w.len(), 3);
    let rep = fuchsian();
    assert!(rep.evaluate(&w.concat(&w.inverse())).is_identity(1e-9));
}

#[test]
fn parabolic_detection_by_family() {
    assert!(detect_parabolic(&SurfaceRep::common_axis(2, &[0.5, -0.2, 1.0, 0.1]).unwrap(), 1e-8).is_some_and(|d| d.is_boundary()));
    assert!(detect_parabolic(&SurfaceRep::unipotent(2, &[0.5, -0.2, 1.0, 0.1]).unwrap(), 1e-8).is_some_and(|d| d.is_boundary()));
    assert!(detect_parabolic(&SurfaceRep::elliptic(2, &[0.1, 0.2, 0.3, 0.4]).unwrap(), 1e-8).is_some_and(|d| !d.is_boundary()));
    assert!(detect_parabolic(&fuchsian(), 1e-8).is_none());
}

#[test]
fn ball_sizes_grow() {
    let g = SurfaceGroup::new(2).unwrap();
    let sizes: Vec<usize> = (0..4).map(|r| g.ball_size(r)).collect();
    assert_eq!(sizes[0], 1);
    assert_eq!(sizes[1], 9);
    assert!(sizes.windows(2).all(|w| w[1] > w[0]));
}
