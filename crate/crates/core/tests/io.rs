use std::path::Path;
use surfdom::io::{parse_rep, read_mesh, read_rep, write_mesh, write_rep, ExperimentConfig, IoError};
use surfdom::surface::SurfaceRep;
use surfdom::teichmueller::{build_mesh, fn_to_holonomy, FNCoords};

#[test]
fn rep_and_mesh_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let x = FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap();
    let rep = fn_to_holonomy(&x).unwrap();
    let rp = dir.path().join("j.txt");
    write_rep(&rp, &rep).unwrap();
    let back = read_rep(&rp, false).unwrap();
    assert!(rep.images.iter().zip(&back.images).all(|(a, b)| a.distance(b) < 1e-14));

    let mesh = build_mesh(&x, 0.6).unwrap();
    let mp = dir.path().join("sub/mesh.txt");
    write_mesh(&mp, &mesh).unwrap();
    let m2 = read_mesh(&mp).unwrap();
    assert_eq!(m2.faces, mesh.faces);
    assert!((m2.total_area() - mesh.total_area()).abs() < 1e-12);
}

#[test]
fn residual_guard() {
    let text = "# surfdom representation v1\ngenus 2\na1 2 0 0 0.5\nb1 1 1 0 1\na2 1 0 0 1\nb2 1 0 0 1\n";
    assert!(matches!(parse_rep(text, false), Err(IoError::Residual(_))));
    assert!(parse_rep(text, true).is_ok());
}

#[test]
fn config_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    write_rep(&dir.path().join("rho.txt"), &SurfaceRep::elliptic(2, &[0.1, 0.2, 0.3, 0.4]).unwrap()).unwrap();
    let text = "seed = 1\ngenus = 2\n[rho]\nkind = \"file\"\npath = \"rho.txt\"\n";
    std::fs::write(dir.path().join("exp.toml"), text).unwrap();
    let cfg = ExperimentConfig::load(&dir.path().join("exp.toml")).unwrap();
    assert!(cfg.rho().unwrap().is_some());
    assert!(ExperimentConfig::load(Path::new("/nonexistent/exp.toml")).is_err());
}
