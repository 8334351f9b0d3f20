use crate::{Cli, CliError, Command, LipArgs, PsiArgs};
use serde::Serialize;
use std::path::Path;
use surfdom::harmonic::{
    holomorphicity_residual, hopf_differential, solve_equivariant, solve_harmonic, Discretization, HarmonicError, HarmonicSolution,
    SolverOptions, TargetSpace,
};
use surfdom::hyperbolic::CLASSIFY_TOL;
use surfdom::io::{
    read_mesh, read_rep, write_csv_report, write_iteration_log, write_json_report, write_map, write_mesh, ExperimentConfig, RepSpec,
};
use surfdom::lipschitz::{
    check_domination, lip_continuity_probe, scaled_lip, thurston_distance, verdict, ContinuityTable, DominationVerdict,
};
use surfdom::psi::{minimize_F, minimizer_continuity_experiment, psi_forward, ContinuityStep, PsiError, PsiForward, PsiOptions, PsiResult};
use surfdom::surface::{additive_spectrum_residual, detect_parabolic, euler_class, FixedPoint, SurfaceRep};
use surfdom::teichmueller::{build_mesh, mesh_from_rep, FNCoords, Mesh};
use surfdom::verify::{check_mesh_file, run_suite, Suite, VerifyOptions};

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::RepInfo { rep, allow_residual, radius } => rep_info(out, rep, *allow_residual, *radius),
        Command::Dominate { j, rho, lip, alpha } => dominate(out, j, rho, lip, *alpha),
        Command::Psi(args) => psi(out, args),
        Command::Thurston { j1, j2, lip } => thurston(out, j1, j2, lip),
        Command::Harmonic { fn_coords, mesh, rho, edge, alpha } => harmonic(out, fn_coords, mesh.as_deref(), rho, *edge, *alpha),
        Command::Verify { suite, seed, edge, samples, mesh } => verify(out, suite, *seed, *edge, *samples, mesh.as_deref()),
        Command::Continuity { j, rho, steps, lip, init } => continuity(out, j, rho, *steps, lip, init.as_deref()),
    }
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

/// Load a representation from a file path or `family:params`; `genus` is
/// used for the trivial family.
fn load_rep(s: &str, allow_residual: bool, genus: Option<usize>) -> Result<SurfaceRep, CliError> {
    let spec: RepSpec = s.parse()?;
    let g = match &spec {
        RepSpec::File { path, .. } => return Ok(read_rep(path, allow_residual)?),
        RepSpec::Trivial => genus.unwrap_or(2),
        RepSpec::Elliptic { angles: v } | RepSpec::CommonAxis { translations: v } | RepSpec::Unipotent { shifts: v } => v.len() / 2,
        RepSpec::Fuchsian { coords } | RepSpec::Sigma { coords } => coords.len() / 6 + 1,
    };
    Ok(spec.build(g)?)
}

fn check_edge(edge: f64) -> Result<(), CliError> {
    if edge > 0.0 && edge <= 2.0 {
        Ok(())
    } else {
        Err(usage(format!("--edge must lie in (0, 2], got {edge}")))
    }
}

#[derive(Serialize)]
struct GeneratorInfo {
    name: String,
    kind: String,
    trace: f64,
    translation_length: f64,
}

#[derive(Serialize)]
struct ParabolicInfo {
    fixed_point: String,
    morphism: Vec<f64>,
    common_axis: bool,
    additive_residual: f64,
    radius: usize,
}

#[derive(Serialize)]
struct RepInfo {
    genus: usize,
    relator_residual: f64,
    euler_class: Option<i64>,
    euler_error: Option<String>,
    generators: Vec<GeneratorInfo>,
    parabolic: Option<ParabolicInfo>,
}

fn rep_info(out: &Path, rep: &str, allow_residual: bool, radius: usize) -> Result<u8, CliError> {
    let rep = load_rep(rep, allow_residual, None)?;
    let (euler, euler_error) = match euler_class(&rep) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let generators = rep
        .images
        .iter()
        .enumerate()
        .map(|(k, g)| GeneratorInfo {
            name: format!("{}{}", if k % 2 == 0 { 'a' } else { 'b' }, k / 2 + 1),
            kind: format!("{:?}", g.classify(CLASSIFY_TOL)),
            trace: g.trace(),
            translation_length: g.translation_length(),
        })
        .collect();
    let parabolic = detect_parabolic(&rep, 1e-8).map(|d| ParabolicInfo {
        fixed_point: match d.fixed_point {
            FixedPoint::Interior(p) => format!("interior {} + {}i", p.x, p.y),
            FixedPoint::Boundary(b) => format!("boundary {b:?}"),
        },
        common_axis: d.axis.is_some(),
        additive_residual: additive_spectrum_residual(&rep, &d, radius),
        morphism: d.morphism,
        radius,
    });
    let info = RepInfo { genus: rep.genus, relator_residual: rep.relator_residual(), euler_class: euler, euler_error, generators, parabolic };
    println!("genus            {}", info.genus);
    println!("relator residual {:.3e}", info.relator_residual);
    match (&info.euler_class, &info.euler_error) {
        (Some(e), _) => println!("euler class      {e}"),
        (None, Some(m)) => println!("euler class      unavailable ({m})"),
        _ => {}
    }
    for g in &info.generators {
        println!("{:<4} {:<10} trace {:>12.6}  length {:.6}", g.name, g.kind, g.trace, g.translation_length);
    }
    match &info.parabolic {
        Some(p) => println!(
            "parabolic        {} (common axis: {}), additive residual {:.3e} at radius {}",
            p.fixed_point, p.common_axis, p.additive_residual, p.radius
        ),
        None => println!("parabolic        none"),
    }
    write_json_report(&out.join("rep_info.json"), "rep-info", &info)?;
    Ok(0)
}

#[derive(Serialize)]
struct DominateReport {
    verdict: &'static str,
    exit_code: i32,
    lower: f64,
    upper: f64,
    margin: Option<f64>,
    witness_word: Option<String>,
    alpha: f64,
    radius: usize,
    mesh_edge: f64,
    converged: bool,
}

fn dominate(out: &Path, j: &str, rho: &str, lip: &LipArgs, alpha: f64) -> Result<u8, CliError> {
    check_edge(lip.edge)?;
    if !(alpha >= 1.0) {
        return Err(usage(format!("--alpha must be at least 1, got {alpha}")));
    }
    let j = load_rep(j, lip.allow_residual, None)?;
    let rho = load_rep(rho, lip.allow_residual, Some(j.genus))?;
    let mesh = mesh_from_rep(&j, lip.edge)?;
    let mut disc = Discretization::new(&mesh);
    let (mut v, mut est) = check_domination(&j, &rho, lip.radius, &mesh, &mut disc, &SolverOptions::default())?;
    if alpha != 1.0 {
        est = scaled_lip(&est, alpha)?;
        v = verdict(&est);
    }
    let report = DominateReport {
        verdict: v.name(),
        exit_code: v.exit_code(),
        lower: est.lower,
        upper: est.upper,
        margin: match &v {
            DominationVerdict::StrictlyDominated { margin } => Some(*margin),
            _ => None,
        },
        witness_word: match &v {
            DominationVerdict::NotDominated { witness_word } => Some(witness_word.to_string()),
            _ => None,
        },
        alpha,
        radius: lip.radius,
        mesh_edge: est.mesh_edge,
        converged: est.converged,
    };
    println!("{}  lower {:.6}  upper {:.6}", report.verdict, report.lower, report.upper);
    if let Some(w) = &report.witness_word {
        println!("witness {w}");
    }
    write_json_report(&out.join("dominate.json"), "dominate", &report)?;
    Ok(v.exit_code() as u8)
}

#[derive(Serialize)]
struct ThurstonReport {
    ln_lower: f64,
    ln_upper: f64,
    radius: usize,
    edge: f64,
}

fn thurston(out: &Path, j1: &str, j2: &str, lip: &LipArgs) -> Result<u8, CliError> {
    check_edge(lip.edge)?;
    let j1 = load_rep(j1, lip.allow_residual, None)?;
    let j2 = load_rep(j2, lip.allow_residual, Some(j1.genus))?;
    let mesh = mesh_from_rep(&j1, lip.edge)?;
    let mut disc = Discretization::new(&mesh);
    let (ln_lower, ln_upper) = thurston_distance(&j1, &j2, lip.radius, &mesh, &mut disc, &SolverOptions::default())?;
    println!("d_Th in [{ln_lower:.6}, {ln_upper:.6}]");
    write_json_report(&out.join("thurston.json"), "thurston", &ThurstonReport { ln_lower, ln_upper, radius: lip.radius, edge: lip.edge })?;
    Ok(0)
}

#[derive(Serialize)]
struct HarmonicReport {
    energy: f64,
    iterations: usize,
    converged: bool,
    gradient_norm: f64,
    /// max |φ|/α over faces.
    hopf_max: f64,
    holomorphicity_residual: f64,
    faces: usize,
}

fn harmonic(out: &Path, fn_coords: &[f64], mesh: Option<&Path>, rho: &str, edge: f64, alpha: f64) -> Result<u8, CliError> {
    check_edge(edge)?;
    if !(alpha >= 1.0) {
        return Err(usage(format!("--alpha must be at least 1, got {alpha}")));
    }
    let mesh: Mesh = match mesh {
        Some(p) => read_mesh(p)?,
        None => build_mesh(&FNCoords::from_vec(fn_coords)?, edge)?,
    };
    let rho = load_rep(rho, false, Some(mesh.genus))?;
    let mut disc = Discretization::new(&mesh);
    let opts = SolverOptions::default();
    if alpha != 1.0 && detect_parabolic(&rho, 1e-8).is_some_and(|d| d.is_boundary()) {
        return Err(usage("ρ fixes a boundary point, so the target is a line and --alpha does not apply"));
    }
    let res = if alpha == 1.0 {
        solve_equivariant(&mesh, &mut disc, &rho, None, &opts)
    } else {
        solve_harmonic(&mesh, &mut disc, &rho, TargetSpace::HyperbolicPlane { scale: alpha }, None, &opts)
    };
    let sol: HarmonicSolution = match res {
        Ok(s) => s,
        Err(HarmonicError::MaxIterations { best, .. }) => *best,
        Err(e) => return Err(e.into()),
    };
    let phi = hopf_differential(&sol.report.pullbacks);
    let report = HarmonicReport {
        energy: sol.report.total,
        iterations: sol.iterations,
        converged: sol.converged,
        gradient_norm: sol.report.gradient_norm,
        hopf_max: phi.coeffs.iter().zip(&mesh.conformal).map(|(c, a)| c.norm() / a).fold(0.0, f64::max),
        holomorphicity_residual: holomorphicity_residual(&phi, &mesh),
        faces: mesh.faces.len(),
    };
    write_mesh(&out.join("mesh.txt"), &mesh)?;
    write_map(&out.join("map.txt"), &mesh, &sol.map)?;
    write_iteration_log(&out.join("iterations.csv"), &sol.log)?;
    write_json_report(&out.join("harmonic.json"), "harmonic", &report)?;
    println!(
        "E {:.10}  iterations {}  converged {}  gradient {:.3e}  max|φ|/α {:.3e}",
        report.energy, report.iterations, report.converged, report.gradient_norm, report.hopf_max
    );
    Ok(if sol.converged { 0 } else { 1 })
}

#[derive(Serialize)]
struct PsiForwardReport {
    converged: bool,
    result: PsiForward,
}

#[derive(Serialize)]
struct PathRow {
    iter: usize,
    f: f64,
    e_j0: f64,
    e_rho: f64,
    hopf_mismatch: f64,
    coords: String,
}

fn coords_string(x: &FNCoords) -> String {
    x.to_vec().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn psi(out: &Path, args: &PsiArgs) -> Result<u8, CliError> {
    let cfg = args.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let mut opts = cfg.as_ref().map(ExperimentConfig::psi_options).unwrap_or_default();
    if let Some(e) = args.edge {
        check_edge(e)?;
        opts.target_edge = e;
    }
    let genus = cfg.as_ref().map(|c| c.genus);
    let rho = match (&args.rho, &cfg) {
        (Some(s), _) => load_rep(s, false, genus)?,
        (None, Some(c)) => c.rho()?.ok_or_else(|| usage("no ρ given (--rho or [rho] in the config)"))?,
        (None, None) => return Err(usage("no ρ given (--rho or [rho] in the config)")),
    };
    let cfg_init = cfg.as_ref().map(|c| c.fn_init()).transpose()?.flatten();
    if args.forward {
        let x = match &args.x {
            Some(v) => FNCoords::from_vec(v)?,
            None => cfg_init.ok_or_else(|| usage("--forward needs --x or fn_init in the config"))?,
        };
        let (converged, result) = match psi_forward(&x, &rho, &opts) {
            Ok(p) => (true, p),
            Err(PsiError::ResidualFloor { best, relative }) => {
                eprintln!("warning: forward solve stalled at relative residual {relative:.3e}");
                (false, *best)
            }
            Err(e) => return Err(e.into()),
        };
        println!("Ψ(X) = {}  (relative residual {:.3e}, {} iterations)", coords_string(&result.coords), result.relative, result.iterations);
        write_json_report(&out.join("psi_forward.json"), "psi-forward", &PsiForwardReport { converged, result })?;
        return Ok(if converged { 0 } else { 1 });
    }
    let j0 = match (&args.j0, &cfg) {
        (Some(s), _) => load_rep(s, false, genus)?,
        (None, Some(c)) => c.j()?.ok_or_else(|| usage("--inverse needs --j0 or [j] in the config"))?,
        (None, None) => return Err(usage("--inverse needs --j0 or [j] in the config")),
    };
    let init = match &args.init {
        Some(v) => FNCoords::from_vec(v)?,
        None => cfg_init.ok_or_else(|| usage("--inverse needs --init or fn_init in the config"))?,
    };
    let result: PsiResult = match minimize_F(&j0, &rho, &init, &opts) {
        Ok(r) => r,
        Err(PsiError::MaxIterations { best }) => *best,
        Err(e) => return Err(e.into()),
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let rows: Vec<PathRow> = result
        .path
        .iter()
        .enumerate()
        .map(|(iter, e)| PathRow { iter, f: e.f, e_j0: e.e_j0, e_rho: e.e_rho, hopf_mismatch: e.hopf_mismatch, coords: coords_string(&e.x) })
        .collect();
    write_csv_report(&out.join("psi_path.csv"), "psi-path", &rows)?;
    write_json_report(&out.join("psi_inverse.json"), "psi-inverse", &result)?;
    println!(
        "argmin {}  F {:.10}  |grad| {:.3e}  iterations {}  converged {}",
        coords_string(&result.argmin),
        result.f_min,
        result.grad_norm_at_exit,
        result.iterations,
        result.converged
    );
    Ok(if result.converged { 0 } else { 1 })
}

#[derive(Serialize)]
struct CheckRow<'a> {
    suite: &'a str,
    name: &'a str,
    passed: bool,
    value: f64,
    tolerance: f64,
    detail: &'a str,
}

fn verify(out: &Path, suite: &str, seed: u64, edge: f64, samples: usize, mesh: Option<&Path>) -> Result<u8, CliError> {
    check_edge(edge)?;
    let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse().map_err(usage)?] };
    let opts = VerifyOptions { seed, target_edge: edge, samples, psi: PsiOptions::default() };
    let mut all_passed = true;
    for (k, suite) in suites.into_iter().enumerate() {
        let mut report = run_suite(suite, &opts);
        if let (Some(p), 0) = (mesh, k) {
            report.checks.extend(check_mesh_file(p));
        }
        print!("{}", report.table());
        let rows: Vec<CheckRow> = report
            .checks
            .iter()
            .map(|c| CheckRow { suite: suite.name(), name: &c.name, passed: c.passed, value: c.value, tolerance: c.tolerance, detail: &c.detail })
            .collect();
        write_csv_report(&out.join(format!("verify_{suite}.csv")), "verify", &rows)?;
        write_json_report(&out.join(format!("verify_{suite}.json")), "verify", &report)?;
        all_passed &= report.passed();
    }
    Ok(if all_passed { 0 } else { 1 })
}

#[derive(Serialize)]
struct ContinuityCsvRow {
    step: usize,
    t: f64,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct ContinuityReport {
    lipschitz: ContinuityTable,
    minimizers: Option<Vec<ContinuityStep>>,
}

fn continuity(out: &Path, j: &str, rho: &str, steps: usize, lip: &LipArgs, init: Option<&[f64]>) -> Result<u8, CliError> {
    check_edge(lip.edge)?;
    if steps == 0 {
        return Err(usage("--steps must be positive"));
    }
    let j = load_rep(j, lip.allow_residual, None)?;
    let spec: RepSpec = rho.parse()?;
    if !matches!(spec, RepSpec::Elliptic { .. } | RepSpec::CommonAxis { .. } | RepSpec::Unipotent { .. }) {
        return Err(usage("continuity needs a scalable family: elliptic, common-axis or unipotent"));
    }
    let ts: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let path = ts.iter().map(|t| spec.scaled(*t).build(j.genus)).collect::<Result<Vec<_>, _>>()?;
    let mesh = mesh_from_rep(&j, lip.edge)?;
    let mut disc = Discretization::new(&mesh);
    let table = lip_continuity_probe(&j, &path, lip.radius, &mesh, &mut disc, &SolverOptions::default())?;
    let minimizers = match init {
        Some(x) => {
            let pairs: Vec<(SurfaceRep, SurfaceRep)> = path.iter().map(|r| (j.clone(), r.clone())).collect();
            let opts = PsiOptions { target_edge: lip.edge, ..PsiOptions::default() };
            Some(minimizer_continuity_experiment(&pairs, &FNCoords::from_vec(x)?, &opts)?)
        }
        None => None,
    };
    let rows: Vec<ContinuityCsvRow> = table.rows.iter().zip(&ts).map(|(r, t)| ContinuityCsvRow { step: r.step, t: *t, lower: r.lower, upper: r.upper }).collect();
    for r in &rows {
        println!("t {:.4}  lower {:.6}  upper {:.6}", r.t, r.lower, r.upper);
    }
    println!("max jumps: lower {:.3e}  upper {:.3e}", table.max_lower_jump, table.max_upper_jump);
    write_csv_report(&out.join("continuity.csv"), "continuity", &rows)?;
    write_json_report(&out.join("continuity.json"), "continuity", &ContinuityReport { lipschitz: table, minimizers })?;
    Ok(0)
}
