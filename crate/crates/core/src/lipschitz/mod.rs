//! Two-sided bounds on the minimal Lipschitz constant of (j, ρ)-equivariant
//! maps ℍ² → ℍ², domination verdicts and the Thurston asymmetric distance.
//!
//! The lower bound is a length-spectrum ratio over a word ball. The upper bound
//! is the largest per-face stretch of a discrete equivariant harmonic map.

use crate::harmonic::{
    solve_equivariant, solve_harmonic, solve_line, Discretization, EquivariantMap, HarmonicError, HarmonicSolution,
    SolverOptions, Sym2, TargetSpace,
};
use crate::surface::{detect_parabolic, euler_class, ParabolicData, SurfaceError, SurfaceRep, Word};
use crate::teichmueller::Mesh;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower bounds at or above 1 - NOT_DOMINATED_SLACK count as 1.
pub const NOT_DOMINATED_SLACK: f64 = 1e-9;
/// Upper bounds within this margin of 1 give no verdict.
pub const VERDICT_MARGIN: f64 = 1e-3;
pub const DEFAULT_RADIUS: usize = 6;

#[derive(Debug, Error)]
pub enum LipError {
    #[error("source representation is not Fuchsian (Euler class {euler}, expected ±{expected})")]
    NotFuchsian { euler: i64, expected: i64 },
    #[error("mesh holonomy does not match the source representation")]
    MeshMismatch,
    #[error("scale must be at least 1, got {0}")]
    BadScale(f64),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipEstimate {
    pub lower: f64,
    pub upper: f64,
    pub witness_word: Option<Word>,
    #[serde(skip)]
    pub witness_map: Option<Box<EquivariantMap>>,
    pub ball_radius: usize,
    pub scale: f64,
    /// Longest mesh edge of the mesh carrying the upper bound.
    pub mesh_edge: f64,
    /// Whether the map behind the upper bound is a converged harmonic map.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DominationVerdict {
    StrictlyDominated { margin: f64 },
    NotDominated { witness_word: Word },
    Inconclusive { lower: f64, upper: f64 },
}

impl DominationVerdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            DominationVerdict::StrictlyDominated { .. } => 0,
            DominationVerdict::NotDominated { .. } => 1,
            DominationVerdict::Inconclusive { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DominationVerdict::StrictlyDominated { .. } => "StrictlyDominated",
            DominationVerdict::NotDominated { .. } => "NotDominated",
            DominationVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

pub fn require_fuchsian(j: &SurfaceRep) -> Result<(), LipError> {
    let expected = 2 * j.genus as i64 - 2;
    let euler = euler_class(j)?;
    if euler.abs() != expected {
        return Err(LipError::NotFuchsian { euler, expected });
    }
    Ok(())
}

/// max l(ρ(w)) / l(j(w)) over reduced words of length ≤ radius, with the first
/// word attaining it.
pub fn lip_lower(j: &SurfaceRep, rho: &SurfaceRep, radius: usize) -> Result<(f64, Option<Word>), LipError> {
    require_fuchsian(j)?;
    let mut best = -1.0_f64;
    let mut witness = None;
    j.group().for_each_word(radius, &[&j.images, &rho.images], |w, prod| {
        let lj = prod[0].translation_length();
        if lj < 1e-6 {
            return;
        }
        let r = prod[1].translation_length() / lj;
        if r > best {
            best = r;
            witness = Some(w.to_vec());
        }
    });
    Ok((best.max(0.0), witness.map(Word::from_letters)))
}

/// Square root of the largest eigenvalue of (αI)⁻¹ h.
pub fn stretch(h: &Sym2, alpha: f64) -> f64 {
    (h.eigenvalues().0.max(0.0) / alpha).sqrt()
}

/// Largest per-face stretch of a solved map.
pub fn max_stretch(mesh: &Mesh, sol: &HarmonicSolution) -> f64 {
    sol.report.pullbacks.iter().zip(&mesh.conformal).map(|(h, a)| stretch(h, *a)).fold(0.0, f64::max)
}

fn check_mesh(j: &SurfaceRep, mesh: &Mesh) -> Result<(), LipError> {
    if j.genus != mesh.genus
        || j.images.iter().zip(&mesh.holonomy.images).any(|(a, b)| a.distance(b) > 1e-7 * a.entries().iter().fold(1.0_f64, |m, v| m.max(v.abs())))
    {
        return Err(LipError::MeshMismatch);
    }
    Ok(())
}

fn accept_best(r: Result<HarmonicSolution, HarmonicError>) -> Result<HarmonicSolution, LipError> {
    match r {
        Ok(s) => Ok(s),
        // any equivariant map bounds Lip from above, converged or not
        Err(HarmonicError::MaxIterations { best, .. }) => Ok(*best),
        Err(e) => Err(e.into()),
    }
}

/// Max stretch of the equivariant harmonic map for ρ on a mesh built from j.
pub fn lip_upper(
    j: &SurfaceRep,
    rho: &SurfaceRep,
    mesh: &Mesh,
    disc: &mut Discretization,
    target: TargetSpace,
    opts: &SolverOptions,
) -> Result<(f64, HarmonicSolution), LipError> {
    check_mesh(j, mesh)?;
    let sol = match target {
        TargetSpace::HyperbolicPlane { scale } if scale == 1.0 => accept_best(solve_equivariant(mesh, disc, rho, None, opts))?,
        TargetSpace::HyperbolicPlane { .. } => match detect_parabolic(rho, 1e-8) {
            Some(d) if d.is_boundary() => {
                let s = solve_line(mesh, disc, rho, &d)?;
                // line maps are unaffected by the plane scale except through c
                let scaled = scale_solution(s, target);
                return Ok((max_stretch(mesh, &scaled), scaled));
            }
            _ => accept_best(solve_harmonic(mesh, disc, rho, target, None, opts))?,
        },
        TargetSpace::RealLine => accept_best(solve_harmonic(mesh, disc, rho, target, None, opts))?,
    };
    Ok((max_stretch(mesh, &sol), sol))
}

fn scale_solution(mut s: HarmonicSolution, target: TargetSpace) -> HarmonicSolution {
    let f = target.energy_factor();
    for h in &mut s.report.pullbacks {
        *h = h.scale(f);
    }
    for d in &mut s.report.density {
        *d *= f;
    }
    s.report.total *= f;
    s
}

/// Both bounds at unit scale.
pub fn lip_estimate(
    j: &SurfaceRep,
    rho: &SurfaceRep,
    radius: usize,
    mesh: &Mesh,
    disc: &mut Discretization,
    opts: &SolverOptions,
) -> Result<LipEstimate, LipError> {
    let (lower, witness) = lip_lower(j, rho, radius)?;
    let (upper, sol) = lip_upper(j, rho, mesh, disc, TargetSpace::plane(), opts)?;
    Ok(LipEstimate {
        lower,
        upper,
        witness_word: witness,
        converged: sol.converged,
        witness_map: Some(Box::new(sol.map)),
        ball_radius: radius,
        scale: 1.0,
        mesh_edge: mesh.max_edge_length(),
    })
}

pub fn verdict(est: &LipEstimate) -> DominationVerdict {
    if est.lower >= 1.0 - NOT_DOMINATED_SLACK {
        if let Some(w) = &est.witness_word {
            return DominationVerdict::NotDominated { witness_word: w.clone() };
        }
    }
    if est.upper < 1.0 - VERDICT_MARGIN {
        return DominationVerdict::StrictlyDominated { margin: 1.0 - est.upper };
    }
    DominationVerdict::Inconclusive { lower: est.lower, upper: est.upper }
}

pub fn check_domination(
    j: &SurfaceRep,
    rho: &SurfaceRep,
    radius: usize,
    mesh: &Mesh,
    disc: &mut Discretization,
    opts: &SolverOptions,
) -> Result<(DominationVerdict, LipEstimate), LipError> {
    let est = lip_estimate(j, rho, radius, mesh, disc, opts)?;
    Ok((verdict(&est), est))
}

/// (ln lower, ln upper) bracketing d_Th(j, j') = ln Lip(j, j').
pub fn thurston_distance(
    j: &SurfaceRep,
    j2: &SurfaceRep,
    radius: usize,
    mesh: &Mesh,
    disc: &mut Discretization,
    opts: &SolverOptions,
) -> Result<(f64, f64), LipError> {
    require_fuchsian(j2)?;
    let est = lip_estimate(j, j2, radius, mesh, disc, opts)?;
    Ok((est.lower.ln(), est.upper.ln()))
}

/// Bounds for the target metric g/α²: both divided by α.
pub fn scaled_lip(est: &LipEstimate, alpha: f64) -> Result<LipEstimate, LipError> {
    if !(alpha >= 1.0) {
        return Err(LipError::BadScale(alpha));
    }
    Ok(LipEstimate { lower: est.lower / alpha, upper: est.upper / alpha, scale: est.scale * alpha, ..est.clone() })
}

/// Bounds on Lip(j, m) for a real morphism m: max |m(w)|/l(j(w)) and the
/// largest gradient of the m-equivariant harmonic function.
pub fn lip_parabolic(
    j: &SurfaceRep,
    data: &ParabolicData,
    mesh: &Mesh,
    disc: &mut Discretization,
    radius: usize,
) -> Result<LipEstimate, LipError> {
    require_fuchsian(j)?;
    check_mesh(j, mesh)?;
    let m = &data.morphism;
    let mut best = -1.0_f64;
    let mut witness = None;
    let mut sums = vec![0.0];
    j.group().for_each_word(radius, &[&j.images], |w, prod| {
        sums.truncate(w.len());
        let l = w[w.len() - 1];
        let s = sums[w.len() - 1] + if l.inv { -m[l.gen as usize] } else { m[l.gen as usize] };
        sums.push(s);
        let lj = prod[0].translation_length();
        if lj < 1e-6 {
            return;
        }
        let r = s.abs() / lj;
        if r > best {
            best = r;
            witness = Some(w.to_vec());
        }
    });
    let rep = mesh.holonomy.clone();
    let sol = solve_line(mesh, disc, &rep, data)?;
    Ok(LipEstimate {
        lower: best.max(0.0),
        upper: max_stretch(mesh, &sol),
        witness_word: witness.map(Word::from_letters),
        converged: true,
        witness_map: Some(Box::new(sol.map)),
        ball_radius: radius,
        scale: 1.0,
        mesh_edge: mesh.max_edge_length(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub step: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    pub max_lower_jump: f64,
    pub max_upper_jump: f64,
}

/// Bounds along a path of representations, with the largest step-to-step jumps.
pub fn lip_continuity_probe(
    j: &SurfaceRep,
    path: &[SurfaceRep],
    radius: usize,
    mesh: &Mesh,
    disc: &mut Discretization,
    opts: &SolverOptions,
) -> Result<ContinuityTable, LipError> {
    let mut rows = Vec::with_capacity(path.len());
    for (step, rho) in path.iter().enumerate() {
        let est = lip_estimate(j, rho, radius, mesh, disc, opts)?;
        rows.push(ContinuityRow { step, lower: est.lower, upper: est.upper });
    }
    let jump = |f: fn(&ContinuityRow) -> f64| rows.windows(2).map(|w| (f(&w[1]) - f(&w[0])).abs()).fold(0.0, f64::max);
    let max_lower_jump = jump(|r| r.lower);
    let max_upper_jump = jump(|r| r.upper);
    Ok(ContinuityTable { rows, max_lower_jump, max_upper_jump })
}
