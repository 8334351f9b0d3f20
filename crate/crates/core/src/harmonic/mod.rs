//! Discrete equivariant harmonic maps from a meshed surface to ℍ² (possibly
//! rescaled) or to ℝ, their energies and Hopf differentials.

mod face;
mod hopf;
mod precond;
mod solver;

pub use face::{face_map_jacobian, FaceFrame};
pub use hopf::{dbar_estimates, energy_density, hopf_coefficient, hopf_differential, holomorphicity_residual, pullback_metric, reconstruction_residual, Sym2};
pub use solver::{solve_equivariant, solve_harmonic, solve_line, total_energy, Discretization, SolverOptions};

use crate::hyperbolic::{MoebiusMap, Point};
use crate::surface::SurfaceRep;
use crate::teichmueller::Mesh;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum HarmonicError {
    #[error("representation fixes a boundary point; use the line-valued solver")]
    ParabolicTarget,
    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    MaxIterations { iterations: usize, gradient_norm: f64, best: Box<HarmonicSolution> },
    #[error("metric is singular")]
    SingularMetric,
    #[error("preconditioner factorisation failed")]
    Factorisation,
    #[error("initial values have {got} entries, expected {expected}")]
    BadInit { got: usize, expected: usize },
    #[error("target scale must be at least 1, got {0}")]
    BadScale(f64),
    #[error(transparent)]
    Teich(#[from] crate::teichmueller::TeichError),
}

/// Target of the maps: ℍ² with metric g_P/α², or the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TargetSpace {
    HyperbolicPlane { scale: f64 },
    RealLine,
}

impl TargetSpace {
    pub fn plane() -> Self {
        TargetSpace::HyperbolicPlane { scale: 1.0 }
    }

    /// Factor by which energies and pullbacks shrink relative to the unit-scale target.
    pub fn energy_factor(&self) -> f64 {
        match self {
            TargetSpace::HyperbolicPlane { scale } => 1.0 / (scale * scale),
            TargetSpace::RealLine => 1.0,
        }
    }
}

/// Values on vertex classes. Plane values at a mesh vertex v are ρ(W_v)·u;
/// line values are u + m(W_v).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MapValues {
    Plane(Vec<Point>),
    Line(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivariantMap {
    pub target: TargetSpace,
    pub rep: SurfaceRep,
    pub values: MapValues,
    /// Real morphism m on the generators (line maps).
    pub morphism: Option<Vec<f64>>,
    /// For line maps of a representation preserving a geodesic: an isometry h
    /// such that the geodesic is h(iℝ₊) and t ↦ h(i e^{-t}) realises the map.
    pub axis: Option<MoebiusMap>,
}

impl EquivariantMap {
    pub fn plane_values(&self, mesh: &Mesh) -> Option<Vec<Point>> {
        match &self.values {
            MapValues::Plane(u) => {
                let mats = mesh.vertex_matrices(&self.rep);
                Some((0..mesh.vertices.len()).map(|v| mats[v].apply(u[mesh.class_of[v]])).collect())
            }
            MapValues::Line(_) => {
                let h = self.axis?;
                let t = self.line_values(mesh)?;
                Some(t.iter().map(|s| h.apply(Point { x: 0.0, y: (-s).exp() })).collect())
            }
        }
    }

    pub fn line_values(&self, mesh: &Mesh) -> Option<Vec<f64>> {
        match &self.values {
            MapValues::Line(u) => {
                let m = self.morphism.as_ref()?;
                Some((0..mesh.vertices.len()).map(|v| u[mesh.class_of[v]] + word_morphism(m, &mesh.vertex_word[v])).collect())
            }
            MapValues::Plane(_) => None,
        }
    }
}

pub(crate) fn word_morphism(m: &[f64], w: &crate::surface::Word) -> f64 {
    w.letters().iter().map(|l| if l.inv { -m[l.gen as usize] } else { m[l.gen as usize] }).sum()
}

/// Per-face energies and pullback metrics of a map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Face energy divided by face area.
    pub density: Vec<f64>,
    pub total: f64,
    /// Pullback metric at each face centroid in the z-chart.
    pub pullbacks: Vec<Sym2>,
    /// Riemannian gradient norm divided by max(E, 1e-6 · area).
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicSolution {
    pub map: EquivariantMap,
    pub report: EnergyReport,
    pub iterations: usize,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    pub log: Vec<IterationRecord>,
}

/// One row of the solver's iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    pub gradient_norm: f64,
    pub step: f64,
}
