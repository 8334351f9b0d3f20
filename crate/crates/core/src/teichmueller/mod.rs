//! Teichmüller data: Fenchel–Nielsen coordinates, Dirichlet domains,
//! equivariant triangle meshes and quadratic differentials on them.

mod dirichlet;
mod fenchel_nielsen;
mod locate;
mod mesh;
mod quad_diff;

pub use dirichlet::{dirichlet_domain, DirichletDomain, GroupElement};
pub use locate::{Located, Locator};
pub use fenchel_nielsen::{fn_to_holonomy, pants_curve_words, FNCoords, MIN_LENGTH};
pub use mesh::{build_mesh, centroid, mesh_from_domain, mesh_from_rep, EdgePairing, Mesh};
pub use quad_diff::{wp_norm, wp_pair, QuadDiff};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TeichError {
    #[error("Fenchel–Nielsen data has {lengths} lengths and {twists} twists; genus {genus} needs {need}")]
    CoordinateCount { genus: usize, lengths: usize, twists: usize, need: usize },
    #[error("pants curve length {0} is below the minimum")]
    DegenerateLength(f64),
    #[error("no pants decomposition table for genus {0}")]
    UnsupportedGenus(usize),
    #[error("Dirichlet domain construction failed: {0}")]
    DomainConstructionFailed(String),
    #[error("mesh is invalid: {0}")]
    InvalidMesh(String),
    #[error("quadratic differential has {got} coefficients, mesh has {faces} faces")]
    IndexMismatch { got: usize, faces: usize },
    #[error(transparent)]
    Surface(#[from] crate::surface::SurfaceError),
}
