//! Numerical toolkit for equivariant maps between hyperbolic surfaces.
//!
//! The crate is organised bottom-up: plane geometry, surface groups and their
//! representations, Teichmüller data and meshes, discrete harmonic maps,
//! Lipschitz domination estimates and the Ψ machinery built on top of them.

pub mod harmonic;
pub mod hyperbolic;
pub mod io;
pub mod lipschitz;
pub mod psi;
pub mod surface;
pub mod teichmueller;
pub mod verify;

pub use hyperbolic::{BoundaryPoint, IsometryKind, MoebiusMap, Point};
pub use surface::{SurfaceGroup, SurfaceRep, Word};
