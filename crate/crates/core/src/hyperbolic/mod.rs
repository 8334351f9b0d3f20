//! Upper half-plane model of ℍ²: points, isometries, Busemann functions and
//! comparison angles.

mod angles;
mod busemann;
mod moebius;
mod point;

pub use angles::{angle_at_vertex, boundary_angle, comparison_angle, Triangle};
pub use busemann::{busemann, horoflow};
pub use moebius::{geodesic_chart, IsometryKind, MoebiusMap, CLASSIFY_TOL};
pub use point::{dist, dist_to_geodesic, signed_triangle_area, BoundaryPoint, Point};
pub(crate) use point::minkowski;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point is not in the upper half-plane (imaginary part {0})")]
    NotInUpperHalfPlane(f64),
    #[error("matrix determinant {0} is not positive")]
    NonPositiveDeterminant(f64),
    #[error("degenerate triangle with sides ({0}, {1}, {2})")]
    DegenerateTriangle(f64, f64, f64),
    #[error("coincident points")]
    CoincidentPoints,
    #[error("isometry is not hyperbolic")]
    NotHyperbolic,
}
