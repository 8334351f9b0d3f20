use super::GeomError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point x + iy of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self, GeomError> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(GeomError::NotInUpperHalfPlane(y));
        }
        Ok(Point { x, y })
    }

    pub fn i() -> Self {
        Point { x: 0.0, y: 1.0 }
    }

    pub fn from_complex(z: Complex64) -> Result<Self, GeomError> {
        Point::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Hyperboloid coordinates (t, X1, X2) with -t² + X1² + X2² = -1; i maps to (1, 0, 0).
    pub fn to_hyperboloid(self) -> [f64; 3] {
        let r2 = self.x * self.x + self.y * self.y;
        [
            (1.0 + r2) / (2.0 * self.y),
            self.x / self.y,
            (r2 - 1.0) / (2.0 * self.y),
        ]
    }

    pub fn from_hyperboloid(h: [f64; 3]) -> Self {
        let y = 1.0 / (h[0] - h[2]);
        Point { x: h[1] * y, y }
    }

    /// Coordinates in the Poincaré disk sending i to the origin.
    pub fn to_disk(self) -> Complex64 {
        let z = self.to_complex();
        (z - Complex64::i()) / (z + Complex64::i())
    }

    pub fn from_disk(w: Complex64) -> Result<Self, GeomError> {
        let z = Complex64::i() * (Complex64::new(1.0, 0.0) + w) / (Complex64::new(1.0, 0.0) - w);
        Point::new(z.re, z.im)
    }
}

/// Minkowski form -a0 b0 + a1 b1 + a2 b2.
pub(crate) fn minkowski(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Signed area of the geodesic triangle (a, b, c); positive when the vertices
/// run counter-clockwise.
pub fn signed_triangle_area(a: Point, b: Point, c: Point) -> f64 {
    let (p, q, r) = (a.to_hyperboloid(), b.to_hyperboloid(), c.to_hyperboloid());
    let det = p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0])
        + p[2] * (q[0] * r[1] - q[1] * r[0]);
    let den = 1.0 - minkowski(&p, &q) - minkowski(&q, &r) - minkowski(&r, &p);
    2.0 * det.atan2(den)
}

/// A point of ∂ℍ² = ℝ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    pub fn approx_eq(self, other: BoundaryPoint, tol: f64) -> bool {
        match (self, other) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
                (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
            }
            (BoundaryPoint::Finite(a), BoundaryPoint::Infinity)
            | (BoundaryPoint::Infinity, BoundaryPoint::Finite(a)) => a.abs() > 1.0 / tol,
        }
    }

    /// Point on the unit circle of the disk model.
    pub fn to_disk(self) -> Complex64 {
        match self {
            BoundaryPoint::Infinity => Complex64::new(1.0, 0.0),
            BoundaryPoint::Finite(p) => {
                let z = Complex64::new(p, 0.0);
                (z - Complex64::i()) / (z + Complex64::i())
            }
        }
    }
}

/// Hyperbolic distance, computed through sinh(d/2) for accuracy at short range.
pub fn dist(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let s = (dx * dx + dy * dy).sqrt() / (2.0 * (p.y * q.y).sqrt());
    2.0 * s.asinh()
}

/// Distance from `x` to the geodesic with endpoints `p`, `q`.
pub fn dist_to_geodesic(x: Point, p: BoundaryPoint, q: BoundaryPoint) -> f64 {
    // move p to 0 and q to ∞, then sinh r = |Re z| / Im z
    let z = x.to_complex();
    let w = match (p, q) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Infinity) => z - a,
        (BoundaryPoint::Infinity, BoundaryPoint::Finite(b)) => -1.0 / (z - b),
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => (z - a) / (z - b),
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => return f64::NAN,
    };
    (w.re.abs() / w.im.abs()).asinh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_on_imaginary_axis() {
        let d = dist(Point::i(), Point::new(0.0, 5.0_f64.exp()).unwrap());
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hyperboloid_round_trip() {
        let p = Point::new(-0.7, 0.3).unwrap();
        let h = p.to_hyperboloid();
        assert!((minkowski(&h, &h) + 1.0).abs() < 1e-12);
        let q = Point::from_hyperboloid(h);
        assert!((p.x - q.x).abs() < 1e-14 && (p.y - q.y).abs() < 1e-14);
        let w = p.to_disk();
        let r = Point::from_disk(w).unwrap();
        assert!((p.x - r.x).abs() < 1e-13 && (p.y - r.y).abs() < 1e-13);
    }

    #[test]
    fn distance_matches_minkowski() {
        let p = Point::new(0.4, 2.0).unwrap();
        let q = Point::new(-1.1, 0.25).unwrap();
        let c = -minkowski(&p.to_hyperboloid(), &q.to_hyperboloid());
        assert!((dist(p, q) - c.acosh()).abs() < 1e-12);
    }

    #[test]
    fn signed_area_matches_angle_defect() {
        use crate::hyperbolic::Triangle;
        let (a, b, c) = (Point::i(), Point::new(1.5, 0.7).unwrap(), Point::new(0.2, 3.0).unwrap());
        let t = Triangle { vertices: [a, b, c] };
        let area = t.area().unwrap();
        assert!((signed_triangle_area(a, b, c) - area).abs() < 1e-12);
        assert!((signed_triangle_area(a, c, b) + area).abs() < 1e-12);
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(Point::new(0.0, -1.0).is_err());
        assert!(Point::new(0.0, 0.0).is_err());
    }

    #[test]
    fn geodesic_distance() {
        let x = Point::new(1.0, 1.0).unwrap();
        let r = dist_to_geodesic(x, BoundaryPoint::Finite(0.0), BoundaryPoint::Infinity);
        assert!((r - 1.0_f64.asinh()).abs() < 1e-14);
        // unit circle geodesic through i
        let r = dist_to_geodesic(Point::i(), BoundaryPoint::Finite(-1.0), BoundaryPoint::Finite(1.0));
        assert!(r.abs() < 1e-14);
    }
}
