use super::{dist, BoundaryPoint, GeomError, Point};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Geodesic triangle given by its vertices.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Triangle {
    pub vertices: [Point; 3],
}

impl Triangle {
    pub fn side_lengths(&self) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        [dist(b, c), dist(c, a), dist(a, b)]
    }

    /// Interior angles at the three vertices.
    pub fn angles(&self) -> Result<[f64; 3], GeomError> {
        let [la, lb, lc] = self.side_lengths();
        Ok([
            comparison_angle(la, lb, lc)?,
            comparison_angle(lb, lc, la)?,
            comparison_angle(lc, la, lb)?,
        ])
    }

    pub fn area(&self) -> Result<f64, GeomError> {
        let a = self.angles()?;
        Ok(std::f64::consts::PI - a.iter().sum::<f64>())
    }
}

const SIDE_TOL: f64 = 1e-9;

/// Angle opposite the side `l_opp` in the hyperbolic triangle with sides
/// (l_opp, l1, l2), via the half-angle tangent formula.
pub fn comparison_angle(l_opp: f64, l1: f64, l2: f64) -> Result<f64, GeomError> {
    let err = || GeomError::DegenerateTriangle(l_opp, l1, l2);
    if !(l1 > 0.0 && l2 > 0.0) || l_opp < 0.0 {
        return Err(err());
    }
    let s = 0.5 * (l_opp + l1 + l2);
    let (s1, s2, so) = (s - l1, s - l2, s - l_opp);
    let tol = SIDE_TOL * (1.0 + s);
    if s1 < -tol || s2 < -tol || so < -tol {
        return Err(err());
    }
    let num = (s1.max(0.0).sinh() * s2.max(0.0).sinh()).sqrt();
    let den = (s.sinh() * so.max(0.0).sinh()).sqrt();
    Ok(2.0 * num.atan2(den))
}

/// Angle at x of the triangle (y, x, z). Equal to the comparison angle of the
/// side lengths; read off from tangent directions in the disk chart centred at
/// x, which avoids the cancellation of the side-length formula.
pub fn angle_at_vertex(y: Point, x: Point, z: Point) -> Result<f64, GeomError> {
    if dist(x, y) < 1e-14 || dist(x, z) < 1e-14 {
        return Err(GeomError::CoincidentPoints);
    }
    let dir = |p: Point| {
        let t = Complex64::new((p.x - x.x) / x.y, p.y / x.y);
        (t - Complex64::i()) / (t + Complex64::i())
    };
    Ok((dir(y) * dir(z).conj()).arg().abs())
}

/// Angle at x between the geodesic rays toward the boundary points p and q.
pub fn boundary_angle(p: BoundaryPoint, x: Point, q: BoundaryPoint) -> Result<f64, GeomError> {
    if p.approx_eq(q, 1e-14) {
        return Ok(0.0);
    }
    // move x to i; rays from the disk centre are straight
    let move_to_i = |b: BoundaryPoint| match b {
        BoundaryPoint::Infinity => BoundaryPoint::Infinity,
        BoundaryPoint::Finite(v) => BoundaryPoint::Finite((v - x.x) / x.y),
    };
    let u = move_to_i(p).to_disk();
    let v = move_to_i(q).to_disk();
    Ok((u / v).arg().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::horoflow;
    use std::f64::consts::PI;

    #[test]
    fn equilateral_triangle() {
        let c: f64 = 1.0_f64.cosh();
        let expected = (c / (c + 1.0)).acos();
        assert!((comparison_angle(1.0, 1.0, 1.0).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn flat_and_degenerate() {
        assert!((comparison_angle(3.0, 1.0, 2.0).unwrap() - PI).abs() < 1e-7);
        assert!(comparison_angle(4.0, 1.0, 2.0).is_err());
        assert!(comparison_angle(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn matches_law_of_cosines() {
        let (a, b, c) = (1.3_f64, 0.8_f64, 1.1_f64);
        let cosg = (b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh());
        assert!((comparison_angle(a, b, c).unwrap() - cosg.acos()).abs() < 1e-12);
    }

    #[test]
    fn vertex_angle_matches_side_lengths() {
        let pts = [Point { x: 0.3, y: 0.7 }, Point { x: -1.2, y: 2.5 }, Point { x: 2.0, y: 0.4 }, Point { x: 0.1, y: 5.0 }];
        for &x in &pts {
            for &y in &pts {
                for &z in &pts {
                    if x == y || x == z || y == z {
                        continue;
                    }
                    let a = angle_at_vertex(y, x, z).unwrap();
                    let b = comparison_angle(dist(y, z), dist(x, y), dist(x, z)).unwrap();
                    assert!((a - b).abs() < 1e-10, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn boundary_angles() {
        let i = Point::i();
        // -1 and 1 are the ends of a geodesic through i
        let a = boundary_angle(BoundaryPoint::Finite(-1.0), i, BoundaryPoint::Finite(1.0)).unwrap();
        assert!((a - PI).abs() < 1e-12);
        let a = boundary_angle(BoundaryPoint::Finite(0.0), i, BoundaryPoint::Finite(1.0)).unwrap();
        assert!((a - PI / 2.0).abs() < 1e-12);
        // oracle: vertex angle at far points of the rays
        let x = Point::new(0.4, 0.6).unwrap();
        let (p, q) = (BoundaryPoint::Finite(-2.0), BoundaryPoint::Infinity);
        let far = angle_at_vertex(horoflow(p, 20.0, x), x, horoflow(q, 20.0, x)).unwrap();
        assert!((boundary_angle(p, x, q).unwrap() - far).abs() < 1e-6);
    }

    #[test]
    fn triangle_area_positive() {
        let t = Triangle {
            vertices: [Point::i(), Point::new(1.0, 1.0).unwrap(), Point::new(0.5, 2.0).unwrap()],
        };
        let area = t.area().unwrap();
        assert!(area > 0.0 && area < PI);
    }
}
