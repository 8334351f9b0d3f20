use super::{BoundaryPoint, GeomError, Point};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

/// Default tolerance for trace classification and identity tests.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsometryKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Element of PSL(2,ℝ) stored as a determinant-one matrix whose first
/// nonzero entry (row-major) is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MoebiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeomError> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(GeomError::NonPositiveDeterminant(det));
        }
        let s = det.sqrt();
        Ok(Self::raw(a / s, b / s, c / s, d / s).normalized_sign())
    }

    pub(crate) fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        MoebiusMap { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::raw(1.0, 0.0, 0.0, 1.0)
    }

    /// diag(e^{t/2}, e^{-t/2}): translation by t along the imaginary axis.
    pub fn diagonal(t: f64) -> Self {
        Self::raw((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp())
    }

    /// Rotation by angle θ about i.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::raw(c, s, -s, c).normalized_sign()
    }

    fn normalized_sign(self) -> Self {
        let first = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|v| *v != 0.0)
            .unwrap_or(1.0);
        if first < 0.0 {
            Self::raw(-self.a, -self.b, -self.c, -self.d)
        } else {
            self
        }
    }

    /// Re-impose det = 1 after long products.
    pub fn renormalized(self) -> Self {
        let det = self.det();
        if det > 0.0 {
            let s = det.sqrt();
            Self::raw(self.a / s, self.b / s, self.c / s, self.d / s).normalized_sign()
        } else {
            self
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a).normalized_sign()
    }

    /// Product without sign normalisation (keeps an SL(2,ℝ) lift consistent).
    pub fn mul_sl2(&self, o: &Self) -> Self {
        Self::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Inverse without sign normalisation.
    pub fn inverse_sl2(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> Self {
        Self::raw(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn apply(&self, p: Point) -> Point {
        let z = p.to_complex();
        let w = (self.a * z + self.b) / (self.c * z + self.d);
        // Im w = Im z / |cz+d|² exactly; recompute for stability
        let den = (self.c * z + self.d).norm_sqr();
        Point { x: w.re, y: p.y / den }
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Complex derivative 1/(cz+d)².
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let w = self.c * z + self.d;
        1.0 / (w * w)
    }

    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        match p {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Frobenius distance in PSL(2,ℝ): minimum over the two signs.
    pub fn distance(&self, o: &Self) -> f64 {
        let p = [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d];
        let m = [self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d];
        let n = |v: [f64; 4]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        n(p).min(n(m))
    }

    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        self.distance(o) <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.distance(&Self::identity()) <= tol
    }

    pub fn classify(&self, tol: f64) -> IsometryKind {
        if self.is_identity(tol) {
            return IsometryKind::Identity;
        }
        let t = self.trace().abs();
        if t < 2.0 - tol {
            IsometryKind::Elliptic
        } else if t <= 2.0 + tol {
            IsometryKind::Parabolic
        } else {
            IsometryKind::Hyperbolic
        }
    }

    /// 2 acosh(|tr|/2) for hyperbolic elements, 0 otherwise. Traces within
    /// rounding of ±2 count as non-hyperbolic.
    pub fn translation_length(&self) -> f64 {
        let t = self.trace().abs() / 2.0;
        let norm2 = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        if t - 1.0 > 4.0 * f64::EPSILON * norm2 {
            2.0 * t.acosh()
        } else {
            0.0
        }
    }

    /// Fixed points on the boundary as (repelling, attracting).
    pub fn axis(&self) -> Result<(BoundaryPoint, BoundaryPoint), GeomError> {
        if self.classify(CLASSIFY_TOL) != IsometryKind::Hyperbolic {
            return Err(GeomError::NotHyperbolic);
        }
        let scale = self.entries().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let disc = ((a + d) * (a + d) - 4.0).max(0.0).sqrt();
        let (p1, p2) = if c.abs() <= 1e-15 * scale {
            // fixes ∞; the other point solves (a-d) z = -b
            (BoundaryPoint::Infinity, BoundaryPoint::Finite(b / (d - a)))
        } else {
            // roots of c z² + (d - a) z - b = 0
            let bb = d - a;
            let sgn = if bb >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (bb + sgn * disc);
            let r1 = if q != 0.0 { -b / q } else { (a - d) / (2.0 * c) };
            let r2 = q / c;
            (BoundaryPoint::Finite(r1), BoundaryPoint::Finite(r2))
        };
        let attracting = |p: BoundaryPoint| match p {
            BoundaryPoint::Infinity => a.abs() > d.abs(),
            BoundaryPoint::Finite(z) => (c * z + d).abs() > 1.0,
        };
        if attracting(p1) {
            Ok((p2, p1))
        } else {
            Ok((p1, p2))
        }
    }

    /// Finite or infinite fixed points of a parabolic element.
    pub fn parabolic_fixed_point(&self) -> Option<BoundaryPoint> {
        if self.classify(CLASSIFY_TOL) != IsometryKind::Parabolic {
            return None;
        }
        let scale = self.entries().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if self.c.abs() <= 1e-15 * scale {
            Some(BoundaryPoint::Infinity)
        } else {
            Some(BoundaryPoint::Finite((self.a - self.d) / (2.0 * self.c)))
        }
    }

    /// Interior fixed point of an elliptic element.
    pub fn elliptic_fixed_point(&self) -> Option<Point> {
        if self.classify(CLASSIFY_TOL) != IsometryKind::Elliptic {
            return None;
        }
        // c ≠ 0 for elliptic elements
        let (a, c, d) = (self.a, self.c, self.d);
        let disc = (4.0 - (a + d) * (a + d)).sqrt();
        let z = Complex64::new(a - d, disc) / (2.0 * c);
        let z = if z.im < 0.0 { z.conj() } else { z };
        Point::new(z.re, z.im).ok()
    }

    /// Isometry taking i to p with positive derivative at i.
    pub fn moving_i_to(p: Point) -> Self {
        let s = p.y.sqrt();
        Self::raw(s, p.x / s, 0.0, 1.0 / s)
    }

    /// Isometry sending the boundary point p to ∞.
    pub fn sending_to_infinity(p: BoundaryPoint) -> Self {
        match p {
            BoundaryPoint::Infinity => Self::identity(),
            BoundaryPoint::Finite(x) => Self::raw(0.0, -1.0, 1.0, -x).normalized_sign(),
        }
    }
}

/// Isometry h with h(∞) = p and h(0) = q, so h maps the imaginary axis onto the
/// geodesic from q to p.
pub fn geodesic_chart(p: BoundaryPoint, q: BoundaryPoint) -> MoebiusMap {
    match (p, q) {
        (BoundaryPoint::Infinity, BoundaryPoint::Finite(b)) => MoebiusMap::raw(1.0, b, 0.0, 1.0),
        (BoundaryPoint::Finite(a), BoundaryPoint::Infinity) => MoebiusMap::raw(a, -1.0, 1.0, 0.0),
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
            let c = if a > b { 1.0 } else { -1.0 };
            MoebiusMap::new(a, b * c, 1.0, c).expect("distinct endpoints")
        }
        _ => MoebiusMap::identity(),
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;
    fn mul(self, o: MoebiusMap) -> MoebiusMap {
        self.mul_sl2(&o).normalized_sign()
    }
}

impl Mul<Point> for MoebiusMap {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        self.apply(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::dist;

    #[test]
    fn normalises_determinant_and_sign() {
        let g = MoebiusMap::new(-2.0, 0.0, 0.0, -2.0).unwrap();
        assert_eq!(g.entries(), [1.0, 0.0, 0.0, 1.0]);
        assert!(MoebiusMap::new(1.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn translation_length_of_diagonal() {
        for k in 1..20 {
            let l = 0.37 * k as f64;
            assert!((MoebiusMap::diagonal(l).translation_length() - l).abs() < 1e-10);
        }
    }

    #[test]
    fn classification() {
        assert_eq!(MoebiusMap::identity().classify(CLASSIFY_TOL), IsometryKind::Identity);
        assert_eq!(MoebiusMap::rotation(0.3).classify(CLASSIFY_TOL), IsometryKind::Elliptic);
        let par = MoebiusMap::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(par.classify(CLASSIFY_TOL), IsometryKind::Parabolic);
        assert_eq!(MoebiusMap::diagonal(1.0).classify(CLASSIFY_TOL), IsometryKind::Hyperbolic);
    }

    #[test]
    fn axis_endpoints_are_fixed_and_ordered() {
        let h = MoebiusMap::new(2.0, 1.0, 3.0, 2.0).unwrap();
        let (r, a) = h.axis().unwrap();
        for p in [r, a] {
            assert!(h.apply_boundary(p).approx_eq(p, 1e-10));
        }
        // iterating pushes i toward the attracting point
        let mut x = Point::i();
        for _ in 0..30 {
            x = h.apply(x);
        }
        if let BoundaryPoint::Finite(v) = a {
            assert!((x.x - v).abs() < 1e-6);
        }
        let (r0, a0) = MoebiusMap::diagonal(2.0).axis().unwrap();
        assert_eq!(a0, BoundaryPoint::Infinity);
        assert_eq!(r0, BoundaryPoint::Finite(0.0));
    }

    #[test]
    fn isometry_property() {
        let g = MoebiusMap::new(1.3, -0.4, 2.2, 0.1).unwrap();
        let p = Point::new(0.2, 0.7).unwrap();
        let q = Point::new(-3.0, 2.5).unwrap();
        assert!((dist(g.apply(p), g.apply(q)) - dist(p, q)).abs() < 1e-12);
        let e = g * g.inverse();
        assert!(e.is_identity(1e-12));
    }

    #[test]
    fn chart_of_geodesic() {
        for (p, q) in [(BoundaryPoint::Finite(2.0), BoundaryPoint::Finite(-1.0)), (BoundaryPoint::Finite(-3.0), BoundaryPoint::Finite(0.5)), (BoundaryPoint::Infinity, BoundaryPoint::Finite(1.0)), (BoundaryPoint::Finite(1.0), BoundaryPoint::Infinity)] {
            let h = geodesic_chart(p, q);
            assert!(h.apply_boundary(BoundaryPoint::Infinity).approx_eq(p, 1e-12));
            assert!(h.apply_boundary(BoundaryPoint::Finite(0.0)).approx_eq(q, 1e-12));
        }
    }

    #[test]
    fn fixed_points() {
        let r = MoebiusMap::moving_i_to(Point::new(1.0, 2.0).unwrap());
        let e = r * MoebiusMap::rotation(1.0) * r.inverse();
        let f = e.elliptic_fixed_point().unwrap();
        assert!((f.x - 1.0).abs() < 1e-12 && (f.y - 2.0).abs() < 1e-12);
        let par = MoebiusMap::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(par.parabolic_fixed_point(), Some(BoundaryPoint::Finite(0.0)));
    }
}
