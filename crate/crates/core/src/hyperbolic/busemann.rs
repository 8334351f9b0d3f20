use super::{BoundaryPoint, MoebiusMap, Point};

/// Busemann function of the boundary point `p`, normalised to vanish at `x0`.
///
/// Equals lim (d(x, r(t)) - t) along the unit-speed ray r from x0 to p, so it
/// decreases toward p. For p = ∞ and x0 = i this is -ln Im x.
pub fn busemann(p: BoundaryPoint, x0: Point, x: Point) -> f64 {
    let h = MoebiusMap::sending_to_infinity(p);
    h.apply(x0).y.ln() - h.apply(x).y.ln()
}

/// Point at distance t from x along the geodesic ray toward p.
pub fn horoflow(p: BoundaryPoint, t: f64, x: Point) -> Point {
    let h = MoebiusMap::sending_to_infinity(p);
    let w = h.apply(x);
    h.inverse().apply(Point { x: w.x, y: w.y * t.exp() })
}
