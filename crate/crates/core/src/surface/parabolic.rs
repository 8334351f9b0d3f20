use super::SurfaceRep;
use crate::hyperbolic::{busemann, BoundaryPoint, IsometryKind, MoebiusMap, Point, CLASSIFY_TOL};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FixedPoint {
    Interior(Point),
    Boundary(BoundaryPoint),
}

/// A common fixed point of the image together with the associated real morphism
/// m(γ) = B_{p,i}(ρ(γ) i) on the generators (zero for an interior fixed point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicData {
    pub fixed_point: FixedPoint,
    /// Values on a1, b1, ..., ag, bg.
    pub morphism: Vec<f64>,
    /// Second boundary point when the image preserves a geodesic.
    pub axis: Option<(BoundaryPoint, BoundaryPoint)>,
}

impl ParabolicData {
    pub fn morphism_of(&self, w: &super::Word) -> f64 {
        w.letters()
            .iter()
            .map(|l| if l.inv { -self.morphism[l.gen as usize] } else { self.morphism[l.gen as usize] })
            .sum()
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.fixed_point, FixedPoint::Boundary(_))
    }
}

fn fixes_boundary(g: &MoebiusMap, p: BoundaryPoint, tol: f64) -> bool {
    let h = MoebiusMap::sending_to_infinity(p);
    let c = h * *g * h.inverse();
    let scale = c.entries().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    c.c.abs() <= tol * scale.max(1.0)
}

fn fixes_interior(g: &MoebiusMap, q: Point, tol: f64) -> bool {
    let h = MoebiusMap::moving_i_to(q);
    let c = h.inverse() * *g * h;
    (c.a - c.d).abs() <= tol && (c.b + c.c).abs() <= tol
}

/// Looks for a point of ℍ² ∪ ∂ℍ² fixed by every generator image.
///
/// Returns `None` for representations without a common fixed point (for
/// instance Fuchsian ones). The tolerance applies to the normalised matrix
/// entries after conjugating the candidate to i or ∞.
pub fn detect_parabolic(rep: &SurfaceRep, tol: f64) -> Option<ParabolicData> {
    let gens = &rep.images;
    let x0 = Point::i();
    let first = gens.iter().find(|g| g.classify(tol.max(CLASSIFY_TOL)) != IsometryKind::Identity);
    let Some(g1) = first else {
        return Some(ParabolicData {
            fixed_point: FixedPoint::Interior(x0),
            morphism: vec![0.0; gens.len()],
            axis: None,
        });
    };
    let mut boundary_candidates = Vec::new();
    match g1.classify(CLASSIFY_TOL) {
        IsometryKind::Elliptic => {
            let q = g1.elliptic_fixed_point()?;
            if gens.iter().all(|g| fixes_interior(g, q, tol)) {
                return Some(ParabolicData {
                    fixed_point: FixedPoint::Interior(q),
                    morphism: vec![0.0; gens.len()],
                    axis: None,
                });
            }
            return None;
        }
        IsometryKind::Parabolic => boundary_candidates.push(g1.parabolic_fixed_point()?),
        IsometryKind::Hyperbolic => {
            let (r, a) = g1.axis().ok()?;
            boundary_candidates.extend([r, a]);
        }
        IsometryKind::Identity => unreachable!(),
    }
    let fixed: Vec<BoundaryPoint> = boundary_candidates
        .into_iter()
        .filter(|p| gens.iter().all(|g| fixes_boundary(g, *p, tol)))
        .collect();
    let p = *fixed.first()?;
    let morphism = gens.iter().map(|g| busemann(p, x0, g.apply(x0))).collect();
    let axis = if fixed.len() == 2 { Some((fixed[0], fixed[1])) } else { None };
    Some(ParabolicData { fixed_point: FixedPoint::Boundary(p), morphism, axis })
}

/// Largest deviation between the length spectrum and |m| on the word ball.
pub fn additive_spectrum_residual(rep: &SurfaceRep, data: &ParabolicData, radius: usize) -> f64 {
    let mut worst = 0.0_f64;
    let m = &data.morphism;
    let mut sums: Vec<f64> = vec![0.0];
    rep.group().for_each_word(radius, &[&rep.images], |w, prod| {
        sums.truncate(w.len());
        let l = w[w.len() - 1];
        let v = if l.inv { -m[l.gen as usize] } else { m[l.gen as usize] };
        let s = sums[w.len() - 1] + v;
        sums.push(s);
        worst = worst.max((prod[0].translation_length() - s.abs()).abs());
    });
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common_axis(ts: [f64; 4]) -> SurfaceRep {
        SurfaceRep::new(2, ts.iter().map(|t| MoebiusMap::diagonal(*t)).collect()).unwrap()
    }

    #[test]
    fn common_axis_detected() {
        let h = MoebiusMap::new(1.0, 2.0, 0.5, 2.0).unwrap();
        let rep = common_axis([0.3, -0.2, 0.5, 0.1]).conjugate(&h);
        let d = detect_parabolic(&rep, 1e-6).unwrap();
        assert!(d.is_boundary());
        assert!(d.axis.is_some());
        for (m, t) in d.morphism.iter().zip([0.3_f64, -0.2, 0.5, 0.1]) {
            assert!((m.abs() - t.abs()).abs() < 1e-9, "{m} {t}");
        }
        assert!(additive_spectrum_residual(&rep, &d, 3) < 1e-6);
    }

    #[test]
    fn unipotent_family() {
        let gens = [0.3, -1.0, 2.0, 0.0]
            .iter()
            .map(|s| MoebiusMap::new(1.0, *s, 0.0, 1.0).unwrap())
            .collect();
        let d = detect_parabolic(&SurfaceRep::new(2, gens).unwrap(), 1e-6).unwrap();
        assert_eq!(d.fixed_point, FixedPoint::Boundary(BoundaryPoint::Infinity));
        assert!(d.morphism.iter().all(|m| m.abs() < 1e-15));
    }

    #[test]
    fn elliptic_and_trivial() {
        let r = MoebiusMap::rotation(0.7);
        let rep = SurfaceRep::new(2, vec![r, r * r, r.inverse(), MoebiusMap::identity()]).unwrap();
        let d = detect_parabolic(&rep, 1e-6).unwrap();
        assert!(matches!(d.fixed_point, FixedPoint::Interior(_)));
        let d = detect_parabolic(&SurfaceRep::trivial(2), 1e-6).unwrap();
        assert!(d.morphism.iter().all(|m| *m == 0.0));
    }

    #[test]
    fn generic_pair_rejected() {
        let rep = SurfaceRep::new(
            2,
            vec![MoebiusMap::diagonal(1.0), MoebiusMap::new(2.0, 1.0, 1.0, 1.0).unwrap(), MoebiusMap::identity(), MoebiusMap::identity()],
        )
        .unwrap();
        assert!(detect_parabolic(&rep, 1e-6).is_none());
    }
}
