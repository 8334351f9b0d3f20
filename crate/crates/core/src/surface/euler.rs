use super::{SurfaceError, SurfaceRep};
use crate::hyperbolic::MoebiusMap;
use std::f64::consts::PI;

/// Tolerance on the relator residual accepted by `euler_class`.
pub const EULER_RELATOR_TOL: f64 = 1e-6;

const WRAP_TOL: f64 = 1e-7;

/// Lift of a projective action on ℝP¹ (angles mod π) to a map of ℝ
/// commuting with translation by π.
#[derive(Clone, Copy)]
struct Lift {
    m: MoebiusMap,
    base: f64,
    shift: f64,
}

fn proj_angle(m: &MoebiusMap, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (u, v) = (m.a * c + m.b * s, m.c * c + m.d * s);
    v.atan2(u).rem_euclid(PI)
}

impl Lift {
    /// The lift whose value at 0 lies in [0, π).
    fn new(m: MoebiusMap) -> Self {
        let base = proj_angle(&m, 0.0);
        Lift { m, base, shift: 0.0 }
    }

    fn eval(&self, x: f64) -> f64 {
        let k = (x / PI).floor();
        let x0 = x - k * PI;
        let a = proj_angle(&self.m, x0);
        let mut r = (a - self.base).rem_euclid(PI);
        // near 0 and π the branch is decided by which end of the period x0 is at
        if x0 < 0.5 * PI && r > PI - WRAP_TOL {
            r -= PI;
        } else if x0 > 0.5 * PI && r < WRAP_TOL {
            r += PI;
        }
        self.base + r + k * PI + self.shift
    }

    /// The lift of the inverse which is the actual inverse of this lift.
    fn inverse(&self) -> Self {
        let mut inv = Lift::new(self.m.inverse());
        let y = self.eval(0.0);
        let k = ((0.0 - inv.eval(y)) / PI).round();
        inv.shift = k * PI;
        inv
    }
}

/// Euler class, computed as the translation (in units of π) of the product
/// of commutators of lifts. Fuchsian representations built by
/// `fn_to_holonomy` have Euler class 2g - 2.
pub fn euler_class(rep: &SurfaceRep) -> Result<i64, SurfaceError> {
    let res = rep.relator_residual();
    if res > EULER_RELATOR_TOL {
        return Err(SurfaceError::RelatorViolation(res));
    }
    let lifts: Vec<Lift> = rep.images.iter().map(|g| Lift::new(*g)).collect();
    // apply the word right to left, starting at 0
    let mut seq: Vec<Lift> = Vec::with_capacity(4 * rep.genus);
    for i in 0..rep.genus {
        let (a, b) = (lifts[2 * i], lifts[2 * i + 1]);
        seq.extend([a, b, a.inverse(), b.inverse()]);
    }
    let mut x = 0.0;
    for l in seq.iter().rev() {
        x = l.eval(x);
    }
    let raw = x / PI;
    let n = raw.round();
    if (raw - n).abs() > 0.1 {
        return Err(SurfaceError::LiftAmbiguity(raw));
    }
    Ok(-(n as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_is_zero() {
        assert_eq!(euler_class(&SurfaceRep::trivial(2)).unwrap(), 0);
    }

    #[test]
    fn lift_inverse() {
        let g = MoebiusMap::new(1.3, 0.4, -2.0, 0.1).unwrap();
        let l = Lift::new(g);
        let li = l.inverse();
        for x in [-4.0, -0.3, 0.0, 1.0, 7.5] {
            assert!((li.eval(l.eval(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_rep_is_zero() {
        let imgs = vec![MoebiusMap::diagonal(1.0), MoebiusMap::diagonal(-0.3), MoebiusMap::diagonal(0.2), MoebiusMap::diagonal(2.0)];
        assert_eq!(euler_class(&SurfaceRep::new(2, imgs).unwrap()).unwrap(), 0);
    }

    #[test]
    fn axes_through_wrap_points() {
        let x = crate::teichmueller::FNCoords::new(vec![2.0, 2.3, 2.6], vec![0.3, -0.2, 0.4]).unwrap();
        let rep = crate::teichmueller::fn_to_holonomy(&x).unwrap();
        assert_eq!(euler_class(&rep).unwrap(), 2);
        assert_eq!(euler_class(&rep.apply_sigma()).unwrap(), -2);
    }

    #[test]
    fn rejects_non_rep() {
        let imgs = vec![MoebiusMap::diagonal(1.0), MoebiusMap::rotation(0.5), MoebiusMap::identity(), MoebiusMap::identity()];
        assert!(matches!(euler_class(&SurfaceRep::new(2, imgs).unwrap()), Err(SurfaceError::RelatorViolation(_))));
    }
}
