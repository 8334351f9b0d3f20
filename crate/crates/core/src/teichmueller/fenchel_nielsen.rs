use super::TeichError;
use crate::hyperbolic::MoebiusMap;
use crate::surface::{euler_class, SurfaceGroup, SurfaceRep, Word};
use serde::{Deserialize, Serialize};

/// Lengths below this are rejected as degenerate.
pub const MIN_LENGTH: f64 = 1e-4;

/// Fenchel–Nielsen coordinates for the fixed pants decomposition.
///
/// Genus 2: curves a1, a2, [a1,b1]. Genus 3: a1, a2, a3, [a1,b1], [a2,b2], [a3,b3].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FNCoords {
    pub lengths: Vec<f64>,
    pub twists: Vec<f64>,
}

impl FNCoords {
    pub fn new(lengths: Vec<f64>, twists: Vec<f64>) -> Result<Self, TeichError> {
        let c = FNCoords { lengths, twists };
        c.genus()?;
        Ok(c)
    }

    pub fn genus(&self) -> Result<usize, TeichError> {
        let n = self.lengths.len();
        let g = n / 3 + 1;
        if n % 3 != 0 || n == 0 || self.twists.len() != n {
            return Err(TeichError::CoordinateCount {
                genus: g,
                lengths: n,
                twists: self.twists.len(),
                need: 3 * g - 3,
            });
        }
        Ok(g)
    }

    /// Coordinates as a flat vector (lengths then twists).
    pub fn to_vec(&self) -> Vec<f64> {
        self.lengths.iter().chain(&self.twists).copied().collect()
    }

    pub fn from_vec(v: &[f64]) -> Result<Self, TeichError> {
        let n = v.len() / 2;
        FNCoords::new(v[..n].to_vec(), v[n..].to_vec())
    }

    pub fn dim(&self) -> usize {
        2 * self.lengths.len()
    }
}

/// Words of the pants curves in coordinate order.
pub fn pants_curve_words(genus: usize) -> Result<Vec<Word>, TeichError> {
    let g = SurfaceGroup::new(genus)?;
    if !(2..=3).contains(&genus) {
        return Err(TeichError::UnsupportedGenus(genus));
    }
    let mut out: Vec<Word> = (0..genus).map(|i| g.generator(2 * i)).collect();
    if genus == 2 {
        out.push(g.commutator(0));
    } else {
        out.extend((0..genus).map(|i| g.commutator(i)));
    }
    Ok(out)
}

fn sl2(a: f64, b: f64, c: f64, d: f64) -> MoebiusMap {
    MoebiusMap::raw(a, b, c, d)
}

/// One-holed torus with interior curve length ℓ, twist τ and boundary length L.
/// Returns SL(2,ℝ) matrices (A, B) with tr [A,B] = -2 cosh(L/2).
fn one_holed_torus(l: f64, tau: f64, big_l: f64) -> (MoebiusMap, MoebiusMap) {
    let a = sl2((l / 2.0).exp(), 0.0, 0.0, (-l / 2.0).exp());
    // sinh(d/2) sinh(ℓ/2) = cosh(L/4)
    let sh = (big_l / 4.0).cosh() / (l / 2.0).sinh();
    let ch = (1.0 + sh * sh).sqrt();
    let s = sl2(ch, sh, sh, ch);
    let r = sl2((tau / 2.0).exp(), 0.0, 0.0, (-tau / 2.0).exp());
    (a, r.mul_sl2(&s))
}

fn commutator(a: &MoebiusMap, b: &MoebiusMap) -> MoebiusMap {
    a.mul_sl2(b).mul_sl2(&a.inverse_sl2()).mul_sl2(&b.inverse_sl2())
}

/// Eigenbasis P (det 1) with M = P diag(μ, 1/μ) P⁻¹, |μ| > 1, for hyperbolic M in SL(2,ℝ).
fn eigenbasis(m: &MoebiusMap) -> (MoebiusMap, f64) {
    let t = m.trace();
    let disc = (t * t - 4.0).sqrt();
    let mu = if t > 0.0 { 0.5 * (t + disc) } else { 0.5 * (t - disc) };
    let nu = 1.0 / mu;
    // eigenvector for λ: (b, λ - a) or (λ - d, c)
    let vec_for = |lam: f64| -> (f64, f64) {
        let v1 = (m.b, lam - m.a);
        let v2 = (lam - m.d, m.c);
        if v1.0.hypot(v1.1) > v2.0.hypot(v2.1) {
            v1
        } else {
            v2
        }
    };
    let (x1, y1) = vec_for(mu);
    let (x2, y2) = vec_for(nu);
    let mut det = x1 * y2 - x2 * y1;
    let (mut x2, mut y2) = (x2, y2);
    if det < 0.0 {
        x2 = -x2;
        y2 = -y2;
        det = -det;
    }
    let s = det.sqrt();
    (sl2(x1 / s, x2 / s, y1 / s, y2 / s), mu)
}

/// Conjugator C (det 1) with C N C⁻¹ = M for hyperbolic M, N of equal trace.
fn conjugator(m: &MoebiusMap, n: &MoebiusMap) -> MoebiusMap {
    let (pm, _) = eigenbasis(m);
    let (pn, _) = eigenbasis(n);
    pm.mul_sl2(&pn.inverse_sl2())
}

/// Translation by t along the axis of M (commutes with M).
fn axis_translation(m: &MoebiusMap, t: f64) -> MoebiusMap {
    let (p, mu) = eigenbasis(m);
    let d = if mu.abs() > 1.0 { sl2((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp()) } else { sl2((-t / 2.0).exp(), 0.0, 0.0, (t / 2.0).exp()) };
    p.mul_sl2(&d).mul_sl2(&p.inverse_sl2())
}

/// Attach a one-holed torus whose commutator is conjugated onto `k`, twisted by `tau` along k.
fn attach_torus(l: f64, tau: f64, big_l: f64, k: &MoebiusMap, twist_k: f64) -> (MoebiusMap, MoebiusMap) {
    let (a, b) = one_holed_torus(l, tau, big_l);
    let kk = commutator(&a, &b);
    let c = axis_translation(k, twist_k).mul_sl2(&conjugator(k, &kk));
    let ci = c.inverse_sl2();
    (c.mul_sl2(&a).mul_sl2(&ci), c.mul_sl2(&b).mul_sl2(&ci))
}

/// One-holed torus conjugated so that its commutator is -diag(e^{L/2}, e^{-L/2}),
/// or the inverse of that when `inverted`, then translated by `shift` along the
/// imaginary axis.
fn diagonal_torus(l: f64, tau: f64, big_l: f64, inverted: bool, shift: f64) -> (MoebiusMap, MoebiusMap) {
    let (a, b) = one_holed_torus(l, tau, big_l);
    let (p, _) = eigenbasis(&commutator(&a, &b));
    let mut c = p.inverse_sl2();
    if inverted {
        c = sl2(0.0, -1.0, 1.0, 0.0).mul_sl2(&c);
    }
    c = sl2((shift / 2.0).exp(), 0.0, 0.0, (-shift / 2.0).exp()).mul_sl2(&c);
    let ci = c.inverse_sl2();
    (c.mul_sl2(&a).mul_sl2(&ci), c.mul_sl2(&b).mul_sl2(&ci))
}

fn genus2(c: &FNCoords) -> Vec<MoebiusMap> {
    let (l1, l2, big_l) = (c.lengths[0], c.lengths[1], c.lengths[2]);
    let (t1, t2, t3) = (c.twists[0], c.twists[1], c.twists[2]);
    let (a1, b1) = diagonal_torus(l1, t1, big_l, false, 0.0);
    let (a2, b2) = diagonal_torus(l2, t2, big_l, true, t3);
    vec![a1, b1, a2, b2]
}

/// Pair of pants with SL(2,ℝ) boundary elements K1 K2 K3 = I, all of negative trace.
fn pants(l1: f64, l2: f64, l3: f64, mirror: bool) -> [MoebiusMap; 3] {
    let (x, y, z) = (-2.0 * (l1 / 2.0).cosh(), -2.0 * (l2 / 2.0).cosh(), -2.0 * (l3 / 2.0).cosh());
    let e = (l1 / 2.0).exp();
    let k1 = sl2(-e, 0.0, 0.0, -1.0 / e);
    // tr K2 = y, tr (K1 K2) = tr K3⁻¹ = z
    let a = (z + y / e) / (-(e - 1.0 / e));
    let a = a.max(f64::MIN);
    let d = y - a;
    let bc = a * d - 1.0;
    let b = bc.abs().sqrt();
    let cc = bc / b;
    let (b, cc) = if mirror { (-b, -cc) } else { (b, cc) };
    let k2 = sl2(a, b, cc, d);
    let k3 = k1.mul_sl2(&k2).inverse_sl2();
    let _ = x;
    [k1, k2, k3]
}

fn genus3(c: &FNCoords, mirror: bool) -> Vec<MoebiusMap> {
    let ks = pants(c.lengths[3], c.lengths[4], c.lengths[5], mirror);
    let mut out = Vec::with_capacity(6);
    for i in 0..3 {
        let (a, b) = attach_torus(c.lengths[i], c.twists[i], c.lengths[3 + i], &ks[i], c.twists[3 + i]);
        out.extend([a, b]);
    }
    out
}

/// Holonomy of the hyperbolic structure with the given Fenchel–Nielsen
/// coordinates. The result is Fuchsian with Euler class 2g - 2.
pub fn fn_to_holonomy(c: &FNCoords) -> Result<SurfaceRep, TeichError> {
    let genus = c.genus()?;
    if let Some(l) = c.lengths.iter().find(|l| !(**l >= MIN_LENGTH)) {
        return Err(TeichError::DegenerateLength(*l));
    }
    let imgs = match genus {
        2 => genus2(c),
        3 => {
            let rep = SurfaceRep::new(3, genus3(c, false))?;
            if euler_class(&rep).ok() == Some(4) {
                return Ok(normalise(rep));
            }
            genus3(c, true)
        }
        g => return Err(TeichError::UnsupportedGenus(g)),
    };
    Ok(normalise(SurfaceRep::new(genus, imgs)?))
}

fn normalise(rep: SurfaceRep) -> SurfaceRep {
    SurfaceRep { genus: rep.genus, images: rep.images.into_iter().map(|m| m.renormalized()).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fn2() -> FNCoords {
        FNCoords::new(vec![2.0, 2.0, 2.0], vec![0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn torus_commutator_trace() {
        let (a, b) = one_holed_torus(1.3, 0.4, 2.5);
        let k = commutator(&a, &b);
        assert!((k.trace() + 2.0 * (1.25_f64).cosh()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_genus2_traces() {
        let rep = fn_to_holonomy(&fn2()).unwrap();
        assert!(rep.relator_residual() < 1e-9);
        let words = pants_curve_words(2).unwrap();
        for w in &words {
            let t = rep.evaluate(w).trace().abs();
            assert!((t - 2.0 * 1.0_f64.cosh()).abs() < 1e-12, "{w}: {t}");
        }
    }

    #[test]
    fn lengths_round_trip() {
        for (ls, ts) in [
            (vec![1.3, 2.1, 3.0], vec![0.2, -0.5, 1.1]),
            (vec![0.5, 4.0, 1.0], vec![3.0, 0.0, -2.0]),
        ] {
            let c = FNCoords::new(ls.clone(), ts).unwrap();
            let rep = fn_to_holonomy(&c).unwrap();
            for (w, l) in pants_curve_words(2).unwrap().iter().zip(&ls) {
                assert!((rep.evaluate(w).translation_length() - l).abs() < 1e-8, "{w} {} {l}", rep.evaluate(w).translation_length());
            }
            assert_eq!(euler_class(&rep).unwrap(), 2);
        }
    }

    #[test]
    fn genus3() {
        let c = FNCoords::new(vec![1.5, 2.0, 2.5, 1.8, 2.2, 2.6], vec![0.1, -0.3, 0.7, 0.2, 0.0, -0.4]).unwrap();
        let rep = fn_to_holonomy(&c).unwrap();
        assert!(rep.relator_residual() < 1e-10);
        assert_eq!(euler_class(&rep).unwrap(), 4);
        for (w, l) in pants_curve_words(3).unwrap().iter().zip(&c.lengths) {
            assert!((rep.evaluate(w).translation_length() - l).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_and_bad_count() {
        assert!(matches!(
            fn_to_holonomy(&FNCoords { lengths: vec![1e-5, 1.0, 1.0], twists: vec![0.0; 3] }),
            Err(TeichError::DegenerateLength(_))
        ));
        assert!(FNCoords::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }
}
