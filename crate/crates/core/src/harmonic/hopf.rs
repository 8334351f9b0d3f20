use super::HarmonicError;
use crate::hyperbolic::{MoebiusMap, Point};
use crate::teichmueller::{Mesh, QuadDiff};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// Symmetric 2×2 matrix [[xx, xy], [xy, yy]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn scaled_identity(a: f64) -> Self {
        Sym2 { xx: a, xy: 0.0, yy: a }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (m + r, m - r)
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym2 { xx: self.xx * s, xy: self.xy * s, yy: self.yy * s }
    }
}

/// ½ tr(g⁻¹ h).
pub fn energy_density(h: &Sym2, g: &Sym2) -> Result<f64, HarmonicError> {
    let det = g.det();
    if !(det > 0.0) || !(g.xx > 0.0) {
        return Err(HarmonicError::SingularMetric);
    }
    Ok(0.5 * (g.yy * h.xx - 2.0 * g.xy * h.xy + g.xx * h.yy) / det)
}

/// Hopf coefficient ¼(h11 - h22 - 2i h12) of a pullback in the z-chart.
pub fn hopf_coefficient(h: &Sym2) -> Complex64 {
    Complex64::new(0.25 * (h.xx - h.yy), -0.5 * h.xy)
}

/// Hopf differential of a map from its per-face pullback metrics.
pub fn hopf_differential(pullbacks: &[Sym2]) -> QuadDiff {
    QuadDiff { coeffs: pullbacks.iter().map(hopf_coefficient).collect() }
}

/// Pullback metric of one face from a solution report.
pub fn pullback_metric(pullbacks: &[Sym2], face: usize) -> Option<Sym2> {
    pullbacks.get(face).copied()
}

/// Largest entry of h - (e α I + Φ + Φ̄) with e = ½ tr(h)/α.
pub fn reconstruction_residual(h: &Sym2, alpha: f64, phi: Complex64) -> f64 {
    let e = energy_density(h, &Sym2::scaled_identity(alpha)).unwrap_or(f64::NAN);
    let r = [
        h.xx - (alpha * e + 2.0 * phi.re),
        h.xy + 2.0 * phi.im,
        h.yy - (alpha * e - 2.0 * phi.re),
    ];
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn centroid_of(mesh: &Mesh, f: usize) -> Point {
    let [a, b, c] = mesh.faces[f].map(|v| mesh.vertices[v]);
    crate::teichmueller::centroid(a, b, c)
}

/// Faces around `f` (including f) within `rings` vertex-rings, each carried by
/// the deck transformation placing it next to f.
fn patch(mesh: &Mesh, by_class: &[Vec<usize>], mats: &[MoebiusMap], f: usize, rings: usize) -> Vec<(usize, MoebiusMap)> {
    let mut out = vec![(f, MoebiusMap::identity())];
    let mut seen: HashSet<(usize, i64, i64)> = HashSet::new();
    let key = |g: &MoebiusMap, face: usize| {
        let c = g.apply(centroid_of(mesh, face));
        (face, (c.x * 1e7).round() as i64, (c.y.ln() * 1e7).round() as i64)
    };
    seen.insert(key(&MoebiusMap::identity(), f));
    let mut frontier = vec![(f, MoebiusMap::identity())];
    for _ in 0..rings {
        let mut next = Vec::new();
        for (face, g) in &frontier {
            for &v in &mesh.faces[*face] {
                let c = mesh.class_of[v];
                for &f2 in &by_class[c] {
                    for &v2 in &mesh.faces[f2] {
                        if mesh.class_of[v2] != c {
                            continue;
                        }
                        // place v2 onto v: T = hol(W_v) hol(W_v2)⁻¹
                        let t = *g * mats[v] * mats[v2].inverse();
                        if seen.insert(key(&t, f2)) {
                            next.push((f2, t));
                        }
                    }
                }
            }
        }
        out.extend(next.iter().copied());
        frontier = next;
    }
    out
}

/// Pointwise estimate of |∂̄φ| / α^{3/2} per face, from a least-squares fit of
/// φ over a patch by c0 + c1 w + c2 w² + b w̄ (w centred at the face).
pub fn dbar_estimates(phi: &QuadDiff, mesh: &Mesh, rings: usize) -> Vec<f64> {
    let mut by_class = vec![Vec::new(); mesh.num_classes()];
    for (f, face) in mesh.faces.iter().enumerate() {
        for &v in face {
            let c = mesh.class_of[v];
            if by_class[c].last() != Some(&f) {
                by_class[c].push(f);
            }
        }
    }
    let mats = mesh.vertex_matrices(&mesh.holonomy);
    let cents: Vec<Point> = (0..mesh.faces.len()).map(|f| centroid_of(mesh, f)).collect();
    let mut cache: HashMap<usize, f64> = HashMap::new();
    (0..mesh.faces.len())
        .map(|f| {
            if let Some(v) = cache.get(&f) {
                return *v;
            }
            let p = patch(mesh, &by_class, &mats, f, rings);
            let w0 = cents[f].to_complex();
            let scale = cents[f].y;
            let n = p.len();
            let mut a = DMatrix::<f64>::zeros(2 * n, 8);
            let mut rhs = DVector::<f64>::zeros(2 * n);
            for (r, (face, g)) in p.iter().enumerate() {
                let z = cents[*face].to_complex();
                let w = g.apply_complex(z);
                // φ(γz) γ'(z)² = φ(z): value at w is φ_face / γ'(z)²
                let d = g.derivative(z);
                let val = phi.coeffs[*face] / (d * d);
                let s = (w - w0) / scale;
                let basis = [Complex64::new(1.0, 0.0), s, s * s, s.conj()];
                for (k, b) in basis.iter().enumerate() {
                    // unknown c_k = x + iy contributes b·c_k
                    a[(2 * r, 2 * k)] = b.re;
                    a[(2 * r, 2 * k + 1)] = -b.im;
                    a[(2 * r + 1, 2 * k)] = b.im;
                    a[(2 * r + 1, 2 * k + 1)] = b.re;
                }
                rhs[2 * r] = val.re;
                rhs[2 * r + 1] = val.im;
            }
            let sol = a.svd(true, true).solve(&rhs, 1e-12).unwrap_or_else(|_| DVector::zeros(8));
            let b = Complex64::new(sol[6], sol[7]) / scale;
            let alpha = mesh.conformal[f];
            let v = b.norm() / alpha.powf(1.5);
            cache.insert(f, v);
            v
        })
        .collect()
}

/// L² norm of the discrete ∂̄ estimate: sqrt(Σ area |∂̄φ|²/α³).
pub fn holomorphicity_residual(phi: &QuadDiff, mesh: &Mesh) -> f64 {
    dbar_estimates(phi, mesh, 2)
        .iter()
        .zip(&mesh.face_area)
        .map(|(d, a)| d * d * a)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        let g = Sym2 { xx: 2.0, xy: 0.3, yy: 1.0 };
        assert!((energy_density(&g, &g).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(energy_density(&Sym2::scaled_identity(0.0), &g).unwrap(), 0.0);
        assert!((energy_density(&g.scale(3.0), &g).unwrap() - 3.0).abs() < 1e-14);
        assert!(energy_density(&g, &Sym2::scaled_identity(0.0)).is_err());
    }

    #[test]
    fn reconstruction_of_reflection() {
        // anti-conformal reflection (x, y) ↦ (x, -y) scaled: pullback diag(a, a) is conformal,
        // shear-type maps carry the traceless part in φ
        let alpha = 2.5;
        let h = Sym2 { xx: 3.0, xy: -0.7, yy: 1.1 };
        let phi = hopf_coefficient(&h);
        assert!(reconstruction_residual(&h, alpha, phi) < 1e-14);
        let conf = Sym2::scaled_identity(alpha);
        assert_eq!(hopf_coefficient(&conf), Complex64::new(0.0, 0.0));
    }
}
