//! Per-face discrete energy.
//!
//! Each face is mapped affinely between Klein charts centred at the
//! hyperboloid centroids of the source and target triangles. The energy of a
//! face is the conformal defect area·(½|M|² - det M), M = G^{1/2}(f0) A,
//! plus the signed hyperbolic area of the target triangle.

use crate::hyperbolic::Point;
use num_dual::DualNum;

pub(crate) type Hyp<D> = [D; 3];

fn mink<D: DualNum<Primitive = f64> + Copy>(a: &Hyp<D>, b: &Hyp<D>) -> D {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn hyperboloid<D: DualNum<Primitive = f64> + Copy>(x: D, y: D) -> Hyp<D> {
    let r2 = x * x + y * y;
    let iy = y.recip();
    [(r2 + 1.0) * iy * 0.5, x * iy, (r2 - 1.0) * iy * 0.5]
}

/// Centroid and boost frame of a hyperboloid triangle, with Klein coordinates
/// of its vertices in that frame.
pub(crate) struct KleinFrame<D> {
    pub centre: Hyp<D>,
    pub e1: Hyp<D>,
    pub e2: Hyp<D>,
    pub k: [[D; 2]; 3],
}

pub(crate) fn klein_frame<D: DualNum<Primitive = f64> + Copy>(t: &[Hyp<D>; 3]) -> KleinFrame<D> {
    let s = [t[0][0] + t[1][0] + t[2][0], t[0][1] + t[1][1] + t[2][1], t[0][2] + t[1][2] + t[2][2]];
    let n = (-mink(&s, &s)).sqrt().recip();
    let c = [s[0] * n, s[1] * n, s[2] * n];
    let w = (c[0] + 1.0).recip();
    let e1 = [c[1], c[1] * c[1] * w + 1.0, c[1] * c[2] * w];
    let e2 = [c[2], c[1] * c[2] * w, c[2] * c[2] * w + 1.0];
    let k = [0, 1, 2].map(|i| {
        let d = -mink(&t[i], &c).recip();
        [mink(&t[i], &e1) * d, mink(&t[i], &e2) * d]
    });
    KleinFrame { centre: c, e1, e2, k }
}

/// 2 atan2(det[T1 T2 T3], 1 - Σ⟨Ti,Tj⟩): signed area of the geodesic triangle.
pub(crate) fn signed_area<D: DualNum<Primitive = f64> + Copy>(t: &[Hyp<D>; 3]) -> D {
    let (p, q, r) = (&t[0], &t[1], &t[2]);
    let det = p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0]) + p[2] * (q[0] * r[1] - q[1] * r[0]);
    let den = -mink(p, q) - mink(q, r) - mink(r, p) + 1.0;
    det.atan2(den) * 2.0
}

/// Source data of one face.
#[derive(Debug, Clone, Copy)]
pub struct FaceFrame {
    /// Inverse of the source edge matrix [s2-s1 | s3-s1] in Klein coordinates.
    pub binv: [[f64; 2]; 2],
    /// Barycentric coordinates of the chart origin.
    pub lambda: [f64; 3],
    pub area: f64,
    /// d(Klein chart)/d(x, y) at the centroid.
    pub jac: [[f64; 2]; 2],
    pub alpha: f64,
}

impl FaceFrame {
    pub fn new(p: [Point; 3]) -> Self {
        let t = p.map(|q| q.to_hyperboloid());
        let fr = klein_frame(&t);
        let k = fr.k;
        let m = [[k[1][0] - k[0][0], k[2][0] - k[0][0]], [k[1][1] - k[0][1], k[2][1] - k[0][1]]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let binv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        // barycentric coordinates of 0: 0 = k1 + m (l2, l3)
        let l2 = -(binv[0][0] * k[0][0] + binv[0][1] * k[0][1]);
        let l3 = -(binv[1][0] * k[0][0] + binv[1][1] * k[0][1]);
        let c = fr.centre;
        let cp = Point::from_hyperboloid(c);
        let (u, v) = (cp.x, cp.y);
        let dxu = [u / v, 1.0 / v, u / v];
        let dxv = [(v * v - u * u - 1.0) / (2.0 * v * v), -u / (v * v), (v * v - u * u + 1.0) / (2.0 * v * v)];
        let jac = [
            [mink(&dxu, &fr.e1), mink(&dxv, &fr.e1)],
            [mink(&dxu, &fr.e2), mink(&dxv, &fr.e2)],
        ];
        FaceFrame {
            binv,
            lambda: [1.0 - l2 - l3, l2, l3],
            area: signed_area(&t),
            jac,
            alpha: 1.0 / (v * v),
        }
    }
}

/// Target Klein data of a face: the affine differential A and the image f0 of the
/// source chart origin.
pub(crate) fn face_affine<D: DualNum<Primitive = f64> + Copy>(fr: &FaceFrame, t: &[Hyp<D>; 3]) -> ([[D; 2]; 2], [D; 2]) {
    let k = klein_frame(t).k;
    let m = [[k[1][0] - k[0][0], k[2][0] - k[0][0]], [k[1][1] - k[0][1], k[2][1] - k[0][1]]];
    let b = fr.binv;
    let a = [
        [m[0][0] * b[0][0] + m[0][1] * b[1][0], m[0][0] * b[0][1] + m[0][1] * b[1][1]],
        [m[1][0] * b[0][0] + m[1][1] * b[1][0], m[1][0] * b[0][1] + m[1][1] * b[1][1]],
    ];
    let l = fr.lambda;
    let f0 = [
        k[0][0] * l[0] + k[1][0] * l[1] + k[2][0] * l[2],
        k[0][1] * l[0] + k[1][1] * l[1] + k[2][1] * l[2],
    ];
    (a, f0)
}

/// Energy of one face whose target vertices are the upper half-plane points (x_i, y_i).
pub(crate) fn face_energy<D: DualNum<Primitive = f64> + Copy>(fr: &FaceFrame, z: &[D; 6]) -> D {
    let t = [hyperboloid(z[0], z[1]), hyperboloid(z[2], z[3]), hyperboloid(z[4], z[5])];
    let (a, f0) = face_affine(fr, &t);
    let q = -(f0[0] * f0[0] + f0[1] * f0[1]) + 1.0;
    let iq = q.recip();
    let fro = a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1];
    let atf = [a[0][0] * f0[0] + a[1][0] * f0[1], a[0][1] * f0[0] + a[1][1] * f0[1]];
    let half_tr = (fro * iq + (atf[0] * atf[0] + atf[1] * atf[1]) * iq * iq) * 0.5;
    let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * iq * iq.sqrt();
    (half_tr - det) * fr.area + signed_area(&t)
}

/// Pullback metric of the face map in the z-chart at the centroid, as (h11, h12, h22).
pub(crate) fn face_pullback(fr: &FaceFrame, z: &[f64; 6]) -> [f64; 3] {
    let t = [hyperboloid(z[0], z[1]), hyperboloid(z[2], z[3]), hyperboloid(z[4], z[5])];
    let (a, f0) = face_affine(fr, &t);
    let r2 = f0[0] * f0[0] + f0[1] * f0[1];
    let q = 1.0 - r2;
    // Klein metric G = I/q + f0 f0ᵀ/q²
    let g = [[1.0 / q + f0[0] * f0[0] / (q * q), f0[0] * f0[1] / (q * q)], [f0[0] * f0[1] / (q * q), 1.0 / q + f0[1] * f0[1] / (q * q)]];
    // B = A J, h = Bᵀ G B
    let j = fr.jac;
    let bm = [
        [a[0][0] * j[0][0] + a[0][1] * j[1][0], a[0][0] * j[0][1] + a[0][1] * j[1][1]],
        [a[1][0] * j[0][0] + a[1][1] * j[1][0], a[1][0] * j[0][1] + a[1][1] * j[1][1]],
    ];
    let gb = [
        [g[0][0] * bm[0][0] + g[0][1] * bm[1][0], g[0][0] * bm[0][1] + g[0][1] * bm[1][1]],
        [g[1][0] * bm[0][0] + g[1][1] * bm[1][0], g[1][0] * bm[0][1] + g[1][1] * bm[1][1]],
    ];
    [
        bm[0][0] * gb[0][0] + bm[1][0] * gb[1][0],
        bm[0][0] * gb[0][1] + bm[1][0] * gb[1][1],
        bm[0][1] * gb[0][1] + bm[1][1] * gb[1][1],
    ]
}

/// The face map from source triangle `src` to target triangle `dst` at a
/// source point z: image point and d(image)/d(z) in upper half-plane coordinates.
pub fn face_map_jacobian(src: [Point; 3], dst: [Point; 3], z: Point) -> (Point, [[f64; 2]; 2]) {
    use num_dual::{jacobian, DualSVec64};
    use nalgebra::SVector;
    let ts = src.map(|q| q.to_hyperboloid());
    let fs = klein_frame(&ts);
    let k = fs.k;
    let m = [[k[1][0] - k[0][0], k[2][0] - k[0][0]], [k[1][1] - k[0][1], k[2][1] - k[0][1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let binv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let td = dst.map(|q| q.to_hyperboloid());
    let fd = klein_frame(&td);
    let f = |v: SVector<DualSVec64<2>, 2>| {
        let t = hyperboloid(v[0], v[1]);
        let c = fs.centre.map(DualSVec64::<2>::from);
        let e1 = fs.e1.map(DualSVec64::<2>::from);
        let e2 = fs.e2.map(DualSVec64::<2>::from);
        let d = -mink(&t, &c).recip();
        let kz = [mink(&t, &e1) * d - k[0][0], mink(&t, &e2) * d - k[0][1]];
        let l2 = kz[0] * binv[0][0] + kz[1] * binv[0][1];
        let l3 = kz[0] * binv[1][0] + kz[1] * binv[1][1];
        let l1 = -l2 - l3 + 1.0;
        let kt = [0, 1].map(|a| l1 * fd.k[0][a] + l2 * fd.k[1][a] + l3 * fd.k[2][a]);
        let n = (-(kt[0] * kt[0] + kt[1] * kt[1]) + 1.0).sqrt().recip();
        let h = [0, 1, 2].map(|a| (kt[0] * fd.e1[a] + kt[1] * fd.e2[a] + fd.centre[a]) * n);
        let y = (h[0] - h[2]).recip();
        SVector::<DualSVec64<2>, 2>::from([h[1] * y, y])
    };
    let (val, jac) = jacobian(f, &SVector::<f64, 2>::from([z.x, z.y]));
    (Point { x: val[0], y: val[1] }, [[jac[(0, 0)], jac[(0, 1)]], [jac[(1, 0)], jac[(1, 1)]]])
}

/// Energy and gradient with respect to the six target coordinates.
pub(crate) fn face_energy_grad(fr: &FaceFrame, z: &[f64; 6]) -> (f64, [f64; 6]) {
    use nalgebra::SVector;
    use num_dual::{gradient, DualSVec64};
    let x = SVector::<f64, 6>::from(*z);
    let (e, g) = gradient(|v: SVector<DualSVec64<6>, 6>| face_energy(fr, &[v[0], v[1], v[2], v[3], v[4], v[5]]), &x);
    (e, [g[0], g[1], g[2], g[3], g[4], g[5]])
}

/// Source gradients of the barycentric functions in the orthonormal chart: rows are ∇λ_i.
pub(crate) fn barycentric_gradients(fr: &FaceFrame) -> [[f64; 2]; 3] {
    let b = fr.binv;
    // λ2 = row 0 of binv applied to (s - s1), λ3 = row 1
    let g2 = [b[0][0], b[0][1]];
    let g3 = [b[1][0], b[1][1]];
    [[-g2[0] - g3[0], -g2[1] - g3[1]], g2, g3]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Point; 3] {
        [Point::new(0.1, 1.0).unwrap(), Point::new(0.3, 1.1).unwrap(), Point::new(0.15, 1.25).unwrap()]
    }

    fn flat(p: [Point; 3]) -> [f64; 6] {
        [p[0].x, p[0].y, p[1].x, p[1].y, p[2].x, p[2].y]
    }

    #[test]
    fn identity_is_conformal() {
        let p = tri();
        let fr = FaceFrame::new(p);
        let e = face_energy(&fr, &flat(p));
        assert!((e - fr.area).abs() < 1e-15);
        let h = face_pullback(&fr, &flat(p));
        assert!((h[0] - fr.alpha).abs() < 1e-12 && h[1].abs() < 1e-12 && (h[2] - fr.alpha).abs() < 1e-12);
        let (_, g) = face_energy_grad(&fr, &flat(p));
        // the identity is not critical for a single face, but energy is isometry invariant
        let rot = crate::hyperbolic::MoebiusMap::new(2.0, 0.3, -0.5, 0.7).unwrap();
        let q = p.map(|x| rot.apply(x));
        assert!((face_energy(&fr, &flat(q)) - e).abs() < 1e-12);
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn face_map_reproduces_vertices_and_isometries() {
        let p = tri();
        let g = crate::hyperbolic::MoebiusMap::new(2.0, 0.3, -0.5, 0.7).unwrap();
        let q = p.map(|x| g.apply(x));
        for k in 0..3 {
            let (w, _) = face_map_jacobian(p, q, p[k]);
            assert!(crate::hyperbolic::dist(w, q[k]) < 1e-10);
        }
        let z = Point::new(0.18, 1.1).unwrap();
        let (w, j) = face_map_jacobian(p, q, z);
        assert!(crate::hyperbolic::dist(w, g.apply(z)) < 1e-10);
        let d = g.derivative(z.to_complex());
        assert!((j[0][0] - d.re).abs() < 1e-9 && (j[1][0] - d.im).abs() < 1e-9);
        assert!((j[0][1] + d.im).abs() < 1e-9 && (j[1][1] - d.re).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = tri();
        let fr = FaceFrame::new(p);
        let z = [0.0, 0.9, 0.5, 1.3, 0.1, 1.6];
        let (_, g) = face_energy_grad(&fr, &z);
        for i in 0..6 {
            let mut a = z;
            let mut b = z;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            let fd = (face_energy(&fr, &a) - face_energy(&fr, &b)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "{i} {fd} {}", g[i]);
        }
    }

    #[test]
    fn energy_dominates_area() {
        // ½|M|² ≥ det M, so E ≥ signed target area
        let fr = FaceFrame::new(tri());
        let z = [0.0, 0.9, 0.5, 1.3, 0.1, 1.6];
        let t = [hyperboloid(z[0], z[1]), hyperboloid(z[2], z[3]), hyperboloid(z[4], z[5])];
        assert!(face_energy(&fr, &z) >= signed_area(&t) - 1e-15);
        let h = face_pullback(&fr, &z);
        // ½ tr(g⁻¹ h) times area matches the conformal-defect formula plus det term
        assert!(h[0] > 0.0 && h[2] > 0.0 && h[0] * h[2] - h[1] * h[1] > 0.0);
    }
}
