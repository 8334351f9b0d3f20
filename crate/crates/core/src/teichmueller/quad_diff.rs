use super::{Mesh, TeichError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Quadratic differential φ dz², one coefficient per mesh face in the z-chart.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadDiff {
    pub coeffs: Vec<Complex64>,
}

impl QuadDiff {
    pub fn zero(n: usize) -> Self {
        QuadDiff { coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn sub(&self, o: &QuadDiff) -> QuadDiff {
        QuadDiff { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, o: &QuadDiff) -> QuadDiff {
        QuadDiff { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> QuadDiff {
        QuadDiff { coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    /// Largest pointwise norm |φ|/α.
    pub fn max_norm(&self, mesh: &Mesh) -> f64 {
        self.coeffs.iter().zip(&mesh.conformal).map(|(c, a)| c.norm() / a).fold(0.0, f64::max)
    }
}

/// Weil–Petersson Hermitian pairing Σ φ ψ̄ / α² · area over the faces.
pub fn wp_pair(phi: &QuadDiff, psi: &QuadDiff, mesh: &Mesh) -> Result<Complex64, TeichError> {
    let faces = mesh.faces.len();
    for q in [phi, psi] {
        if q.len() != faces {
            return Err(TeichError::IndexMismatch { got: q.len(), faces });
        }
    }
    Ok((0..faces)
        .map(|f| phi.coeffs[f] * psi.coeffs[f].conj() / (mesh.conformal[f] * mesh.conformal[f]) * mesh.face_area[f])
        .sum())
}

pub fn wp_norm(phi: &QuadDiff, mesh: &Mesh) -> Result<f64, TeichError> {
    Ok(wp_pair(phi, phi, mesh)?.re.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teichmueller::{build_mesh, FNCoords};

    #[test]
    fn hermitian_and_positive() {
        let m = build_mesh(&FNCoords::new(vec![2.0; 3], vec![0.0; 3]).unwrap(), 0.5).unwrap();
        let n = m.faces.len();
        let phi = QuadDiff { coeffs: (0..n).map(|k| Complex64::new((k as f64).sin(), 0.3)).collect() };
        let psi = QuadDiff { coeffs: (0..n).map(|k| Complex64::new(0.1, (k as f64).cos())).collect() };
        let a = wp_pair(&phi, &psi, &m).unwrap();
        let b = wp_pair(&psi, &phi, &m).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
        assert!(wp_norm(&phi, &m).unwrap() > 0.0);
        assert!(wp_pair(&phi, &QuadDiff::zero(3), &m).is_err());
    }
}
