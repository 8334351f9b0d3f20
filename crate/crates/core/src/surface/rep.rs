use super::{SurfaceError, SurfaceGroup, Word, DEFAULT_BALL_CAP};
use crate::hyperbolic::MoebiusMap;
use serde::{Deserialize, Serialize};

/// Homomorphism from the genus-g surface group to PSL(2,ℝ), given by the
/// images of a1, b1, ..., ag, bg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRep {
    pub genus: usize,
    pub images: Vec<MoebiusMap>,
}

impl SurfaceRep {
    pub fn new(genus: usize, images: Vec<MoebiusMap>) -> Result<Self, SurfaceError> {
        SurfaceGroup::new(genus)?;
        if images.len() != 2 * genus {
            return Err(SurfaceError::WrongGeneratorCount { expected: 2 * genus, got: images.len() });
        }
        Ok(SurfaceRep { genus, images })
    }

    pub fn trivial(genus: usize) -> Self {
        SurfaceRep { genus, images: vec![MoebiusMap::identity(); 2 * genus] }
    }

    /// Rotations about i by the given angles.
    pub fn elliptic(genus: usize, angles: &[f64]) -> Result<Self, SurfaceError> {
        Self::new(genus, angles.iter().map(|t| MoebiusMap::rotation(*t)).collect())
    }

    /// Translations along the imaginary axis; the generator lengths are |t|.
    pub fn common_axis(genus: usize, translations: &[f64]) -> Result<Self, SurfaceError> {
        Self::new(genus, translations.iter().map(|t| MoebiusMap::diagonal(*t)).collect())
    }

    /// Parabolic images z ↦ z + s fixing ∞.
    pub fn unipotent(genus: usize, shifts: &[f64]) -> Result<Self, SurfaceError> {
        Self::new(genus, shifts.iter().map(|s| MoebiusMap::raw(1.0, *s, 0.0, 1.0)).collect())
    }

    pub fn group(&self) -> SurfaceGroup {
        SurfaceGroup { genus: self.genus }
    }

    /// Image of a word; products are taken left to right.
    pub fn evaluate(&self, w: &Word) -> MoebiusMap {
        let mut m = MoebiusMap::identity();
        for l in w.letters() {
            let g = self.images[l.gen as usize];
            let g = if l.inv { g.inverse_sl2() } else { g };
            m = m.mul_sl2(&g);
        }
        m * MoebiusMap::identity()
    }

    /// Distance of the image of the relator to the identity.
    pub fn relator_residual(&self) -> f64 {
        self.evaluate(&self.group().relator()).distance(&MoebiusMap::identity())
    }

    pub fn conjugate(&self, h: &MoebiusMap) -> Self {
        let hi = h.inverse();
        SurfaceRep { genus: self.genus, images: self.images.iter().map(|g| *h * *g * hi).collect() }
    }

    /// Conjugation by the orientation-reversing reflection z ↦ -z̄, i.e. by diag(1,-1).
    pub fn apply_sigma(&self) -> Self {
        SurfaceRep {
            genus: self.genus,
            images: self
                .images
                .iter()
                .map(|g| MoebiusMap::new(g.a, -g.b, -g.c, g.d).expect("conjugate has det 1"))
                .collect(),
        }
    }

    /// Translation lengths over the word ball of the given radius.
    pub fn length_spectrum(&self, radius: usize) -> Result<Vec<(Word, f64)>, SurfaceError> {
        Ok(self
            .group()
            .enumerate_ball(radius, DEFAULT_BALL_CAP)?
            .into_iter()
            .map(|w| {
                let l = self.evaluate(&w).translation_length();
                (w, l)
            })
            .collect())
    }

    /// Largest translation length among the generator images.
    pub fn max_generator_displacement(&self) -> f64 {
        self.images.iter().map(|g| g.translation_length()).fold(0.0, f64::max)
    }
}
