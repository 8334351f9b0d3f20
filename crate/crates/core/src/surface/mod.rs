//! Surface groups, their representations into PSL(2,ℝ), length spectra,
//! Euler class and detection of reducible (parabolic) representations.

mod euler;
mod group;
mod parabolic;
mod rep;

pub use euler::euler_class;
pub use group::{Letter, SurfaceGroup, Word, DEFAULT_BALL_CAP};
pub use parabolic::{additive_spectrum_residual, detect_parabolic, FixedPoint, ParabolicData};
pub use rep::SurfaceRep;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("genus must be at least 2, got {0}")]
    BadGenus(usize),
    #[error("expected {expected} generator images, got {got}")]
    WrongGeneratorCount { expected: usize, got: usize },
    #[error("cannot parse word {0:?}")]
    BadWord(String),
    #[error("word ball of {requested} elements exceeds the cap {cap}")]
    BallTooLarge { requested: usize, cap: usize },
    #[error("relator residual {0:e} exceeds tolerance")]
    RelatorViolation(f64),
    #[error("Euler class lift is ambiguous (raw value {0})")]
    LiftAmbiguity(f64),
    #[error(transparent)]
    Geom(#[from] crate::hyperbolic::GeomError),
}
