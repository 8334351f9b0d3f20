use super::{read_text, rep_file::read_rep, IoError};
use crate::harmonic::SolverOptions;
use crate::psi::PsiOptions;
use crate::surface::SurfaceRep;
use crate::teichmueller::{fn_to_holonomy, FNCoords};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Where a representation comes from: a rep file or a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RepSpec {
    File {
        path: PathBuf,
        #[serde(default)]
        allow_residual: bool,
    },
    Trivial,
    Elliptic { angles: Vec<f64> },
    CommonAxis { translations: Vec<f64> },
    Unipotent { shifts: Vec<f64> },
    /// Holonomy of the hyperbolic structure with these FN coordinates
    /// (lengths then twists).
    Fuchsian { coords: Vec<f64> },
    /// The Fuchsian holonomy composed with the orientation reversal σ.
    Sigma { coords: Vec<f64> },
}

impl RepSpec {
    pub fn build(&self, genus: usize) -> Result<SurfaceRep, IoError> {
        let rep = match self {
            RepSpec::File { path, allow_residual } => read_rep(path, *allow_residual)?,
            RepSpec::Trivial => SurfaceRep::trivial(genus),
            RepSpec::Elliptic { angles } => SurfaceRep::elliptic(genus, angles)?,
            RepSpec::CommonAxis { translations } => SurfaceRep::common_axis(genus, translations)?,
            RepSpec::Unipotent { shifts } => SurfaceRep::unipotent(genus, shifts)?,
            RepSpec::Fuchsian { coords } => fn_to_holonomy(&FNCoords::from_vec(coords)?)?,
            RepSpec::Sigma { coords } => fn_to_holonomy(&FNCoords::from_vec(coords)?)?.apply_sigma(),
        };
        if rep.genus != genus {
            return Err(IoError::Config(format!("representation has genus {}, config says {genus}", rep.genus)));
        }
        Ok(rep)
    }
}

impl std::str::FromStr for RepSpec {
    type Err = IoError;

    /// `trivial`, `<family>:<comma-separated numbers>` for the families
    /// elliptic, common-axis, unipotent, fuchsian and sigma, `file:<path>`,
    /// or a bare path.
    fn from_str(s: &str) -> Result<Self, IoError> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>, IoError> {
            rest.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| IoError::Config(format!("bad number {v:?} in {s:?}"))))
                .collect()
        };
        Ok(match kind {
            "trivial" if rest.is_empty() => RepSpec::Trivial,
            "elliptic" => RepSpec::Elliptic { angles: nums()? },
            "common-axis" => RepSpec::CommonAxis { translations: nums()? },
            "unipotent" => RepSpec::Unipotent { shifts: nums()? },
            "fuchsian" => RepSpec::Fuchsian { coords: nums()? },
            "sigma" => RepSpec::Sigma { coords: nums()? },
            "file" => RepSpec::File { path: rest.into(), allow_residual: false },
            _ => RepSpec::File { path: s.into(), allow_residual: false },
        })
    }
}

impl RepSpec {
    /// The same family with every parameter multiplied by t (files and
    /// Fuchsian families are returned unchanged).
    pub fn scaled(&self, t: f64) -> RepSpec {
        let sc = |v: &[f64]| v.iter().map(|x| x * t).collect();
        match self {
            RepSpec::Elliptic { angles } => RepSpec::Elliptic { angles: sc(angles) },
            RepSpec::CommonAxis { translations } => RepSpec::CommonAxis { translations: sc(translations) },
            RepSpec::Unipotent { shifts } => RepSpec::Unipotent { shifts: sc(shifts) },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub target_edge: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { target_edge: PsiOptions::default().target_edge }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub solver: f64,
    pub solver_max_iter: usize,
    pub grad: f64,
    pub forward: f64,
    pub fd_step: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let p = PsiOptions::default();
        Tolerances {
            solver: p.solver.tol,
            solver_max_iter: p.solver.max_iter,
            grad: p.grad_tol,
            forward: p.forward_tol,
            fd_step: p.fd_step,
            max_iter: p.max_iter,
        }
    }
}

/// Experiment configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub genus: usize,
    /// FN coordinates (lengths then twists) of the starting surface.
    #[serde(default)]
    pub fn_init: Option<Vec<f64>>,
    #[serde(default)]
    pub j: Option<RepSpec>,
    #[serde(default)]
    pub rho: Option<RepSpec>,
    #[serde(default = "default_radii")]
    pub radii: Vec<usize>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_radii() -> Vec<usize> {
    vec![crate::lipschitz::DEFAULT_RADIUS]
}

const MAX_RADIUS: usize = 10;

impl ExperimentConfig {
    /// Parse and validate; relative file paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, IoError> {
        let mut cfg: ExperimentConfig = toml::from_str(text)?;
        for spec in [&mut cfg.j, &mut cfg.rho].into_iter().flatten() {
            if let RepSpec::File { path, .. } = spec {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        if let Some(out) = &mut cfg.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&read_text(path)?, base)
    }

    pub fn to_toml(&self) -> Result<String, IoError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: String| Err(IoError::Config(m));
        if self.genus < 2 {
            return bad(format!("genus must be at least 2, got {}", self.genus));
        }
        if let Some(x) = &self.fn_init {
            let c = FNCoords::from_vec(x)?;
            if c.dim() != 6 * self.genus - 6 {
                return bad(format!("fn_init has {} entries, genus {} needs {}", x.len(), self.genus, 6 * self.genus - 6));
            }
            fn_to_holonomy(&c)?;
        }
        for spec in [&self.j, &self.rho].into_iter().flatten() {
            if let RepSpec::File { path, .. } = spec {
                if !path.is_file() {
                    return bad(format!("representation file {} does not exist", path.display()));
                }
            }
            spec.build(self.genus)?;
        }
        if let Some(RepSpec::File { .. } | RepSpec::Fuchsian { .. } | RepSpec::Sigma { .. }) = &self.j {
            // file contents checked by the consumer
        } else if self.j.is_some() {
            return bad("j must be Fuchsian (a file or FN coordinates)".into());
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| *r == 0 || *r > MAX_RADIUS) {
            return bad(format!("radii must be non-empty and within 1..={MAX_RADIUS}, got {:?}", self.radii));
        }
        let e = self.mesh.target_edge;
        if !(e > 0.0 && e <= 2.0) {
            return bad(format!("mesh.target_edge must lie in (0, 2], got {e}"));
        }
        let t = &self.tolerances;
        for (name, v) in [("solver", t.solver), ("grad", t.grad), ("forward", t.forward), ("fd_step", t.fd_step)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        if t.max_iter == 0 || t.solver_max_iter == 0 {
            return bad("iteration caps must be positive".into());
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.tolerances.solver, max_iter: self.tolerances.solver_max_iter, ..SolverOptions::default() }
    }

    pub fn psi_options(&self) -> PsiOptions {
        PsiOptions {
            target_edge: self.mesh.target_edge,
            fd_step: self.tolerances.fd_step,
            grad_tol: self.tolerances.grad,
            max_iter: self.tolerances.max_iter,
            forward_tol: self.tolerances.forward,
            solver: self.solver_options(),
            ..PsiOptions::default()
        }
    }

    pub fn fn_init(&self) -> Result<Option<FNCoords>, IoError> {
        Ok(self.fn_init.as_deref().map(FNCoords::from_vec).transpose()?)
    }

    pub fn j(&self) -> Result<Option<SurfaceRep>, IoError> {
        self.j.as_ref().map(|s| s.build(self.genus)).transpose()
    }

    pub fn rho(&self) -> Result<Option<SurfaceRep>, IoError> {
        self.rho.as_ref().map(|s| s.build(self.genus)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
seed = 11
genus = 2
fn_init = [2.0, 2.3, 2.6, 0.3, -0.2, 0.4]
radii = [2, 4]

[j]
kind = "fuchsian"
coords = [2.0, 2.3, 2.6, 0.3, -0.2, 0.4]

[rho]
kind = "elliptic"
angles = [0.1, 0.2, 0.3, 0.4]

[mesh]
target_edge = 0.5
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(TEXT, Path::new(".")).unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.psi_options().target_edge, 0.5);
        assert_eq!(cfg.rho().unwrap().unwrap(), SurfaceRep::elliptic(2, &[0.1, 0.2, 0.3, 0.4]).unwrap());
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap(), Path::new(".")).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn spec_strings() {
        assert_eq!("trivial".parse::<RepSpec>().unwrap(), RepSpec::Trivial);
        assert_eq!("elliptic:0.1, 0.2,0.3,0.4".parse::<RepSpec>().unwrap(), RepSpec::Elliptic { angles: vec![0.1, 0.2, 0.3, 0.4] });
        assert!(matches!("rho.txt".parse::<RepSpec>().unwrap(), RepSpec::File { .. }));
        assert!("common-axis:1,x".parse::<RepSpec>().is_err());
        assert_eq!(
            RepSpec::CommonAxis { translations: vec![0.2, -0.4] }.scaled(0.5),
            RepSpec::CommonAxis { translations: vec![0.1, -0.2] }
        );
    }

    #[test]
    fn validation_failures() {
        let with = |from: &str, to: &str| ExperimentConfig::from_toml(&TEXT.replace(from, to), Path::new("."));
        assert!(with("target_edge = 0.5", "target_edge = -1").is_err());
        assert!(with("radii = [2, 4]", "radii = [0]").is_err());
        assert!(with("fn_init = [2.0, 2.3, 2.6, 0.3, -0.2, 0.4]", "fn_init = [2.0]").is_err());
        assert!(with("kind = \"elliptic\"\nangles = [0.1, 0.2, 0.3, 0.4]", "kind = \"file\"\npath = \"missing.txt\"").is_err());
        assert!(with("seed = 11", "seed = 11\nbogus = 1").is_err());
    }
}
