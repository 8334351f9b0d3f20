//! Invariant batteries run by `surfdom verify`, each producing a pass/fail
//! table.

mod suites;

use crate::io::read_mesh_parts;
use crate::psi::PsiOptions;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use suites::{random_fn_point, reference_surface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Busemann,
    Angles,
    Energy,
    Hopf,
    Properness,
    Identity,
    Continuity,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Busemann, Suite::Angles, Suite::Energy, Suite::Hopf, Suite::Properness, Suite::Identity, Suite::Continuity];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Busemann => "busemann",
            Suite::Angles => "angles",
            Suite::Energy => "energy",
            Suite::Hopf => "hopf",
            Suite::Properness => "properness",
            Suite::Identity => "identity",
            Suite::Continuity => "continuity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}; expected one of {}", Suite::ALL.map(Suite::name).join(", ")))
    }
}

/// One row of a suite table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity; compare with `tolerance` as described in `detail`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when value ≤ tolerance.
    pub fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: value <= tolerance, value, tolerance, detail: detail.into() }
    }

    /// Passes when value ≥ tolerance.
    pub fn at_least(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: value >= tolerance, value, tolerance, detail: detail.into() }
    }

    pub fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, value: f64::from(u8::from(passed)), tolerance: 1.0, detail: detail.into() }
    }

    pub fn error(name: &str, err: impl fmt::Display) -> Self {
        Check { name: name.into(), passed: false, value: f64::NAN, tolerance: f64::NAN, detail: format!("error: {err}") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Fixed-width table, one line per check.
    pub fn table(&self) -> String {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut s = format!("suite {} (seed {})\n", self.suite, self.seed);
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{mark}  {:<w$}  {:>12.4e}  {:>10.2e}  {}\n", c.name, c.value, c.tolerance, c.detail));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Mesh edge for the energy and hopf suites; refinement checks also use twice this.
    pub target_edge: f64,
    /// Number of random surfaces in the properness and identity suites.
    pub samples: usize,
    pub psi: PsiOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, target_edge: 0.2, samples: 2, psi: PsiOptions::default() }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let checks = match suite {
        Suite::Busemann => suites::busemann_suite(opts),
        Suite::Angles => suites::angles_suite(opts),
        Suite::Energy => suites::energy_suite(opts),
        Suite::Hopf => suites::hopf_suite(opts),
        Suite::Properness => suites::properness_suite(opts),
        Suite::Identity => suites::identity_suite(opts),
        Suite::Continuity => suites::continuity_suite(opts),
    };
    SuiteReport { suite, seed: opts.seed, checks }
}

/// Largest pairing displacement accepted for a stored mesh.
pub const PAIRING_TOL: f64 = 1e-7;

/// Checks on a mesh file: it parses, its pairings are holonomy isometries
/// and the stored conformal factors match the vertices.
pub fn check_mesh_file(path: &Path) -> Vec<Check> {
    let parts = match read_mesh_parts(path) {
        Ok(p) => p,
        Err(e) => return vec![Check::error("mesh parse", e)],
    };
    let mut out = vec![Check::flag("mesh parse", true, path.display().to_string())];
    out.push(Check::at_most("pairing isometry", parts.pairing_error(), PAIRING_TOL, "max dist(g·v, v') over paired vertices"));
    out.push(match parts.into_mesh() {
        Ok(m) => Check::flag("mesh validity", true, format!("{} faces, area {:.6}", m.faces.len(), m.total_area())),
        Err(e) => Check::error("mesh validity", e),
    });
    out
}

