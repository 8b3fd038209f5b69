use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hdg::TauPolicy;
use crate::mesh::DiagonalPolicy;

/// A scalar broadcast to every level, or one value per level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerLevel {
    One(usize),
    Many(Vec<usize>),
}

impl PerLevel {
    fn len(&self) -> Option<usize> {
        match self {
            Self::One(_) => None,
            Self::Many(v) => Some(v.len()),
        }
    }

    fn get(&self, i: usize) -> usize {
        match self {
            Self::One(v) => *v,
            Self::Many(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub n_sub: PerLevel,
    pub n_seg: PerLevel,
    pub n_fine: PerLevel,
    #[serde(default)]
    pub diagonal: DiagonalPolicy,
}

/// Stabilization magnitude: a number, or `"H^-1"` resolved per level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauValue {
    Number(f64),
    Symbol(TauSymbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauSymbol {
    #[serde(rename = "H^-1")]
    InverseH,
}

impl TauValue {
    pub fn resolve(self, big_h: f64) -> f64 {
        match self {
            Self::Number(v) => v,
            Self::Symbol(TauSymbol::InverseH) => 1.0 / big_h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseSpaceKind {
    #[default]
    Polynomial,
    Multiscale,
}

fn default_n_cell() -> usize {
    64
}

fn default_tau_policy() -> TauPolicy {
    TauPolicy::Uniform
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub k: usize,
    pub l: usize,
    #[serde(default = "default_tau_policy")]
    pub tau_policy: TauPolicy,
    pub tau: TauValue,
    #[serde(default)]
    pub coarse_space: CoarseSpaceKind,
    /// Half-width of the segment neighborhood of the multiscale space;
    /// `H / 2` when absent.
    pub half_width: Option<f64>,
    #[serde(default = "default_n_cell")]
    pub n_cell: usize,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub id: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RateScale {
    #[default]
    #[serde(rename = "H")]
    CoarseH,
    #[serde(rename = "h")]
    FineH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    TwoLevel,
    Monolithic,
}

fn default_coarse_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySettings {
    #[serde(default)]
    pub rate_scale: RateScale,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "default_coarse_tol")]
    pub coarse_tol: f64,
    #[serde(default)]
    pub allow_underresolved: bool,
    /// Cells per axis of the single-subdomain reference mesh.
    pub reference_n_fine: Option<usize>,
    /// Degree of the reference solve; `min(k + 1, 4)` when absent.
    pub reference_k: Option<usize>,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            rate_scale: RateScale::default(),
            solver: SolverKind::default(),
            coarse_tol: default_coarse_tol(),
            allow_underresolved: false,
            reference_n_fine: None,
            reference_k: None,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_csv() -> String {
    "convergence.csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default)]
    pub vtk: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            csv: default_csv(),
            vtk: false,
        }
    }
}

/// Mesh parameters of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelParams {
    pub n_sub: usize,
    pub n_seg: usize,
    pub n_fine: usize,
}

/// Study definition read from a sectioned key-value file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub mesh: MeshConfig,
    pub discretization: DiscretizationConfig,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub study: StudySettings,
    #[serde(default)]
    pub output: OutputConfig,
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn n_levels(&self) -> usize {
        let m = &self.mesh;
        [m.n_sub.len(), m.n_seg.len(), m.n_fine.len()].into_iter().flatten().max().unwrap_or(1)
    }

    pub fn levels(&self) -> Vec<LevelParams> {
        let m = &self.mesh;
        (0..self.n_levels())
            .map(|i| LevelParams {
                n_sub: m.n_sub.get(i),
                n_seg: m.n_seg.get(i),
                n_fine: m.n_fine.get(i),
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("key '{key}': {msg}")));
        let n = self.n_levels();
        for (key, v) in [("mesh.n_sub", &self.mesh.n_sub), ("mesh.n_seg", &self.mesh.n_seg), ("mesh.n_fine", &self.mesh.n_fine)] {
            if let Some(len) = v.len() {
                if len != n {
                    return bad(key, format!("{len} entries, expected {n} like the longest list"));
                }
                if len == 0 {
                    return bad(key, "empty list".into());
                }
            }
            if (0..n).any(|i| v.get(i) == 0) {
                return bad(key, "entries must be positive".into());
            }
        }
        let d = &self.discretization;
        if d.k > 4 {
            return bad("discretization.k", format!("{} exceeds 4", d.k));
        }
        if d.l > 4 {
            return bad("discretization.l", format!("{} exceeds 4", d.l));
        }
        if let TauValue::Number(t) = d.tau {
            if !(t > 0.0) {
                return bad("discretization.tau", format!("{t} is not positive"));
            }
        }
        if let Some(w) = d.half_width {
            if !(w > 0.0) {
                return bad("discretization.half_width", format!("{w} is not positive"));
            }
        }
        if d.n_cell < 4 {
            return bad("discretization.n_cell", format!("{} is below 4", d.n_cell));
        }
        if !super::problems::REGISTRY.contains(&self.problem.id.as_str()) {
            return bad("problem.id", format!("unknown id '{}'", self.problem.id));
        }
        if !(self.problem.alpha > 0.0) {
            return bad("problem.alpha", format!("{} is not positive", self.problem.alpha));
        }
        if let Some(e) = self.problem.eps {
            if !(e > 0.0) {
                return bad("problem.eps", format!("{e} is not positive"));
            }
        }
        if !(self.study.coarse_tol > 0.0) {
            return bad("study.coarse_tol", "must be positive".into());
        }
        if let Some(k) = self.study.reference_k {
            if k > 4 {
                return bad("study.reference_k", format!("{k} exceeds 4"));
            }
        }
        Ok(())
    }
}
