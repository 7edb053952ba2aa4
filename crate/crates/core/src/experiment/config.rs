//! Experiment configuration file (TOML).
//!
//! ```toml
//! mode = "dra"                  # dra | cra | oracle-check | bounds
//! seed = 7
//! replications = 20
//! horizons = [100, 1000, 10000]
//!
//! [problem]
//! resources = 3                 # K
//! budget = 5.0                  # Q
//! levels = 4                    # N, integer budgets 0..N-1 (dra, bounds)
//!
//! [reward]
//! family = "table"              # table | hinge | concave_exp
//! p = [[0.1, 0.5, 0.6, 0.7], [0.2, 0.3, 0.9, 0.9], [0.0, 0.1, 0.2, 0.3]]
//!
//! [oracle]
//! kind = "exact_dp"             # exact_dp | greedy
//! alpha = 1.0
//! beta = 1.0
//!
//! [discretization]              # cra only
//! smoothness = 1.0              # B
//! # lipschitz = 2.0             # overrides the model's certified constant
//! max_levels = 4096
//! reference_refinement = 4096
//!
//! [output]
//! traces = false                # per-replication trace CSVs
//! curve_stride = 1              # write every k-th round of the regret curve
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cra::DEFAULT_MAX_LEVELS;
use crate::env::{RewardFamily, RewardModel};
use crate::error::{Error, Result};
use crate::oracle::{OracleKind, OracleSpec};
use crate::space::MeanMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dra,
    Cra,
    OracleCheck,
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub resources: usize,
    pub budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardSpec {
    Table { p: Vec<Vec<f64>> },
    Hinge { theta: Vec<f64> },
    ConcaveExp { p: Vec<f64>, theta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_kind")]
    pub kind: OracleKind,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            kind: OracleKind::ExactDp,
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

impl OracleConfig {
    pub fn spec(&self) -> OracleSpec {
        OracleSpec {
            kind: self.kind,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSpec {
    #[serde(default = "one")]
    pub smoothness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default = "default_max_levels")]
    pub max_levels: usize,
    #[serde(default = "default_max_levels")]
    pub reference_refinement: usize,
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        Self {
            smoothness: 1.0,
            lipschitz: None,
            max_levels: DEFAULT_MAX_LEVELS,
            reference_refinement: DEFAULT_MAX_LEVELS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckSpec {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_check_resources")]
    pub max_resources: usize,
    #[serde(default = "default_check_levels")]
    pub max_levels: usize,
    #[serde(default = "default_check_budget")]
    pub max_budget: usize,
}

impl Default for OracleCheckSpec {
    fn default() -> Self {
        Self {
            instances: default_instances(),
            max_resources: default_check_resources(),
            max_levels: default_check_levels(),
            max_budget: default_check_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub traces: bool,
    #[serde(default = "default_stride")]
    pub curve_stride: u64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            traces: false,
            curve_stride: 1,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_kind() -> OracleKind {
    OracleKind::ExactDp
}
fn default_max_levels() -> usize {
    DEFAULT_MAX_LEVELS
}
fn default_instances() -> usize {
    200
}
fn default_check_resources() -> usize {
    4
}
fn default_check_levels() -> usize {
    5
}
fn default_check_budget() -> usize {
    8
}
fn default_stride() -> u64 {
    1
}
fn default_replications() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub horizons: Vec<u64>,
    pub problem: Option<ProblemSpec>,
    pub reward: Option<RewardSpec>,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub discretization: DiscretizationSpec,
    #[serde(default)]
    pub oracle_check: OracleCheckSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn problem(&self) -> Result<&ProblemSpec> {
        self.problem
            .as_ref()
            .ok_or_else(|| Error::Config("problem: section is required for this mode".into()))
    }

    pub fn reward(&self) -> Result<&RewardSpec> {
        self.reward
            .as_ref()
            .ok_or_else(|| Error::Config("reward: section is required for this mode".into()))
    }

    /// The reward model with `seed`. Hinge rewards normalize by the problem budget.
    pub fn reward_model(&self, seed: u64) -> Result<RewardModel> {
        let problem = self.problem()?;
        let family = match self.reward()? {
            RewardSpec::Table { p } => RewardFamily::Table {
                p: MeanMatrix::from_rows(p.clone())
                    .map_err(|e| Error::Config(format!("reward.p: {e}")))?,
            },
            RewardSpec::Hinge { theta } => RewardFamily::Hinge {
                theta: theta.clone(),
                budget: problem.budget,
            },
            RewardSpec::ConcaveExp { p, theta } => RewardFamily::ConcaveExp {
                p: p.clone(),
                theta: theta.clone(),
            },
        };
        RewardModel::new(family, seed).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("reward: {msg}")),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if self.replications == 0 {
            return bad("replications", "must be at least 1".into());
        }
        if self.output.curve_stride == 0 {
            return bad("output.curve_stride", "must be at least 1".into());
        }
        self.oracle
            .spec()
            .validate()
            .or_else(|e| bad("oracle", e.to_string()))?;
        if self.oracle.kind == OracleKind::ExactDp && self.oracle.alpha != 1.0 {
            return bad("oracle.alpha", "exact_dp has alpha = 1".into());
        }
        match self.mode {
            Mode::OracleCheck => {
                let c = &self.oracle_check;
                if c.instances == 0 || c.max_resources == 0 || c.max_levels == 0 {
                    return bad("oracle_check", "instances, max_resources and max_levels must be >= 1".into());
                }
                return Ok(());
            }
            Mode::Dra | Mode::Cra | Mode::Bounds => {}
        }
        if self.horizons.is_empty() {
            return bad("horizons", "must list at least one horizon".into());
        }
        if self.horizons[0] == 0 || self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return bad("horizons", "must be positive and strictly increasing".into());
        }
        let problem = self.problem()?;
        if problem.resources == 0 {
            return bad("problem.resources", "must be at least 1".into());
        }
        if !(problem.budget.is_finite() && problem.budget >= 0.0) {
            return bad("problem.budget", format!("must be finite and >= 0, got {}", problem.budget));
        }
        let model = self.reward_model(0)?;
        if model.resources() != problem.resources {
            return bad(
                "reward",
                format!(
                    "describes {} resources, problem.resources = {}",
                    model.resources(),
                    problem.resources
                ),
            );
        }
        match self.mode {
            Mode::Dra | Mode::Bounds => {
                let Some(levels) = problem.levels else {
                    return bad("problem.levels", "required for integer budgets".into());
                };
                if levels == 0 || (levels - 1) as f64 > problem.budget {
                    return bad("problem.levels", format!("need 1 <= N <= Q + 1, got N = {levels}"));
                }
                if let RewardSpec::Table { p } = self.reward()? {
                    if p.iter().any(|row| row.len() != levels) {
                        return bad("reward.p", format!("every row needs {levels} entries"));
                    }
                }
            }
            Mode::Cra => {
                if !model.is_continuous() {
                    return bad("reward.family", "cra needs hinge or concave_exp".into());
                }
                if problem.budget.is_nan() || problem.budget <= 0.0 {
                    return bad("problem.budget", "cra needs a positive budget".into());
                }
                if self.horizons[0] < 2 {
                    return bad("horizons", "cra needs horizons >= 2".into());
                }
                let d = &self.discretization;
                if !(d.smoothness.is_finite() && d.smoothness > 0.0) {
                    return bad("discretization.smoothness", "must be > 0".into());
                }
                if let Some(l) = d.lipschitz {
                    if !(l.is_finite() && l > 0.0) {
                        return bad("discretization.lipschitz", "must be > 0".into());
                    }
                }
                if d.max_levels < 2 || d.reference_refinement < 2 {
                    return bad("discretization", "max_levels and reference_refinement must be >= 2".into());
                }
            }
            Mode::OracleCheck => unreachable!(),
        }
        Ok(())
    }
}
