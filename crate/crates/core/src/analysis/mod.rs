//! Ground truth for judging a run: optimal values, reward gaps, regret
//! series, the CUCB regret bound formulas and a confidence-coverage check.
//!
//! Everything here may read true means. Learner code never does.

mod bounds;
mod coverage;
mod gaps;
mod regret;

pub use bounds::{
    scaling_shape, theorem1_dependent_bound, theorem1_independent_bound, theorem2_scaling_check,
    BoundParams,
    ScalingReport, SCALING_SLACK,
};
pub use coverage::{
    coverage_budget, lemma1_diagnostic, CoverageMonitor, CoverageReport, Snapshot,
    SnapshotRecorder,
};
pub use gaps::{compute_gaps, gaps_from_means, GapReport, ENUMERATION_LIMIT, GAP_TOLERANCE};
pub use regret::{decompose_cra, regret_series, CraDecomposition, RegretReport};

use crate::env::{Environment, RewardModel};
use crate::error::{Error, Result};
use crate::oracle::solve_exact_dp;
use crate::space::{ActionSpace, ProblemConfig};

/// `opt(D)`: the exact optimum of the true means over the problem's action space.
pub fn compute_opt(env: &Environment, cfg: &ProblemConfig) -> Result<f64> {
    if env.space() != cfg.space() {
        return Err(Error::Config(
            "environment action space does not match the problem".into(),
        ));
    }
    Ok(solve_exact_dp(&env.mean_matrix()?, cfg)?.value)
}

/// Bracket on the optimum over the continuous interval `[0, Q]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceInterval {
    /// Exact optimum on the reference grid; attainable, so a lower bound.
    pub lo: f64,
    /// `lo + L K pitch`; no continuous allocation can beat it.
    pub hi: f64,
    pub pitch: f64,
}

impl ReferenceInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Solves on a grid of pitch `Q / refinement` and widens by the Lipschitz
/// loss of rounding any continuous allocation down to that grid.
pub fn compute_opt_continuous_reference(
    model: &RewardModel,
    budget: f64,
    resources: usize,
    refinement: usize,
) -> Result<ReferenceInterval> {
    if refinement < 2 {
        return Err(Error::Config(format!(
            "reference refinement must be at least 2, got {refinement}"
        )));
    }
    let lipschitz = model.lipschitz_constant()?;
    let pitch = budget / refinement as f64;
    let grid = ActionSpace::grid(refinement + 1, pitch)?;
    let cfg = ProblemConfig::new(resources, budget, grid.clone())?;
    let env = Environment::new(model.clone(), grid)?;
    let lo = compute_opt(&env, &cfg)?;
    Ok(ReferenceInterval {
        lo,
        hi: lo + lipschitz * resources as f64 * pitch,
        pitch,
    })
}
