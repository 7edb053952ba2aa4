//! Continuous budgets by fixed uniform discretization.
//!
//! The interval `[0, Q]` is replaced by the grid `{0, eps, ..., (N-1) eps}`
//! with `eps = Q / (N - 1)`, and the discrete learner runs on the grid. The
//! pitch balances learning regret on `K N` arms against the per-round
//! Lipschitz loss `L K eps` of restricting to the grid:
//!
//! ```text
//! eps* = (B^2 Q^2 ln T / (L^2 K T))^(1/3)
//! ```
//!
//! `eps*` rarely divides `Q`, so `N` is rounded up and the realized pitch is
//! never coarser than `eps*`.

use crate::dra::{self, RoundObserver};
use crate::env::{Environment, RewardModel};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::space::{ActionSpace, ProblemConfig};
use crate::trace::RunTrace;

pub const DEFAULT_MAX_LEVELS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationPlan {
    /// Unrounded pitch from the balancing formula.
    pub epsilon_star: f64,
    /// Realized pitch `Q / (N - 1)`.
    pub epsilon: f64,
    pub levels: usize,
    /// Set when `N` hit the level cap and `epsilon > epsilon_star`.
    pub capped: bool,
    pub grid: ActionSpace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraParams {
    /// Bounded smoothness constant `B`.
    pub smoothness: f64,
    pub budget: f64,
    pub resources: usize,
    pub horizon: u64,
    /// Replaces the environment's certified Lipschitz constant when set.
    pub lipschitz_override: Option<f64>,
    pub max_levels: usize,
}

impl CraParams {
    pub fn new(budget: f64, resources: usize, horizon: u64) -> Self {
        Self {
            smoothness: 1.0,
            budget,
            resources,
            horizon,
            lipschitz_override: None,
            max_levels: DEFAULT_MAX_LEVELS,
        }
    }
}

pub fn epsilon_star(smoothness: f64, budget: f64, lipschitz: f64, resources: usize, horizon: u64) -> f64 {
    let t = horizon as f64;
    (smoothness.powi(2) * budget.powi(2) * t.ln() / (lipschitz.powi(2) * resources as f64 * t)).cbrt()
}

pub fn plan_discretization(
    smoothness: f64,
    budget: f64,
    lipschitz: f64,
    resources: usize,
    horizon: u64,
    max_levels: usize,
) -> Result<DiscretizationPlan> {
    let positive = |x: f64| x.is_finite() && x > 0.0;
    if !positive(smoothness) || !positive(budget) || !positive(lipschitz) || resources == 0 {
        return Err(Error::Config(format!(
            "discretization needs B, Q, L, K > 0, got B={smoothness} Q={budget} L={lipschitz} K={resources}"
        )));
    }
    if horizon < 2 {
        return Err(Error::Config(format!(
            "discretization needs a horizon of at least 2 (ln T > 0), got {horizon}"
        )));
    }
    if max_levels < 2 {
        return Err(Error::Config("level cap must be at least 2".into()));
    }
    let star = epsilon_star(smoothness, budget, lipschitz, resources, horizon);
    let pitch = star.min(budget);
    let wanted = (budget / pitch - 1e-9).ceil() as usize + 1;
    let (levels, capped) = if wanted > max_levels {
        log::warn!(
            "grid of {wanted} levels exceeds the cap of {max_levels}; using the cap (eps* = {star})"
        );
        (max_levels, true)
    } else {
        (wanted.max(2), false)
    };
    let epsilon = budget / (levels - 1) as f64;
    Ok(DiscretizationPlan {
        epsilon_star: star,
        epsilon,
        levels,
        capped,
        grid: ActionSpace::grid(levels, epsilon)?,
    })
}

/// Plans the grid for `model` and runs the discrete learner on it.
pub fn run_cra(
    model: &RewardModel,
    oracle: &dyn Oracle,
    params: &CraParams,
) -> Result<(RunTrace, DiscretizationPlan)> {
    run_cra_observed(model, oracle, params, &mut ())
}

pub fn run_cra_observed(
    model: &RewardModel,
    oracle: &dyn Oracle,
    params: &CraParams,
    observer: &mut dyn RoundObserver,
) -> Result<(RunTrace, DiscretizationPlan)> {
    if !model.is_continuous() {
        return Err(Error::Unsupported(
            "continuous allocation needs a hinge or concave_exp environment".into(),
        ));
    }
    let lipschitz = match params.lipschitz_override {
        Some(l) => l,
        None => model.lipschitz_constant()?,
    };
    let plan = plan_discretization(
        params.smoothness,
        params.budget,
        lipschitz,
        params.resources,
        params.horizon,
        params.max_levels,
    )?;
    let trace = run_on_plan(model, oracle, &plan, params.resources, params.budget, params.horizon, observer)?;
    Ok((trace, plan))
}

/// Runs the discrete learner on an existing plan's grid.
pub fn run_on_plan(
    model: &RewardModel,
    oracle: &dyn Oracle,
    plan: &DiscretizationPlan,
    resources: usize,
    budget: f64,
    horizon: u64,
    observer: &mut dyn RoundObserver,
) -> Result<RunTrace> {
    if model.resources() != resources {
        return Err(Error::Config(format!(
            "model has {} resources, problem has {resources}",
            model.resources()
        )));
    }
    let cfg = ProblemConfig::new(resources, budget, plan.grid.clone())?;
    let env = Environment::new(model.clone(), plan.grid.clone())?;
    let mut trace = dra::run_observed(&env, oracle, &cfg, horizon, observer)?;
    trace.meta.plan = Some(plan.clone());
    Ok(trace)
}
