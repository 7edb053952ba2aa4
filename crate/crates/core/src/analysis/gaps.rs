use crate::env::Environment;
use crate::error::{Error, Result};
use crate::oracle::solve_exact_dp;
use crate::space::{for_each_feasible, objective, ArmId, ArmMatrix, MeanMatrix, ProblemConfig};

/// Largest `N^K` the gap enumeration will attempt.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Gaps at or below this are treated as zero. Mathematically tied allocations
/// can differ by a few ulps once summed.
pub const GAP_TOLERANCE: f64 = 1e-12;

/// Reward gaps `max(0, alpha * opt - r(a))` aggregated per base arm.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Smallest positive gap among allocations using the arm; `+inf` if none.
    pub delta_min_per_arm: MeanMatrix,
    /// Largest positive gap among allocations using the arm; 0 if none.
    pub delta_max_per_arm: MeanMatrix,
    /// Minimum over the finite per-arm entries; `+inf` when every allocation
    /// is within `alpha * opt`.
    pub delta_min: f64,
    pub delta_max: f64,
    pub opt: f64,
    pub alpha: f64,
}

impl GapReport {
    /// Arms that appear in at least one allocation with a positive gap.
    pub fn finite_gaps(&self) -> impl Iterator<Item = (ArmId, f64)> + '_ {
        self.delta_min_per_arm
            .iter()
            .filter(|(_, d)| d.is_finite())
            .map(|(arm, &d)| (arm, d))
    }

    pub fn has_positive_gaps(&self) -> bool {
        self.delta_min.is_finite()
    }
}

pub fn compute_gaps(env: &Environment, cfg: &ProblemConfig, alpha: f64) -> Result<GapReport> {
    if env.space() != cfg.space() {
        return Err(Error::Config(
            "environment action space does not match the problem".into(),
        ));
    }
    gaps_from_means(&env.mean_matrix()?, cfg, alpha)
}

/// Full enumeration of feasible allocations. Guarded by [`ENUMERATION_LIMIT`].
pub fn gaps_from_means(means: &MeanMatrix, cfg: &ProblemConfig, alpha: f64) -> Result<GapReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let size = (cfg.levels() as f64).powi(cfg.resources() as i32);
    if size > ENUMERATION_LIMIT {
        return Err(Error::EnumerationInfeasible(format!(
            "N^K = {}^{} exceeds {ENUMERATION_LIMIT:e}",
            cfg.levels(),
            cfg.resources()
        )));
    }
    let opt = solve_exact_dp(means, cfg)?.value;
    let target = alpha * opt;
    let mut lo = ArmMatrix::filled(cfg.resources(), cfg.levels(), f64::INFINITY);
    let mut hi = ArmMatrix::filled(cfg.resources(), cfg.levels(), 0.0);
    for_each_feasible(cfg, |levels| {
        let gap = (target - objective(means, levels)).max(0.0);
        if gap <= GAP_TOLERANCE {
            return;
        }
        for (k, &a) in levels.iter().enumerate() {
            let arm = ArmId::new(k, a);
            lo[arm] = f64::min(lo[arm], gap);
            hi[arm] = f64::max(hi[arm], gap);
        }
    });
    let delta_min = lo.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    let delta_max = hi.as_slice().iter().copied().fold(0.0, f64::max);
    Ok(GapReport {
        delta_min_per_arm: lo,
        delta_max_per_arm: hi,
        delta_min,
        delta_max,
        opt,
        alpha,
    })
}
