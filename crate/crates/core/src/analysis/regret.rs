use crate::error::{Error, Result};
use crate::trace::RunTrace;

use super::ReferenceInterval;

/// Signed `(alpha, beta)`-approximation regret of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    /// `cumulative[t-1] = sum_{s <= t} (alpha beta opt - r(a_s, D))`.
    pub cumulative: Vec<f64>,
    pub final_regret: f64,
}

/// Running sum of `alpha * beta * opt - r(a_t, D)`. The baseline is scaled, so
/// with `alpha * beta < 1` the series can go negative; the sign is kept.
pub fn regret_series(trace: &RunTrace, opt: f64, alpha: f64, beta: f64) -> Result<RegretReport> {
    if !opt.is_finite() || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Numeric("regret baseline must be finite".into()));
    }
    let baseline = alpha * beta * opt;
    let cumulative: Vec<f64> = trace
        .expected_rewards()
        .iter()
        .scan(0.0, |acc, r| {
            *acc += baseline - r;
            Some(*acc)
        })
        .collect();
    let final_regret = cumulative.last().copied().unwrap_or(0.0);
    Ok(RegretReport {
        cumulative,
        final_regret,
    })
}

/// Regret of a gridded run against the continuous optimum, split into
/// learning regret on the grid and the discretization shortfall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraDecomposition {
    /// `T alpha beta opt_grid - sum r(a_t, D)`.
    pub learning: f64,
    /// `T alpha beta (opt_ref - opt_grid)` at the two ends of the reference interval.
    pub discretization_lo: f64,
    pub discretization_hi: f64,
}

impl CraDecomposition {
    /// Regret against the conservative (upper) end of the reference interval.
    pub fn total_hi(&self) -> f64 {
        self.learning + self.discretization_hi
    }

    pub fn total_lo(&self) -> f64 {
        self.learning + self.discretization_lo
    }
}

pub fn decompose_cra(
    trace: &RunTrace,
    opt_grid: f64,
    reference: &ReferenceInterval,
    alpha: f64,
    beta: f64,
) -> Result<CraDecomposition> {
    let learning = regret_series(trace, opt_grid, alpha, beta)?.final_regret;
    let rounds = trace.len() as f64;
    let scale = rounds * alpha * beta;
    Ok(CraDecomposition {
        learning,
        discretization_lo: scale * (reference.lo - opt_grid),
        discretization_hi: scale * (reference.hi - opt_grid),
    })
}
