//! Closed-form regret bounds for the discrete learner and the scaling shape
//! check for the discretized learner.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::GapReport;

/// Allowed growth between successive normalized regrets in
/// [`theorem2_scaling_check`].
pub const SCALING_SLACK: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    /// Bounded smoothness constant `B`. The separable objective sums one mean
    /// per resource, so `B = 1` holds.
    pub smoothness: f64,
    pub lipschitz: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            smoothness: 1.0,
            lipschitz: 1.0,
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.smoothness) || !positive(self.lipschitz) {
            return Err(Error::Config("B and L must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0 && self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Config("alpha and beta must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

fn additive_terms(b: f64, k: usize, n: usize, delta_max: f64) -> f64 {
    let arms = (k * n) as f64;
    2.0 * b * arms + PI * PI / 3.0 * arms * delta_max
}

/// Distribution-dependent bound
/// `sum_{(k,a)} 48 B^2 Q ln T / D_min(k,a) + 2 B K N + (pi^2 / 3) K N D_max`.
///
/// Arms whose minimal gap is infinite contribute nothing to the sum.
pub fn theorem1_dependent_bound(
    gaps: &GapReport,
    params: &BoundParams,
    budget: f64,
    resources: usize,
    levels: usize,
    horizon: u64,
) -> Result<f64> {
    params.validate()?;
    if !gaps.has_positive_gaps() || gaps.delta_min <= 0.0 {
        return Err(Error::Inapplicable(
            "no allocation has a positive gap (delta_min = 0)".into(),
        ));
    }
    let b = params.smoothness;
    let log_t = (horizon as f64).ln();
    let sum: f64 = gaps
        .finite_gaps()
        .map(|(_, d)| 48.0 * b * b * budget * log_t / d)
        .sum();
    Ok(sum + additive_terms(b, resources, levels, gaps.delta_max))
}

/// Distribution-independent bound
/// `14 B sqrt(Q K N T ln T) + 2 B K N + (pi^2 / 3) K N D_max`.
pub fn theorem1_independent_bound(
    params: &BoundParams,
    budget: f64,
    resources: usize,
    levels: usize,
    horizon: u64,
    delta_max: f64,
) -> Result<f64> {
    params.validate()?;
    if !(budget >= 0.0 && delta_max >= 0.0) || horizon == 0 {
        return Err(Error::Config("bound needs Q >= 0, T >= 1, delta_max >= 0".into()));
    }
    let b = params.smoothness;
    let t = horizon as f64;
    let lead = 14.0 * b * (budget * (resources * levels) as f64 * t * t.ln()).sqrt();
    Ok(lead + additive_terms(b, resources, levels, delta_max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    /// `(T, Reg(T) / (T^(2/3) (ln T)^(1/3)))`, sorted by horizon.
    pub normalized: Vec<(u64, f64)>,
    /// `Reg(T)` divided by the full bound shape
    /// `(B Q K)^(2/3) L^(1/3) T^(2/3) (ln T)^(1/3)`.
    pub constant_estimates: Vec<(u64, f64)>,
    pub pass: bool,
}

/// `T^(2/3) (ln T)^(1/3)`.
pub fn scaling_shape(horizon: u64) -> f64 {
    let t = horizon as f64;
    t.powf(2.0 / 3.0) * t.ln().cbrt()
}

/// Checks that regret grows no faster than `T^(2/3) (ln T)^(1/3)`: the
/// normalized sequence may rise by at most [`SCALING_SLACK`] between
/// consecutive horizons. Only the shape is checked; the leading constant is
/// not pinned down.
///
/// Needs at least three horizons spanning two decades. Each regret should be
/// an average over at least 20 replications.
pub fn theorem2_scaling_check(
    final_regrets: &[(u64, f64)],
    params: &BoundParams,
    budget: f64,
    resources: usize,
) -> Result<ScalingReport> {
    params.validate()?;
    let mut points = final_regrets.to_vec();
    points.sort_by_key(|&(t, _)| t);
    points.dedup_by_key(|&mut (t, _)| t);
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "scaling check needs at least 3 horizons, got {}",
            points.len()
        )));
    }
    let (first, last) = (points[0].0, points[points.len() - 1].0);
    if first < 2 || (last as f64) < 100.0 * first as f64 {
        return Err(Error::Config(format!(
            "horizons must be >= 2 and span two decades, got {first}..{last}"
        )));
    }
    let scale = (params.smoothness * budget * resources as f64).powf(2.0 / 3.0) * params.lipschitz.cbrt();
    let normalized: Vec<(u64, f64)> = points.iter().map(|&(t, r)| (t, r / scaling_shape(t))).collect();
    let constant_estimates = normalized.iter().map(|&(t, v)| (t, v / scale)).collect();
    let pass = normalized.windows(2).all(|w| w[1].1 <= SCALING_SLACK * w[0].1);
    Ok(ScalingReport {
        normalized,
        constant_estimates,
        pass,
    })
}
