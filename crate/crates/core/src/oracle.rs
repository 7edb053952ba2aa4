//! Offline allocation oracles.
//!
//! Given a mean matrix and the budget, an oracle returns one level per
//! resource. Because the objective is separable per base arm, the exact
//! problem is a multiple-choice knapsack solved by dynamic programming over
//! integer level-index units. A gain-per-budget greedy heuristic is provided
//! for exercising approximation ratios below one, and [`Unreliable`] wraps any
//! oracle with a success probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CounterRng;
use crate::space::{objective, Allocation, ArmId, MeanMatrix, ProblemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    ExactDp,
    Greedy,
}

/// Approximation ratio `alpha` and success probability `beta` an oracle claims.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub alpha: f64,
    pub beta: f64,
}

impl OracleSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if !unit(self.alpha) || !unit(self.beta) {
            return Err(Error::Config(format!(
                "oracle alpha and beta must lie in (0, 1], got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub allocation: Allocation,
    /// Objective of `allocation` under the means the oracle was given.
    pub value: f64,
}

pub trait Oracle: Send + Sync {
    fn spec(&self) -> OracleSpec;

    /// Solve for `means`. `call` is the round number; only randomized
    /// oracles look at it.
    fn solve(&self, means: &MeanMatrix, cfg: &ProblemConfig, call: u64) -> Result<OracleResult>;
}

fn check_input(means: &MeanMatrix, cfg: &ProblemConfig) -> Result<()> {
    if means.resources() != cfg.resources() || means.levels() != cfg.levels() {
        return Err(Error::Shape(format!(
            "mean matrix is {} x {}, instance is {} x {}",
            means.resources(),
            means.levels(),
            cfg.resources(),
            cfg.levels()
        )));
    }
    if let Some((arm, v)) = means.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "mean for arm ({}, {}) is {v}",
            arm.resource, arm.level
        )));
    }
    Ok(())
}

/// Exact maximizer of `sum_k means[k, levels[k]]` under the budget.
///
/// Among optimal allocations the one with the smallest total budget wins,
/// then the lexicographically smallest level vector. Partial sums are
/// accumulated resource by resource in the same order as [`objective`], so the
/// returned value is bit-identical to evaluating the objective on the result.
pub fn solve_exact_dp(means: &MeanMatrix, cfg: &ProblemConfig) -> Result<OracleResult> {
    check_input(means, cfg)?;
    let k_count = cfg.resources();
    let n = cfg.levels();
    let cap = cfg.capacity_units();
    let width = cap + 1;

    // best[k * width + c]: max objective of resources 0..=k using exactly c units
    let mut best = vec![f64::NEG_INFINITY; k_count * width];
    for a in 0..n.min(width) {
        best[a] = 0.0 + means[ArmId::new(0, a)];
    }
    for k in 1..k_count {
        let (done, rest) = best.split_at_mut(k * width);
        let prev = &done[(k - 1) * width..];
        let row = &mut rest[..width];
        for (c, slot) in row.iter_mut().enumerate() {
            let mut top = f64::NEG_INFINITY;
            for a in 0..=c.min(n - 1) {
                let p = prev[c - a];
                if p == f64::NEG_INFINITY {
                    continue;
                }
                let v = p + means[ArmId::new(k, a)];
                if v > top {
                    top = v;
                }
            }
            *slot = top;
        }
    }

    let last = &best[(k_count - 1) * width..];
    let mut target = 0;
    for c in 1..width {
        if last[c] > last[target] {
            target = c;
        }
    }

    // mark states that lie on some optimal path to (K-1, target)
    let mut on_path = vec![false; k_count * width];
    on_path[(k_count - 1) * width + target] = true;
    for k in (1..k_count).rev() {
        for c in 0..width {
            if !on_path[k * width + c] {
                continue;
            }
            let here = best[k * width + c];
            for a in 0..=c.min(n - 1) {
                let p = best[(k - 1) * width + c - a];
                if p != f64::NEG_INFINITY && p + means[ArmId::new(k, a)] == here {
                    on_path[(k - 1) * width + c - a] = true;
                }
            }
        }
    }

    let mut levels = Vec::with_capacity(k_count);
    let first = (0..n.min(width))
        .find(|&a| on_path[a])
        .expect("optimal path starts somewhere");
    levels.push(first);
    let mut used = first;
    for k in 1..k_count {
        let p = best[(k - 1) * width + used];
        let a = (0..n)
            .take_while(|&a| used + a < width)
            .find(|&a| {
                let c = used + a;
                on_path[k * width + c] && p + means[ArmId::new(k, a)] == best[k * width + c]
            })
            .expect("optimal path continues");
        levels.push(a);
        used += a;
    }

    let value = objective(means, &levels);
    debug_assert_eq!(value, last[target]);
    Ok(OracleResult {
        allocation: Allocation::new(levels),
        value,
    })
}

/// Greedy upgrades by marginal gain per unit of budget.
///
/// Starts from all zeros and repeatedly applies the feasible single-resource
/// level change with the largest strictly positive gain per budget unit.
/// Ties go to the smallest resource, then the smallest target level.
pub fn solve_greedy(means: &MeanMatrix, cfg: &ProblemConfig) -> Result<OracleResult> {
    check_input(means, cfg)?;
    let space = cfg.space();
    let cap = cfg.capacity_units();
    let mut levels = vec![0usize; cfg.resources()];
    let mut used = 0usize;
    loop {
        let mut pick: Option<(usize, usize, f64)> = None;
        for (k, &cur) in levels.iter().enumerate() {
            let here = means[ArmId::new(k, cur)];
            for next in (cur + 1)..cfg.levels() {
                if used + (next - cur) > cap {
                    break;
                }
                let gain = means[ArmId::new(k, next)] - here;
                if gain <= 0.0 {
                    continue;
                }
                let ratio = gain / (space.value(next) - space.value(cur));
                if pick.is_none_or(|(_, _, r)| ratio > r) {
                    pick = Some((k, next, ratio));
                }
            }
        }
        match pick {
            Some((k, next, _)) => {
                used += next - levels[k];
                levels[k] = next;
            }
            None => break,
        }
    }
    let value = objective(means, &levels);
    Ok(OracleResult {
        allocation: Allocation::new(levels),
        value,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactDp;

impl Oracle for ExactDp {
    fn spec(&self) -> OracleSpec {
        OracleSpec {
            kind: OracleKind::ExactDp,
            alpha: 1.0,
            beta: 1.0,
        }
    }

    fn solve(&self, means: &MeanMatrix, cfg: &ProblemConfig, _call: u64) -> Result<OracleResult> {
        solve_exact_dp(means, cfg)
    }
}

/// Greedy oracle tagged with the approximation ratio the caller credits it with.
#[derive(Debug, Clone, Copy)]
pub struct Greedy {
    pub alpha: f64,
}

impl Default for Greedy {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

impl Oracle for Greedy {
    fn spec(&self) -> OracleSpec {
        OracleSpec {
            kind: OracleKind::Greedy,
            alpha: self.alpha,
            beta: 1.0,
        }
    }

    fn solve(&self, means: &MeanMatrix, cfg: &ProblemConfig, _call: u64) -> Result<OracleResult> {
        solve_greedy(means, cfg)
    }
}

/// Succeeds with probability `beta`; on failure returns the all-zeros allocation.
/// The coin for call `t` is a counter-based draw keyed on `(seed, t)`.
#[derive(Debug, Clone)]
pub struct Unreliable<O> {
    inner: O,
    beta: f64,
    coin: CounterRng,
}

impl<O: Oracle> Unreliable<O> {
    pub fn new(inner: O, beta: f64, seed: u64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Config(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(Self {
            inner,
            beta,
            coin: CounterRng::new(seed),
        })
    }
}

impl<O: Oracle> Oracle for Unreliable<O> {
    fn spec(&self) -> OracleSpec {
        OracleSpec {
            beta: self.beta,
            ..self.inner.spec()
        }
    }

    fn solve(&self, means: &MeanMatrix, cfg: &ProblemConfig, call: u64) -> Result<OracleResult> {
        check_input(means, cfg)?;
        if self.coin.uniform(0, call) < self.beta {
            self.inner.solve(means, cfg, call)
        } else {
            let levels = vec![0; cfg.resources()];
            let value = objective(means, &levels);
            Ok(OracleResult {
                allocation: Allocation::new(levels),
                value,
            })
        }
    }
}

/// Builds a boxed oracle from its declared spec. `seed` keys the failure coin.
pub fn build_oracle(spec: OracleSpec, seed: u64) -> Result<Box<dyn Oracle>> {
    spec.validate()?;
    if spec.kind == OracleKind::ExactDp && spec.alpha != 1.0 {
        return Err(Error::Config("exact_dp oracle has alpha = 1".into()));
    }
    Ok(match (spec.kind, spec.beta < 1.0) {
        (OracleKind::ExactDp, false) => Box::new(ExactDp),
        (OracleKind::ExactDp, true) => Box::new(Unreliable::new(ExactDp, spec.beta, seed)?),
        (OracleKind::Greedy, false) => Box::new(Greedy { alpha: spec.alpha }),
        (OracleKind::Greedy, true) => Box::new(Unreliable::new(
            Greedy { alpha: spec.alpha },
            spec.beta,
            seed,
        )?),
    })
}
