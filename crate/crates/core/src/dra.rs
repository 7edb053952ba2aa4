//! CUCB over base arms `(resource, level)` for integer or gridded budgets.
//!
//! The learner's whole state is a play count and an empirical mean per base
//! arm. Each round it inflates every mean by a confidence radius, hands the
//! optimistic matrix to an offline oracle, plays the returned allocation and
//! folds the `K` observed rewards back into the statistics. It never needs the
//! functional form of the reward functions.

use crate::env::{Environment, SemiBandit};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::space::{is_feasible, objective, Allocation, ArmId, ArmMatrix, MeanMatrix, ProblemConfig};
use crate::trace::{RunTrace, TraceMeta};

/// Play counts `T_{k,a}` and empirical means per base arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub counts: ArmMatrix<u64>,
    pub means: MeanMatrix,
    rounds: u64,
}

impl ArmStats {
    pub fn new(resources: usize, levels: usize) -> Self {
        Self {
            counts: ArmMatrix::filled(resources, levels, 0),
            means: MeanMatrix::filled(resources, levels, 0.0),
            rounds: 0,
        }
    }

    pub fn for_problem(cfg: &ProblemConfig) -> Self {
        Self::new(cfg.resources(), cfg.levels())
    }

    /// Completed rounds.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Applies semi-bandit feedback for one round: `rewards[k]` was observed
    /// from resource `k` at level `alloc.levels[k]`.
    pub fn update(&mut self, alloc: &Allocation, rewards: &[f64]) -> Result<()> {
        let k_count = self.counts.resources();
        if alloc.len() != k_count || rewards.len() != k_count {
            return Err(Error::Shape(format!(
                "expected {k_count} levels and rewards, got {} and {}",
                alloc.len(),
                rewards.len()
            )));
        }
        if let Some(&bad) = alloc.levels.iter().find(|&&a| a >= self.counts.levels()) {
            return Err(Error::Range(format!("level {bad} outside action space")));
        }
        if let Some(r) = rewards.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Contract(format!("reward {r} outside [0, 1]")));
        }
        for (arm, &r) in alloc.arms().zip(rewards) {
            let n = &mut self.counts[arm];
            *n += 1;
            let n = *n as f64;
            let m = &mut self.means[arm];
            *m += (r - *m) / n;
        }
        self.rounds += 1;
        Ok(())
    }
}

/// Optimistic indices `min(1, mean + radius)` and the radii behind them.
/// Untried arms carry an infinite radius and an index of exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbVector {
    pub ucb: MeanMatrix,
    pub radius: MeanMatrix,
}

/// `sqrt(3 ln t / (2 T_{k,a}))`, infinite for an untried arm.
pub fn confidence_radius(round: u64, count: u64) -> f64 {
    if count == 0 {
        f64::INFINITY
    } else {
        (3.0 * (round as f64).ln() / (2.0 * count as f64)).sqrt()
    }
}

pub fn compute_ucb(stats: &ArmStats, round: u64) -> Result<UcbVector> {
    if round == 0 {
        return Err(Error::Contract("rounds are numbered from 1".into()));
    }
    let radius = stats.counts.map(|_, &n| confidence_radius(round, n));
    let ucb = stats
        .means
        .map(|arm, &m| (m + radius[arm]).min(1.0));
    Ok(UcbVector { ucb, radius })
}

/// The oracle's allocation on the UCB matrix for `round`.
pub fn select_allocation(
    stats: &ArmStats,
    round: u64,
    oracle: &dyn Oracle,
    cfg: &ProblemConfig,
) -> Result<Allocation> {
    let ucb = compute_ucb(stats, round)?;
    Ok(oracle.solve(&ucb.ucb, cfg, round)?.allocation)
}

/// Hook into a run at the start of each round, before the oracle is called.
pub trait RoundObserver {
    fn observe(&mut self, round: u64, stats: &ArmStats, ucb: &UcbVector);
}

impl RoundObserver for () {
    fn observe(&mut self, _: u64, _: &ArmStats, _: &UcbVector) {}
}

impl<F: FnMut(u64, &ArmStats, &UcbVector)> RoundObserver for F {
    fn observe(&mut self, round: u64, stats: &ArmStats, ucb: &UcbVector) {
        self(round, stats, ucb)
    }
}

/// Runs `horizon` rounds of select, observe, update.
///
/// The learner only touches `env` through [`SemiBandit`]; the expected reward
/// recorded per round comes from the environment's true means and is never fed
/// back.
pub fn run(
    env: &Environment,
    oracle: &dyn Oracle,
    cfg: &ProblemConfig,
    horizon: u64,
) -> Result<RunTrace> {
    run_observed(env, oracle, cfg, horizon, &mut ())
}

pub fn run_observed(
    env: &Environment,
    oracle: &dyn Oracle,
    cfg: &ProblemConfig,
    horizon: u64,
    observer: &mut dyn RoundObserver,
) -> Result<RunTrace> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if env.space() != cfg.space() || env.resources() != cfg.resources() {
        return Err(Error::Config(
            "environment action space does not match the problem".into(),
        ));
    }
    let truth = env.mean_matrix()?;
    let meta = TraceMeta {
        seed: env.model().seed(),
        ..TraceMeta::default()
    };
    let mut trace = RunTrace::with_capacity(cfg.resources(), horizon as usize, meta);
    let mut stats = ArmStats::for_problem(cfg);
    let mut rewards = vec![0.0; cfg.resources()];
    for t in 1..=horizon {
        let ucb = compute_ucb(&stats, t)?;
        observer.observe(t, &stats, &ucb);
        let alloc = oracle.solve(&ucb.ucb, cfg, t)?.allocation;
        debug_assert!(is_feasible(&alloc, cfg)?);
        for (slot, arm) in rewards.iter_mut().zip(alloc.arms()) {
            *slot = observe_checked(env, arm, t)?;
        }
        stats.update(&alloc, &rewards)?;
        trace.push(&alloc, &rewards, objective(&truth, &alloc.levels));
    }
    Ok(trace)
}

fn observe_checked(env: &dyn SemiBandit, arm: ArmId, round: u64) -> Result<f64> {
    let r = env.observe(arm, round)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Contract(format!(
            "environment produced reward {r} outside [0, 1]"
        )));
    }
    Ok(r)
}
