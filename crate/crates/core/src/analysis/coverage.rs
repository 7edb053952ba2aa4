//! Confidence-coverage diagnostics.
//!
//! A round is a violation when some arm's empirical mean sits at least one
//! confidence radius away from its true mean at the start of the round.
//! The expected number of such rounds up to `T` is at most
//! `sum_t 2 |S| t^-2 <= (pi^2 / 3) |S|`.

use std::f64::consts::PI;

use crate::dra::{ArmStats, RoundObserver, UcbVector};
use crate::error::{Error, Result};
use crate::space::MeanMatrix;

/// Empirical means and radii at the start of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub round: u64,
    pub means: MeanMatrix,
    pub radius: MeanMatrix,
}

#[derive(Debug, Clone, Default)]
pub struct SnapshotRecorder {
    pub snapshots: Vec<Snapshot>,
}

impl RoundObserver for SnapshotRecorder {
    fn observe(&mut self, round: u64, stats: &ArmStats, ucb: &UcbVector) {
        self.snapshots.push(Snapshot {
            round,
            means: stats.means.clone(),
            radius: ucb.radius.clone(),
        });
    }
}

fn violates(means: &MeanMatrix, radius: &MeanMatrix, truth: &MeanMatrix) -> bool {
    // untried arms carry an infinite radius and never violate
    means
        .iter()
        .any(|(arm, &m)| (m - truth[arm]).abs() >= radius[arm])
}

/// `sum_{t=1}^{T} 2 |S| t^-2`.
pub fn coverage_budget(arms: usize, horizon: u64) -> f64 {
    (1..=horizon)
        .map(|t| 2.0 * arms as f64 / (t as f64 * t as f64))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// Whether round `t` (index `t-1`) started with a violated confidence interval.
    pub violated: Vec<bool>,
    pub violations: u64,
    /// `sum_t 2 |S| t^-2` over the recorded rounds.
    pub expected_bound: f64,
    /// `(pi^2 / 3) |S|`, independent of the horizon.
    pub horizon_free_bound: f64,
}

impl CoverageReport {
    fn from_flags(violated: Vec<bool>, arms: usize) -> Self {
        let violations = violated.iter().filter(|&&v| v).count() as u64;
        Self {
            expected_bound: coverage_budget(arms, violated.len() as u64),
            horizon_free_bound: PI * PI / 3.0 * arms as f64,
            violated,
            violations,
        }
    }
}

pub fn lemma1_diagnostic(snapshots: &[Snapshot], truth: &MeanMatrix) -> Result<CoverageReport> {
    if snapshots.is_empty() {
        return Err(Error::MissingDiagnostics(
            "run was not recorded with mean and radius snapshots".into(),
        ));
    }
    let mut flags = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        if s.means.resources() != truth.resources() || s.means.levels() != truth.levels() {
            return Err(Error::Shape("snapshot and truth differ in shape".into()));
        }
        flags.push(violates(&s.means, &s.radius, truth));
    }
    Ok(CoverageReport::from_flags(flags, truth.as_slice().len()))
}

/// Streaming version of [`lemma1_diagnostic`] that keeps one flag per round.
#[derive(Debug, Clone)]
pub struct CoverageMonitor {
    truth: MeanMatrix,
    flags: Vec<bool>,
}

impl CoverageMonitor {
    pub fn new(truth: MeanMatrix) -> Self {
        Self {
            truth,
            flags: Vec::new(),
        }
    }

    pub fn violations(&self) -> u64 {
        self.flags.iter().filter(|&&v| v).count() as u64
    }

    pub fn report(&self) -> Result<CoverageReport> {
        if self.flags.is_empty() {
            return Err(Error::MissingDiagnostics("monitor saw no rounds".into()));
        }
        Ok(CoverageReport::from_flags(
            self.flags.clone(),
            self.truth.as_slice().len(),
        ))
    }
}

impl RoundObserver for CoverageMonitor {
    fn observe(&mut self, _round: u64, stats: &ArmStats, ucb: &UcbVector) {
        self.flags.push(violates(&stats.means, &ucb.radius, &self.truth));
    }
}
