//! Problem instances, action spaces, base-arm indexing and allocation feasibility.
//!
//! A base arm `(k, a)` means "give level `a` of the shared action space to
//! resource `k`". Resources and levels are both zero-based here. Allocations
//! store level indices; budget values are always recovered through the
//! [`ActionSpace`], so the same representation serves integer budgets and
//! uniform grids over a continuous interval.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack on budget sums over a uniform grid.
pub const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Integer budgets `{0, 1, ..., N-1}`.
    Discrete,
    /// Uniform grid `{0, pitch, ..., (N-1) * pitch}` over a continuous interval.
    Grid { pitch: f64 },
}

/// The action set shared by every resource.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    kind: SpaceKind,
    values: Vec<f64>,
}

impl ActionSpace {
    pub fn discrete(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Config("action space needs at least one level".into()));
        }
        Ok(Self {
            kind: SpaceKind::Discrete,
            values: (0..levels).map(|i| i as f64).collect(),
        })
    }

    pub fn grid(levels: usize, pitch: f64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Config("action space needs at least one level".into()));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::Config(format!("grid pitch must be positive, got {pitch}")));
        }
        Ok(Self {
            kind: SpaceKind::Grid { pitch },
            values: (0..levels).map(|i| i as f64 * pitch).collect(),
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, SpaceKind::Discrete)
    }

    /// Number of levels `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Budget value of level `i`. Panics if `i >= N`.
    pub fn value(&self, level: usize) -> f64 {
        self.values[level]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Budget `q` expressed in whole level-index units.
    pub fn capacity_units(&self, budget: f64) -> usize {
        let units = match self.kind {
            SpaceKind::Discrete => budget.floor(),
            SpaceKind::Grid { pitch } => (budget / pitch + GRID_TOLERANCE).floor(),
        };
        if units <= 0.0 {
            0
        } else {
            units as usize
        }
    }
}

/// A base arm: resource `resource` played at level `level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArmId {
    pub resource: usize,
    pub level: usize,
}

impl ArmId {
    pub fn new(resource: usize, level: usize) -> Self {
        Self { resource, level }
    }
}

/// Row-major flat index of `arm` (resource-major, then level).
pub fn arm_index(arm: ArmId, resources: usize, levels: usize) -> Result<usize> {
    if arm.resource >= resources || arm.level >= levels {
        return Err(Error::Range(format!(
            "arm ({}, {}) outside {resources} x {levels}",
            arm.resource, arm.level
        )));
    }
    Ok(arm.resource * levels + arm.level)
}

/// Inverse of [`arm_index`].
pub fn arm_from_index(index: usize, resources: usize, levels: usize) -> Result<ArmId> {
    if levels == 0 || index >= resources * levels {
        return Err(Error::Range(format!(
            "flat index {index} outside {resources} x {levels}"
        )));
    }
    Ok(ArmId::new(index / levels, index % levels))
}

/// One instance of the budget-splitting problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    resources: usize,
    budget: f64,
    space: ActionSpace,
}

impl ProblemConfig {
    pub fn new(resources: usize, budget: f64, space: ActionSpace) -> Result<Self> {
        if resources == 0 {
            return Err(Error::Config("need at least one resource".into()));
        }
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::Config(format!("budget must be finite and >= 0, got {budget}")));
        }
        if space.is_discrete() && (space.len() - 1) as f64 > budget {
            return Err(Error::Config(format!(
                "discrete space with {} levels exceeds budget {budget} + 1",
                space.len()
            )));
        }
        Ok(Self {
            resources,
            budget,
            space,
        })
    }

    /// Number of resources `K`.
    pub fn resources(&self) -> usize {
        self.resources
    }

    /// Total budget `Q`.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    /// Number of levels `N`.
    pub fn levels(&self) -> usize {
        self.space.len()
    }

    /// Total number of base arms `K * N`.
    pub fn arm_count(&self) -> usize {
        self.resources * self.space.len()
    }

    /// Budget in level-index units, capped at what `K` resources can absorb.
    pub fn capacity_units(&self) -> usize {
        self.space
            .capacity_units(self.budget)
            .min(self.resources * (self.levels() - 1))
    }

    pub fn arms(&self) -> impl Iterator<Item = ArmId> + '_ {
        (0..self.resources).flat_map(move |k| (0..self.levels()).map(move |a| ArmId::new(k, a)))
    }
}

/// One level per resource.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    pub levels: Vec<usize>,
}

impl Allocation {
    pub fn new(levels: Vec<usize>) -> Self {
        Self { levels }
    }

    pub fn zeros(resources: usize) -> Self {
        Self {
            levels: vec![0; resources],
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The `K` base arms this allocation plays.
    pub fn arms(&self) -> impl Iterator<Item = ArmId> + '_ {
        self.levels
            .iter()
            .enumerate()
            .map(|(k, &a)| ArmId::new(k, a))
    }

    pub fn budget_used(&self, space: &ActionSpace) -> f64 {
        self.levels.iter().map(|&a| space.value(a)).sum()
    }
}

fn check_shape(alloc: &Allocation, cfg: &ProblemConfig) -> Result<()> {
    if alloc.len() != cfg.resources() {
        return Err(Error::Shape(format!(
            "allocation has {} entries, instance has {} resources",
            alloc.len(),
            cfg.resources()
        )));
    }
    if let Some(&bad) = alloc.levels.iter().find(|&&a| a >= cfg.levels()) {
        return Err(Error::Range(format!(
            "level {bad} outside action space of {} levels",
            cfg.levels()
        )));
    }
    Ok(())
}

/// Whether the allocation respects the budget. Integer spaces compare exactly;
/// grids allow [`GRID_TOLERANCE`] of accumulated rounding.
pub fn is_feasible(alloc: &Allocation, cfg: &ProblemConfig) -> Result<bool> {
    check_shape(alloc, cfg)?;
    Ok(match cfg.space().kind() {
        SpaceKind::Discrete => {
            let used: u64 = alloc.levels.iter().map(|&a| a as u64).sum();
            (used as f64) <= cfg.budget()
        }
        SpaceKind::Grid { .. } => alloc.budget_used(cfg.space()) <= cfg.budget() + GRID_TOLERANCE,
    })
}

/// Calls `visit` on every feasible allocation, in lexicographic order of levels.
pub fn for_each_feasible(cfg: &ProblemConfig, mut visit: impl FnMut(&[usize])) {
    fn recurse(
        cfg: &ProblemConfig,
        k: usize,
        used: f64,
        levels: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if k == cfg.resources() {
            visit(levels);
            return;
        }
        let limit = match cfg.space().kind() {
            SpaceKind::Discrete => cfg.budget(),
            SpaceKind::Grid { .. } => cfg.budget() + GRID_TOLERANCE,
        };
        for a in 0..cfg.levels() {
            let next = used + cfg.space().value(a);
            if next > limit {
                break;
            }
            levels.push(a);
            recurse(cfg, k + 1, next, levels, visit);
            levels.pop();
        }
    }
    let mut levels = Vec::with_capacity(cfg.resources());
    recurse(cfg, 0, 0.0, &mut levels, &mut visit);
}

/// All feasible allocations. Exponential in `K`; meant for small instances.
pub fn enumerate_feasible(cfg: &ProblemConfig) -> Vec<Allocation> {
    let mut out = Vec::new();
    for_each_feasible(cfg, |levels| out.push(Allocation::new(levels.to_vec())));
    out
}

/// Dense `K x N` matrix keyed by base arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmMatrix<T> {
    resources: usize,
    levels: usize,
    data: Vec<T>,
}

/// Per-arm expected rewards (true or estimated).
pub type MeanMatrix = ArmMatrix<f64>;

impl<T: Clone> ArmMatrix<T> {
    pub fn filled(resources: usize, levels: usize, value: T) -> Self {
        Self {
            resources,
            levels,
            data: vec![value; resources * levels],
        }
    }
}

impl<T> ArmMatrix<T> {
    pub fn from_fn(resources: usize, levels: usize, mut f: impl FnMut(ArmId) -> T) -> Self {
        let mut data = Vec::with_capacity(resources * levels);
        for k in 0..resources {
            for a in 0..levels {
                data.push(f(ArmId::new(k, a)));
            }
        }
        Self {
            resources,
            levels,
            data,
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let resources = rows.len();
        let levels = rows.first().map_or(0, Vec::len);
        if resources == 0 || levels == 0 {
            return Err(Error::Shape("matrix needs at least one row and column".into()));
        }
        if rows.iter().any(|r| r.len() != levels) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self {
            resources,
            levels,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn row(&self, resource: usize) -> &[T] {
        &self.data[resource * self.levels..(resource + 1) * self.levels]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = (ArmId, &T)> + '_ {
        let levels = self.levels;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (ArmId::new(i / levels, i % levels), v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(ArmId, &T) -> U) -> ArmMatrix<U> {
        ArmMatrix {
            resources: self.resources,
            levels: self.levels,
            data: self.iter().map(|(arm, v)| f(arm, v)).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        (0..self.resources).map(|k| self.row(k).to_vec()).collect()
    }
}

impl<T> Index<ArmId> for ArmMatrix<T> {
    type Output = T;

    fn index(&self, arm: ArmId) -> &T {
        debug_assert!(arm.resource < self.resources && arm.level < self.levels);
        &self.data[arm.resource * self.levels + arm.level]
    }
}

impl<T> IndexMut<ArmId> for ArmMatrix<T> {
    fn index_mut(&mut self, arm: ArmId) -> &mut T {
        debug_assert!(arm.resource < self.resources && arm.level < self.levels);
        &mut self.data[arm.resource * self.levels + arm.level]
    }
}

/// Separable objective `sum_k means[k, levels[k]]`, summed left to right.
pub fn objective(means: &MeanMatrix, levels: &[usize]) -> f64 {
    levels
        .iter()
        .enumerate()
        .fold(0.0, |acc, (k, &a)| acc + means[ArmId::new(k, a)])
}
