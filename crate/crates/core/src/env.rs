//! Stochastic reward environments.
//!
//! Each resource `k` has a random state `X_{k,t}` per round and a reward
//! function `f_k(v, X)` of the budget value `v` it receives. Every family here
//! keeps rewards inside `[0, 1]` by construction and has a closed-form mean.
//!
//! The state for `(k, t)` comes from a counter-based stream keyed on
//! `(seed, k, t)`, so it is the same whatever the other resources are given and
//! whichever learner is driving the environment (common random numbers).
//!
//! Learners only see [`SemiBandit`]; true means are reachable through
//! [`Environment`] itself, which analysis code holds.

use crate::error::{Error, Result};
use crate::rng::CounterRng;
use crate::space::{ActionSpace, ArmId, MeanMatrix, GRID_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub enum RewardFamily {
    /// Bernoulli reward with success probability `p[k, a]`, per level.
    Table { p: MeanMatrix },
    /// `X ~ U[0, theta_k * budget]`, reward `max(v - X, 0) / budget`.
    Hinge { theta: Vec<f64>, budget: f64 },
    /// `X ~ Bernoulli(p_k)`, reward `X * (1 - exp(-v / theta_k))`.
    ConcaveExp { p: Vec<f64>, theta: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct RewardModel {
    family: RewardFamily,
    seed: u64,
    rng: CounterRng,
}

impl PartialEq for RewardModel {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.seed == other.seed
    }
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl RewardModel {
    pub fn new(family: RewardFamily, seed: u64) -> Result<Self> {
        match &family {
            RewardFamily::Table { p } => {
                if let Some((arm, v)) = p.iter().find(|(_, v)| !unit_interval(**v)) {
                    return Err(Error::Config(format!(
                        "table probability p[{}][{}] = {v} outside [0, 1]",
                        arm.resource, arm.level
                    )));
                }
            }
            RewardFamily::Hinge { theta, budget } => {
                if theta.is_empty() {
                    return Err(Error::Config("hinge model needs at least one theta".into()));
                }
                if !(budget.is_finite() && *budget > 0.0) {
                    return Err(Error::Config(format!("hinge budget must be > 0, got {budget}")));
                }
                if let Some(t) = theta.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
                    return Err(Error::Config(format!("hinge theta {t} outside (0, 1]")));
                }
            }
            RewardFamily::ConcaveExp { p, theta } => {
                if p.is_empty() || p.len() != theta.len() {
                    return Err(Error::Config(format!(
                        "concave_exp needs matching non-empty p and theta, got {} and {}",
                        p.len(),
                        theta.len()
                    )));
                }
                if let Some(x) = p.iter().find(|x| !unit_interval(**x)) {
                    return Err(Error::Config(format!("concave_exp p {x} outside [0, 1]")));
                }
                if let Some(t) = theta.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
                    return Err(Error::Config(format!("concave_exp theta {t} must be > 0")));
                }
            }
        }
        Ok(Self {
            family,
            seed,
            rng: CounterRng::new(seed),
        })
    }

    pub fn family(&self) -> &RewardFamily {
        &self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same parameters, different randomness.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self {
            family: self.family.clone(),
            seed,
            rng: CounterRng::new(seed),
        }
    }

    pub fn resources(&self) -> usize {
        match &self.family {
            RewardFamily::Table { p } => p.resources(),
            RewardFamily::Hinge { theta, .. } => theta.len(),
            RewardFamily::ConcaveExp { p, .. } => p.len(),
        }
    }

    /// Whether the family is defined on a continuum of budget values.
    pub fn is_continuous(&self) -> bool {
        !matches!(self.family, RewardFamily::Table { .. })
    }

    fn check_space(&self, space: &ActionSpace) -> Result<()> {
        match &self.family {
            RewardFamily::Table { p } => {
                if !space.is_discrete() {
                    return Err(Error::Config(
                        "table rewards are only defined on an integer action space".into(),
                    ));
                }
                if p.levels() != space.len() {
                    return Err(Error::Config(format!(
                        "table has {} levels, action space has {}",
                        p.levels(),
                        space.len()
                    )));
                }
            }
            RewardFamily::Hinge { budget, .. } => {
                let top = space.value(space.len() - 1);
                if top > budget + GRID_TOLERANCE {
                    return Err(Error::Config(format!(
                        "hinge rewards need budget values <= {budget}, space reaches {top}"
                    )));
                }
            }
            RewardFamily::ConcaveExp { .. } => {}
        }
        Ok(())
    }

    fn check_arm(&self, arm: ArmId, space: &ActionSpace) -> Result<()> {
        self.check_space(space)?;
        if arm.resource >= self.resources() || arm.level >= space.len() {
            return Err(Error::Range(format!(
                "arm ({}, {}) outside {} x {}",
                arm.resource,
                arm.level,
                self.resources(),
                space.len()
            )));
        }
        Ok(())
    }

    /// The random state `X_{k,t}` for resource `k` in round `t` (1-based).
    /// Table models return the uniform used for their Bernoulli comparison.
    pub fn state(&self, resource: usize, round: u64) -> f64 {
        let u = self.rng.uniform(resource as u64, round);
        match &self.family {
            RewardFamily::Table { .. } => u,
            RewardFamily::Hinge { theta, budget } => u * theta[resource] * budget,
            RewardFamily::ConcaveExp { p, .. } => {
                if u < p[resource] {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `f_k(v, x)` for the continuous families.
    pub fn reward_at(&self, resource: usize, value: f64, state: f64) -> Result<f64> {
        match &self.family {
            RewardFamily::Table { .. } => Err(Error::Unsupported(
                "table rewards are indexed by level, not budget value".into(),
            )),
            RewardFamily::Hinge { budget, .. } => Ok((value - state).max(0.0) / budget),
            RewardFamily::ConcaveExp { theta, .. } => {
                Ok(state * (1.0 - (-value / theta[resource]).exp()))
            }
        }
    }

    /// One draw of `f_k(value(a), X_{k,round})`.
    pub fn sample_reward(&self, arm: ArmId, space: &ActionSpace, round: u64) -> Result<f64> {
        self.check_arm(arm, space)?;
        let x = self.state(arm.resource, round);
        let r = match &self.family {
            RewardFamily::Table { p } => {
                if x < p[arm] {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.reward_at(arm.resource, space.value(arm.level), x)?,
        };
        debug_assert!(unit_interval(r), "reward {r} escaped [0, 1]");
        Ok(r)
    }

    /// Closed-form `E[f_k(value(a), X)]`.
    pub fn true_mean(&self, arm: ArmId, space: &ActionSpace) -> Result<f64> {
        self.check_arm(arm, space)?;
        let v = space.value(arm.level);
        Ok(match &self.family {
            RewardFamily::Table { p } => p[arm],
            RewardFamily::Hinge { theta, budget } => {
                let u = theta[arm.resource] * budget;
                if v <= u {
                    v * v / (2.0 * u) / budget
                } else {
                    (v - u / 2.0) / budget
                }
            }
            RewardFamily::ConcaveExp { p, theta } => {
                p[arm.resource] * (1.0 - (-v / theta[arm.resource]).exp())
            }
        })
    }

    pub fn mean_matrix(&self, space: &ActionSpace) -> Result<MeanMatrix> {
        self.check_space(space)?;
        let mut out = MeanMatrix::filled(self.resources(), space.len(), 0.0);
        for k in 0..self.resources() {
            for a in 0..space.len() {
                let arm = ArmId::new(k, a);
                out[arm] = self.true_mean(arm, space)?;
            }
        }
        Ok(out)
    }

    /// A Lipschitz constant in the budget value valid for every resource and
    /// every state: `1 / budget` for hinge, `max_k 1 / theta_k` for concave_exp.
    pub fn lipschitz_constant(&self) -> Result<f64> {
        match &self.family {
            RewardFamily::Table { .. } => Err(Error::Unsupported(
                "table rewards have no continuum to be Lipschitz over".into(),
            )),
            RewardFamily::Hinge { budget, .. } => Ok(1.0 / budget),
            RewardFamily::ConcaveExp { theta, .. } => {
                Ok(theta.iter().map(|t| 1.0 / t).fold(0.0, f64::max))
            }
        }
    }
}

/// What a learner may see: the realized reward of each arm it plays.
pub trait SemiBandit {
    fn resources(&self) -> usize;
    fn observe(&self, arm: ArmId, round: u64) -> Result<f64>;
}

/// A reward model bound to an action space.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    model: RewardModel,
    space: ActionSpace,
}

impl Environment {
    pub fn new(model: RewardModel, space: ActionSpace) -> Result<Self> {
        model.check_space(&space)?;
        Ok(Self { model, space })
    }

    pub fn model(&self) -> &RewardModel {
        &self.model
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn true_mean(&self, arm: ArmId) -> Result<f64> {
        self.model.true_mean(arm, &self.space)
    }

    pub fn mean_matrix(&self) -> Result<MeanMatrix> {
        self.model.mean_matrix(&self.space)
    }
}

impl SemiBandit for Environment {
    fn resources(&self) -> usize {
        self.model.resources()
    }

    fn observe(&self, arm: ArmId, round: u64) -> Result<f64> {
        self.model.sample_reward(arm, &self.space, round)
    }
}
