use crate::cra::DiscretizationPlan;
use crate::space::Allocation;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceMeta {
    pub seed: u64,
    pub config_hash: Option<String>,
    pub plan: Option<DiscretizationPlan>,
}

/// Per-round record of a run: allocation levels, the reward observed from
/// each resource, and the expected total reward `r(a_t, D)` of the allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    resources: usize,
    levels: Vec<usize>,
    rewards: Vec<f64>,
    expected: Vec<f64>,
    pub meta: TraceMeta,
}

/// Borrowed view of one round.
#[derive(Debug, Clone, Copy)]
pub struct RoundRecord<'a> {
    /// 1-based round index.
    pub round: u64,
    pub levels: &'a [usize],
    pub rewards: &'a [f64],
    pub expected: f64,
}

impl RunTrace {
    pub fn new(resources: usize, meta: TraceMeta) -> Self {
        Self {
            resources,
            levels: Vec::new(),
            rewards: Vec::new(),
            expected: Vec::new(),
            meta,
        }
    }

    pub fn with_capacity(resources: usize, rounds: usize, meta: TraceMeta) -> Self {
        Self {
            resources,
            levels: Vec::with_capacity(rounds * resources),
            rewards: Vec::with_capacity(rounds * resources),
            expected: Vec::with_capacity(rounds),
            meta,
        }
    }

    pub fn push(&mut self, alloc: &Allocation, rewards: &[f64], expected: f64) {
        assert_eq!(alloc.len(), self.resources);
        assert_eq!(rewards.len(), self.resources);
        self.levels.extend_from_slice(&alloc.levels);
        self.rewards.extend_from_slice(rewards);
        self.expected.push(expected);
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn len(&self) -> usize {
        self.expected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expected.is_empty()
    }

    pub fn round(&self, i: usize) -> RoundRecord<'_> {
        let span = i * self.resources..(i + 1) * self.resources;
        RoundRecord {
            round: i as u64 + 1,
            levels: &self.levels[span.clone()],
            rewards: &self.rewards[span],
            expected: self.expected[i],
        }
    }

    pub fn rounds(&self) -> impl Iterator<Item = RoundRecord<'_>> + '_ {
        (0..self.len()).map(move |i| self.round(i))
    }

    /// Expected reward `r(a_t, D)` per round.
    pub fn expected_rewards(&self) -> &[f64] {
        &self.expected
    }

    pub fn cumulative_expected(&self) -> Vec<f64> {
        self.expected
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }
}
