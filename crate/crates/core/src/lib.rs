//! Online budget allocation with combinatorial upper confidence bounds.
//!
//! A decision maker splits a budget `Q` across `K` resources every round and
//! observes the reward each resource returns (semi-bandit feedback). Treating
//! "give level `a` to resource `k`" as a base arm turns the problem into a
//! combinatorial bandit: [`dra`] keeps per-arm UCBs and calls an offline
//! [`oracle`] on them, [`cra`] handles continuous budgets by running the same
//! learner on a uniform grid, and [`analysis`] measures regret against the
//! known bounds.

pub mod analysis;
pub mod cra;
pub mod dra;
pub mod env;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod space;
pub mod trace;

pub use error::{Error, Result};
