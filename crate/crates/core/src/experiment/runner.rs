//! Seeded replications of an experiment and their aggregation.
//!
//! Replication `r` uses seed `base ^ mix64(r)` for the environment and a
//! second derived seed for the oracle's failure coin. Replications may run in
//! any order on any number of threads; results are gathered by index.

use crate::analysis::{
    compute_opt_continuous_reference, gaps_from_means, regret_series, scaling_shape,
    theorem1_dependent_bound, theorem1_independent_bound, theorem2_scaling_check, BoundParams,
    CoverageMonitor, GapReport, ReferenceInterval,
};
use crate::cra::{plan_discretization, run_on_plan, DiscretizationPlan};
use crate::dra::run_observed;
use crate::env::{Environment, RewardModel};
use crate::error::{Error, Result};
use crate::oracle::{build_oracle, solve_exact_dp, solve_greedy, OracleSpec};
use crate::par::try_map_indexed;
use crate::rng::{mix64, replication_seed, CounterRng};
use crate::space::{enumerate_feasible, objective, ActionSpace, MeanMatrix, ProblemConfig};
use crate::trace::RunTrace;

use super::config::{ExperimentConfig, Mode};

const ORACLE_SALT: u64 = 0x6f72_6163_6c65_0001;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub seed: u64,
    pub final_regret: f64,
    pub lemma1_violations: u64,
    /// Cumulative regret at the rounds listed in [`HorizonOutcome::curve_rounds`].
    pub curve: Vec<f64>,
    pub trace: Option<RunTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub horizon: u64,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub theorem1_dep_bound: Option<f64>,
    pub theorem1_indep_bound: Option<f64>,
    pub theorem2_normalized: Option<f64>,
    pub epsilon: Option<f64>,
    pub levels: usize,
    pub lemma1_violations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub round: u64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonOutcome {
    pub row: AggregateRow,
    pub curve: Vec<CurvePoint>,
    pub replications: Vec<ReplicationOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckRow {
    pub instance: usize,
    pub resources: usize,
    pub levels: usize,
    pub budget: usize,
    pub exact: f64,
    pub enumerated: f64,
    pub greedy: f64,
}

impl OracleCheckRow {
    pub fn exact_matches(&self) -> bool {
        self.exact == self.enumerated
    }

    pub fn greedy_ratio(&self) -> Option<f64> {
        (self.exact > 0.0).then(|| self.greedy / self.exact)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub horizon: u64,
    pub opt: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub theorem1_dep_bound: Option<f64>,
    pub theorem1_indep_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Results {
    Regret(Vec<HorizonOutcome>),
    OracleCheck(Vec<OracleCheckRow>),
    Bounds(Vec<BoundsRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub results: Results,
    /// `key,value` pairs for the metadata CSV, in output order.
    pub meta: Vec<(String, String)>,
    /// One-line human summary.
    pub summary: String,
    /// False when a self-check failed (oracle-check mismatch).
    pub ok: bool,
}

/// Runs the experiment without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut meta = vec![
        ("mode".to_string(), format!("{:?}", cfg.mode).to_lowercase()),
        ("config_hash".to_string(), cfg.hash()?),
        ("seed".to_string(), cfg.seed.to_string()),
        ("replications".to_string(), cfg.replications.to_string()),
    ];
    let outcome = match cfg.mode {
        Mode::Dra => execute_dra(cfg, &mut meta)?,
        Mode::Cra => execute_cra(cfg, &mut meta)?,
        Mode::OracleCheck => execute_oracle_check(cfg, &mut meta)?,
        Mode::Bounds => execute_bounds(cfg, &mut meta)?,
    };
    Ok(Outcome { meta, ..outcome })
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn bound_params(cfg: &ExperimentConfig, lipschitz: f64) -> BoundParams {
    BoundParams {
        smoothness: cfg.discretization.smoothness,
        lipschitz,
        alpha: cfg.oracle.alpha,
        beta: cfg.oracle.beta,
    }
}

fn gaps_or_skip(means: &MeanMatrix, problem: &ProblemConfig, alpha: f64) -> Result<Option<GapReport>> {
    match gaps_from_means(means, problem, alpha) {
        Ok(g) => Ok(Some(g)),
        Err(Error::EnumerationInfeasible(msg)) => {
            log::warn!("skipping gap-based bounds: {msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn theorem1_bounds(
    gaps: Option<&GapReport>,
    params: &BoundParams,
    problem: &ProblemConfig,
    horizon: u64,
) -> Result<(Option<f64>, Option<f64>)> {
    let Some(g) = gaps else {
        return Ok((None, None));
    };
    let (q, k, n) = (problem.budget(), problem.resources(), problem.levels());
    let dep = match theorem1_dependent_bound(g, params, q, k, n, horizon) {
        Ok(b) => Some(b),
        Err(Error::Inapplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let indep = theorem1_independent_bound(params, q, k, n, horizon, g.delta_max)?;
    Ok((dep, Some(indep)))
}

struct Replicate<'a> {
    cfg: &'a ExperimentConfig,
    model: &'a RewardModel,
    problem: &'a ProblemConfig,
    truth: &'a MeanMatrix,
    oracle: OracleSpec,
    plan: Option<&'a DiscretizationPlan>,
    baseline_opt: f64,
    horizon: u64,
    curve_rounds: &'a [u64],
}

impl Replicate<'_> {
    fn run(&self, replication: usize) -> Result<ReplicationOutcome> {
        let seed = replication_seed(self.cfg.seed, replication as u64);
        let model = self.model.reseeded(seed);
        let oracle = build_oracle(self.oracle, mix64(seed ^ ORACLE_SALT))?;
        let mut monitor = CoverageMonitor::new(self.truth.clone());
        let mut trace = match self.plan {
            Some(plan) => run_on_plan(
                &model,
                oracle.as_ref(),
                plan,
                self.problem.resources(),
                self.problem.budget(),
                self.horizon,
                &mut monitor,
            )?,
            None => {
                let env = Environment::new(model, self.problem.space().clone())?;
                run_observed(&env, oracle.as_ref(), self.problem, self.horizon, &mut monitor)?
            }
        };
        trace.meta.config_hash = Some(self.cfg.hash()?);
        let regret = regret_series(&trace, self.baseline_opt, self.oracle.alpha, self.oracle.beta)?;
        let curve = self
            .curve_rounds
            .iter()
            .map(|&t| regret.cumulative[t as usize - 1])
            .collect();
        Ok(ReplicationOutcome {
            replication,
            seed,
            final_regret: regret.final_regret,
            lemma1_violations: monitor.violations(),
            curve,
            trace: self.cfg.output.traces.then_some(trace),
        })
    }
}

fn curve_rounds(horizon: u64, stride: u64) -> Vec<u64> {
    let mut rounds: Vec<u64> = (1..=horizon / stride).map(|i| i * stride).collect();
    if rounds.last() != Some(&horizon) {
        rounds.push(horizon);
    }
    rounds
}

/// Sample mean and (n-1) standard deviation.
fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn aggregate(
    horizon: u64,
    rounds: &[u64],
    replications: Vec<ReplicationOutcome>,
    row: impl FnOnce(f64, f64, f64) -> AggregateRow,
) -> HorizonOutcome {
    let (mean, std) = mean_std(replications.iter().map(|r| r.final_regret));
    let violations = replications.iter().map(|r| r.lemma1_violations as f64).sum::<f64>()
        / replications.len() as f64;
    let curve = rounds
        .iter()
        .enumerate()
        .map(|(i, &round)| {
            let (m, s) = mean_std(replications.iter().map(|r| r.curve[i]));
            CurvePoint { round, mean: m, std: s }
        })
        .collect();
    let row = row(mean, std, violations);
    debug_assert_eq!(row.horizon, horizon);
    HorizonOutcome {
        row,
        curve,
        replications,
    }
}

fn execute_dra(cfg: &ExperimentConfig, meta: &mut Vec<(String, String)>) -> Result<Outcome> {
    let spec = cfg.problem()?;
    let levels = spec.levels.expect("validated");
    let problem = ProblemConfig::new(spec.resources, spec.budget, ActionSpace::discrete(levels)?)?;
    let model = cfg.reward_model(cfg.seed)?;
    let truth = model.mean_matrix(problem.space())?;
    let opt = solve_exact_dp(&truth, &problem)?.value;
    let gaps = gaps_or_skip(&truth, &problem, cfg.oracle.alpha)?;
    let params = bound_params(cfg, 1.0);
    meta.push(("opt".into(), fmt(opt)));
    if let Some(g) = &gaps {
        meta.push(("delta_min".into(), fmt(g.delta_min)));
        meta.push(("delta_max".into(), fmt(g.delta_max)));
    }

    let mut out = Vec::with_capacity(cfg.horizons.len());
    for &horizon in &cfg.horizons {
        let rounds = curve_rounds(horizon, cfg.output.curve_stride);
        let job = Replicate {
            cfg,
            model: &model,
            problem: &problem,
            truth: &truth,
            oracle: cfg.oracle.spec(),
            plan: None,
            baseline_opt: opt,
            horizon,
            curve_rounds: &rounds,
        };
        let reps = try_map_indexed(cfg.replications, |r| job.run(r))?;
        let (dep, indep) = theorem1_bounds(gaps.as_ref(), &params, &problem, horizon)?;
        out.push(aggregate(horizon, &rounds, reps, |mean, std, viol| AggregateRow {
            horizon,
            mean_regret: mean,
            std_regret: std,
            theorem1_dep_bound: dep,
            theorem1_indep_bound: indep,
            theorem2_normalized: None,
            epsilon: None,
            levels,
            lemma1_violations: viol,
        }));
    }
    let last = &out[out.len() - 1].row;
    Ok(Outcome {
        summary: format!(
            "dra: T = {} mean regret {:.4} over {} replications",
            last.horizon, last.mean_regret, cfg.replications
        ),
        results: Results::Regret(out),
        meta: Vec::new(),
        ok: true,
    })
}

fn execute_cra(cfg: &ExperimentConfig, meta: &mut Vec<(String, String)>) -> Result<Outcome> {
    let spec = cfg.problem()?;
    let disc = &cfg.discretization;
    let model = cfg.reward_model(cfg.seed)?;
    let lipschitz = match disc.lipschitz {
        Some(l) => l,
        None => model.lipschitz_constant()?,
    };
    let reference: ReferenceInterval =
        compute_opt_continuous_reference(&model, spec.budget, spec.resources, disc.reference_refinement)?;
    let params = bound_params(cfg, lipschitz);
    meta.push(("lipschitz".into(), fmt(lipschitz)));
    meta.push(("smoothness".into(), fmt(disc.smoothness)));
    meta.push(("opt_reference_lo".into(), fmt(reference.lo)));
    meta.push(("opt_reference_hi".into(), fmt(reference.hi)));

    let mut out = Vec::with_capacity(cfg.horizons.len());
    for &horizon in &cfg.horizons {
        let plan = plan_discretization(
            disc.smoothness,
            spec.budget,
            lipschitz,
            spec.resources,
            horizon,
            disc.max_levels,
        )?;
        let problem = ProblemConfig::new(spec.resources, spec.budget, plan.grid.clone())?;
        let truth = model.mean_matrix(&plan.grid)?;
        let opt_grid = solve_exact_dp(&truth, &problem)?.value;
        let tag = format!("T{horizon}");
        meta.push((format!("{tag}.epsilon_star"), fmt(plan.epsilon_star)));
        meta.push((format!("{tag}.epsilon"), fmt(plan.epsilon)));
        meta.push((format!("{tag}.levels"), plan.levels.to_string()));
        meta.push((format!("{tag}.capped"), plan.capped.to_string()));
        meta.push((format!("{tag}.opt_grid"), fmt(opt_grid)));

        let rounds = curve_rounds(horizon, cfg.output.curve_stride);
        let job = Replicate {
            cfg,
            model: &model,
            problem: &problem,
            truth: &truth,
            oracle: cfg.oracle.spec(),
            plan: Some(&plan),
            baseline_opt: reference.hi,
            horizon,
            curve_rounds: &rounds,
        };
        let reps = try_map_indexed(cfg.replications, |r| job.run(r))?;
        let gaps = gaps_or_skip(&truth, &problem, cfg.oracle.alpha)?;
        let (dep, indep) = theorem1_bounds(gaps.as_ref(), &params, &problem, horizon)?;
        out.push(aggregate(horizon, &rounds, reps, |mean, std, viol| AggregateRow {
            horizon,
            mean_regret: mean,
            std_regret: std,
            theorem1_dep_bound: dep,
            theorem1_indep_bound: indep,
            theorem2_normalized: Some(mean / scaling_shape(horizon)),
            epsilon: Some(plan.epsilon),
            levels: plan.levels,
            lemma1_violations: viol,
        }));
    }

    let finals: Vec<(u64, f64)> = out.iter().map(|h| (h.row.horizon, h.row.mean_regret)).collect();
    let scaling = theorem2_scaling_check(&finals, &params, spec.budget, spec.resources);
    let verdict = match &scaling {
        Ok(r) if r.pass => "pass",
        Ok(_) => "fail",
        Err(_) => "not-checked",
    };
    meta.push(("theorem2_scaling".into(), verdict.into()));
    let last = &out[out.len() - 1].row;
    Ok(Outcome {
        summary: format!(
            "cra: T = {} mean regret {:.4} (eps = {:.6}, N = {}), scaling check {verdict}",
            last.horizon,
            last.mean_regret,
            last.epsilon.unwrap_or(f64::NAN),
            last.levels
        ),
        results: Results::Regret(out),
        meta: Vec::new(),
        ok: true,
    })
}

/// Random small instance `i` of an oracle self-check.
pub fn oracle_check_instance(cfg: &ExperimentConfig, index: usize) -> Result<(MeanMatrix, ProblemConfig)> {
    let spec = &cfg.oracle_check;
    let rng = CounterRng::new(cfg.seed);
    let stream = index as u64;
    let mut counter = 0u64;
    let mut draw = || {
        counter += 1;
        rng.uniform(stream, counter)
    };
    let pick = |u: f64, n: usize| ((u * n as f64) as usize).min(n - 1);
    let k = 1 + pick(draw(), spec.max_resources);
    let n = 1 + pick(draw(), spec.max_levels);
    let q_lo = n - 1;
    let q_hi = spec.max_budget.max(q_lo);
    let q = q_lo + pick(draw(), q_hi - q_lo + 1);
    let rows = (0..k).map(|_| (0..n).map(|_| draw()).collect()).collect();
    let means = MeanMatrix::from_rows(rows)?;
    let problem = ProblemConfig::new(k, q as f64, ActionSpace::discrete(n)?)?;
    Ok((means, problem))
}

fn execute_oracle_check(cfg: &ExperimentConfig, meta: &mut Vec<(String, String)>) -> Result<Outcome> {
    let rows = try_map_indexed(cfg.oracle_check.instances, |i| {
        let (means, problem) = oracle_check_instance(cfg, i)?;
        let exact = solve_exact_dp(&means, &problem)?.value;
        let enumerated = enumerate_feasible(&problem)
            .iter()
            .map(|a| objective(&means, &a.levels))
            .fold(f64::NEG_INFINITY, f64::max);
        let greedy = solve_greedy(&means, &problem)?.value;
        Ok(OracleCheckRow {
            instance: i,
            resources: problem.resources(),
            levels: problem.levels(),
            budget: problem.budget() as usize,
            exact,
            enumerated,
            greedy,
        })
    })?;
    let mismatches = rows.iter().filter(|r| !r.exact_matches()).count();
    let alpha = rows
        .iter()
        .filter_map(OracleCheckRow::greedy_ratio)
        .fold(1.0, f64::min);
    meta.push(("instances".into(), rows.len().to_string()));
    meta.push(("exact_mismatches".into(), mismatches.to_string()));
    meta.push(("greedy_empirical_alpha".into(), fmt(alpha)));
    let exact = if mismatches == 0 {
        "PASS".to_string()
    } else {
        format!("FAIL ({mismatches} mismatches)")
    };
    Ok(Outcome {
        summary: format!("exact: {exact}, greedy empirical α = {alpha:.6}"),
        results: Results::OracleCheck(rows),
        meta: Vec::new(),
        ok: mismatches == 0,
    })
}

fn execute_bounds(cfg: &ExperimentConfig, meta: &mut Vec<(String, String)>) -> Result<Outcome> {
    let spec = cfg.problem()?;
    let levels = spec.levels.expect("validated");
    let problem = ProblemConfig::new(spec.resources, spec.budget, ActionSpace::discrete(levels)?)?;
    let model = cfg.reward_model(cfg.seed)?;
    let truth = model.mean_matrix(problem.space())?;
    let gaps = gaps_from_means(&truth, &problem, cfg.oracle.alpha)?;
    let params = bound_params(cfg, 1.0);
    meta.push(("opt".into(), fmt(gaps.opt)));
    let rows = cfg
        .horizons
        .iter()
        .map(|&horizon| {
            let (dep, indep) = theorem1_bounds(Some(&gaps), &params, &problem, horizon)?;
            Ok(BoundsRow {
                horizon,
                opt: gaps.opt,
                delta_min: gaps.delta_min,
                delta_max: gaps.delta_max,
                theorem1_dep_bound: dep,
                theorem1_indep_bound: indep.expect("gaps present"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        summary: format!(
            "bounds: delta_min = {}, delta_max = {}, {} horizons",
            gaps.delta_min,
            gaps.delta_max,
            rows.len()
        ),
        results: Results::Bounds(rows),
        meta: Vec::new(),
        ok: true,
    })
}
