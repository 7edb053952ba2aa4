//! CSV writers. Plain RFC 4180 files with a header row; floats use Rust's
//! shortest round-trip formatting, so output never depends on locale.

use std::fs;
use std::path::Path;

use csv::Writer;

use crate::error::Result;
use crate::trace::RunTrace;

use super::runner::{HorizonOutcome, Outcome, Results};

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub const AGGREGATE_HEADER: [&str; 9] = [
    "horizon",
    "mean_regret",
    "std_regret",
    "theorem1_dep_bound",
    "theorem1_indep_bound",
    "theorem2_normalized",
    "epsilon",
    "N",
    "lemma1_violations",
];

pub fn write_aggregate(path: &Path, horizons: &[HorizonOutcome]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for h in horizons {
        let r = &h.row;
        w.write_record([
            r.horizon.to_string(),
            num(r.mean_regret),
            num(r.std_regret),
            opt(r.theorem1_dep_bound),
            opt(r.theorem1_indep_bound),
            opt(r.theorem2_normalized),
            opt(r.epsilon),
            r.levels.to_string(),
            num(r.lemma1_violations),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve(path: &Path, horizon: &HorizonOutcome) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["round", "mean_cum_regret", "std_cum_regret"])?;
    for p in &horizon.curve {
        w.write_record([p.round.to_string(), num(p.mean), num(p.std)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_replications(path: &Path, horizons: &[HorizonOutcome]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["horizon", "replication", "seed", "final_regret", "lemma1_violations"])?;
    for h in horizons {
        for r in &h.replications {
            w.write_record([
                h.row.horizon.to_string(),
                r.replication.to_string(),
                r.seed.to_string(),
                num(r.final_regret),
                r.lemma1_violations.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    let k = trace.resources();
    let mut w = Writer::from_path(path)?;
    let mut header = vec!["round".to_string()];
    header.extend((1..=k).map(|i| format!("level_{i}")));
    header.extend((1..=k).map(|i| format!("reward_{i}")));
    header.push("expected_reward".into());
    w.write_record(&header)?;
    for r in trace.rounds() {
        let mut rec = Vec::with_capacity(2 * k + 2);
        rec.push(r.round.to_string());
        rec.extend(r.levels.iter().map(|a| a.to_string()));
        rec.extend(r.rewards.iter().map(|&x| num(x)));
        rec.push(num(r.expected));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_meta(path: &Path, meta: &[(String, String)]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["key", "value"])?;
    for (k, v) in meta {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every output file of `outcome` under `dir`, creating it if needed.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_meta(&dir.join("meta.csv"), &outcome.meta)?;
    match &outcome.results {
        Results::Regret(horizons) => {
            write_aggregate(&dir.join("aggregate.csv"), horizons)?;
            write_replications(&dir.join("replications.csv"), horizons)?;
            for h in horizons {
                write_curve(&dir.join(format!("curve_T{}.csv", h.row.horizon)), h)?;
                let traced: Vec<_> = h
                    .replications
                    .iter()
                    .filter_map(|r| r.trace.as_ref().map(|t| (r.replication, t)))
                    .collect();
                if traced.is_empty() {
                    continue;
                }
                let tdir = dir.join("traces");
                fs::create_dir_all(&tdir)?;
                for (rep, trace) in traced {
                    write_trace(&tdir.join(format!("trace_T{}_rep{rep}.csv", h.row.horizon)), trace)?;
                }
            }
        }
        Results::OracleCheck(rows) => {
            let mut w = Writer::from_path(dir.join("oracle_check.csv"))?;
            w.write_record([
                "instance",
                "K",
                "N",
                "Q",
                "exact_value",
                "enumerated_value",
                "greedy_value",
                "greedy_ratio",
                "exact_match",
            ])?;
            for r in rows {
                w.write_record([
                    r.instance.to_string(),
                    r.resources.to_string(),
                    r.levels.to_string(),
                    r.budget.to_string(),
                    num(r.exact),
                    num(r.enumerated),
                    num(r.greedy),
                    opt(r.greedy_ratio()),
                    r.exact_matches().to_string(),
                ])?;
            }
            w.flush()?;
        }
        Results::Bounds(rows) => {
            let mut w = Writer::from_path(dir.join("bounds.csv"))?;
            w.write_record([
                "horizon",
                "opt",
                "delta_min",
                "delta_max",
                "theorem1_dep_bound",
                "theorem1_indep_bound",
            ])?;
            for r in rows {
                w.write_record([
                    r.horizon.to_string(),
                    num(r.opt),
                    num(r.delta_min),
                    num(r.delta_max),
                    opt(r.theorem1_dep_bound),
                    num(r.theorem1_indep_bound),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
