//! Experiment harness: envy drop and welfare loss against the reallocation
//! budget, and welfare loss of the domain solvers.

use crate::dipped::min_envy_single_dipped;
use crate::error::{Error, Result};
use crate::gen::{gen_single_dipped, gen_single_peaked, gen_uniform_cardinal, rng_stream};
use crate::graph::{apply_all, decompose};
use crate::measure::{measure_value, welfare, Measure, WelfareKind};
use crate::model::{Allocation, Instance};
use crate::oracle::{min_measure_exhaustive, OracleConfig};
use crate::par;
use crate::peaked::min_envy_single_peaked;
use crate::welfare::{max_utilitarian, maximize};
use rand::RngCore;
use serde::Serialize;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;

/// Largest number of alternating pieces whose subsets are enumerated.
pub const MAX_PIECES: usize = 20;

/// Seed of instance `idx` in the cell for `m`.
pub fn instance_seed(seed: u64, m: usize, idx: usize) -> u64 {
    rng_stream(seed, ((m as u64) << 32) | idx as u64).next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub m: usize,
    pub q: Option<usize>,
    pub metric: &'static str,
    pub mean: f64,
    pub stddev: f64,
    pub instances: usize,
    pub seed: u64,
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut s = String::from("m,q,metric,mean,stddev,instances,seed\n");
    for r in rows {
        let q = r.q.map(|q| q.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.m, q, r.metric, r.mean, r.stddev, r.instances, r.seed
        );
    }
    s
}

/// Mean and sample standard deviation.
fn summarize(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn loss(before: f64, after: f64) -> (f64, f64) {
    let abs = before - after;
    let rel = if before > 0.0 { abs / before } else { 0.0 };
    (abs, rel)
}

/// Per-instance record of a q sweep. Index `q` of the vectors is the budget.
#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub m: usize,
    pub index: usize,
    pub seed: u64,
    pub base_measure: u64,
    pub optimum: u64,
    pub measure: Vec<u64>,
    pub welfare_loss: Vec<f64>,
    pub welfare_loss_rel: Vec<f64>,
}

impl Trace {
    pub fn drop(&self, q: usize) -> u64 {
        self.base_measure - self.measure[q]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QSweep {
    pub rows: Vec<Row>,
    pub traces: Vec<Trace>,
}

/// Best allocation reachable from `base` by applying a subset of the pieces
/// of `target Δ base` that moves at most `q` agents, for every `q` in `0..=n`.
/// Ties go to the smaller welfare loss, then to the earlier subset.
fn best_per_budget(
    inst: &Instance,
    base: &Allocation,
    target: &Allocation,
    measure: Measure,
    kind: WelfareKind,
) -> Result<Vec<(u64, f64, Allocation)>> {
    let m = inst.m();
    let pieces = decompose(target, base, m);
    if pieces.len() > MAX_PIECES {
        return Err(Error::CapExceeded {
            what: "alternating pieces",
            actual: pieces.len() as u128,
            cap: MAX_PIECES as u128,
        });
    }
    let w0 = welfare(inst, base, kind)?;
    let mut best: Vec<Option<(u64, f64, Allocation)>> = vec![None; inst.n() + 1];
    for mask in 0u32..(1 << pieces.len()) {
        let chosen: Vec<_> = (0..pieces.len()).filter(|&p| mask >> p & 1 == 1).map(|p| &pieces[p]).collect();
        let cost: usize = chosen.iter().map(|p| p.agents.len()).sum();
        let a = apply_all(base, chosen, m)?;
        a.validate_against(inst)?;
        let v = measure_value(inst, &a, measure);
        let wl = w0 - welfare(inst, &a, kind)?;
        for slot in best.iter_mut().skip(cost) {
            let better = match slot {
                None => true,
                Some((bv, bw, _)) => v < *bv || (v == *bv && wl < *bw),
            };
            if better {
                *slot = Some((v, wl, a.clone()));
            }
        }
    }
    Ok(best.into_iter().map(|b| b.expect("empty subset fits every budget")).collect())
}

/// Welfare loss and measure drop against the budget `q ∈ 0..=n`, on uniform
/// cardinal instances. The start allocation maximizes `initial`; the target
/// is the oracle's first minimizer of `measure`.
pub fn run_q_sweep(
    n: usize,
    m_range: RangeInclusive<usize>,
    per_cell: usize,
    initial: WelfareKind,
    measure: Measure,
    seed: u64,
) -> Result<QSweep> {
    let cfg = OracleConfig::with_caps(n.max(7), (*m_range.end()).max(11));
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for m in m_range {
        let cell: Vec<Result<Trace>> = par::map_range(per_cell, |idx| {
            let s = instance_seed(seed, m, idx);
            let inst = gen_uniform_cardinal(n, m, s)?;
            cfg.check(&inst)?;
            let base = maximize(&inst, initial)?;
            let (optimum, target) = min_measure_exhaustive(&inst, measure, &cfg)?;
            let best = best_per_budget(&inst, &base, &target, measure, initial)?;
            let w0 = welfare(&inst, &base, initial)?;
            let mut t = Trace {
                m,
                index: idx,
                seed: s,
                base_measure: measure_value(&inst, &base, measure),
                optimum,
                measure: Vec::new(),
                welfare_loss: Vec::new(),
                welfare_loss_rel: Vec::new(),
            };
            for (v, wl, _) in best {
                let (abs, rel) = loss(w0, w0 - wl);
                t.measure.push(v);
                t.welfare_loss.push(abs);
                t.welfare_loss_rel.push(rel);
            }
            Ok(t)
        });
        let cell = cell.into_iter().collect::<Result<Vec<_>>>()?;
        for q in 0..=n {
            let drops: Vec<f64> = cell.iter().map(|t| t.drop(q) as f64).collect();
            let abs: Vec<f64> = cell.iter().map(|t| t.welfare_loss[q]).collect();
            let rel: Vec<f64> = cell.iter().map(|t| t.welfare_loss_rel[q]).collect();
            for (metric, xs) in [("drop", drops), ("welfare_loss", abs), ("welfare_loss_rel", rel)] {
                let (mean, stddev) = summarize(&xs);
                rows.push(Row {
                    m,
                    q: Some(q),
                    metric,
                    mean,
                    stddev,
                    instances: per_cell,
                    seed,
                });
            }
        }
        traces.extend(cell);
    }
    Ok(QSweep { rows, traces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Peaked,
    Dipped,
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "peaked" => Ok(Domain::Peaked),
            "dipped" => Ok(Domain::Dipped),
            _ => Err(Error::Validation(format!("unknown domain {s:?}"))),
        }
    }
}

/// Utilitarian welfare lost by the min-envy domain solver against the
/// utilitarian maximum, per `m`.
pub fn run_domain_sweep(
    n: usize,
    m_range: RangeInclusive<usize>,
    instances: usize,
    domain: Domain,
    seed: u64,
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for m in m_range {
        let cell: Vec<Result<(f64, f64)>> = par::map_range(instances, |idx| {
            let s = instance_seed(seed, m, idx);
            let (inst, a) = match domain {
                Domain::Peaked => {
                    let inst = gen_single_peaked(n, m, s)?;
                    let a = min_envy_single_peaked(&inst, &(0..m).collect::<Vec<_>>())?;
                    (inst, a)
                }
                Domain::Dipped => {
                    let inst = gen_single_dipped(n, m, s)?;
                    let a = min_envy_single_dipped(&inst, &(0..m).collect::<Vec<_>>())?;
                    (inst, a)
                }
            };
            a.validate_against(&inst)?;
            let best = max_utilitarian(&inst)?;
            Ok(loss(
                welfare(&inst, &best, WelfareKind::Utilitarian)?,
                welfare(&inst, &a, WelfareKind::Utilitarian)?,
            ))
        });
        let cell = cell.into_iter().collect::<Result<Vec<_>>>()?;
        let abs: Vec<f64> = cell.iter().map(|c| c.0).collect();
        let rel: Vec<f64> = cell.iter().map(|c| c.1).collect();
        for (metric, xs) in [("welfare_loss", abs), ("welfare_loss_rel", rel)] {
            let (mean, stddev) = summarize(&xs);
            rows.push(Row {
                m,
                q: None,
                metric,
                mean,
                stddev,
                instances,
                seed,
            });
        }
    }
    Ok(rows)
}
