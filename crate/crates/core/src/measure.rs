//! Envy measures and welfare values of a fixed allocation.

use crate::error::{Error, Result};
use crate::model::{Agent, Allocation, Instance};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Which aggregate of pairwise envy is being minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Number of envious agents.
    Envy,
    /// Sum of per-agent envy.
    Total,
    /// Largest per-agent envy.
    Max,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Envy, Measure::Total, Measure::Max];

    pub fn of(self, report: &EnvyReport) -> u64 {
        match self {
            Measure::Envy => report.envy_count as u64,
            Measure::Total => report.total_envy,
            Measure::Max => report.max_envy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Envy => "envy",
            Measure::Total => "total",
            Measure::Max => "max",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "envy" => Ok(Measure::Envy),
            "total" => Ok(Measure::Total),
            "max" => Ok(Measure::Max),
            other => Err(Error::Validation(format!("unknown measure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvyReport {
    /// `pairwise[i][j]`, zero on the diagonal.
    pub pairwise: Vec<Vec<u64>>,
    pub per_agent: Vec<u64>,
    pub envious: Vec<Agent>,
    pub envy_count: usize,
    pub total_envy: u64,
    pub max_envy: u64,
}

pub fn envy_report(inst: &Instance, a: &Allocation) -> Result<EnvyReport> {
    a.validate_against(inst)?;
    let n = inst.n();
    let mut pairwise = vec![vec![0u64; n]; n];
    for (i, row) in pairwise.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = inst.envy_amount(i, a.house(i), a.house(j));
            }
        }
    }
    let per_agent: Vec<u64> = pairwise.iter().map(|row| row.iter().sum()).collect();
    let envious: Vec<Agent> = (0..n).filter(|&i| per_agent[i] > 0).collect();
    Ok(EnvyReport {
        envy_count: envious.len(),
        total_envy: per_agent.iter().sum(),
        max_envy: per_agent.iter().copied().max().unwrap_or(0),
        pairwise,
        per_agent,
        envious,
    })
}

/// Measure value without materializing the pairwise matrix. The allocation
/// is trusted to be valid.
pub fn measure_value(inst: &Instance, a: &Allocation, measure: Measure) -> u64 {
    let houses = a.houses();
    let mut acc = 0u64;
    for (i, &own) in houses.iter().enumerate() {
        let mut envy_i = 0u64;
        for (j, &other) in houses.iter().enumerate() {
            if i != j {
                envy_i += inst.envy_amount(i, own, other);
                if measure == Measure::Envy && envy_i > 0 {
                    break;
                }
            }
        }
        match measure {
            Measure::Envy => acc += u64::from(envy_i > 0),
            Measure::Total => acc += envy_i,
            Measure::Max => acc = acc.max(envy_i),
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WelfareKind {
    Utilitarian,
    Nash,
    Egalitarian,
}

impl WelfareKind {
    pub fn name(self) -> &'static str {
        match self {
            WelfareKind::Utilitarian => "utilitarian",
            WelfareKind::Nash => "nash",
            WelfareKind::Egalitarian => "egalitarian",
        }
    }
}

impl FromStr for WelfareKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "utilitarian" | "util" => Ok(WelfareKind::Utilitarian),
            "nash" => Ok(WelfareKind::Nash),
            "egalitarian" | "egal" => Ok(WelfareKind::Egalitarian),
            other => Err(Error::Validation(format!("unknown welfare objective {other:?}"))),
        }
    }
}

fn utilities(inst: &Instance, a: &Allocation) -> Result<Vec<u32>> {
    a.validate_against(inst)?;
    (0..inst.n()).map(|i| inst.value(i, a.house(i))).collect()
}

/// Sum of utilities, exact.
pub fn utilitarian_welfare(inst: &Instance, a: &Allocation) -> Result<u64> {
    Ok(utilities(inst, a)?.iter().map(|&u| u64::from(u)).sum())
}

/// Minimum utility, exact.
pub fn egalitarian_welfare(inst: &Instance, a: &Allocation) -> Result<u64> {
    Ok(utilities(inst, a)?.iter().map(|&u| u64::from(u)).min().unwrap_or(0))
}

/// Product of utilities when it fits in `u128`.
pub fn utility_product(inst: &Instance, a: &Allocation) -> Result<Option<u128>> {
    Ok(utilities(inst, a)?
        .iter()
        .try_fold(1u128, |acc, &u| acc.checked_mul(u128::from(u))))
}

/// Geometric mean of utilities as `f64`; zero whenever some utility is zero.
pub fn nash_welfare(inst: &Instance, a: &Allocation) -> Result<f64> {
    let utils = utilities(inst, a)?;
    if utils.contains(&0) {
        return Ok(0.0);
    }
    let n = utils.len() as f64;
    match utils
        .iter()
        .try_fold(1u128, |acc, &u| acc.checked_mul(u128::from(u)))
    {
        Some(p) if p < (1u128 << 53) => Ok((p as f64).powf(1.0 / n)),
        _ => Ok((utils.iter().map(|&u| f64::from(u).ln()).sum::<f64>() / n).exp()),
    }
}

/// Welfare of `a` under `kind`. UW and EW are integers reported as `f64`.
pub fn welfare(inst: &Instance, a: &Allocation, kind: WelfareKind) -> Result<f64> {
    match kind {
        WelfareKind::Utilitarian => utilitarian_welfare(inst, a).map(|w| w as f64),
        WelfareKind::Nash => nash_welfare(inst, a),
        WelfareKind::Egalitarian => egalitarian_welfare(inst, a).map(|w| w as f64),
    }
}
