//! Welfare-maximizing allocations.
//!
//! Among optimal allocations the lexicographically smallest house vector is
//! returned: agents are fixed one at a time to the smallest house that still
//! admits an optimal completion.

use crate::error::{Error, Result};
use crate::measure::WelfareKind;
use crate::model::{Agent, Allocation, House, Instance, Preferences};
use std::cmp::Ordering;

fn values(inst: &Instance) -> Result<&[Vec<u32>]> {
    match inst.prefs() {
        Preferences::Cardinal(v) => Ok(v),
        Preferences::Ordinal(_) => Err(Error::Unsupported(
            "welfare maximization needs a cardinal profile".into(),
        )),
    }
}

/// Maximum-weight assignment of every row to a distinct column
/// (`rows <= cols`), shortest augmenting paths with potentials.
pub fn max_weight_assignment(w: &[Vec<f64>]) -> Vec<usize> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    let m = w[0].len();
    assert!(n <= m, "more rows than columns");
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = -w[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Kuhn's augmenting paths: an assignment of all rows using allowed edges.
fn perfect_matching(allowed: &dyn Fn(usize, usize) -> bool, rows: usize, cols: usize) -> Option<Vec<usize>> {
    fn augment(
        r: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        cols: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for c in 0..cols {
            if allowed(r, c) && !seen[c] {
                seen[c] = true;
                if owner[c].map_or(true, |o| augment(o, allowed, cols, seen, owner)) {
                    owner[c] = Some(r);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; cols];
    for r in 0..rows {
        let mut seen = vec![false; cols];
        if !augment(r, allowed, cols, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut out = vec![0; rows];
    for (c, o) in owner.iter().enumerate() {
        if let Some(r) = o {
            out[*r] = c;
        }
    }
    Some(out)
}

/// Fixes agents in index order to the smallest house whose best completion
/// reaches the optimum `key`. `solve` maximizes over a sub-problem given as
/// (agents, houses) and returns houses for those agents.
fn lexicographic<K: Ord + Clone>(
    n: usize,
    m: usize,
    solve: &dyn Fn(&[Agent], &[House]) -> Vec<House>,
    key: &dyn Fn(&[House]) -> K,
) -> Allocation {
    let all: Vec<Agent> = (0..n).collect();
    let houses: Vec<House> = (0..m).collect();
    let opt = key(&solve(&all, &houses));
    let mut fixed: Vec<House> = Vec::with_capacity(n);
    let mut free: Vec<House> = houses;
    for i in 0..n {
        let rest: Vec<Agent> = (i + 1..n).collect();
        let mut best: Option<(K, House, Vec<House>)> = None;
        for &h in &free {
            let others: Vec<House> = free.iter().copied().filter(|&x| x != h).collect();
            let tail = solve(&rest, &others);
            let mut full = fixed.clone();
            full.push(h);
            full.extend_from_slice(&tail);
            let k = key(&full);
            let hit = k == opt;
            if best.as_ref().map_or(true, |(b, _, _)| k > *b) {
                best = Some((k, h, full));
            }
            if hit {
                break;
            }
        }
        let (_, h, _) = best.expect("a free house exists while agents remain");
        fixed.push(h);
        free.retain(|&x| x != h);
    }
    Allocation::from_vec_unchecked(fixed)
}

fn solve_weighted(w: &dyn Fn(Agent, House) -> f64, agents: &[Agent], houses: &[House]) -> Vec<House> {
    let mat: Vec<Vec<f64>> = agents
        .iter()
        .map(|&i| houses.iter().map(|&h| w(i, h)).collect())
        .collect();
    max_weight_assignment(&mat).into_iter().map(|c| houses[c]).collect()
}

/// Maximizes the sum of utilities.
pub fn max_utilitarian(inst: &Instance) -> Result<Allocation> {
    let v = values(inst)?;
    let w = |i: Agent, h: House| f64::from(v[i][h]);
    let key = |a: &[House]| -> u64 { a.iter().enumerate().map(|(i, &h)| u64::from(v[i][h])).sum() };
    Ok(lexicographic(inst.n(), inst.m(), &|ag, hs| solve_weighted(&w, ag, hs), &key))
}

fn threshold_assignment(v: &[Vec<u32>], agents: &[Agent], houses: &[House]) -> Vec<House> {
    if agents.is_empty() {
        return Vec::new();
    }
    let mut levels: Vec<u32> = agents
        .iter()
        .flat_map(|&i| houses.iter().map(move |&h| v[i][h]))
        .collect();
    levels.sort_unstable();
    levels.dedup();
    let feasible = |t: u32| {
        perfect_matching(&|r, c| v[agents[r]][houses[c]] >= t, agents.len(), houses.len())
    };
    // levels[0] is always feasible; find the last feasible level
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if feasible(levels[mid]).is_some() {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    feasible(levels[lo])
        .expect("lowest level admits every edge")
        .into_iter()
        .map(|c| houses[c])
        .collect()
}

/// Maximizes the minimum utility.
pub fn max_egalitarian(inst: &Instance) -> Result<Allocation> {
    let v = values(inst)?;
    let key = |a: &[House]| -> u64 {
        a.iter()
            .enumerate()
            .map(|(i, &h)| u64::from(v[i][h]))
            .min()
            .unwrap_or(0)
    };
    Ok(lexicographic(inst.n(), inst.m(), &|ag, hs| threshold_assignment(v, ag, hs), &key))
}

/// Comparison key for Nash welfare: agents with positive utility first,
/// then the product of those utilities, exact while it fits in `u128`.
#[derive(Debug, Clone)]
pub struct NashKey {
    pub positive: usize,
    pub product: Option<u128>,
    pub log_sum: f64,
}

impl NashKey {
    pub fn of(utils: impl IntoIterator<Item = u32>) -> Self {
        let mut positive = 0;
        let mut product = Some(1u128);
        let mut log_sum = 0.0;
        for u in utils.into_iter().filter(|&u| u > 0) {
            positive += 1;
            product = product.and_then(|p| p.checked_mul(u128::from(u)));
            log_sum += f64::from(u).ln();
        }
        NashKey {
            positive,
            product,
            log_sum,
        }
    }
}

impl Ord for NashKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.positive.cmp(&other.positive).then_with(|| match (self.product, other.product) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.log_sum.total_cmp(&other.log_sum),
        })
    }
}

impl PartialOrd for NashKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for NashKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for NashKey {}

/// Maximizes the number of agents with positive utility, then the product
/// of their utilities.
pub fn max_nash(inst: &Instance) -> Result<Allocation> {
    let v = values(inst)?;
    // one positive edge outweighs any sum of logs
    let big = 32.0 * (inst.n() as f64 + 1.0);
    let w = |i: Agent, h: House| match v[i][h] {
        0 => 0.0,
        x => big + f64::from(x).ln(),
    };
    let key = |a: &[House]| NashKey::of(a.iter().enumerate().map(|(i, &h)| v[i][h]));
    Ok(lexicographic(inst.n(), inst.m(), &|ag, hs| solve_weighted(&w, ag, hs), &key))
}

pub fn maximize(inst: &Instance, kind: WelfareKind) -> Result<Allocation> {
    match kind {
        WelfareKind::Utilitarian => max_utilitarian(inst),
        WelfareKind::Nash => max_nash(inst),
        WelfareKind::Egalitarian => max_egalitarian(inst),
    }
}
