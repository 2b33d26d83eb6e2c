//! Exhaustive ground-truth solvers.
//!
//! Every search here enumerates injective allocations in lexicographic order
//! of the agent-indexed house vector and reports the first optimum it meets.
//! They are exponential and guarded by [`OracleConfig`] caps.

use crate::error::{Error, Result};
use crate::measure::{measure_value, Measure};
use crate::model::{Agent, Allocation, House, Instance};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_agents: usize,
    pub max_houses: usize,
    /// Only let reallocated agents move to houses they list. Used to compare
    /// against searches that live on the preference graph.
    pub restrict_to_graph: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_agents: 7,
            max_houses: 10,
            restrict_to_graph: false,
        }
    }
}

impl OracleConfig {
    pub fn with_caps(max_agents: usize, max_houses: usize) -> Self {
        OracleConfig {
            max_agents,
            max_houses,
            ..Self::default()
        }
    }

    pub fn on_graph(mut self) -> Self {
        self.restrict_to_graph = true;
        self
    }

    pub fn check(&self, inst: &Instance) -> Result<()> {
        if inst.n() > self.max_agents {
            return Err(Error::CapExceeded {
                what: "agent count",
                actual: inst.n() as u128,
                cap: self.max_agents as u128,
            });
        }
        if inst.m() > self.max_houses {
            return Err(Error::CapExceeded {
                what: "house count",
                actual: inst.m() as u128,
                cap: self.max_houses as u128,
            });
        }
        Ok(())
    }
}

/// Calls `visit` on every injective `agents -> houses` vector whose first
/// entry is `first`, in lexicographic order, until it returns `false`.
fn enumerate_from<F>(n: usize, m: usize, first: House, allowed: &dyn Fn(Agent, House) -> bool, visit: &mut F)
where
    F: FnMut(&[House]) -> bool,
{
    fn rec<F: FnMut(&[House]) -> bool>(
        depth: usize,
        n: usize,
        m: usize,
        cur: &mut Vec<House>,
        used: &mut [bool],
        allowed: &dyn Fn(Agent, House) -> bool,
        visit: &mut F,
    ) -> bool {
        if depth == n {
            return visit(cur);
        }
        for h in 0..m {
            if used[h] || !allowed(depth, h) {
                continue;
            }
            used[h] = true;
            cur.push(h);
            let go_on = rec(depth + 1, n, m, cur, used, allowed, visit);
            cur.pop();
            used[h] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
    if !allowed(0, first) {
        return;
    }
    let mut used = vec![false; m];
    used[first] = true;
    let mut cur = vec![first];
    rec(1, n, m, &mut cur, &mut used, allowed, visit);
}

/// Visits every complete allocation of an `n x m` instance in lexicographic order.
pub fn for_each_allocation<F>(n: usize, m: usize, mut visit: F)
where
    F: FnMut(&[House]) -> bool,
{
    let all = |_: Agent, _: House| true;
    for first in 0..m {
        let mut keep_going = true;
        enumerate_from(n, m, first, &all, &mut |a: &[House]| {
            keep_going = visit(a);
            keep_going
        });
        if !keep_going {
            return;
        }
    }
}

/// Number of injective allocations, `m (m-1) ... (m-n+1)`.
pub fn allocation_count(n: usize, m: usize) -> u128 {
    (0..n).map(|k| (m - k) as u128).product()
}

/// Minimum of `measure` over allocations accepted by `allowed`, searched in
/// parallel over the first agent's house and merged by (value, branch).
fn search_min(
    inst: &Instance,
    measure: Measure,
    allowed: &(dyn Fn(Agent, House) -> bool + Sync),
) -> Option<(u64, Allocation)> {
    let (n, m) = (inst.n(), inst.m());
    let branches = par::map_range(m, |first| {
        let mut best: Option<(u64, Vec<House>)> = None;
        enumerate_from(n, m, first, allowed, &mut |a: &[House]| {
            let v = measure_value(inst, &Allocation::from_vec_unchecked(a.to_vec()), measure);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, a.to_vec()));
            }
            v > 0
        });
        best
    });
    branches
        .into_iter()
        .flatten()
        .min_by_key(|(v, _)| *v)
        .map(|(v, a)| (v, Allocation::from_vec_unchecked(a)))
}

/// Global optimum of `measure` with its lexicographically first witness.
pub fn min_measure_exhaustive(
    inst: &Instance,
    measure: Measure,
    cfg: &OracleConfig,
) -> Result<(u64, Allocation)> {
    cfg.check(inst)?;
    Ok(search_min(inst, measure, &|_, _| true).expect("m >= n guarantees an allocation"))
}

/// Optimum over allocations that reallocate at most `q` agents of `base`.
pub fn min_measure_within_q(
    inst: &Instance,
    base: &Allocation,
    q: usize,
    measure: Measure,
    cfg: &OracleConfig,
) -> Result<(u64, Allocation)> {
    cfg.check(inst)?;
    base.validate_against(inst)?;
    if q > inst.n() {
        return Err(Error::Validation(format!(
            "budget q={q} exceeds agent count {}",
            inst.n()
        )));
    }
    // The budget is enforced on complete vectors; the filter only prunes
    // off-graph moves.
    let restrict = cfg.restrict_to_graph;
    let allowed = |i: Agent, h: House| !restrict || h == base.house(i) || inst.lists(i, h);
    let (n, m) = (inst.n(), inst.m());
    let branches = par::map_range(m, |first| {
        let mut best: Option<(u64, Vec<House>)> = None;
        enumerate_budgeted(n, m, first, base.houses(), q, &allowed, &mut |a: &[House]| {
            let v = measure_value(inst, &Allocation::from_vec_unchecked(a.to_vec()), measure);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, a.to_vec()));
            }
            v > 0
        });
        best
    });
    Ok(branches
        .into_iter()
        .flatten()
        .min_by_key(|(v, _)| *v)
        .map(|(v, a)| (v, Allocation::from_vec_unchecked(a)))
        .expect("base itself is feasible"))
}

fn enumerate_budgeted<F>(
    n: usize,
    m: usize,
    first: House,
    base: &[House],
    q: usize,
    allowed: &dyn Fn(Agent, House) -> bool,
    visit: &mut F,
) where
    F: FnMut(&[House]) -> bool,
{
    #[allow(clippy::too_many_arguments)]
    fn rec<F: FnMut(&[House]) -> bool>(
        depth: usize,
        changes: usize,
        n: usize,
        m: usize,
        base: &[House],
        q: usize,
        cur: &mut Vec<House>,
        used: &mut [bool],
        allowed: &dyn Fn(Agent, House) -> bool,
        visit: &mut F,
    ) -> bool {
        if depth == n {
            return visit(cur);
        }
        for h in 0..m {
            let change = usize::from(h != base[depth]);
            if used[h] || changes + change > q || !allowed(depth, h) {
                continue;
            }
            used[h] = true;
            cur.push(h);
            let go_on = rec(depth + 1, changes + change, n, m, base, q, cur, used, allowed, visit);
            cur.pop();
            used[h] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
    let change = usize::from(first != base[0]);
    if change > q || !allowed(0, first) {
        return;
    }
    let mut used = vec![false; m];
    used[first] = true;
    let mut cur = vec![first];
    rec(1, change, n, m, base, q, &mut cur, &mut used, allowed, visit);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoVerdict {
    pub optimal: bool,
    /// First dominating allocation in lexicographic order, when one exists.
    pub dominated_by: Option<Allocation>,
}

fn require_comparable(inst: &Instance) -> Result<()> {
    if !inst.is_cardinal() && !inst.is_complete() {
        return Err(Error::Domain(
            "Pareto checks need complete rankings or cardinal values".into(),
        ));
    }
    Ok(())
}

/// Searches for an allocation that Pareto-dominates `a`.
///
/// Each agent may only take houses it likes at least as much as its own, so
/// the search space is the set of candidate dominators rather than all
/// allocations.
pub fn is_pareto_optimal_exhaustive(
    inst: &Instance,
    a: &Allocation,
    cfg: &OracleConfig,
) -> Result<ParetoVerdict> {
    cfg.check(inst)?;
    require_comparable(inst)?;
    a.validate_against(inst)?;
    let dominator = find_dominator(inst, a);
    Ok(ParetoVerdict {
        optimal: dominator.is_none(),
        dominated_by: dominator,
    })
}

fn find_dominator(inst: &Instance, a: &Allocation) -> Option<Allocation> {
    fn rec(
        inst: &Instance,
        a: &Allocation,
        depth: usize,
        strict: bool,
        cur: &mut Vec<House>,
        used: &mut [bool],
    ) -> bool {
        if depth == inst.n() {
            return strict;
        }
        let own = a.house(depth);
        for h in 0..inst.m() {
            if used[h] || inst.prefers(depth, own, h) {
                continue;
            }
            used[h] = true;
            cur.push(h);
            let better = inst.prefers(depth, h, own);
            if rec(inst, a, depth + 1, strict || better, cur, used) {
                return true;
            }
            cur.pop();
            used[h] = false;
        }
        false
    }
    let mut cur = Vec::with_capacity(inst.n());
    let mut used = vec![false; inst.m()];
    rec(inst, a, 0, false, &mut cur, &mut used).then(|| Allocation::from_vec_unchecked(cur))
}

/// Minimum Envy and, if any exists, the first minimum-Envy allocation that is
/// Pareto optimal.
pub fn min_envy_pareto_exhaustive(
    inst: &Instance,
    cfg: &OracleConfig,
) -> Result<(u64, Option<Allocation>)> {
    cfg.check(inst)?;
    require_comparable(inst)?;
    let (best, _) = min_measure_exhaustive(inst, Measure::Envy, cfg)?;
    let mut found = None;
    for_each_allocation(inst.n(), inst.m(), |houses| {
        let a = Allocation::from_vec_unchecked(houses.to_vec());
        if measure_value(inst, &a, Measure::Envy) == best && find_dominator(inst, &a).is_none() {
            found = Some(a);
            return false;
        }
        true
    });
    Ok((best, found))
}
