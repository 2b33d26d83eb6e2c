//! Minimum-Envy allocations for strict single-peaked preferences.

use crate::error::{Error, Result};
use crate::model::{agent_name, house_name, Agent, Allocation, House, Instance};
use crate::orders::{axis_positions, strict_orders, Orders};
use crate::pareto;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakKind {
    Individual,
    Shared,
    NonPeak,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeakProfile {
    pub peak: Vec<House>,
    pub base: Vec<Vec<Agent>>,
    /// Common top prefix of the rankings in `base(h)`, in rank order. Empty
    /// unless `h` is a shared peak.
    pub span: Vec<Vec<House>>,
    pub kind: Vec<PeakKind>,
    pub p_i: usize,
    pub p_s: usize,
}

impl PeakProfile {
    pub fn shared_peaks(&self) -> impl Iterator<Item = House> + '_ {
        (0..self.kind.len()).filter(|&h| self.kind[h] == PeakKind::Shared)
    }

    pub fn in_span(&self, of: House, h: House) -> bool {
        self.span[of].contains(&h)
    }
}

/// A broken single-peak condition: `agent` prefers `far` to `near`
/// although `near` lies between `far` and its peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PeakViolation {
    pub agent: Agent,
    pub far: House,
    pub near: House,
}

impl std::fmt::Display for PeakViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} prefers {} to {}, which is closer to its peak",
            agent_name(self.agent),
            house_name(self.far),
            house_name(self.near)
        )
    }
}

fn first_violation(o: &Orders, axis: &[House], pos: &[usize], ops: &mut u64) -> Option<PeakViolation> {
    for i in 0..o.order.len() {
        let p = pos[o.top(i)];
        let sides = [
            (0..p).rev().collect::<Vec<_>>(),
            (p + 1..axis.len()).collect::<Vec<_>>(),
        ];
        for side in sides {
            let mut prev = axis[p];
            for q in side {
                let h = axis[q];
                *ops += 1;
                if o.rank[i][h] < o.rank[i][prev] {
                    return Some(PeakViolation {
                        agent: i,
                        far: h,
                        near: prev,
                    });
                }
                prev = h;
            }
        }
    }
    None
}

/// `Ok(None)` when every ranking is single-peaked on `axis`, otherwise the
/// first violation found. Needs complete strict preferences.
pub fn validate_single_peaked(inst: &Instance, axis: &[House]) -> Result<Option<PeakViolation>> {
    let o = strict_orders(inst)?;
    let pos = axis_positions(axis, inst.m())?;
    Ok(first_violation(&o, axis, &pos, &mut 0))
}

fn prepare(inst: &Instance, axis: &[House], ops: &mut u64) -> Result<(Orders, Vec<usize>)> {
    let o = strict_orders(inst)?;
    let pos = axis_positions(axis, inst.m())?;
    if let Some(v) = first_violation(&o, axis, &pos, ops) {
        return Err(Error::Domain(format!("not single-peaked: {v}")));
    }
    Ok((o, pos))
}

fn build_profile(o: &Orders, m: usize, ops: &mut u64) -> PeakProfile {
    let n = o.order.len();
    let peak: Vec<House> = (0..n).map(|i| o.top(i)).collect();
    let mut base = vec![Vec::new(); m];
    for (i, &h) in peak.iter().enumerate() {
        base[h].push(i);
    }
    let mut span = vec![Vec::new(); m];
    let mut kind = vec![PeakKind::NonPeak; m];
    for h in 0..m {
        kind[h] = match base[h].len() {
            0 => continue,
            1 => PeakKind::Individual,
            _ => PeakKind::Shared,
        };
        if kind[h] == PeakKind::Shared {
            let first = base[h][0];
            let mut len = 0;
            while len < m
                && base[h][1..].iter().all(|&j| {
                    *ops += 1;
                    o.order[j][len] == o.order[first][len]
                })
            {
                len += 1;
            }
            span[h] = o.order[first][..len].to_vec();
        }
    }
    let p_i = kind.iter().filter(|&&k| k == PeakKind::Individual).count();
    let p_s = kind.iter().filter(|&&k| k == PeakKind::Shared).count();
    PeakProfile {
        peak,
        base,
        span,
        kind,
        p_i,
        p_s,
    }
}

/// Peaks, bases and spans of a single-peaked instance.
pub fn peak_profile(inst: &Instance, axis: &[House]) -> Result<PeakProfile> {
    let mut ops = 0;
    let (o, _) = prepare(inst, axis, &mut ops)?;
    Ok(build_profile(&o, inst.m(), &mut ops))
}

struct Builder<'a> {
    o: &'a Orders,
    prof: &'a PeakProfile,
    alloc: Vec<Option<House>>,
    taken: Vec<bool>,
    blocked: Vec<bool>,
    ops: u64,
}

impl Builder<'_> {
    fn give(&mut self, i: Agent, h: House) {
        debug_assert!(self.alloc[i].is_none() && !self.taken[h]);
        self.alloc[i] = Some(h);
        self.taken[h] = true;
    }

    /// Gives `h` to the lowest-index unallocated agent of `base(h)`.
    fn non_wasteful(&mut self, h: House) {
        if self.taken[h] {
            return;
        }
        let prof = self.prof;
        if let Some(&i) = prof.base[h].iter().find(|&&i| self.alloc[i].is_none()) {
            self.give(i, h);
        }
    }

    fn free_houses(&mut self) -> usize {
        self.ops += self.taken.len() as u64;
        (0..self.taken.len())
            .filter(|&h| !self.taken[h] && !self.blocked[h])
            .count()
    }

    fn free_agents(&self) -> usize {
        self.alloc.iter().filter(|a| a.is_none()).count()
    }

    /// Two base agents whose next house after the span differs, one per
    /// side, each house still available and nobody's peak.
    fn resolvers(&mut self, h: House, pos: &[usize]) -> Option<[(Agent, House); 2]> {
        let len = self.prof.span[h].len();
        if len >= self.taken.len() {
            return None;
        }
        let mut next: Vec<(House, Agent)> = Vec::new();
        for &i in &self.prof.base[h] {
            self.ops += 1;
            let x = self.o.order[i][len];
            if !next.iter().any(|&(y, _)| y == x) {
                next.push((x, i));
            }
        }
        // handing out another unallocated peak would cost its base the
        // envy-free agent that resolving is meant to gain
        let prof = self.prof;
        next.retain(|&(x, _)| !self.taken[x] && !self.blocked[x] && prof.kind[x] == PeakKind::NonPeak);
        next.sort_by_key(|&(x, _)| pos[x]);
        match next.as_slice() {
            [(l, il), .., (r, ir)] => Some([(*il, *l), (*ir, *r)]),
            _ => None,
        }
    }

    fn best_available(&mut self, i: Agent) -> Option<House> {
        for &h in &self.o.order[i] {
            self.ops += 1;
            if !self.taken[h] && !self.blocked[h] {
                return Some(h);
            }
        }
        None
    }
}

fn solve(o: &Orders, pos: &[usize], prof: &PeakProfile, ops: u64) -> (Allocation, u64) {
    let n = o.order.len();
    let m = pos.len();
    let mut b = Builder {
        o,
        prof,
        alloc: vec![None; n],
        taken: vec![false; m],
        blocked: vec![false; m],
        ops,
    };
    let mut by_axis: Vec<House> = (0..m).collect();
    by_axis.sort_by_key(|&h| pos[h]);

    for &h in &by_axis {
        if prof.kind[h] == PeakKind::Individual {
            b.give(prof.base[h][0], h);
        }
    }
    let shared: Vec<House> = by_axis
        .iter()
        .copied()
        .filter(|&h| prof.kind[h] == PeakKind::Shared)
        .collect();
    for (x, &hj) in shared.iter().enumerate() {
        for &hl in &shared[x + 1..] {
            b.ops += 1;
            if prof.in_span(hl, hj) && prof.in_span(hj, hl) {
                b.non_wasteful(hj);
                b.non_wasteful(hl);
            }
        }
    }
    for &hj in &shared {
        for &hl in &shared {
            b.ops += 1;
            if hj != hl && prof.in_span(hl, hj) && !prof.in_span(hj, hl) {
                b.non_wasteful(hl);
            }
        }
    }

    let mut rest: Vec<House> = shared.iter().copied().filter(|&h| !b.taken[h]).collect();
    rest.sort_by_key(|&h| (prof.span[h].len(), pos[h]));
    let mut give_up = false;
    for &h in &rest {
        if give_up {
            b.non_wasteful(h);
            continue;
        }
        if b.taken[h] {
            continue;
        }
        let span_free = prof.span[h].iter().all(|&x| !b.taken[x]);
        let fresh = prof.span[h].iter().filter(|&&x| !b.blocked[x]).count();
        let (mp, np) = (b.free_houses(), b.free_agents());
        if mp < fresh + np {
            give_up = true;
            b.non_wasteful(h);
            continue;
        }
        match (span_free, b.resolvers(h, pos)) {
            (true, Some(pair)) => {
                for (i, x) in pair {
                    b.give(i, x);
                }
                for &x in &prof.span[h] {
                    b.blocked[x] = true;
                }
            }
            _ => b.non_wasteful(h),
        }
    }

    for i in 0..n {
        if b.alloc[i].is_none() {
            let h = b
                .best_available(i)
                .expect("resolution keeps enough houses outside the blocked spans");
            b.give(i, h);
        }
    }
    let houses = b.alloc.into_iter().map(Option::unwrap).collect();
    (Allocation::from_vec_unchecked(houses), b.ops)
}

/// An allocation with the fewest envious agents.
pub fn min_envy_single_peaked(inst: &Instance, axis: &[House]) -> Result<Allocation> {
    min_envy_single_peaked_counted(inst, axis).map(|(a, _)| a)
}

/// As [`min_envy_single_peaked`], also returning the number of ranking reads
/// and comparisons the algorithm performs. Input checks are not counted.
pub fn min_envy_single_peaked_counted(inst: &Instance, axis: &[House]) -> Result<(Allocation, u64)> {
    let (o, pos) = prepare(inst, axis, &mut 0)?;
    let mut ops = 0;
    let prof = build_profile(&o, inst.m(), &mut ops);
    Ok(solve(&o, &pos, &prof, ops))
}

/// A minimum-Envy allocation that is also Pareto optimal, if one exists.
pub fn min_envy_pareto_single_peaked(inst: &Instance, axis: &[House]) -> Result<Option<Allocation>> {
    let a = min_envy_single_peaked(inst, axis)?;
    let a = pareto::resolve_envy_cycles(inst, &a);
    Ok(pareto::wanted_free_house(inst, &a).is_none().then_some(a))
}
