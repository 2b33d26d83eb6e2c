//! Minimum-Envy allocations for single-dipped preferences.
//!
//! Every agent's favourite house is an end of the axis, and the best house
//! of any set is its leftmost or rightmost member, which keeps serial
//! dictatorship linear.

use crate::error::{Error, Result};
use crate::model::{agent_name, house_name, Agent, Allocation, House, Instance, Preferences};
use crate::orders::{axis_positions, Orders};
use crate::pareto;
use serde::Serialize;

/// `agent` prefers `near` to `far` although `far` lies farther from its dip
/// on the same side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DipViolation {
    pub agent: Agent,
    pub near: House,
    pub far: House,
}

impl std::fmt::Display for DipViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} does not prefer {} to {}, which is closer to its dip",
            agent_name(self.agent),
            house_name(self.far),
            house_name(self.near)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DipProfile {
    /// Least preferred house of each agent (the axis-leftmost one when the
    /// bottom is a tie group).
    pub dip: Vec<House>,
    /// Houses ranked first by some agent.
    pub s1: Vec<House>,
    /// Common top prefix of all rankings, when everyone shares one top.
    pub span: Vec<House>,
    /// The common bottom tie group, if rankings end in one.
    pub bottom: Option<Vec<House>>,
}

/// Tie-aware view of the profile: per-agent tiers, and the strict orders
/// obtained by breaking the bottom tie towards the left of the axis.
struct Prepared {
    orders: Orders,
    bottom: Option<Vec<House>>,
    pos: Vec<usize>,
}

fn tiers(inst: &Instance) -> Result<Vec<Vec<Vec<House>>>> {
    let ord = inst.to_ordinal();
    let Preferences::Ordinal(rankings) = ord.prefs() else {
        unreachable!("to_ordinal returns an ordinal profile")
    };
    let mut out = Vec::with_capacity(inst.n());
    for (i, r) in rankings.iter().enumerate() {
        if r.ranked_len() != inst.m() {
            return Err(Error::Domain(format!("{} does not rank every house", agent_name(i))));
        }
        let g = r.groups();
        if g[..g.len() - 1].iter().any(|t| t.len() > 1) {
            return Err(Error::Domain(format!(
                "{} has ties above its bottom group",
                agent_name(i)
            )));
        }
        out.push(g.to_vec());
    }
    Ok(out)
}

fn first_violation(tiers: &[Vec<Vec<House>>], axis: &[House], pos: &[usize]) -> Option<DipViolation> {
    let m = axis.len();
    for (i, t) in tiers.iter().enumerate() {
        let mut tier = vec![0usize; m];
        for (r, g) in t.iter().enumerate() {
            for &h in g {
                tier[h] = r;
            }
        }
        let bottom = t.last().unwrap();
        let lo = bottom.iter().map(|&h| pos[h]).min().unwrap();
        let hi = bottom.iter().map(|&h| pos[h]).max().unwrap();
        if let Some(q) = (lo..=hi).find(|&q| !bottom.contains(&axis[q])) {
            return Some(DipViolation {
                agent: i,
                near: axis[q],
                far: axis[hi],
            });
        }
        let sides = [(0..lo).rev().collect::<Vec<_>>(), (hi + 1..m).collect()];
        for (side, start) in sides.into_iter().zip([lo, hi]) {
            let mut prev = axis[start];
            for q in side {
                let h = axis[q];
                if tier[h] >= tier[prev] {
                    return Some(DipViolation {
                        agent: i,
                        near: prev,
                        far: h,
                    });
                }
                prev = h;
            }
        }
    }
    None
}

/// `Ok(None)` when every ranking is single-dipped on `axis`. Ties are
/// allowed only inside an agent's bottom group, which must be a contiguous
/// block of the axis.
pub fn validate_single_dipped(inst: &Instance, axis: &[House]) -> Result<Option<DipViolation>> {
    let pos = axis_positions(axis, inst.m())?;
    Ok(first_violation(&tiers(inst)?, axis, &pos))
}

fn prepare(inst: &Instance, axis: &[House], allow_ties: bool) -> Result<Prepared> {
    let pos = axis_positions(axis, inst.m())?;
    let t = tiers(inst)?;
    if let Some(v) = first_violation(&t, axis, &pos) {
        return Err(Error::Domain(format!("not single-dipped: {v}")));
    }
    let tied = t.iter().any(|g| g.last().unwrap().len() > 1);
    let bottom = if tied {
        if !allow_ties {
            return Err(Error::Domain(
                "ties need the tie-aware solver".into(),
            ));
        }
        let mut common = t[0].last().unwrap().clone();
        common.sort_unstable();
        for (i, g) in t.iter().enumerate() {
            let mut b = g.last().unwrap().clone();
            b.sort_unstable();
            if b != common {
                return Err(Error::Domain(format!(
                    "{} ends in a different bottom group",
                    agent_name(i)
                )));
            }
        }
        common.sort_by_key(|&h| pos[h]);
        Some(common)
    } else {
        None
    };
    let m = inst.m();
    let mut order = Vec::with_capacity(t.len());
    let mut rank = Vec::with_capacity(t.len());
    for g in &t {
        let mut o: Vec<House> = Vec::with_capacity(m);
        for grp in g {
            let mut grp = grp.clone();
            grp.sort_by_key(|&h| pos[h]);
            o.extend(grp);
        }
        let mut inv = vec![0; m];
        for (r, &h) in o.iter().enumerate() {
            inv[h] = r;
        }
        order.push(o);
        rank.push(inv);
    }
    Ok(Prepared {
        orders: Orders { order, rank },
        bottom,
        pos,
    })
}

fn common_prefix(o: &Orders, ops: &mut u64) -> usize {
    let n = o.order.len();
    let m = o.order[0].len();
    let mut len = 0;
    while len < m
        && (1..n).all(|j| {
            *ops += 1;
            o.order[j][len] == o.order[0][len]
        })
    {
        len += 1;
    }
    len
}

fn profile_of(p: &Prepared) -> DipProfile {
    let o = &p.orders;
    let n = o.order.len();
    let dip = (0..n)
        .map(|i| match &p.bottom {
            Some(b) => b[0],
            None => *o.order[i].last().unwrap(),
        })
        .collect();
    let mut s1: Vec<House> = (0..n).map(|i| o.top(i)).collect();
    s1.sort_by_key(|&h| p.pos[h]);
    s1.dedup();
    let span = if s1.len() == 1 {
        o.order[0][..common_prefix(o, &mut 0)].to_vec()
    } else {
        Vec::new()
    };
    DipProfile {
        dip,
        s1,
        span,
        bottom: p.bottom.clone(),
    }
}

/// Dips, first-ranked houses and the common span.
pub fn dip_profile(inst: &Instance, axis: &[House]) -> Result<DipProfile> {
    Ok(profile_of(&prepare(inst, axis, true)?))
}

/// Available houses as a window over the axis with holes; the best house of
/// a single-dipped agent is always at one of the two ends.
struct Shelf<'a> {
    axis: &'a [House],
    free: Vec<bool>,
    lo: usize,
    hi: usize,
    left: usize,
}

impl<'a> Shelf<'a> {
    fn new(axis: &'a [House], pos: &[usize], blocked: &[House]) -> Self {
        let mut free = vec![true; axis.len()];
        for &h in blocked {
            free[pos[h]] = false;
        }
        let left = free.iter().filter(|&&f| f).count();
        let mut s = Shelf {
            axis,
            free,
            lo: 0,
            hi: axis.len(),
            left,
        };
        s.tidy(&mut 0);
        s
    }

    fn take(&mut self, p: usize, ops: &mut u64) {
        debug_assert!(self.free[p]);
        self.free[p] = false;
        self.left -= 1;
        self.tidy(ops);
    }

    fn tidy(&mut self, ops: &mut u64) {
        while self.lo < self.hi && !self.free[self.lo] {
            *ops += 1;
            self.lo += 1;
        }
        while self.hi > self.lo && !self.free[self.hi - 1] {
            *ops += 1;
            self.hi -= 1;
        }
    }

    /// Best free house for an agent, by axis position.
    fn best(&self, rank: &[usize], ops: &mut u64) -> Option<usize> {
        if self.left == 0 {
            return None;
        }
        let (l, r) = (self.lo, self.hi - 1);
        *ops += 1;
        Some(if rank[self.axis[l]] <= rank[self.axis[r]] { l } else { r })
    }
}

fn strict_solve(p: &Prepared, axis: &[House], ops: &mut u64) -> Allocation {
    let o = &p.orders;
    let n = o.order.len();
    let pos = &p.pos;
    let mut alloc: Vec<Option<House>> = vec![None; n];
    let mut blocked: Vec<House> = Vec::new();
    let mut fixed: Vec<(Agent, House)> = Vec::new();

    let tops: Vec<House> = (0..n)
        .map(|i| {
            *ops += 1;
            o.top(i)
        })
        .collect();
    let (left_top, right_top) = (
        tops.iter().copied().min_by_key(|&h| pos[h]).unwrap(),
        tops.iter().copied().max_by_key(|&h| pos[h]).unwrap(),
    );
    let first_ranking = |h: House, at: usize, ops: &mut u64| {
        (0..n)
            .find(|&i| {
                *ops += 1;
                o.order[i][at] == h
            })
            .unwrap()
    };
    if left_top != right_top {
        fixed.push((first_ranking(left_top, 0, ops), left_top));
        fixed.push((first_ranking(right_top, 0, ops), right_top));
    } else {
        let top = left_top;
        let len = common_prefix(o, ops);
        if n >= 2 && axis.len() - len >= n {
            let next: Vec<House> = (0..n)
                .map(|i| {
                    *ops += 1;
                    o.order[i][len]
                })
                .collect();
            let h1 = next.iter().copied().min_by_key(|&h| pos[h]).unwrap();
            let h2 = next.iter().copied().max_by_key(|&h| pos[h]).unwrap();
            fixed.push((first_ranking(h1, len, ops), h1));
            fixed.push((first_ranking(h2, len, ops), h2));
            blocked.extend_from_slice(&o.order[0][..len]);
        } else {
            fixed.push((first_ranking(top, 0, ops), top));
        }
    }

    let mut shelf = Shelf::new(axis, pos, &blocked);
    for &(i, h) in &fixed {
        alloc[i] = Some(h);
        shelf.take(pos[h], ops);
    }
    for i in 0..n {
        if alloc[i].is_none() {
            let q = shelf.best(&o.rank[i], ops).expect("m >= n leaves a house for everyone");
            alloc[i] = Some(axis[q]);
            shelf.take(q, ops);
        }
    }
    Allocation::from_vec_unchecked(alloc.into_iter().map(Option::unwrap).collect())
}

/// An allocation with the fewest envious agents for strict single-dipped
/// preferences.
pub fn min_envy_single_dipped(inst: &Instance, axis: &[House]) -> Result<Allocation> {
    min_envy_single_dipped_counted(inst, axis).map(|(a, _)| a)
}

/// As [`min_envy_single_dipped`], with the number of ranking reads and
/// comparisons made after the input checks.
pub fn min_envy_single_dipped_counted(inst: &Instance, axis: &[House]) -> Result<(Allocation, u64)> {
    let p = prepare(inst, axis, false)?;
    let mut ops = 0;
    let a = strict_solve(&p, axis, &mut ops);
    Ok((a, ops))
}

/// Single-dipped preferences whose rankings may all end in the same tie
/// group. If that group has at least `n` houses everyone gets one of them;
/// otherwise the ties are broken along the axis and the strict solver runs.
pub fn min_envy_single_dipped_ties(inst: &Instance, axis: &[House]) -> Result<Allocation> {
    let p = prepare(inst, axis, true)?;
    match &p.bottom {
        Some(b) if b.len() >= inst.n() => Ok(Allocation::from_vec_unchecked(b[..inst.n()].to_vec())),
        _ => Ok(strict_solve(&p, axis, &mut 0)),
    }
}

/// A minimum-Envy allocation that is also Pareto optimal, if one exists.
pub fn min_envy_pareto_single_dipped(inst: &Instance, axis: &[House]) -> Result<Option<Allocation>> {
    let a = min_envy_single_dipped(inst, axis)?;
    let a = pareto::resolve_envy_cycles(inst, &a);
    Ok(pareto::wanted_free_house(inst, &a).is_none().then_some(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{measure_value, Measure};

    fn strict(orders: &[&[usize]], m: usize) -> Instance {
        Instance::ordinal(
            orders
                .iter()
                .map(|o| o.iter().map(|&h| vec![h - 1]).collect())
                .collect(),
            m,
        )
        .unwrap()
    }

    fn identity(m: usize) -> Vec<House> {
        (0..m).collect()
    }

    #[test]
    fn increasing_away_from_dip_is_valid() {
        let inst = Instance::cardinal(vec![vec![5, 3, 1, 2, 4], vec![1, 2, 3, 4, 5]]).unwrap();
        assert_eq!(validate_single_dipped(&inst, &identity(5)).unwrap(), None);
    }

    #[test]
    fn near_house_preferred_is_caught() {
        // dip h3; prefers h4 to h5 on the right side
        let inst = Instance::cardinal(vec![vec![5, 3, 1, 4, 2]]).unwrap();
        let v = validate_single_dipped(&inst, &identity(5)).unwrap().unwrap();
        assert_eq!((v.agent, v.near, v.far), (0, 3, 4));
    }

    #[test]
    fn two_houses_always_valid() {
        for o in [[1, 2], [2, 1]] {
            let inst = strict(&[&o], 2);
            assert_eq!(validate_single_dipped(&inst, &identity(2)).unwrap(), None);
        }
    }

    #[test]
    fn single_agent_is_envy_free() {
        let inst = strict(&[&[3, 1, 2]], 3);
        let a = min_envy_single_dipped(&inst, &identity(3)).unwrap();
        assert_eq!(measure_value(&inst, &a, Measure::Envy), 0);
        assert_eq!(a.houses(), &[2]);
    }

    #[test]
    fn two_tops_give_two_envy_free() {
        let inst = strict(&[&[1, 4, 2, 3], &[4, 1, 3, 2], &[1, 2, 4, 3]], 4);
        let a = min_envy_single_dipped(&inst, &identity(4)).unwrap();
        assert_eq!(measure_value(&inst, &a, Measure::Envy), 1);
    }

    #[test]
    fn resolved_span_gives_two_envy_free() {
        // everyone: h1 first, then h5 or h2
        let inst = strict(&[&[1, 5, 2, 4, 3], &[1, 2, 5, 4, 3], &[1, 5, 4, 2, 3]], 5);
        let p = dip_profile(&inst, &identity(5)).unwrap();
        assert_eq!(p.span, vec![0]);
        let a = min_envy_single_dipped(&inst, &identity(5)).unwrap();
        assert_eq!(measure_value(&inst, &a, Measure::Envy), 1);
        assert!(!a.houses().contains(&0));
    }

    #[test]
    fn wide_bottom_tie_makes_everyone_envy_free() {
        let inst = Instance::ordinal(
            vec![
                vec![vec![0], vec![4], vec![1, 2, 3]],
                vec![vec![4], vec![0], vec![1, 2, 3]],
                vec![vec![0], vec![4], vec![1, 2, 3]],
            ],
            5,
        )
        .unwrap();
        let a = min_envy_single_dipped_ties(&inst, &identity(5)).unwrap();
        assert_eq!(a.houses(), &[1, 2, 3]);
        assert_eq!(measure_value(&inst, &a, Measure::Envy), 0);
        assert!(min_envy_single_dipped(&inst, &identity(5)).is_err());
    }

    #[test]
    fn narrow_bottom_tie() {
        // |T| = n - 1: at least n - 2 agents envious
        let inst = Instance::ordinal(
            vec![
                vec![vec![0], vec![3], vec![1, 2]],
                vec![vec![3], vec![0], vec![1, 2]],
                vec![vec![0], vec![3], vec![1, 2]],
            ],
            4,
        )
        .unwrap();
        let a = min_envy_single_dipped_ties(&inst, &identity(4)).unwrap();
        assert!(measure_value(&inst, &a, Measure::Envy) >= 1);
    }

    #[test]
    fn no_ties_matches_strict_solver() {
        let inst = strict(&[&[1, 5, 2, 4, 3], &[5, 1, 4, 2, 3]], 5);
        assert_eq!(
            min_envy_single_dipped_ties(&inst, &identity(5)).unwrap(),
            min_envy_single_dipped(&inst, &identity(5)).unwrap()
        );
    }

    #[test]
    fn square_two_top_instance_is_pareto_optimal() {
        let inst = strict(&[&[1, 3, 2], &[3, 1, 2], &[1, 3, 2]], 3);
        let a = min_envy_pareto_single_dipped(&inst, &identity(3)).unwrap().unwrap();
        assert!(pareto::is_pareto_optimal(&inst, &a));
    }

    #[test]
    fn one_by_one() {
        let inst = strict(&[&[1]], 1);
        let a = min_envy_pareto_single_dipped(&inst, &[0]).unwrap().unwrap();
        assert_eq!(a.houses(), &[0]);
    }
}
