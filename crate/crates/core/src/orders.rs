//! Strict complete rankings as dense tables, shared by the domain solvers.

use crate::error::{Error, Result};
use crate::model::{Agent, House, Instance, Preferences};

#[derive(Debug, Clone)]
pub(crate) struct Orders {
    /// `order[i][r]` is agent `i`'s house at rank `r` (0 is best).
    pub order: Vec<Vec<House>>,
    /// `rank[i][h]` inverts `order`.
    pub rank: Vec<Vec<usize>>,
}

impl Orders {
    pub fn top(&self, i: Agent) -> House {
        self.order[i][0]
    }
}

/// Rankings of a complete strict profile. Cardinal values are read as
/// rankings and must be distinct per agent.
pub(crate) fn strict_orders(inst: &Instance) -> Result<Orders> {
    let ord = inst.to_ordinal();
    let Preferences::Ordinal(rankings) = ord.prefs() else {
        unreachable!("to_ordinal returns an ordinal profile")
    };
    let m = inst.m();
    let mut order = Vec::with_capacity(inst.n());
    let mut rank = Vec::with_capacity(inst.n());
    for (i, r) in rankings.iter().enumerate() {
        if r.ranked_len() != m {
            return Err(Error::Domain(format!("agent i{} does not rank every house", i + 1)));
        }
        if r.groups().iter().any(|g| g.len() > 1) {
            return Err(Error::Domain(format!("agent i{} has ties", i + 1)));
        }
        let o: Vec<House> = r.groups().iter().map(|g| g[0]).collect();
        let mut inv = vec![0; m];
        for (pos, &h) in o.iter().enumerate() {
            inv[h] = pos;
        }
        order.push(o);
        rank.push(inv);
    }
    Ok(Orders { order, rank })
}

/// Axis positions of every house, after checking the axis is a permutation.
pub(crate) fn axis_positions(axis: &[House], m: usize) -> Result<Vec<usize>> {
    if axis.len() != m {
        return Err(Error::Validation(format!(
            "axis has {} houses, instance has {m}",
            axis.len()
        )));
    }
    let mut pos = vec![usize::MAX; m];
    for (p, &h) in axis.iter().enumerate() {
        if h >= m || pos[h] != usize::MAX {
            return Err(Error::Validation("axis is not a permutation of the houses".into()));
        }
        pos[h] = p;
    }
    Ok(pos)
}
