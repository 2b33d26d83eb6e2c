//! The bipartite preference graph and alternating paths/cycles over it.

use crate::error::{Error, Result};
use crate::model::{agent_name, house_name, Agent, Allocation, House, Instance};
use std::fmt;

/// Agents occupy vertex ids `0..n`, houses `n..n+m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceGraph {
    n: usize,
    m: usize,
    edges: Vec<(Agent, House)>,
    edge_id: Vec<Option<usize>>,
    agent_adj: Vec<Vec<House>>,
    house_adj: Vec<Vec<Agent>>,
}

impl PreferenceGraph {
    /// Edge `(i, h)` iff `i` ranks `h` (ordinal) or values it positively (cardinal).
    pub fn new(inst: &Instance) -> Self {
        Self::build(inst, None)
    }

    /// The preference graph plus every edge of `base`, so that alternating
    /// structures can run through agents that hold unlisted houses.
    pub fn with_allocation(inst: &Instance, base: &Allocation) -> Self {
        Self::build(inst, Some(base))
    }

    fn build(inst: &Instance, base: Option<&Allocation>) -> Self {
        let (n, m) = (inst.n(), inst.m());
        let mut g = PreferenceGraph {
            n,
            m,
            edges: Vec::new(),
            edge_id: vec![None; n * m],
            agent_adj: vec![Vec::new(); n],
            house_adj: vec![Vec::new(); m],
        };
        for i in 0..n {
            for h in 0..m {
                if inst.lists(i, h) || base.is_some_and(|b| b.house(i) == h) {
                    g.edge_id[i * m + h] = Some(g.edges.len());
                    g.edges.push((i, h));
                    g.agent_adj[i].push(h);
                    g.house_adj[h].push(i);
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        self.n + self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Agent, House)] {
        &self.edges
    }

    pub fn edge(&self, i: Agent, h: House) -> Option<usize> {
        self.edge_id[i * self.m + h]
    }

    pub fn has_edge(&self, i: Agent, h: House) -> bool {
        self.edge(i, h).is_some()
    }

    pub fn agent_vertex(&self, i: Agent) -> usize {
        i
    }

    pub fn house_vertex(&self, h: House) -> usize {
        self.n + h
    }

    pub fn houses_of(&self, i: Agent) -> &[House] {
        &self.agent_adj[i]
    }

    pub fn agents_of(&self, h: House) -> &[Agent] {
        &self.house_adj[h]
    }

    /// Maximum degree over agents and houses alike.
    pub fn max_degree(&self) -> usize {
        let a = self.agent_adj.iter().map(Vec::len).max().unwrap_or(0);
        let h = self.house_adj.iter().map(Vec::len).max().unwrap_or(0);
        a.max(h)
    }

    /// Connected components of the whole graph as vertex-id labels.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertex_count());
        for &(i, h) in &self.edges {
            uf.union(self.agent_vertex(i), self.house_vertex(h));
        }
        (0..self.vertex_count()).map(|v| uf.find(v)).collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AltKind {
    Path,
    Cycle,
}

/// An alternating path or cycle relative to some allocation.
///
/// For a path, `houses = [h0, h1, .., ht]` and `agents = [i1, .., it]`: agent
/// `agents[s]` currently holds `houses[s + 1]` and moves to `houses[s]`, and
/// `h0` is unallocated. A cycle has as many houses as agents and agent
/// `agents[s]` moves from `houses[(s + 1) % t]` to `houses[s]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AltPath {
    pub kind: AltKind,
    pub houses: Vec<House>,
    pub agents: Vec<Agent>,
}

impl AltPath {
    pub fn empty() -> Self {
        AltPath {
            kind: AltKind::Path,
            houses: Vec::new(),
            agents: Vec::new(),
        }
    }

    /// Builds a path from an interleaved vertex walk `h0, i1, h1, .., it, ht`.
    pub fn path(houses: Vec<House>, agents: Vec<Agent>) -> Self {
        AltPath {
            kind: AltKind::Path,
            houses,
            agents,
        }
    }

    pub fn cycle(houses: Vec<House>, agents: Vec<Agent>) -> Self {
        AltPath {
            kind: AltKind::Cycle,
            houses,
            agents,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Number of reallocated agents.
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    /// `(agent, house)` edges, new and old, in walk order.
    pub fn edges(&self) -> Vec<(Agent, House)> {
        let t = self.agents.len();
        let mut out = Vec::with_capacity(2 * t);
        for s in 0..t {
            out.push((self.agents[s], self.houses[s]));
            let old = match self.kind {
                AltKind::Path => self.houses[s + 1],
                AltKind::Cycle => self.houses[(s + 1) % t],
            };
            out.push((self.agents[s], old));
        }
        out
    }

    /// Vertex names in walk order, e.g. `(h8,i1,h1,i2,h2)`.
    pub fn walk(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (s, &h) in self.houses.iter().enumerate() {
            out.push(house_name(h));
            if let Some(&i) = self.agents.get(s) {
                out.push(agent_name(i));
            }
        }
        out
    }
}

impl fmt::Display for AltPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            AltKind::Path => "",
            AltKind::Cycle => "cycle ",
        };
        write!(f, "{tag}({})", self.walk().join(","))
    }
}

/// `a ⊕ p`: moves every agent of `p` one step along it.
pub fn apply_path(a: &Allocation, p: &AltPath, m: usize) -> Result<Allocation> {
    if p.is_empty() {
        return Ok(a.clone());
    }
    let t = p.agents.len();
    let not_alt = |why: String| Error::Validation(format!("not an alternating {p}: {why}"));
    match p.kind {
        AltKind::Path => {
            if p.houses.len() != t + 1 {
                return Err(not_alt("path needs one more house than agents".into()));
            }
        }
        AltKind::Cycle => {
            if p.houses.len() != t || t < 2 {
                return Err(not_alt("cycle needs as many houses as agents, at least two".into()));
            }
        }
    }
    if p.houses.iter().any(|&h| h >= m) || p.agents.iter().any(|&i| i >= a.n()) {
        return Err(not_alt("vertex out of range".into()));
    }
    let holders = a.holders(m);
    let mut next = a.clone();
    for s in 0..t {
        let i = p.agents[s];
        let old = match p.kind {
            AltKind::Path => p.houses[s + 1],
            AltKind::Cycle => p.houses[(s + 1) % t],
        };
        if a.house(i) != old {
            return Err(not_alt(format!(
                "{} does not hold {}",
                agent_name(i),
                house_name(old)
            )));
        }
        next.set(i, p.houses[s]);
    }
    if p.kind == AltKind::Path {
        if let Some(j) = holders[p.houses[0]] {
            return Err(not_alt(format!(
                "start house {} is held by {}",
                house_name(p.houses[0]),
                agent_name(j)
            )));
        }
    }
    // repeated vertices show up as a non-injective result
    Allocation::new(next.houses().to_vec(), m).map_err(|e| not_alt(e.to_string()))
}

/// Applies several vertex-disjoint paths/cycles in order.
pub fn apply_all<'a>(
    a: &Allocation,
    paths: impl IntoIterator<Item = &'a AltPath>,
    m: usize,
) -> Result<Allocation> {
    paths
        .into_iter()
        .try_fold(a.clone(), |acc, p| apply_path(&acc, p, m))
}

/// Splits `target Δ base` into `base`-alternating paths and cycles whose joint
/// application to `base` yields `target`. No graph check.
///
/// Pieces are ordered by their smallest agent.
pub fn decompose(target: &Allocation, base: &Allocation, m: usize) -> Vec<AltPath> {
    let n = base.n();
    let base_holder = base.holders(m);
    let target_holder = target.holders(m);
    let moved = |i: Agent| target.house(i) != base.house(i);
    let mut done = vec![false; n];
    let mut pieces = Vec::new();

    // Paths start at a house taken in `target` but free in `base`.
    for h0 in 0..m {
        let Some(first) = target_holder[h0] else {
            continue;
        };
        if base_holder[h0].is_some() || !moved(first) {
            continue;
        }
        let mut houses = vec![h0];
        let mut agents = Vec::new();
        let mut i = first;
        loop {
            done[i] = true;
            agents.push(i);
            let released = base.house(i);
            houses.push(released);
            match target_holder[released] {
                Some(j) if moved(j) => i = j,
                _ => break,
            }
        }
        pieces.push(AltPath::path(houses, agents));
    }

    for start in 0..n {
        if done[start] || !moved(start) {
            continue;
        }
        let mut houses = Vec::new();
        let mut agents = Vec::new();
        let mut i = start;
        while !done[i] {
            done[i] = true;
            agents.push(i);
            houses.push(target.house(i));
            // whoever takes the house `i` gives up
            i = target_holder[base.house(i)].expect("cycle houses are taken in target");
        }
        pieces.push(AltPath::cycle(houses, agents));
    }

    pieces.sort_by_key(|p| p.agents.iter().copied().min());
    pieces
}

/// `target Δ base` as `base`-alternating paths/cycles of `g`.
///
/// Fails when a reallocation uses an edge missing from `g`; use
/// [`decompose`] when off-graph assignments are allowed.
pub fn symmetric_difference(
    target: &Allocation,
    base: &Allocation,
    g: &PreferenceGraph,
) -> Result<Vec<AltPath>> {
    let pieces = decompose(target, base, g.m());
    for p in &pieces {
        if let Some((i, h)) = p.edges().into_iter().find(|&(i, h)| !g.has_edge(i, h)) {
            return Err(Error::Inconsistent(format!(
                "edge ({}, {}) of {p} is not in the preference graph",
                agent_name(i),
                house_name(h)
            )));
        }
    }
    Ok(pieces)
}
