//! Lowering an envy measure by `k` while reallocating at most `q` agents.
//!
//! One pass colors the preference graph red/green/blue, keeps the
//! components of the non-blue graph that are made of red alternating
//! paths and cycles, scores each by the measure drop it produces on its own
//! and picks a subset with a 0/1 knapsack over (agents moved, drop).

use crate::error::{Error, Result};
use crate::graph::{decompose, AltPath, PreferenceGraph, UnionFind};
use crate::measure::{measure_value, Measure};
use crate::model::{Allocation, House, Instance};
use crate::oracle::{self, OracleConfig};
use crate::par;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];
}

/// Colors of every vertex (graph vertex ids) and every edge (graph edge ids).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    pub vertices: Vec<Color>,
    pub edges: Vec<Color>,
}

impl Coloring {
    pub fn uniform(g: &PreferenceGraph, c: Color) -> Self {
        Coloring {
            vertices: vec![c; g.vertex_count()],
            edges: vec![c; g.edge_count()],
        }
    }

    fn fits(&self, g: &PreferenceGraph) -> bool {
        self.vertices.len() == g.vertex_count() && self.edges.len() == g.edge_count()
    }
}

/// Vertices first, then edges, each uniform over the three colors.
pub fn sample_coloring<R: Rng + ?Sized>(g: &PreferenceGraph, rng: &mut R) -> Coloring {
    let mut draw = || Color::ALL[rng.gen_range(0..3usize)];
    let vertices = (0..g.vertex_count()).map(|_| draw()).collect();
    let edges = (0..g.edge_count()).map(|_| draw()).collect();
    Coloring { vertices, edges }
}

/// Connected components of `g` minus its blue edges, each a sorted vertex
/// list, ordered by smallest vertex.
pub fn components_after_blue_removal(g: &PreferenceGraph, chi: &Coloring) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, &(i, h)) in g.edges().iter().enumerate() {
        if chi.edges[e] != Color::Blue {
            uf.union(g.agent_vertex(i), g.house_vertex(h));
        }
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    for v in 0..g.vertex_count() {
        by_root[uf.find(v)].push(v);
    }
    by_root.into_iter().filter(|c| !c.is_empty()).collect()
}

/// A component that survived the feasibility conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub pieces: Vec<AltPath>,
    /// `measure(base) - measure(base ⊕ pieces)`.
    pub drop: i64,
    /// Reallocated agents.
    pub agents: usize,
}

/// Reads the red part of one component as a set of reallocations.
///
/// Isolated red vertices count as trivial paths. Returns `None` when the red
/// edges are not a union of `base`-alternating paths and cycles.
fn red_moves(
    g: &PreferenceGraph,
    chi: &Coloring,
    base: &Allocation,
    holders: &[Option<usize>],
    verts: &[usize],
) -> Option<Allocation> {
    let n = g.n();
    let mut target = base.clone();
    for &v in verts {
        if v < n {
            let i = v;
            let mut own = 0;
            let mut other = Vec::new();
            for &h in g.houses_of(i) {
                if chi.edges[g.edge(i, h).unwrap()] != Color::Red {
                    continue;
                }
                if h == base.house(i) {
                    own += 1;
                } else {
                    other.push(h);
                }
            }
            match (own, other.as_slice()) {
                (0, []) => {}
                (1, [h]) => target.set(i, *h),
                _ => return None,
            }
        } else {
            let h: House = v - n;
            let mut own = 0;
            let mut other = 0;
            for &i in g.agents_of(h) {
                if chi.edges[g.edge(i, h).unwrap()] != Color::Red {
                    continue;
                }
                if base.house(i) == h {
                    own += 1;
                } else {
                    other += 1;
                }
            }
            match (own, other) {
                (0, 0) | (1, 0) | (1, 1) => {}
                // a path starts at a house nobody holds
                (0, 1) if holders[h].is_none() => {}
                _ => return None,
            }
        }
    }
    Some(target)
}

/// Applies conditions (1)-(4) and scores the survivors. Components with a
/// non-positive drop are dropped as well.
pub fn feasibility_filter(
    components: &[Vec<usize>],
    g: &PreferenceGraph,
    chi: &Coloring,
    inst: &Instance,
    base: &Allocation,
    measure: Measure,
) -> Vec<Component> {
    let n = g.n();
    let mut comp_of = vec![usize::MAX; g.vertex_count()];
    for (c, verts) in components.iter().enumerate() {
        for &v in verts {
            comp_of[v] = c;
        }
    }
    let mut blue_inside = vec![false; components.len()];
    for (e, &(i, h)) in g.edges().iter().enumerate() {
        let (a, b) = (comp_of[g.agent_vertex(i)], comp_of[g.house_vertex(h)]);
        if chi.edges[e] == Color::Blue && a == b {
            blue_inside[a] = true;
        }
    }
    let holders = base.holders(inst.m());
    let before = measure_value(inst, base, measure) as i64;

    let mut kept: Vec<(Component, Allocation)> = Vec::new();
    for (c, verts) in components.iter().enumerate() {
        if verts.iter().any(|&v| chi.vertices[v] != Color::Red) || blue_inside[c] {
            continue;
        }
        let Some(target) = red_moves(g, chi, base, &holders, verts) else {
            continue;
        };
        let agents = verts.iter().filter(|&&v| v < n && target.house(v) != base.house(v)).count();
        let drop = before - measure_value(inst, &target, measure) as i64;
        let pieces = decompose(&target, base, inst.m());
        kept.push((
            Component {
                vertices: verts.clone(),
                pieces,
                drop,
                agents,
            },
            target,
        ));
    }

    // (4): pairwise dependence, removed all at once after the scan
    let mut dependent = vec![false; kept.len()];
    for x in 0..kept.len() {
        for y in x + 1..kept.len() {
            let mut both = kept[x].1.clone();
            for i in 0..n {
                if kept[y].1.house(i) != base.house(i) {
                    both.set(i, kept[y].1.house(i));
                }
            }
            let joint = before - measure_value(inst, &both, measure) as i64;
            if joint < kept[x].0.drop + kept[y].0.drop {
                dependent[x] = true;
                dependent[y] = true;
            }
        }
    }
    kept.into_iter()
        .zip(dependent)
        .filter(|((c, _), dep)| !dep && c.drop > 0)
        .map(|((c, _), _)| c)
        .collect()
}

/// 0/1 knapsack over `(profit, weight)` items: a subset with total weight at
/// most `q` and total profit at least `k`, if one exists. Among those, one of
/// maximum profit is returned. Runs in `O(items * q)`.
pub fn knapsack_select(items: &[(i64, usize)], q: usize, k: i64) -> Option<Vec<usize>> {
    if k <= 0 {
        return Some(Vec::new());
    }
    let c = items.len();
    // best[j][w]: max profit from the first j items within weight w
    let mut best = vec![vec![0i64; q + 1]; c + 1];
    for j in 1..=c {
        let (r, wt) = items[j - 1];
        for w in 0..=q {
            best[j][w] = best[j - 1][w];
            if wt <= w && r > 0 {
                best[j][w] = best[j][w].max(best[j - 1][w - wt] + r);
            }
        }
    }
    if best[c][q] < k {
        return None;
    }
    let mut chosen = Vec::new();
    let mut w = q;
    for j in (1..=c).rev() {
        if best[j][w] != best[j - 1][w] {
            chosen.push(j - 1);
            w -= items[j - 1].1;
        }
    }
    chosen.reverse();
    Some(chosen)
}

/// One pass under a fixed coloring. `g` must contain the edges of `base`
/// (see [`PreferenceGraph::with_allocation`]).
///
/// The result is re-checked before it is returned, so a `Some` always meets
/// both the drop and the budget.
pub fn refine_once(
    inst: &Instance,
    base: &Allocation,
    g: &PreferenceGraph,
    q: usize,
    k: u64,
    measure: Measure,
    chi: &Coloring,
) -> Option<Allocation> {
    let before = measure_value(inst, base, measure);
    if k == 0 {
        return Some(base.clone());
    }
    if q == 0 || k > before || !chi.fits(g) {
        return None;
    }
    let comps = components_after_blue_removal(g, chi);
    let feasible = feasibility_filter(&comps, g, chi, inst, base, measure);
    let items: Vec<(i64, usize)> = feasible.iter().map(|c| (c.drop, c.agents)).collect();
    let chosen = knapsack_select(&items, q, k as i64)?;
    let mut out = base.clone();
    for &x in &chosen {
        for p in &feasible[x].pieces {
            for (s, &i) in p.agents.iter().enumerate() {
                out.set(i, p.houses[s]);
            }
        }
    }
    let ok = out.distance(base) <= q && measure_value(inst, &out, measure) + k <= before;
    ok.then_some(out)
}

/// How the search over colorings is driven.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Fresh colorings from `(seed, repetition)` streams.
    Randomized {
        seed: u64,
        reps: Option<u64>,
        budget: Option<Duration>,
    },
    /// One canonical coloring per candidate outcome; see [`refine_exhaustive`].
    Exhaustive { max_candidates: u64 },
    /// Every coloring of the graph; tiny graphs only.
    ExhaustiveLiteral { max_elements: usize },
    /// Delegates to the bounded-budget oracle.
    Oracle(OracleConfig),
    /// Randomized with a random set of houses pre-colored red.
    Sampled {
        seed: u64,
        reps: Option<u64>,
        budget: Option<Duration>,
    },
}

pub const DEFAULT_REP_CAP: u64 = 1_000_000;
pub const DEFAULT_MAX_CANDIDATES: u64 = 5_000_000;
pub const DEFAULT_MAX_ELEMENTS: usize = 18;

/// `3^(3q(d+1))`, saturating.
pub fn theoretical_reps(q: usize, d: usize) -> u128 {
    let e = 3 * q * (d + 1);
    u32::try_from(e)
        .ok()
        .and_then(|e| 3u128.checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// Default repetitions: the theoretical count capped at [`DEFAULT_REP_CAP`].
pub fn default_reps(q: usize, d: usize) -> u64 {
    theoretical_reps(q, d).min(DEFAULT_REP_CAP as u128) as u64
}

fn check_args(inst: &Instance, base: &Allocation, q: usize) -> Result<()> {
    base.validate_against(inst)?;
    if q > inst.n() {
        return Err(Error::Validation(format!(
            "budget q={q} exceeds agent count {}",
            inst.n()
        )));
    }
    Ok(())
}

/// Runs the color-coding search in the requested mode. `Ok(None)` means no allocation
/// was found, which for the randomized modes is not a proof that none exists.
pub fn refine(
    inst: &Instance,
    base: &Allocation,
    q: usize,
    k: u64,
    measure: Measure,
    mode: &Mode,
) -> Result<Option<Allocation>> {
    match mode {
        Mode::Randomized { seed, reps, budget } => {
            refine_randomized(inst, base, q, k, measure, *seed, *reps, *budget)
        }
        Mode::Exhaustive { max_candidates } => {
            refine_exhaustive(inst, base, q, k, measure, *max_candidates)
        }
        Mode::ExhaustiveLiteral { max_elements } => {
            refine_exhaustive_literal(inst, base, q, k, measure, *max_elements)
        }
        Mode::Oracle(cfg) => refine_oracle(inst, base, q, k, measure, cfg),
        Mode::Sampled { seed, reps, budget } => {
            refine_sampled(inst, base, q, k, measure, *seed, *reps, *budget)
        }
    }
}

fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Repetition `r` colors with the ChaCha8 stream `r` of `seed`; the lowest
/// successful repetition wins. A wall-clock `budget` makes later repetitions
/// give up, which trades away reproducibility only when it triggers.
#[allow(clippy::too_many_arguments)]
pub fn refine_randomized(
    inst: &Instance,
    base: &Allocation,
    q: usize,
    k: u64,
    measure: Measure,
    seed: u64,
    reps: Option<u64>,
    budget: Option<Duration>,
) -> Result<Option<Allocation>> {
    check_args(inst, base, q)?;
    let g = PreferenceGraph::with_allocation(inst, base);
    if k == 0 {
        return Ok(Some(base.clone()));
    }
    if q == 0 || k > measure_value(inst, base, measure) {
        return Ok(None);
    }
    let reps = reps.unwrap_or_else(|| default_reps(q, g.max_degree()));
    let start = Instant::now();
    let hit = par::find_first(reps, |r| {
        if budget.is_some_and(|b| start.elapsed() > b) {
            return None;
        }
        let chi = sample_coloring(&g, &mut rep_rng(seed, r));
        refine_once(inst, base, &g, q, k, measure, &chi)
    });
    Ok(hit.map(|(_, a)| a))
}

/// Number of houses pre-colored by the sampling variant: the largest `t`
/// with `(q(d+1) - t) / (m - t) > 1/9`, never more than `q`, and 0 when no
/// `t >= 0` qualifies.
pub fn sample_size(q: usize, d: usize, m: usize) -> usize {
    let a = (q * (d + 1)) as i64;
    let m = m as i64;
    // 9(a - t) > m - t  <=>  8t < 9a - m
    let num = 9 * a - m;
    if num <= 0 {
        return 0;
    }
    let t = (num - 1) / 8;
    (t as usize).min(q).min(m.saturating_sub(1) as usize)
}

/// Randomized search where each repetition first draws `t` houses (see
/// [`sample_size`]) and colors them and their holders red. With `t = 0` it
/// consumes the same random streams as [`refine_randomized`].
#[allow(clippy::too_many_arguments)]
pub fn refine_sampled(
    inst: &Instance,
    base: &Allocation,
    q: usize,
    k: u64,
    measure: Measure,
    seed: u64,
    reps: Option<u64>,
    budget: Option<Duration>,
) -> Result<Option<Allocation>> {
    check_args(inst, base, q)?;
    let g = PreferenceGraph::with_allocation(inst, base);
    if k == 0 {
        return Ok(Some(base.clone()));
    }
    if q == 0 || k > measure_value(inst, base, measure) {
        return Ok(None);
    }
    let d = g.max_degree();
    let t = sample_size(q, d, inst.m());
    let reps = reps.unwrap_or_else(|| default_reps(q, d));
    let holders = base.holders(inst.m());
    let start = Instant::now();
    let hit = par::find_first(reps, |r| {
        if budget.is_some_and(|b| start.elapsed() > b) {
            return None;
        }
        let mut rng = rep_rng(seed, r);
        let picked = if t > 0 {
            index::sample(&mut rng, inst.m(), t).into_vec()
        } else {
            Vec::new()
        };
        let mut chi = sample_coloring(&g, &mut rng);
        for h in picked {
            chi.vertices[g.house_vertex(h)] = Color::Red;
            if let Some(i) = holders[h] {
                chi.vertices[g.agent_vertex(i)] = Color::Red;
            }
        }
        refine_once(inst, base, &g, q, k, measure, &chi)
    });
    Ok(hit.map(|(_, a)| a))
}

/// Canonical coloring of a candidate outcome: every graph component holding
/// a moved agent is red, the edges of `target Δ base` are red, everything
/// else is green.
pub fn canonical_coloring(g: &PreferenceGraph, base: &Allocation, target: &Allocation) -> Coloring {
    let labels = g.component_labels();
    let mut hot = vec![false; g.vertex_count()];
    for i in base.moved_agents(target) {
        hot[labels[g.agent_vertex(i)]] = true;
    }
    let vertices = (0..g.vertex_count())
        .map(|v| if hot[labels[v]] { Color::Red } else { Color::Green })
        .collect();
    let edges = g
        .edges()
        .iter()
        .map(|&(i, h)| {
            let moved = target.house(i) != base.house(i);
            if moved && (h == target.house(i) || h == base.house(i)) {
                Color::Red
            } else {
                Color::Green
            }
        })
        .collect();
    Coloring { vertices, edges }
}

/// Deterministic search over colorings up to equivalence of outcome.
///
/// Whatever coloring makes a pass succeed, its output moves at most `q`
/// agents along graph edges and drops the measure by `k`; the canonical
/// coloring of that output succeeds too when drops add up over graph
/// components (Envy, TotalEnvy). So it suffices to walk such candidate
/// outcomes in lexicographic order and run one pass under each canonical
/// coloring. Candidates whose own drop is below `k` are skipped. Refuses
/// once more than `max_candidates` partial assignments have been visited.
pub fn refine_exhaustive(
    inst: &Instance,
    base: &Allocation,
    q: usize,
    k: u64,
    measure: Measure,
    max_candidates: u64,
) -> Result<Option<Allocation>> {
    check_args(inst, base, q)?;
    let g = PreferenceGraph::with_allocation(inst, base);
    if k == 0 {
        return Ok(Some(base.clone()));
    }
    let before = measure_value(inst, base, measure);
    if q == 0 || k > before {
        return Ok(None);
    }

    struct Walk<'a> {
        inst: &'a Instance,
        base: &'a Allocation,
        g: &'a PreferenceGraph,
        q: usize,
        k: u64,
        before: u64,
        measure: Measure,
        visited: u64,
        cap: u64,
        cur: Allocation,
        used: Vec<bool>,
    }

    impl Walk<'_> {
        fn rec(&mut self, i: usize, changes: usize) -> Result<Option<Allocation>> {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::CapExceeded {
                    what: "candidate outcomes",
                    actual: self.visited as u128,
                    cap: self.cap as u128,
                });
            }
            if i == self.base.n() {
                if changes == 0
                    || measure_value(self.inst, &self.cur, self.measure) + self.k > self.before
                {
                    return Ok(None);
                }
                let chi = canonical_coloring(self.g, self.base, &self.cur);
                return Ok(refine_once(
                    self.inst, self.base, self.g, self.q, self.k, self.measure, &chi,
                ));
            }
            let own = self.base.house(i);
            for &h in self.g.houses_of(i) {
                let change = usize::from(h != own);
                if self.used[h] || changes + change > self.q {
                    continue;
                }
                self.used[h] = true;
                self.cur.set(i, h);
                let found = self.rec(i + 1, changes + change)?;
                self.used[h] = false;
                self.cur.set(i, own);
                if found.is_some() {
                    return Ok(found);
                }
            }
            Ok(None)
        }
    }

    let mut walk = Walk {
        inst,
        base,
        g: &g,
        q,
        k,
        before,
        measure,
        visited: 0,
        cap: max_candidates,
        cur: base.clone(),
        used: vec![false; inst.m()],
    };
    walk.rec(0, 0)
}

/// Every coloring of the graph, in base-3 counter order over vertices then
/// edges. Refused above `max_elements` colored elements.
pub fn refine_exhaustive_literal(
    inst: &Instance,
    base: &Allocation,
    q: usize,
    k: u64,
    measure: Measure,
    max_elements: usize,
) -> Result<Option<Allocation>> {
    check_args(inst, base, q)?;
    let g = PreferenceGraph::with_allocation(inst, base);
    let elements = g.vertex_count() + g.edge_count();
    if elements > max_elements {
        return Err(Error::CapExceeded {
            what: "colored elements",
            actual: elements as u128,
            cap: max_elements as u128,
        });
    }
    if k == 0 {
        return Ok(Some(base.clone()));
    }
    let total = 3u64.pow(elements as u32);
    let nv = g.vertex_count();
    let hit = par::find_first(total, |code| {
        let mut c = code;
        let mut colors = Vec::with_capacity(elements);
        for _ in 0..elements {
            colors.push(Color::ALL[(c % 3) as usize]);
            c /= 3;
        }
        let chi = Coloring {
            edges: colors.split_off(nv),
            vertices: colors,
        };
        refine_once(inst, base, &g, q, k, measure, &chi)
    });
    Ok(hit.map(|(_, a)| a))
}

/// Bounded-budget oracle: its optimum, if it is low enough.
pub fn refine_oracle(
    inst: &Instance,
    base: &Allocation,
    q: usize,
    k: u64,
    measure: Measure,
    cfg: &OracleConfig,
) -> Result<Option<Allocation>> {
    check_args(inst, base, q)?;
    if k == 0 {
        return Ok(Some(base.clone()));
    }
    let before = measure_value(inst, base, measure);
    let (best, witness) = oracle::min_measure_within_q(inst, base, q, measure, cfg)?;
    Ok((best + k <= before).then_some(witness))
}
