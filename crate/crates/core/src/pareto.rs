//! Envy graphs, envy-cycle exchange and the Pareto test used by the
//! restricted-domain solvers.

use crate::model::{Agent, Allocation, House, Instance};

/// `out[i]` lists the agents `i` envies, ascending.
pub fn envy_graph(inst: &Instance, a: &Allocation) -> Vec<Vec<Agent>> {
    let n = inst.n();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && inst.envy_amount(i, a.house(i), a.house(j)) > 0)
                .collect()
        })
        .collect()
}

/// Some directed cycle of the envy graph, as agents in edge order.
pub fn find_envy_cycle(graph: &[Vec<Agent>]) -> Option<Vec<Agent>> {
    // 0 unvisited, 1 on stack, 2 done
    let n = graph.len();
    let mut state = vec![0u8; n];
    let mut stack: Vec<(Agent, usize)> = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        stack.push((root, 0));
        state[root] = 1;
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(&w) = graph[v].get(top.1) {
                top.1 += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => {
                        let from = stack.iter().position(|&(u, _)| u == w).unwrap();
                        return Some(stack[from..].iter().map(|&(u, _)| u).collect());
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Rotates houses along envy cycles until the envy graph is acyclic. Every
/// rotation makes its agents strictly better off and leaves the set of held
/// houses unchanged, so nobody becomes newly envious.
pub fn resolve_envy_cycles(inst: &Instance, a: &Allocation) -> Allocation {
    let mut cur = a.clone();
    while let Some(cycle) = find_envy_cycle(&envy_graph(inst, &cur)) {
        let taken: Vec<House> = (0..cycle.len())
            .map(|s| cur.house(cycle[(s + 1) % cycle.len()]))
            .collect();
        for (s, &i) in cycle.iter().enumerate() {
            cur.set(i, taken[s]);
        }
    }
    cur
}

/// An unallocated house some agent prefers to its own, as `(agent, house)`.
pub fn wanted_free_house(inst: &Instance, a: &Allocation) -> Option<(Agent, House)> {
    let held = a.holders(inst.m());
    (0..inst.m())
        .filter(|&h| held[h].is_none())
        .find_map(|h| (0..inst.n()).find(|&i| inst.prefers(i, h, a.house(i))).map(|i| (i, h)))
}

/// Pareto optimality for complete strict preferences: no envy cycle and no
/// agent wanting a free house.
pub fn is_pareto_optimal(inst: &Instance, a: &Allocation) -> bool {
    find_envy_cycle(&envy_graph(inst, a)).is_none() && wanted_free_house(inst, a).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{measure_value, Measure};

    fn cyclic() -> (Instance, Allocation) {
        // each agent holds the house the previous one likes best
        let inst = Instance::ordinal(
            vec![
                vec![vec![1], vec![0], vec![2]],
                vec![vec![2], vec![1], vec![0]],
                vec![vec![0], vec![2], vec![1]],
            ],
            3,
        )
        .unwrap();
        let a = Allocation::for_instance(vec![0, 1, 2], &inst).unwrap();
        (inst, a)
    }

    #[test]
    fn envy_free_has_no_edges() {
        let inst = Instance::ordinal(vec![vec![vec![0], vec![1]], vec![vec![1], vec![0]]], 2).unwrap();
        let a = Allocation::for_instance(vec![0, 1], &inst).unwrap();
        assert!(envy_graph(&inst, &a).iter().all(Vec::is_empty));
    }

    #[test]
    fn three_cycle_is_rotated_away() {
        let (inst, a) = cyclic();
        let g = envy_graph(&inst, &a);
        assert_eq!(find_envy_cycle(&g).map(|c| c.len()), Some(3));
        let before = measure_value(&inst, &a, Measure::Envy);
        let b = resolve_envy_cycles(&inst, &a);
        assert!(measure_value(&inst, &b, Measure::Envy) <= before);
        assert_eq!(measure_value(&inst, &b, Measure::Envy), 0);
        assert!(is_pareto_optimal(&inst, &b));
    }

    #[test]
    fn free_top_house_breaks_pareto() {
        let inst = Instance::ordinal(vec![vec![vec![1], vec![0]]], 2).unwrap();
        let a = Allocation::for_instance(vec![0], &inst).unwrap();
        assert_eq!(wanted_free_house(&inst, &a), Some((0, 1)));
        assert!(!is_pareto_optimal(&inst, &a));
    }
}
