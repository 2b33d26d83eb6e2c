mod common;

use common::sparse_instance;
use housealloc::dipped::{dip_profile, min_envy_single_dipped, min_envy_single_dipped_ties, validate_single_dipped};
use housealloc::gen::{
    gen_single_dipped, gen_single_dipped_ordinal, gen_single_peaked, gen_single_peaked_clustered,
    gen_uniform_cardinal, rng,
};
use housealloc::oracle::{for_each_allocation, min_measure_exhaustive, min_measure_within_q, OracleConfig};
use housealloc::peaked::{min_envy_single_peaked, peak_profile, validate_single_peaked, PeakKind};
use housealloc::refine::{
    components_after_blue_removal, feasibility_filter, knapsack_select, sample_coloring,
};
use housealloc::{
    apply_all, apply_path, decompose, envy_report, measure_value, Allocation, Instance, Measure,
    PreferenceGraph, WelfareKind,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn random_allocation(inst: &Instance, seed: u64) -> Allocation {
    let mut houses: Vec<usize> = (0..inst.m()).collect();
    houses.shuffle(&mut rng(seed));
    houses.truncate(inst.n());
    Allocation::for_instance(houses, inst).unwrap()
}

fn envy_free_count(inst: &Instance, a: &Allocation) -> usize {
    envy_report(inst, a).unwrap().per_agent.iter().filter(|&&e| e == 0).count()
}

fn small_dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5).prop_flat_map(|n| (Just(n), n..=7))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn single_pieces_keep_allocations_valid(seed in any::<u64>(), s2 in any::<u64>()) {
        let (inst, base) = sparse_instance(seed, 6, 9, 4);
        let target = random_allocation(&inst, s2);
        for p in decompose(&target, &base, inst.m()) {
            let a = apply_path(&base, &p, inst.m()).unwrap();
            prop_assert!(a.validate_against(&inst).is_ok());
        }
    }

    #[test]
    fn decomposition_reconstructs_target(seed in any::<u64>(), s2 in any::<u64>()) {
        let (inst, base) = sparse_instance(seed, 6, 9, 4);
        let target = random_allocation(&inst, s2);
        let pieces = decompose(&target, &base, inst.m());
        let moved: usize = pieces.iter().map(|p| p.agents.len()).sum();
        prop_assert_eq!(moved, target.distance(&base));
        prop_assert_eq!(apply_all(&base, &pieces, inst.m()).unwrap(), target);
    }

    #[test]
    fn envy_report_is_consistent((n, m) in small_dims(), seed in any::<u64>()) {
        let inst = gen_uniform_cardinal(n, m, seed).unwrap();
        let a = random_allocation(&inst, seed ^ 1);
        let r = envy_report(&inst, &a).unwrap();
        prop_assert!(r.max_envy <= r.total_envy);
        prop_assert!(r.envy_count <= n);
        prop_assert_eq!(r.envy_count == 0, r.total_envy == 0);
        prop_assert_eq!(r.envious.len(), r.envy_count);
    }

    #[test]
    fn strict_values_keep_envy_count_as_rankings((n, m) in small_dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let values: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let mut v: Vec<u32> = (1..=m as u32).collect();
                v.shuffle(&mut r);
                v
            })
            .collect();
        let inst = Instance::cardinal(values).unwrap();
        let a = random_allocation(&inst, seed ^ 2);
        let ord = inst.to_ordinal();
        prop_assert_eq!(
            measure_value(&inst, &a, Measure::Envy),
            measure_value(&ord, &a, Measure::Envy)
        );
    }

    #[test]
    fn within_q_is_monotone_and_exact_at_n((n, m) in small_dims(), seed in any::<u64>()) {
        let inst = gen_uniform_cardinal(n, m, seed).unwrap();
        let base = random_allocation(&inst, seed ^ 3);
        let cfg = OracleConfig::default();
        for measure in Measure::ALL {
            let mut last = u64::MAX;
            for q in 0..=n {
                let (v, w) = min_measure_within_q(&inst, &base, q, measure, &cfg).unwrap();
                prop_assert!(v <= last);
                prop_assert_eq!(measure_value(&inst, &w, measure), v);
                prop_assert!(w.distance(&base) <= q);
                last = v;
            }
            let (full, _) = min_measure_exhaustive(&inst, measure, &cfg).unwrap();
            prop_assert_eq!(last, full);
        }
    }

    #[test]
    fn knapsack_matches_subset_search(
        items in prop::collection::vec((-5i64..20, 1usize..6), 0..=15),
        q in 0usize..20,
        k in 1i64..30,
    ) {
        let mut best = 0i64;
        for mask in 0u32..(1 << items.len()) {
            let (mut p, mut w) = (0i64, 0usize);
            for (t, &(pt, wt)) in items.iter().enumerate() {
                if mask >> t & 1 == 1 {
                    p += pt;
                    w += wt;
                }
            }
            if w <= q {
                best = best.max(p);
            }
        }
        match knapsack_select(&items, q, k) {
            Some(chosen) => {
                let p: i64 = chosen.iter().map(|&t| items[t].0).sum();
                let w: usize = chosen.iter().map(|&t| items[t].1).sum();
                prop_assert!(w <= q);
                prop_assert_eq!(p, best);
                prop_assert!(p >= k);
            }
            None => prop_assert!(best < k),
        }
    }

    #[test]
    fn surviving_components_are_alternating(seed in any::<u64>()) {
        let (inst, base) = sparse_instance(seed, 6, 9, 4);
        let g = PreferenceGraph::with_allocation(&inst, &base);
        let chi = sample_coloring(&g, &mut rng(seed ^ 4));
        let comps = components_after_blue_removal(&g, &chi);
        for measure in Measure::ALL {
            for c in feasibility_filter(&comps, &g, &chi, &inst, &base, measure) {
                let a = apply_all(&base, &c.pieces, inst.m()).unwrap();
                prop_assert!(a.validate_against(&inst).is_ok());
                let drop = measure_value(&inst, &base, measure) as i64 - measure_value(&inst, &a, measure) as i64;
                prop_assert_eq!(drop, c.drop);
                prop_assert!(c.drop > 0);
            }
        }
    }

    #[test]
    fn peaked_output_respects_ef_bounds((n, m) in small_dims(), seed in any::<u64>(), clustered in any::<bool>()) {
        let inst = if clustered {
            gen_single_peaked_clustered(n, m, seed).unwrap()
        } else {
            gen_single_peaked(n, m, seed).unwrap()
        };
        let axis: Vec<usize> = (0..m).collect();
        prop_assert!(validate_single_peaked(&inst, &axis).unwrap().is_none());
        let p = peak_profile(&inst, &axis).unwrap();
        let a = min_envy_single_peaked(&inst, &axis).unwrap();
        let ef = envy_free_count(&inst, &a);
        prop_assert!(p.p_i + p.p_s <= ef && ef <= p.p_i + 2 * p.p_s, "ef {} p_I {} p_S {}", ef, p.p_i, p.p_s);
    }

    #[test]
    fn some_optimum_gives_individual_peaks_to_their_agents((n, m) in small_dims(), seed in any::<u64>()) {
        let inst = gen_single_peaked_clustered(n, m, seed).unwrap();
        let p = peak_profile(&inst, &(0..m).collect::<Vec<_>>()).unwrap();
        let best = min_measure_exhaustive(&inst, Measure::Envy, &OracleConfig::default()).unwrap().0;
        let mut found = false;
        for_each_allocation(n, m, |h| {
            let a = Allocation::for_instance(h.to_vec(), &inst).unwrap();
            let ok = (0..m).filter(|&x| p.kind[x] == PeakKind::Individual).all(|x| {
                (0..n).any(|i| h[i] == x && p.base[x].contains(&i))
            });
            if ok && measure_value(&inst, &a, Measure::Envy) == best {
                found = true;
                return false;
            }
            true
        });
        prop_assert!(found);
    }

    #[test]
    fn dipped_output_dichotomy(n in 2usize..=6, extra in 0usize..=4, seed in any::<u64>(), cardinal in any::<bool>()) {
        let m = n + extra;
        let inst = if cardinal {
            gen_single_dipped(n, m, seed).unwrap()
        } else {
            gen_single_dipped_ordinal(n, m, false, seed).unwrap()
        };
        let axis: Vec<usize> = (0..m).collect();
        prop_assert!(validate_single_dipped(&inst, &axis).unwrap().is_none());
        let prof = dip_profile(&inst, &axis).unwrap();
        let a = min_envy_single_dipped(&inst, &axis).unwrap();
        let two = prof.s1.len() > 1 || m - prof.span.len() >= n;
        prop_assert_eq!(envy_free_count(&inst, &a), if two { 2 } else { 1 });
    }

    #[test]
    fn ties_variant_is_all_or_at_most_two(n in 1usize..=6, extra in 0usize..=4, seed in any::<u64>()) {
        let m = n + extra;
        let inst = gen_single_dipped_ordinal(n, m, true, seed).unwrap();
        let axis: Vec<usize> = (0..m).collect();
        let prof = dip_profile(&inst, &axis).unwrap();
        let a = min_envy_single_dipped_ties(&inst, &axis).unwrap();
        let bottom = prof.bottom.as_ref().map_or(1, |b| b.len());
        let ef = envy_free_count(&inst, &a);
        if bottom >= n {
            prop_assert_eq!(ef, n);
        } else {
            prop_assert!(ef <= 2, "ef {} bottom {}", ef, bottom);
        }
        let best = min_measure_exhaustive(&inst, Measure::Envy, &OracleConfig::default()).unwrap().0;
        prop_assert_eq!(measure_value(&inst, &a, Measure::Envy), best);
    }

    #[test]
    fn generators_are_deterministic_and_in_domain((n, m) in small_dims(), seed in any::<u64>()) {
        let axis: Vec<usize> = (0..m).collect();
        let p = gen_single_peaked(n, m, seed).unwrap();
        prop_assert_eq!(p.to_json(), gen_single_peaked(n, m, seed).unwrap().to_json());
        prop_assert!(validate_single_peaked(&p, &axis).unwrap().is_none());
        let d = gen_single_dipped(n, m, seed).unwrap();
        prop_assert_eq!(d.to_json(), gen_single_dipped(n, m, seed).unwrap().to_json());
        prop_assert!(validate_single_dipped(&d, &axis).unwrap().is_none());
        let u = gen_uniform_cardinal(n, m, seed).unwrap();
        prop_assert_eq!(u.to_json(), gen_uniform_cardinal(n, m, seed).unwrap().to_json());
    }

    #[test]
    fn welfare_outputs_are_valid_and_deterministic((n, m) in small_dims(), seed in any::<u64>()) {
        let inst = gen_uniform_cardinal(n, m, seed).unwrap();
        for kind in [WelfareKind::Utilitarian, WelfareKind::Nash, WelfareKind::Egalitarian] {
            let a = housealloc::welfare::maximize(&inst, kind).unwrap();
            prop_assert!(a.validate_against(&inst).is_ok());
            prop_assert_eq!(a, housealloc::welfare::maximize(&inst, kind).unwrap());
        }
    }
}
