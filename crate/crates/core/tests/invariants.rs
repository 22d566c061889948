use proptest::prelude::*;

use sourceloc::epidemic::{simulate, EpidemicTrace, TransmissionModel};
use sourceloc::graph::{generate, GraphKind};
use sourceloc::harness::{parse_csv, write_csv, MetricsRow};
use sourceloc::placement::{
    exhaustive_optimal_placement, lv_obs, p_l_nodes, ExhaustiveObjective, LengthConstraint,
};
use sourceloc::resolution::{partition, partition_with_reference, success_probability};
use sourceloc::{Graph, ObserverSet, Prior};

/// Connected weighted graph: a random spanning tree plus extra edges.
fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|v| 0..v).collect();
            let tree_w = proptest::collection::vec(1u32..=4, n - 1);
            let extra = proptest::collection::vec((0..n, 0..n, 1u32..=4), 0..n);
            (Just(n), parents, tree_w, extra)
        })
        .prop_map(|(n, parents, tree_w, extra)| {
            let mut edges: Vec<_> = parents
                .into_iter()
                .enumerate()
                .map(|(i, p)| (p, i + 1, tree_w[i] as f64))
                .collect();
            for (a, b, w) in extra {
                let (a, b) = (a.min(b), a.max(b));
                if a != b && !edges.iter().any(|&(x, y, _)| (x.min(y), x.max(y)) == (a, b)) {
                    edges.push((a, b, w as f64));
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
}

fn arb_instance(max_n: usize) -> impl Strategy<Value = (Graph, ObserverSet)> {
    arb_graph(max_n).prop_flat_map(|g| {
        let n = g.node_count();
        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2..=n.min(5))
            .prop_map(move |o| (g.clone(), ObserverSet::new(o).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_ignores_reference((g, o) in arb_instance(14)) {
        let base = partition(&g, &o);
        for r in o.iter() {
            prop_assert_eq!(&partition_with_reference(&g, &o, r).unwrap(), &base);
        }
    }

    #[test]
    fn distances_obey_triangle_inequality(g in arb_graph(14)) {
        let n = g.node_count();
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(g.distance(a, b), g.distance(b, a));
                for c in 0..n {
                    prop_assert!(g.distance(a, c) <= g.distance(a, b) + g.distance(b, c) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn adding_an_observer_never_hurts((g, o) in arb_instance(12), extra in 0usize..12) {
        let n = g.node_count();
        let prior = Prior::uniform(n);
        let before = success_probability(&partition(&g, &o), &prior);
        let mut more = o.as_slice().to_vec();
        more.push(extra % n);
        more.sort_unstable();
        more.dedup();
        let after = success_probability(&partition(&g, &ObserverSet::new(more).unwrap()), &prior);
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn covered_set_grows_with_length((g, o) in arb_instance(12), a in 0.05f64..1.0, b in 0.05f64..1.0) {
        let d = g.weighted_diameter();
        let (lo, hi) = (a.min(b) * d, a.max(b) * d);
        let small = p_l_nodes(&g, o.as_slice(), LengthConstraint::new(&g, lo).unwrap());
        let large = p_l_nodes(&g, o.as_slice(), LengthConstraint::new(&g, hi).unwrap());
        prop_assert!(small.iter().all(|u| large.contains(u)));
        prop_assert!(o.iter().all(|u| small.contains(&u)));
    }

    #[test]
    fn exhaustive_dominates_greedy(g in arb_graph(8), k in 2usize..4) {
        let k = k.min(g.node_count());
        let greedy = lv_obs(&g, k, None).unwrap();
        let best = exhaustive_optimal_placement(&g, k, ExhaustiveObjective::SuccessProbability).unwrap();
        prop_assert!(best.metrics.success_probability >= greedy.metrics.success_probability - 1e-12);
    }

    #[test]
    fn infection_times_stay_in_support(g in arb_graph(12), eps in 0.0f64..0.9, seed: u64) {
        let dm = g.distances();
        for s in 0..g.node_count() {
            let t = simulate(&g, TransmissionModel::UniformFactor { epsilon: eps }, s, seed).unwrap();
            for (u, &time) in t.infection_time.iter().enumerate() {
                let d = dm.distance(s, u);
                prop_assert!(time >= (1.0 - eps) * d - 1e-9 && time <= (1.0 + eps) * d + 1e-9);
            }
        }
    }

    #[test]
    fn traces_round_trip(g in arb_graph(10), sigma in 0.0f64..0.5, seed: u64) {
        let t = simulate(&g, TransmissionModel::TruncatedGaussian { sigma }, 0, seed).unwrap();
        let mut buf = Vec::new();
        t.write(&g, &mut buf).unwrap();
        let back = EpidemicTrace::read(&g, buf.as_slice()).unwrap();
        prop_assert_eq!(back.infection_time, t.infection_time);
        prop_assert_eq!(back.source, t.source);
    }

    #[test]
    fn csv_round_trips(rows in proptest::collection::vec(
        ("[a-z]{1,6}", 0.0f64..1.0, 0.0f64..1.0, 0.0f64..0.1, 0.0f64..9.0, 0.0f64..9.0, 1u64..5000), 1..8)
    ) {
        let rows: Vec<MetricsRow> = rows
            .into_iter()
            .map(|(placement, sigma, ps, ps_se, ed_hops, ed_weighted, runs)| MetricsRow {
                placement, sigma, ps, ps_se, ed_hops, ed_weighted, runs,
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(parse_csv(buf.as_slice()).unwrap(), rows);
    }
}

#[test]
fn generated_families_are_connected() {
    for seed in 0..5 {
        for kind in [
            GraphKind::RandomGeometric { n: 60, radius: 0.15, seed },
            GraphKind::BarabasiAlbert { n: 60, m: 2, seed },
            GraphKind::RandomTree { n: 60, max_weight: 3, seed },
        ] {
            let g = generate(&kind).unwrap().graph;
            assert!(g.weighted_diameter().is_finite());
        }
    }
}
