//! Benchmark placements: betweenness centrality, coverage rate, k-median.

use super::{check_budget, Algorithm, PlacementResult};
use crate::error::Result;
use crate::graph::{dijkstra, same_length, Graph, NodeId};
use crate::par;

/// Betweenness of every node, summed over unordered pairs and counting all
/// weighted shortest paths.
pub fn betweenness_centrality(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let per_source = par::map_range(n, |s| {
        let dist = dijkstra(g, s, |nb| nb.weight);
        let mut order: Vec<NodeId> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let mut sigma = vec![0.0f64; n];
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        sigma[s] = 1.0;
        for &v in &order {
            if v == s {
                continue;
            }
            for nb in g.neighbors(v) {
                let u = nb.node;
                if dist[u] < dist[v] && same_length(dist[u] + nb.weight, dist[v]) {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
        }
        delta[s] = 0.0;
        delta
    });
    let mut bc = vec![0.0; n];
    for delta in per_source {
        for (b, d) in bc.iter_mut().zip(delta) {
            *b += d;
        }
    }
    // each unordered pair was counted from both ends
    bc.iter_mut().for_each(|b| *b /= 2.0);
    bc
}

/// The `k` nodes of highest betweenness.
pub fn betweenness_placement(g: &Graph, k: usize) -> Result<PlacementResult> {
    check_budget(g, k, 1)?;
    let bc = betweenness_centrality(g);
    let mut ranked: Vec<NodeId> = (0..g.node_count()).collect();
    // scores equal up to summation noise count as ties
    let key = |u: NodeId| (bc[u] * 1e9).round() as i64;
    ranked.sort_by(|&a, &b| key(b).cmp(&key(a)).then(a.cmp(&b)));
    ranked.truncate(k);
    let trace = ranked.iter().map(|&u| bc[u]).collect();
    Ok(PlacementResult::assemble(
        g,
        Algorithm::Betweenness,
        ranked,
        trace,
        k,
        None,
        None,
        0,
    ))
}

/// Greedy maximization of the fraction of nodes with an observer neighbor.
pub fn coverage_rate_placement(g: &Graph, k: usize) -> Result<PlacementResult> {
    check_budget(g, k, 1)?;
    let n = g.node_count();
    let mut covered = vec![false; n];
    let mut chosen = vec![false; n];
    let mut count = 0usize;
    let mut order = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    let mut work = 0u64;
    for _ in 0..k {
        let mut best: Option<(NodeId, usize)> = None;
        for z in (0..n).filter(|&z| !chosen[z]) {
            let gain = g.neighbors(z).iter().filter(|nb| !covered[nb.node]).count();
            work += 1;
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((z, gain));
            }
        }
        let (z, gain) = best.expect("k <= n leaves a candidate");
        chosen[z] = true;
        for nb in g.neighbors(z) {
            covered[nb.node] = true;
        }
        count += gain;
        order.push(z);
        trace.push(count as f64 / n as f64);
    }
    Ok(PlacementResult::assemble(
        g,
        Algorithm::Coverage,
        order,
        trace,
        k,
        None,
        None,
        work,
    ))
}

/// Greedy k-median: repeatedly add the node that most reduces the summed
/// distance from every node to its nearest observer.
pub fn k_median_placement(g: &Graph, k: usize) -> Result<PlacementResult> {
    check_budget(g, k, 1)?;
    let n = g.node_count();
    let dm = g.distances();
    let mut nearest = vec![f64::INFINITY; n];
    let mut chosen = vec![false; n];
    let mut order = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    let mut work = 0u64;
    for _ in 0..k {
        let candidates: Vec<NodeId> = (0..n).filter(|&z| !chosen[z]).collect();
        let costs = par::map(&candidates, |&z| {
            let row = dm.row(z);
            (0..n).map(|s| nearest[s].min(row[s])).sum::<f64>()
        });
        work += (candidates.len() * n) as u64;
        let mut best = 0;
        for i in 1..candidates.len() {
            if super::strictly_greater(costs[best], costs[i]) {
                best = i;
            }
        }
        let z = candidates[best];
        chosen[z] = true;
        let row = dm.row(z);
        nearest.iter_mut().zip(row).for_each(|(a, &b)| *a = a.min(b));
        order.push(z);
        trace.push(costs[best]);
    }
    Ok(PlacementResult::assemble(
        g,
        Algorithm::KMedian,
        order,
        trace,
        k,
        None,
        None,
        work,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    fn gen(kind: GraphKind) -> Graph {
        generate(&kind).unwrap().graph
    }

    /// Oracle: enumerate every shortest path of every unordered pair by DFS
    /// and count the fraction through each interior node.
    fn brute_force_betweenness(g: &Graph) -> Vec<f64> {
        fn paths(g: &Graph, v: NodeId, cur: &mut Vec<NodeId>, len: f64, target: f64, out: &mut Vec<Vec<NodeId>>) {
            let u = *cur.last().unwrap();
            if u == v {
                if same_length(len, target) {
                    out.push(cur.clone());
                }
                return;
            }
            for nb in g.neighbors(u) {
                if !cur.contains(&nb.node) && len + nb.weight <= target + 1e-9 {
                    cur.push(nb.node);
                    paths(g, v, cur, len + nb.weight, target, out);
                    cur.pop();
                }
            }
        }
        let n = g.node_count();
        let mut bc = vec![0.0; n];
        for x in 0..n {
            for y in x + 1..n {
                let mut all = Vec::new();
                paths(g, y, &mut vec![x], 0.0, g.distance(x, y), &mut all);
                for p in &all {
                    for &u in &p[1..p.len() - 1] {
                        bc[u] += 1.0 / all.len() as f64;
                    }
                }
            }
        }
        bc
    }

    #[test]
    fn betweenness_examples() {
        let p3 = gen(GraphKind::Path { n: 3, weight: 1.0 });
        assert_eq!(betweenness_centrality(&p3), vec![0.0, 1.0, 0.0]);
        assert_eq!(betweenness_placement(&p3, 1).unwrap().observers.as_slice(), &[1]);

        let star = gen(GraphKind::Star { n: 4, weight: 1.0 });
        assert_eq!(betweenness_placement(&star, 1).unwrap().observers.as_slice(), &[0]);

        let c4 = gen(GraphKind::Cycle { n: 4, weight: 1.0 });
        assert_eq!(betweenness_centrality(&c4), vec![0.5; 4]);
        assert_eq!(betweenness_placement(&c4, 2).unwrap().observers.as_slice(), &[0, 1]);
    }

    #[test]
    fn betweenness_matches_path_enumeration() {
        for seed in 0..5 {
            let g = gen(GraphKind::RandomGeometric {
                n: 14,
                radius: 0.45,
                seed,
            });
            let fast = betweenness_centrality(&g);
            let slow = brute_force_betweenness(&g);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-9, "{fast:?} vs {slow:?}");
            }
        }
        let weighted = Graph::from_edges(
            5,
            [(0, 1, 2.0), (1, 2, 1.0), (0, 3, 1.0), (3, 2, 2.0), (2, 4, 1.0), (3, 4, 4.0)],
        )
        .unwrap();
        let fast = betweenness_centrality(&weighted);
        let slow = brute_force_betweenness(&weighted);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn coverage_examples() {
        let star = gen(GraphKind::Star { n: 4, weight: 1.0 });
        let r = coverage_rate_placement(&star, 1).unwrap();
        assert_eq!(r.observers.as_slice(), &[0]);
        assert_eq!(r.objective_trace, vec![0.75]);

        let c5 = gen(GraphKind::Cycle { n: 5, weight: 1.0 });
        let r = coverage_rate_placement(&c5, 2).unwrap();
        assert_eq!(r.objective_trace.last(), Some(&0.8));
        let o = r.observers.as_slice();
        let na: Vec<_> = c5.neighbors(o[0]).iter().map(|nb| nb.node).collect();
        assert!(c5.neighbors(o[1]).iter().all(|nb| !na.contains(&nb.node)));

        let r = coverage_rate_placement(&c5, 5).unwrap();
        assert_eq!(r.objective_trace.last(), Some(&1.0));
    }

    #[test]
    fn k_median_examples() {
        let star = gen(GraphKind::Star { n: 4, weight: 1.0 });
        let r = k_median_placement(&star, 1).unwrap();
        assert_eq!(r.observers.as_slice(), &[0]);
        assert_eq!(r.objective_trace, vec![3.0]);
        // a leaf would cost 1 + 2 + 2
        let leaf_cost: f64 = (0..4).map(|s| star.distance(1, s)).sum();
        assert_eq!(leaf_cost, 5.0);

        let p3 = gen(GraphKind::Path { n: 3, weight: 1.0 });
        let r = k_median_placement(&p3, 1).unwrap();
        assert_eq!(r.observers.as_slice(), &[1]);
        assert_eq!(r.objective_trace, vec![2.0]);

        let r = k_median_placement(&p3, 3).unwrap();
        assert_eq!(r.objective_trace.last(), Some(&0.0));
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
