//! Brute-force optimal placements for small graphs.

use super::{check_budget, strictly_greater, Algorithm, PlacementResult};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::par;
use crate::resolution::{
    expected_distance, is_drs, partition, DistanceMode, ObserverSet, Prior,
};

/// Largest number of subsets enumerated before giving up.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExhaustiveObjective {
    /// Maximize the success probability under a uniform prior.
    SuccessProbability,
    /// Minimize the weighted expected distance under a uniform prior.
    ExpectedDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrsMethod {
    LvObs,
    Exhaustive,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Objective in "larger is better" form.
fn score(g: &Graph, prior: &Prior, set: &[NodeId], objective: ExhaustiveObjective) -> f64 {
    let observers = ObserverSet::new(set.to_vec()).expect("distinct");
    let p = partition(g, &observers);
    match objective {
        ExhaustiveObjective::SuccessProbability => p.class_count() as f64 / g.node_count() as f64,
        ExhaustiveObjective::ExpectedDistance => {
            -expected_distance(g, &p, prior, DistanceMode::Weighted)
        }
    }
}

/// Advances `c` to the next k-subset of `0..n` in lexicographic order,
/// leaving `c[0]` untouched. Returns false when exhausted.
fn next_tail(c: &mut [NodeId], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 1 {
        i -= 1;
        if c[i] < n - (k - i) {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// [`exhaustive_optimal_placement_with_cap`] with [`DEFAULT_ENUMERATION_CAP`].
pub fn exhaustive_optimal_placement(
    g: &Graph,
    k: usize,
    objective: ExhaustiveObjective,
) -> Result<PlacementResult> {
    exhaustive_optimal_placement_with_cap(g, k, objective, DEFAULT_ENUMERATION_CAP)
}

/// The best `k`-subset by enumeration. Among equally good subsets the
/// lexicographically smallest wins.
pub fn exhaustive_optimal_placement_with_cap(
    g: &Graph,
    k: usize,
    objective: ExhaustiveObjective,
    cap: u128,
) -> Result<PlacementResult> {
    check_budget(g, k, 1)?;
    let n = g.node_count();
    let combinations = binomial(n, k);
    if combinations > cap {
        return Err(Error::CapExceeded { combinations, cap });
    }
    let prior = Prior::uniform(n);
    let firsts: Vec<NodeId> = (0..=n - k).collect();
    let per_first = par::map(&firsts, |&a| {
        let mut c: Vec<NodeId> = (a..a + k).collect();
        let mut best = (c.clone(), score(g, &prior, &c, objective));
        let mut count = 1u64;
        while next_tail(&mut c, n) {
            count += 1;
            let s = score(g, &prior, &c, objective);
            if strictly_greater(s, best.1) {
                best = (c.clone(), s);
            }
        }
        (best, count)
    });
    let work = per_first.iter().map(|(_, c)| c).sum::<u64>() * n as u64;
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    for (candidate, _) in per_first {
        if best.as_ref().is_none_or(|b| strictly_greater(candidate.1, b.1)) {
            best = Some(candidate);
        }
    }
    let (set, value) = best.expect("at least one subset");
    let value = match objective {
        ExhaustiveObjective::SuccessProbability => value,
        ExhaustiveObjective::ExpectedDistance => -value,
    };
    Ok(PlacementResult::assemble(
        g,
        Algorithm::Exhaustive,
        set,
        vec![value],
        k,
        None,
        None,
        work,
    ))
}

/// Smallest budget at which `method` yields a double resolving set. With
/// [`DrsMethod::Exhaustive`] this is the metric-dimension-style optimum;
/// with [`DrsMethod::LvObs`] it is an upper bound.
pub fn min_drs_budget(g: &Graph, method: DrsMethod) -> Result<usize> {
    let n = g.node_count();
    if n <= 1 {
        return Ok(n);
    }
    for k in 2..=n {
        let result = match method {
            DrsMethod::LvObs => super::lv_obs(g, k, None)?,
            DrsMethod::Exhaustive => {
                exhaustive_optimal_placement(g, k, ExhaustiveObjective::SuccessProbability)?
            }
        };
        if is_drs(&partition(g, &result.observers)) {
            return Ok(k);
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};
    use crate::resolution::success_probability;

    fn gen(kind: GraphKind) -> Graph {
        generate(&kind).unwrap().graph
    }

    #[test]
    fn lexicographic_enumeration_is_complete() {
        for n in 1..8 {
            for k in 1..=n {
                let mut total = 0u128;
                for a in 0..=n - k {
                    let mut c: Vec<NodeId> = (a..a + k).collect();
                    let mut prev = c.clone();
                    total += 1;
                    while next_tail(&mut c, n) {
                        assert!(c > prev && c[0] == a);
                        assert!(c.windows(2).all(|w| w[0] < w[1]) && c[k - 1] < n);
                        prev = c.clone();
                        total += 1;
                    }
                }
                assert_eq!(total, binomial(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn cycle_and_star_optima() {
        let c5 = gen(GraphKind::Cycle { n: 5, weight: 1.0 });
        let r = exhaustive_optimal_placement(&c5, 2, ExhaustiveObjective::SuccessProbability)
            .unwrap();
        assert_eq!(r.metrics.success_probability, 1.0);
        assert_eq!(r.observers.as_slice(), &[0, 2]);
        for a in 0..5 {
            for b in a + 1..5 {
                let o = ObserverSet::new(vec![a, b]).unwrap();
                let ps = success_probability(&partition(&c5, &o), &Prior::uniform(5));
                let cyc = (b - a).min(5 - (b - a));
                assert_eq!(ps == 1.0, cyc == 2, "pair {a},{b}");
            }
        }

        let star = gen(GraphKind::Star { n: 4, weight: 1.0 });
        let r = exhaustive_optimal_placement(&star, 2, ExhaustiveObjective::SuccessProbability)
            .unwrap();
        assert_eq!(r.metrics.success_probability, 0.75);
        let r = exhaustive_optimal_placement(&star, 4, ExhaustiveObjective::ExpectedDistance)
            .unwrap();
        assert_eq!(r.metrics.expected_distance_weighted, 0.0);
    }

    #[test]
    fn drs_budgets() {
        let c5 = gen(GraphKind::Cycle { n: 5, weight: 1.0 });
        assert_eq!(min_drs_budget(&c5, DrsMethod::Exhaustive).unwrap(), 2);
        let star = gen(GraphKind::Star { n: 4, weight: 1.0 });
        assert_eq!(min_drs_budget(&star, DrsMethod::Exhaustive).unwrap(), 3);
        let p5 = gen(GraphKind::Path { n: 5, weight: 1.0 });
        assert_eq!(min_drs_budget(&p5, DrsMethod::Exhaustive).unwrap(), 2);
        for g in [&c5, &star, &p5] {
            assert!(
                min_drs_budget(g, DrsMethod::Exhaustive).unwrap()
                    <= min_drs_budget(g, DrsMethod::LvObs).unwrap()
            );
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = gen(GraphKind::Cycle { n: 30, weight: 1.0 });
        let err = exhaustive_optimal_placement_with_cap(
            &g,
            15,
            ExhaustiveObjective::SuccessProbability,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CapExceeded { combinations: 155_117_520, .. }));
    }
}
