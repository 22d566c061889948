//! Seeded greedy growth of observer sets under partition objectives.

use super::{check_budget, seed_list, strictly_greater, Algorithm, PlacementResult};
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::par;
use crate::resolution::{class_key, DistanceMode};

#[derive(Debug, Clone, Copy)]
enum Objective {
    /// Number of classes (maximized).
    ClassCount,
    /// `log2` of the product of class-size factorials (minimized).
    Entropy,
    /// Expected estimation error under a uniform prior (minimized).
    ExpectedDistance(DistanceMode),
}

impl Objective {
    fn maximize(self) -> bool {
        matches!(self, Objective::ClassCount)
    }

    fn better(self, a: f64, b: f64) -> bool {
        if self.maximize() {
            strictly_greater(a, b)
        } else {
            strictly_greater(b, a)
        }
    }
}

/// Equivalence classes of the observers chosen so far, relative to the
/// seed as reference observer.
#[derive(Clone)]
struct ClassState {
    reference: NodeId,
    classes: Vec<Vec<NodeId>>,
}

struct Scorer<'g> {
    g: &'g Graph,
    objective: Objective,
    /// `log2(c!)` for `c` in `0..=n`.
    log_factorial: Vec<f64>,
}

impl<'g> Scorer<'g> {
    fn new(g: &'g Graph, objective: Objective) -> Self {
        let n = g.node_count();
        let mut log_factorial = vec![0.0; n + 1];
        for c in 2..=n {
            log_factorial[c] = log_factorial[c - 1] + (c as f64).log2();
        }
        Scorer {
            g,
            objective,
            log_factorial,
        }
    }

    /// Contribution of one class of nodes that will stay together.
    fn group_value(&self, members: &[NodeId]) -> f64 {
        match self.objective {
            Objective::ClassCount => 1.0,
            Objective::Entropy => self.log_factorial[members.len()],
            Objective::ExpectedDistance(mode) => {
                if members.len() < 2 {
                    return 0.0;
                }
                let dm = self.g.distances();
                let mut sum = 0.0;
                for &s in members {
                    for &u in members {
                        sum += match mode {
                            DistanceMode::Weighted => dm.distance(s, u),
                            DistanceMode::Hops => dm.hops(s, u) as f64,
                        };
                    }
                }
                sum / members.len() as f64
            }
        }
    }

    fn finish(&self, total: f64) -> f64 {
        match self.objective {
            Objective::ExpectedDistance(_) => total / self.g.node_count() as f64,
            _ => total,
        }
    }

    fn value(&self, state: &ClassState) -> f64 {
        self.finish(state.classes.iter().map(|c| self.group_value(c)).sum())
    }

    /// Splits `class` by the distance difference to `z`, sorted by
    /// (difference, node).
    fn split_keys(&self, state: &ClassState, class: &[NodeId], z: NodeId, out: &mut Vec<(i64, NodeId)>) {
        let dm = self.g.distances();
        out.clear();
        out.extend(class.iter().map(|&u| {
            let row = dm.row(u);
            (class_key(row[z] - row[state.reference]), u)
        }));
        out.sort_unstable();
    }

    /// Objective after adding `z`.
    fn score_with(&self, state: &ClassState, z: NodeId) -> f64 {
        let mut keyed = Vec::new();
        let mut members = Vec::new();
        let mut total = 0.0;
        for class in &state.classes {
            if class.len() == 1 {
                total += self.group_value(class);
                continue;
            }
            self.split_keys(state, class, z, &mut keyed);
            for run in keyed.chunk_by(|a, b| a.0 == b.0) {
                members.clear();
                members.extend(run.iter().map(|&(_, u)| u));
                total += self.group_value(&members);
            }
        }
        self.finish(total)
    }

    fn add(&self, state: &ClassState, z: NodeId) -> ClassState {
        let mut keyed = Vec::new();
        let mut classes = Vec::with_capacity(state.classes.len());
        for class in &state.classes {
            if class.len() == 1 {
                classes.push(class.clone());
                continue;
            }
            self.split_keys(state, class, z, &mut keyed);
            for run in keyed.chunk_by(|a, b| a.0 == b.0) {
                classes.push(run.iter().map(|&(_, u)| u).collect());
            }
        }
        ClassState {
            reference: state.reference,
            classes,
        }
    }
}

struct Grown {
    order: Vec<NodeId>,
    trace: Vec<f64>,
    work: u64,
}

fn grow(scorer: &Scorer, seed: NodeId, k: usize) -> Grown {
    let g = scorer.g;
    let n = g.node_count();
    let mut state = ClassState {
        reference: seed,
        classes: vec![(0..n).collect()],
    };
    let mut chosen = vec![false; n];
    chosen[seed] = true;
    let mut order = vec![seed];
    let mut trace = vec![scorer.value(&state)];
    let mut work = 0u64;
    while state.classes.len() < n && order.len() < k {
        let candidates: Vec<NodeId> = (0..n).filter(|&z| !chosen[z]).collect();
        let scores = par::map(&candidates, |&z| scorer.score_with(&state, z));
        work += (candidates.len() * n) as u64;
        let mut best = 0;
        for i in 1..candidates.len() {
            if scorer.objective.better(scores[i], scores[best]) {
                best = i;
            }
        }
        let z = candidates[best];
        state = scorer.add(&state, z);
        chosen[z] = true;
        order.push(z);
        trace.push(scores[best]);
    }
    Grown { order, trace, work }
}

fn run(
    g: &Graph,
    algorithm: Algorithm,
    objective: Objective,
    k: usize,
    seeds: Option<&[NodeId]>,
) -> Result<PlacementResult> {
    check_budget(g, k, 2)?;
    let seed_nodes = seed_list(g, seeds)?;
    let scorer = Scorer::new(g, objective);
    let runs = par::map(&seed_nodes, |&s| grow(&scorer, s, k));
    let work = runs.iter().map(|r| r.work).sum();
    let mut best = 0;
    for i in 1..runs.len() {
        let (a, b) = (runs[i].trace.last(), runs[best].trace.last());
        if objective.better(*a.unwrap(), *b.unwrap()) {
            best = i;
        }
    }
    let Grown { order, mut trace, .. } = runs.into_iter().nth(best).expect("at least one seed");
    if let Objective::ClassCount = objective {
        let n = g.node_count() as f64;
        trace.iter_mut().for_each(|q| *q /= n);
    }
    Ok(PlacementResult::assemble(
        g,
        algorithm,
        order,
        trace,
        k,
        None,
        seeds.map(|_| seed_nodes),
        work,
    ))
}

/// Low-variance placement: from every seed, repeatedly add the node that
/// creates the most equivalence classes, stopping at a double resolving
/// set or at `k` observers. The trace holds success probabilities under a
/// uniform prior, `1/n` for the seed alone.
pub fn lv_obs(g: &Graph, k: usize, seeds: Option<&[NodeId]>) -> Result<PlacementResult> {
    run(g, Algorithm::Lv, Objective::ClassCount, k, seeds)
}

/// Same loop as [`lv_obs`], minimizing the factorial entropy of the class
/// sizes instead.
pub fn entropy_greedy_placement(
    g: &Graph,
    k: usize,
    seeds: Option<&[NodeId]>,
) -> Result<PlacementResult> {
    run(g, Algorithm::Entropy, Objective::Entropy, k, seeds)
}

/// Same loop as [`lv_obs`], minimizing the expected distance between the
/// true and estimated source under a uniform prior.
pub fn expected_distance_greedy_placement(
    g: &Graph,
    k: usize,
    mode: DistanceMode,
    seeds: Option<&[NodeId]>,
) -> Result<PlacementResult> {
    run(
        g,
        Algorithm::ExpectedDistance,
        Objective::ExpectedDistance(mode),
        k,
        seeds,
    )
}
