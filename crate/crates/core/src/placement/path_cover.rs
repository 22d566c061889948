//! Path-covering placement for the high-variance regime.
//!
//! `P_L(S)` is the set of nodes on the canonical shortest path of every
//! observer pair at weighted distance at most `L`, plus the observers
//! themselves. The canonical path of a pair is taken from the lower id to
//! the higher id.

use super::{check_budget, lv_obs, seed_list, Algorithm, LengthConstraint, PlacementResult};
use crate::error::Result;
use crate::graph::{same_length, Graph, NodeId};
use crate::par;

/// True when `d` does not exceed the constraint, up to rounding.
#[inline]
fn within(d: f64, length: LengthConstraint) -> bool {
    d <= length.value() || same_length(d, length.value())
}

/// Calls `f` on every node of the canonical path between `a` and `b`.
fn for_each_on_path(g: &Graph, a: NodeId, b: NodeId, mut f: impl FnMut(NodeId)) {
    let (root, mut cur) = (a.min(b), a.max(b));
    let parent = g.distances().parent_row(root);
    f(cur);
    while cur != root {
        cur = parent[cur] as usize;
        f(cur);
    }
}

/// Nodes covered by `s` under `length`, ascending.
pub fn p_l_nodes(g: &Graph, s: &[NodeId], length: LengthConstraint) -> Vec<NodeId> {
    let n = g.node_count();
    let mut covered = vec![false; n];
    for (i, &a) in s.iter().enumerate() {
        covered[a] = true;
        for &b in &s[i + 1..] {
            if within(g.distance(a, b), length) {
                for_each_on_path(g, a, b, |u| covered[u] = true);
            }
        }
    }
    (0..n).filter(|&u| covered[u]).collect()
}

struct Cover {
    observers: Vec<NodeId>,
    covered: Vec<bool>,
    count: usize,
}

impl Cover {
    fn new(n: usize, seed: NodeId) -> Self {
        let mut covered = vec![false; n];
        covered[seed] = true;
        Cover {
            observers: vec![seed],
            covered,
            count: 1,
        }
    }

    /// Nodes `z` would add, without duplicates. Also returns the number of
    /// observer pairs examined.
    fn gain(&self, g: &Graph, z: NodeId, length: LengthConstraint) -> (Vec<NodeId>, u64) {
        let mut fresh = Vec::new();
        if !self.covered[z] {
            fresh.push(z);
        }
        for &o in &self.observers {
            if within(g.distance(o, z), length) {
                for_each_on_path(g, o, z, |u| {
                    if !self.covered[u] {
                        fresh.push(u);
                    }
                });
            }
        }
        fresh.sort_unstable();
        fresh.dedup();
        (fresh, self.observers.len() as u64)
    }
}

struct Grown {
    order: Vec<NodeId>,
    trace: Vec<f64>,
    work: u64,
}

fn grow(g: &Graph, seed: NodeId, k: usize, length: LengthConstraint) -> Grown {
    let n = g.node_count();
    let mut cover = Cover::new(n, seed);
    let mut trace = vec![1.0];
    let mut work = 0;
    while cover.count < n && cover.observers.len() < k {
        let candidates: Vec<NodeId> = (0..n).filter(|z| !cover.observers.contains(z)).collect();
        let gains = par::map(&candidates, |&z| cover.gain(g, z, length));
        work += gains.iter().map(|(_, w)| w).sum::<u64>();
        let mut best = 0;
        for i in 1..candidates.len() {
            if gains[i].0.len() > gains[best].0.len() {
                best = i;
            }
        }
        let z = candidates[best];
        for &u in &gains[best].0 {
            cover.covered[u] = true;
        }
        cover.count += gains[best].0.len();
        cover.observers.push(z);
        trace.push(cover.count as f64);
    }
    Grown {
        order: cover.observers,
        trace,
        work,
    }
}

/// High-variance placement: from every seed, repeatedly add the node that
/// enlarges `P_L` the most, stopping when every node is covered or at `k`
/// observers. The trace holds `|P_L|` after each addition.
pub fn hv_obs(
    g: &Graph,
    k: usize,
    length: LengthConstraint,
    seeds: Option<&[NodeId]>,
) -> Result<PlacementResult> {
    check_budget(g, k, 2)?;
    let seed_nodes = seed_list(g, seeds)?;
    let runs = par::map(&seed_nodes, |&s| grow(g, s, k, length));
    let work = runs.iter().map(|r| r.work).sum();
    let mut best = 0;
    for i in 1..runs.len() {
        if runs[i].trace.last() > runs[best].trace.last() {
            best = i;
        }
    }
    let Grown { order, trace, .. } = runs.into_iter().nth(best).expect("at least one seed");
    Ok(PlacementResult::assemble(
        g,
        Algorithm::Hv,
        order,
        trace,
        k,
        Some(length),
        seeds.map(|_| seed_nodes),
        work,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthSelection {
    pub length: LengthConstraint,
    /// `|P_L|` of the path-cover placement at the chosen length.
    pub coverage: usize,
    /// `|P_Δ|` of the low-variance placement.
    pub reference_coverage: usize,
    /// `(L, |P_L(hv)|)` for every grid value, in grid order.
    pub sweep: Vec<(f64, usize)>,
    /// No grid value stayed under the reference; the smallest was returned.
    pub fallback: bool,
}

/// Picks the largest grid length whose path-cover placement covers no more
/// nodes than the low-variance placement does at full length.
pub fn select_length_constraint(
    g: &Graph,
    k: usize,
    grid: &[f64],
) -> Result<LengthSelection> {
    if grid.is_empty() {
        return Err(crate::Error::InvalidParameter("empty length grid".into()));
    }
    let grid: Vec<LengthConstraint> = grid
        .iter()
        .map(|&l| LengthConstraint::new(g, l))
        .collect::<Result<_>>()?;
    let lv = lv_obs(g, k, None)?;
    let reference_coverage =
        p_l_nodes(g, lv.observers.as_slice(), LengthConstraint::diameter(g)).len();
    let mut sweep = Vec::with_capacity(grid.len());
    for &l in &grid {
        let hv = hv_obs(g, k, l, None)?;
        sweep.push((l.value(), hv.metrics.path_cover.expect("hv sets path cover")));
    }
    let chosen = sweep
        .iter()
        .enumerate()
        .filter(|(_, (_, c))| *c <= reference_coverage)
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i);
    let (index, fallback) = match chosen {
        Some(i) => (i, false),
        None => {
            let smallest = (0..grid.len())
                .min_by(|&a, &b| grid[a].value().total_cmp(&grid[b].value()))
                .expect("nonempty grid");
            log::warn!(
                "every grid length covers more than the low-variance reference ({reference_coverage}); using L = {}",
                grid[smallest].value()
            );
            (smallest, true)
        }
    };
    Ok(LengthSelection {
        length: grid[index],
        coverage: sweep[index].1,
        reference_coverage,
        sweep,
        fallback,
    })
}
