//! Shortest paths with a reproducible tie-break.
//!
//! Whenever several shortest paths join two nodes, the canonical one is the
//! lexicographically smallest node sequence starting from the source. The
//! canonical paths out of a root form a tree (prefixes of canonical paths
//! are canonical), obtained as the DFS tree of the shortest-path DAG with
//! children visited in increasing id order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{same_length, Graph, Neighbor, NodeId};
use crate::par;

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path lengths with per-edge weights supplied by
/// `weight`. Weights must be nonnegative.
pub fn dijkstra<F>(g: &Graph, source: NodeId, weight: F) -> Vec<f64>
where
    F: Fn(&Neighbor) -> f64,
{
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(n);
    dist[source] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for nb in g.neighbors(u) {
            let candidate = d + weight(nb);
            if candidate < dist[nb.node] {
                dist[nb.node] = candidate;
                heap.push(HeapEntry {
                    dist: candidate,
                    node: nb.node,
                });
            }
        }
    }
    dist
}

/// Canonical shortest-path tree from `root` given the distances out of it.
/// Returns `(parent, depth)`; the root is its own parent.
fn canonical_tree(g: &Graph, root: NodeId, dist: &[f64]) -> (Vec<u32>, Vec<u32>) {
    let n = g.node_count();
    let mut parent = vec![u32::MAX; n];
    let mut depth = vec![0u32; n];
    parent[root] = root as u32;
    // (node, index of the next neighbor to try)
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    while let Some(top) = stack.last_mut() {
        let (u, next) = *top;
        let neighbors = g.neighbors(u);
        if next >= neighbors.len() {
            stack.pop();
            continue;
        }
        top.1 += 1;
        let nb = neighbors[next];
        let v = nb.node;
        if parent[v] != u32::MAX {
            continue;
        }
        if same_length(dist[u] + nb.weight, dist[v]) {
            parent[v] = u as u32;
            depth[v] = depth[u] + 1;
            stack.push((v, 0));
        }
    }
    debug_assert!(parent.iter().all(|&p| p != u32::MAX));
    (parent, depth)
}

/// All-pairs distances, canonical hop counts and canonical-tree parents.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<f64>,
    hops: Vec<u32>,
    parent: Vec<u32>,
}

impl DistanceMatrix {
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn distance(&self, u: NodeId, v: NodeId) -> f64 {
        self.dist[u * self.n + v]
    }

    /// Number of edges on the canonical shortest path from `u` to `v`.
    #[inline]
    pub fn hops(&self, u: NodeId, v: NodeId) -> u32 {
        self.hops[u * self.n + v]
    }

    /// Distances from `u` to every node.
    #[inline]
    pub fn row(&self, u: NodeId) -> &[f64] {
        &self.dist[u * self.n..(u + 1) * self.n]
    }

    /// Canonical hop counts from `u` to every node.
    #[inline]
    pub fn hop_row(&self, u: NodeId) -> &[u32] {
        &self.hops[u * self.n..(u + 1) * self.n]
    }

    /// Parent pointers of the canonical tree rooted at `root`.
    #[inline]
    pub fn parent_row(&self, root: NodeId) -> &[u32] {
        &self.parent[root * self.n..(root + 1) * self.n]
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_hops(&self) -> u32 {
        self.hops.iter().copied().max().unwrap_or(0)
    }
}

/// Runs one Dijkstra plus canonical-tree DFS per node.
pub fn all_pairs_shortest_paths(g: &Graph) -> DistanceMatrix {
    let n = g.node_count();
    let rows = par::map_range(n, |root| {
        let dist = dijkstra(g, root, |nb| nb.weight);
        let (parent, depth) = canonical_tree(g, root, &dist);
        (dist, depth, parent)
    });
    let mut dist = Vec::with_capacity(n * n);
    let mut hops = Vec::with_capacity(n * n);
    let mut parent = Vec::with_capacity(n * n);
    for (d, h, p) in rows {
        dist.extend(d);
        hops.extend(h);
        parent.extend(p);
    }
    DistanceMatrix {
        n,
        dist,
        hops,
        parent,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPath {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<(NodeId, NodeId)>,
    pub total_weight: f64,
}

/// The canonical shortest path from `u` to `v`.
pub fn canonical_shortest_path(g: &Graph, u: NodeId, v: NodeId) -> CanonicalPath {
    let dm = g.distances();
    let parent = dm.parent_row(u);
    let mut nodes = vec![v];
    let mut cur = v;
    while cur != u {
        cur = parent[cur] as usize;
        nodes.push(cur);
    }
    nodes.reverse();
    let edges: Vec<_> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
    let total_weight = edges
        .iter()
        .map(|&(a, b)| g.weight(a, b).expect("canonical path follows edges"))
        .sum();
    CanonicalPath {
        nodes,
        edges,
        total_weight,
    }
}

/// Canonical shortest-path tree rooted at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub root: NodeId,
    /// Parent of each node; the root maps to itself.
    pub parent: Vec<NodeId>,
    /// Number of tree edges between the root and each node.
    pub depth: Vec<usize>,
}

impl ShortestPathTree {
    /// Sum of edge weights along the tree path from the root to `v`.
    pub fn tree_distance(&self, g: &Graph, v: NodeId) -> f64 {
        let mut total = 0.0;
        let mut cur = v;
        let mut steps = Vec::with_capacity(self.depth[v]);
        while cur != self.root {
            let p = self.parent[cur];
            steps.push(g.weight(p, cur).expect("tree edge"));
            cur = p;
        }
        // root-to-leaf order, matching how path lengths are summed elsewhere
        for w in steps.into_iter().rev() {
            total += w;
        }
        total
    }

    /// Tree path from the root to `v`, root first.
    pub fn path_from_root(&self, v: NodeId) -> Vec<NodeId> {
        let mut nodes = vec![v];
        let mut cur = v;
        while cur != self.root {
            cur = self.parent[cur];
            nodes.push(cur);
        }
        nodes.reverse();
        nodes
    }
}

pub fn shortest_path_tree(g: &Graph, root: NodeId) -> ShortestPathTree {
    let dm = g.distances();
    ShortestPathTree {
        root,
        parent: dm.parent_row(root).iter().map(|&p| p as usize).collect(),
        depth: dm.hop_row(root).iter().map(|&h| h as usize).collect(),
    }
}
