//! Immutable undirected weighted graphs.
//!
//! Nodes are dense indices `0..n`. Each node keeps the label it had in the
//! input file so results can be written back in the caller's vocabulary.
//! All-pairs shortest paths are computed once on first use and cached.

mod generate;
mod paths;

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;

pub use generate::{generate, Generated, GraphKind};
pub use paths::{
    all_pairs_shortest_paths, canonical_shortest_path, dijkstra, shortest_path_tree,
    CanonicalPath, DistanceMatrix, ShortestPathTree,
};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Relative tolerance used wherever two path lengths are compared.
pub(crate) const LENGTH_TOLERANCE: f64 = 1e-9;

/// True when two path lengths are equal up to [`LENGTH_TOLERANCE`].
#[inline]
pub(crate) fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= LENGTH_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// One entry of an adjacency list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node: NodeId,
    pub weight: f64,
    /// Index into [`Graph::edges`].
    pub edge: usize,
}

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

#[derive(Debug)]
pub struct Graph {
    labels: Vec<String>,
    adjacency: Vec<Vec<Neighbor>>,
    edges: Vec<Edge>,
    integral_weights: bool,
    distances: OnceLock<DistanceMatrix>,
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        let distances = OnceLock::new();
        if let Some(d) = self.distances.get() {
            let _ = distances.set(d.clone());
        }
        Graph {
            labels: self.labels.clone(),
            adjacency: self.adjacency.clone(),
            edges: self.edges.clone(),
            integral_weights: self.integral_weights,
            distances,
        }
    }
}

impl Graph {
    /// Builds a graph on nodes `0..n` labelled by their index.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(i, (u, v, w))| (i + 1, u, v, w))
            .collect::<Vec<_>>();
        Self::build(labels, edges)
    }

    fn build(labels: Vec<String>, raw: Vec<(usize, NodeId, NodeId, f64)>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || raw.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut seen: HashMap<(NodeId, NodeId), ()> = HashMap::with_capacity(raw.len());
        let mut edges = Vec::with_capacity(raw.len());
        for (line, u, v, w) in raw {
            if u >= n {
                return Err(Error::NodeOutOfRange(u));
            }
            if v >= n {
                return Err(Error::NodeOutOfRange(v));
            }
            if u == v {
                return Err(Error::SelfLoop {
                    line,
                    node: labels[u].clone(),
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { line, weight: w });
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key, ()).is_some() {
                return Err(Error::DuplicateEdge {
                    line,
                    u: labels[u].clone(),
                    v: labels[v].clone(),
                });
            }
            edges.push(Edge {
                u: key.0,
                v: key.1,
                weight: w,
            });
        }
        edges.sort_by_key(|e| (e.u, e.v));

        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push(Neighbor {
                node: e.v,
                weight: e.weight,
                edge: i,
            });
            adjacency[e.v].push(Neighbor {
                node: e.u,
                weight: e.weight,
                edge: i,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|nb| nb.node);
        }
        let integral_weights = edges.iter().all(|e| e.weight.fract() == 0.0);
        let graph = Graph {
            labels,
            adjacency,
            edges,
            integral_weights,
            distances: OnceLock::new(),
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for nb in &self.adjacency[u] {
                    if !seen[nb.node] {
                        seen[nb.node] = true;
                        stack.push(nb.node);
                    }
                }
            }
        }
        components
    }

    /// Parses the whitespace-separated `u v w` edge-list format.
    ///
    /// Node tokens are arbitrary strings, mapped to dense ids in first-seen
    /// order. Blank lines and anything after `#` are ignored.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut ids: HashMap<String, NodeId> = HashMap::new();
        let mut labels = Vec::new();
        let mut raw = Vec::new();
        let mut intern = |token: &str, labels: &mut Vec<String>| -> NodeId {
            if let Some(&id) = ids.get(token) {
                return id;
            }
            let id = labels.len();
            labels.push(token.to_string());
            ids.insert(token.to_string(), id);
            id
        };
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected `u v w`, found {} fields", tokens.len()),
                });
            }
            let weight: f64 = tokens[2].parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid weight `{}`", tokens[2]),
            })?;
            let u = intern(tokens[0], &mut labels);
            let v = intern(tokens[1], &mut labels);
            raw.push((lineno, u, v, weight));
        }
        let graph = Self::build(labels, raw)?;
        if !graph.integral_weights {
            log::warn!("edge list contains non-integer weights; distance classes use a 1e-9 tolerance");
        }
        Ok(graph)
    }

    pub fn load_edge_list_str(text: &str) -> Result<Self> {
        Self::load_edge_list(text.as_bytes())
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::load_edge_list(std::io::BufReader::new(file))
    }

    /// Writes the `u v w` edge-list format read by [`Graph::load_edge_list`].
    pub fn write_edge_list<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {}", self.labels[e.u], self.labels[e.v], e.weight)?;
        }
        Ok(())
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `u`, sorted by node id.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[Neighbor] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |nb| nb.node)
            .ok()
            .map(|i| list[i].weight)
    }

    /// True when every weight is a whole number. Informational only.
    pub fn has_integral_weights(&self) -> bool {
        self.integral_weights
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Result<NodeId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownNode(label.to_string()))
    }

    /// All-pairs shortest paths, computed on first call.
    pub fn distances(&self) -> &DistanceMatrix {
        self.distances.get_or_init(|| all_pairs_shortest_paths(self))
    }

    /// Shortest-path distance between `u` and `v`.
    #[inline]
    pub fn distance(&self, u: NodeId, v: NodeId) -> f64 {
        self.distances().distance(u, v)
    }

    /// Largest weighted distance between any two nodes.
    pub fn weighted_diameter(&self) -> f64 {
        self.distances().diameter()
    }

    pub(crate) fn check_node(&self, u: NodeId) -> Result<()> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(u))
        }
    }
}
