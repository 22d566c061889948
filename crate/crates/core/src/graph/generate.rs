//! Synthetic graph families. All generators are pure functions of their
//! parameters and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Maximum number of successive seeds tried when a random geometric graph
/// comes out disconnected.
const MAX_RGG_ATTEMPTS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    /// `n` nodes in a line.
    Path { n: usize, weight: f64 },
    /// `n` nodes in a ring.
    Cycle { n: usize, weight: f64 },
    /// Center `0` joined to leaves `1..n`; `n` counts all nodes.
    Star { n: usize, weight: f64 },
    /// Ring `0..n` plus a leaf `n` hanging off node `0`.
    CycleWithLeaf { n: usize, weight: f64 },
    /// `rows x cols` lattice, node `r * cols + c`.
    Grid {
        rows: usize,
        cols: usize,
        weight: f64,
    },
    /// Uniform random recursive tree with integer weights in `1..=max_weight`.
    RandomTree {
        n: usize,
        max_weight: u32,
        seed: u64,
    },
    /// Unit-weight random geometric graph in the unit square.
    RandomGeometric { n: usize, radius: f64, seed: u64 },
    /// Unit-weight preferential attachment grown from a clique on `m + 1`
    /// nodes; every later node brings `m` edges.
    BarabasiAlbert { n: usize, m: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Graph,
    /// Seed that produced `graph`, which may differ from the requested seed
    /// when earlier draws were disconnected.
    pub seed_used: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn check_weight(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("weight must be positive, got {w}")))
    }
}

pub fn generate(kind: &GraphKind) -> Result<Generated> {
    let fixed = |graph| Ok(Generated {
        graph,
        seed_used: None,
    });
    match *kind {
        GraphKind::Path { n, weight } => {
            check_weight(weight)?;
            if n < 2 {
                return Err(invalid("path needs at least 2 nodes"));
            }
            fixed(Graph::from_edges(n, (1..n).map(|i| (i - 1, i, weight)))?)
        }
        GraphKind::Cycle { n, weight } => {
            check_weight(weight)?;
            if n < 3 {
                return Err(invalid("cycle needs at least 3 nodes"));
            }
            fixed(Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, weight)))?)
        }
        GraphKind::Star { n, weight } => {
            check_weight(weight)?;
            if n < 2 {
                return Err(invalid("star needs at least 2 nodes"));
            }
            fixed(Graph::from_edges(n, (1..n).map(|i| (0, i, weight)))?)
        }
        GraphKind::CycleWithLeaf { n, weight } => {
            check_weight(weight)?;
            if n < 3 {
                return Err(invalid("cycle needs at least 3 nodes"));
            }
            let edges = (0..n)
                .map(|i| (i, (i + 1) % n, weight))
                .chain(std::iter::once((0, n, weight)));
            fixed(Graph::from_edges(n + 1, edges)?)
        }
        GraphKind::Grid { rows, cols, weight } => {
            check_weight(weight)?;
            if rows * cols < 2 {
                return Err(invalid("grid needs at least 2 nodes"));
            }
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let u = r * cols + c;
                    if c + 1 < cols {
                        edges.push((u, u + 1, weight));
                    }
                    if r + 1 < rows {
                        edges.push((u, u + cols, weight));
                    }
                }
            }
            fixed(Graph::from_edges(rows * cols, edges)?)
        }
        GraphKind::RandomTree {
            n,
            max_weight,
            seed,
        } => {
            if n < 2 || max_weight == 0 {
                return Err(invalid("random tree needs n >= 2 and max_weight >= 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges: Vec<_> = (1..n)
                .map(|i| {
                    let parent = rng.random_range(0..i);
                    let w = rng.random_range(1..=max_weight) as f64;
                    (parent, i, w)
                })
                .collect();
            Ok(Generated {
                graph: Graph::from_edges(n, edges)?,
                seed_used: Some(seed),
            })
        }
        GraphKind::RandomGeometric { n, radius, seed } => random_geometric(n, radius, seed),
        GraphKind::BarabasiAlbert { n, m, seed } => barabasi_albert(n, m, seed),
    }
}

fn random_geometric(n: usize, radius: f64, seed: u64) -> Result<Generated> {
    if n < 2 || radius.is_nan() || radius <= 0.0 {
        return Err(invalid("random geometric graph needs n >= 2 and r > 0"));
    }
    let r2 = radius * radius;
    for attempt in 0..MAX_RGG_ATTEMPTS {
        let s = seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let dx = points[i].0 - points[j].0;
                let dy = points[i].1 - points[j].1;
                if dx * dx + dy * dy <= r2 {
                    edges.push((i, j, 1.0));
                }
            }
        }
        match Graph::from_edges(n, edges) {
            Ok(graph) => {
                if attempt > 0 {
                    log::debug!("random geometric graph: seed {seed} disconnected, used {s}");
                }
                return Ok(Generated {
                    graph,
                    seed_used: Some(s),
                });
            }
            Err(Error::Disconnected { .. }) | Err(Error::EmptyGraph) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(invalid(format!(
        "no connected random geometric graph with n={n}, r={radius} in {MAX_RGG_ATTEMPTS} seeds"
    )))
}

fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Generated> {
    if m == 0 || m >= n {
        return Err(invalid(format!(
            "preferential attachment needs 1 <= m < n, got m={m}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = (m + 1).min(n);
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    // every endpoint appears once per incident edge
    let mut endpoints: Vec<NodeId> = Vec::new();
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u, v, 1.0));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for u in core..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, u, 1.0));
            endpoints.push(t);
            endpoints.push(u);
        }
    }
    Ok(Generated {
        graph: Graph::from_edges(n, edges)?,
        seed_used: Some(seed),
    })
}
