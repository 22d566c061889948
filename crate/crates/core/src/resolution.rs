//! Distance vectors, equivalence classes and the analytic localization
//! metrics that follow from them.
//!
//! Two nodes are indistinguishable to an observer set when their vectors of
//! distance differences to the observers coincide. Every metric here is a
//! function of the resulting partition of the nodes.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, LENGTH_TOLERANCE};

/// A set of distinct observers kept in ascending id order. The first
/// element is the reference observer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObserverSet(Vec<NodeId>);

impl ObserverSet {
    pub fn new(mut nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::TooFewObservers {
                required: 1,
                got: 0,
            });
        }
        nodes.sort_unstable();
        if let Some(w) = nodes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateObserver(w[0]));
        }
        Ok(ObserverSet(nodes))
    }

    /// Like [`ObserverSet::new`] but also checks ids against `g`.
    pub fn for_graph(g: &Graph, nodes: Vec<NodeId>) -> Result<Self> {
        for &u in &nodes {
            g.check_node(u)?;
        }
        Self::new(nodes)
    }

    pub fn reference(&self) -> NodeId {
        self.0[0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.0.binary_search(&u).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub(crate) fn require_pair(&self) -> Result<()> {
        if self.0.len() < 2 {
            Err(Error::TooFewObservers {
                required: 2,
                got: self.0.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// Entry `i` is `d(s, o_{i+1}) - d(s, o_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVector(pub Vec<f64>);

impl DistanceVector {
    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn distance_vector(g: &Graph, observers: &ObserverSet, s: NodeId) -> Result<DistanceVector> {
    observers.require_pair()?;
    g.check_node(s)?;
    let row = g.distances().row(s);
    let base = row[observers.reference()];
    Ok(DistanceVector(
        observers.as_slice()[1..].iter().map(|&o| row[o] - base).collect(),
    ))
}

/// Grid index of a distance difference. Integer-valued differences map to
/// distinct keys exactly; real values closer than the tolerance share one.
#[inline]
pub(crate) fn class_key(x: f64) -> i64 {
    (x / LENGTH_TOLERANCE).round() as i64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalencePartition {
    /// Classes ordered by smallest member; members ascending.
    pub classes: Vec<Vec<NodeId>>,
    pub class_of: Vec<usize>,
}

impl EquivalencePartition {
    /// Builds the partition from a class label per node. Labels are
    /// renumbered by first appearance so equal groupings compare equal.
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let mut classes: Vec<Vec<NodeId>> = Vec::new();
        let mut class_of = Vec::with_capacity(labels.len());
        for (u, &label) in labels.iter().enumerate() {
            let next = classes.len();
            let id = *ids.entry(label).or_insert(next);
            if id == next {
                classes.push(Vec::new());
            }
            classes[id].push(u);
            class_of.push(id);
        }
        EquivalencePartition { classes, class_of }
    }

    /// Everything in one class: the convention for a single observer.
    pub fn trivial(n: usize) -> Self {
        EquivalencePartition {
            classes: vec![(0..n).collect()],
            class_of: vec![0; n],
        }
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn node_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn same_class(&self, u: NodeId, v: NodeId) -> bool {
        self.class_of[u] == self.class_of[v]
    }
}

/// Groups nodes by distance vector. A single observer yields one class.
pub fn partition(g: &Graph, observers: &ObserverSet) -> EquivalencePartition {
    partition_with_reference(g, observers, observers.reference())
        .expect("reference is an observer")
}

/// Same as [`partition`] but with `reference` playing the role of `o_1`.
pub fn partition_with_reference(
    g: &Graph,
    observers: &ObserverSet,
    reference: NodeId,
) -> Result<EquivalencePartition> {
    partition_counted(g, observers, reference).map(|(p, _)| p)
}

/// [`partition_with_reference`] plus the number of distance-matrix reads.
pub fn partition_counted(
    g: &Graph,
    observers: &ObserverSet,
    reference: NodeId,
) -> Result<(EquivalencePartition, usize)> {
    if !observers.contains(reference) {
        return Err(Error::InvalidParameter(format!(
            "reference {reference} is not an observer"
        )));
    }
    let n = g.node_count();
    if observers.len() == 1 {
        return Ok((EquivalencePartition::trivial(n), 0));
    }
    let dm = g.distances();
    let others: Vec<NodeId> = observers.iter().filter(|&o| o != reference).collect();
    let mut reads = 0;
    let keys: Vec<Vec<i64>> = (0..n)
        .map(|u| {
            let row = dm.row(u);
            let base = row[reference];
            reads += 1 + others.len();
            others.iter().map(|&o| class_key(row[o] - base)).collect()
        })
        .collect();
    let mut ids: HashMap<&[i64], usize> = HashMap::with_capacity(n);
    let labels: Vec<usize> = keys
        .iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.as_slice()).or_insert(next)
        })
        .collect();
    Ok((EquivalencePartition::from_labels(&labels), reads))
}

/// Probability distribution of the source location.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior(Vec<f64>);

/// Allowed deviation of a prior's total mass from 1.
pub const PRIOR_TOLERANCE: f64 = 1e-12;

impl Prior {
    pub fn uniform(n: usize) -> Self {
        Prior(vec![1.0 / n as f64; n])
    }

    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if let Some(&p) = probabilities.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "prior probability must be nonnegative, got {p}"
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOLERANCE {
            return Err(Error::PriorNotNormalized(total));
        }
        Ok(Prior(probabilities))
    }

    /// Reads `node probability` lines. Nodes not listed get probability 0.
    pub fn load<R: BufRead>(g: &Graph, reader: R) -> Result<Self> {
        let mut probs = vec![0.0; g.node_count()];
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
            let mut it = content.split_whitespace();
            let (Some(label), Some(p), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected `node probability`".into(),
                });
            };
            let u = g.node_by_label(label)?;
            probs[u] = p.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid probability `{p}`"),
            })?;
        }
        Self::new(probs)
    }

    pub fn from_path(g: &Graph, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::load(g, std::io::BufReader::new(file))
    }

    #[inline]
    pub fn probability(&self, u: NodeId) -> f64 {
        self.0[u]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mass(&self, nodes: &[NodeId]) -> f64 {
        nodes.iter().map(|&u| self.0[u]).sum()
    }
}

/// Probability that the estimator picks the true source when it draws from
/// the prior restricted to the matched class.
pub fn success_probability(p: &EquivalencePartition, prior: &Prior) -> f64 {
    let q = prior.as_slice();
    if q.iter().all(|&x| x == q[0]) {
        return p.class_count() as f64 / p.node_count() as f64;
    }
    p.classes
        .iter()
        .map(|class| {
            let mass = prior.mass(class);
            if mass > 0.0 {
                class.iter().map(|&s| prior.probability(s).powi(2)).sum::<f64>() / mass
            } else {
                0.0
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceMode {
    Weighted,
    Hops,
}

pub fn expected_distance(
    g: &Graph,
    p: &EquivalencePartition,
    prior: &Prior,
    mode: DistanceMode,
) -> f64 {
    let dm = g.distances();
    let mut total = 0.0;
    for class in &p.classes {
        if class.len() < 2 {
            continue;
        }
        let mass = prior.mass(class);
        if mass <= 0.0 {
            continue;
        }
        for &s in class {
            let qs = prior.probability(s);
            if qs == 0.0 {
                continue;
            }
            let inner: f64 = class
                .iter()
                .map(|&u| {
                    let d = match mode {
                        DistanceMode::Weighted => dm.distance(s, u),
                        DistanceMode::Hops => dm.hops(s, u) as f64,
                    };
                    prior.probability(u) * d
                })
                .sum();
            total += qs * inner / mass;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseMetrics {
    /// Success probability against an adversarial source, with a uniform
    /// pick inside the matched class.
    pub min_success: f64,
    /// Largest weighted diameter of any class.
    pub max_distance: f64,
    /// Class diameters averaged under the prior.
    pub expected_max_distance: f64,
}

pub fn worst_case_metrics(
    g: &Graph,
    p: &EquivalencePartition,
    prior: &Prior,
) -> WorstCaseMetrics {
    let dm = g.distances();
    let mut min_success: f64 = 1.0;
    let mut max_distance: f64 = 0.0;
    let mut expected_max_distance = 0.0;
    for class in &p.classes {
        min_success = min_success.min(1.0 / class.len() as f64);
        let mut diameter: f64 = 0.0;
        for (i, &a) in class.iter().enumerate() {
            for &b in &class[i + 1..] {
                diameter = diameter.max(dm.distance(a, b));
            }
        }
        max_distance = max_distance.max(diameter);
        expected_max_distance += prior.mass(class) * diameter;
    }
    WorstCaseMetrics {
        min_success,
        max_distance,
        expected_max_distance,
    }
}

/// `log2` of the product of class-size factorials.
pub fn entropy(p: &EquivalencePartition) -> f64 {
    entropy_of_sizes(p.classes.iter().map(Vec::len))
}

pub(crate) fn entropy_of_sizes(sizes: impl IntoIterator<Item = usize>) -> f64 {
    sizes
        .into_iter()
        .map(|c| (2..=c).map(|j| (j as f64).log2()).sum::<f64>())
        .sum()
}

/// True when every class is a singleton.
pub fn is_drs(p: &EquivalencePartition) -> bool {
    p.classes.len() == p.class_of.len()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionGap {
    /// Smallest sup-norm distance between two different distance vectors.
    pub delta: f64,
    /// Largest canonical hop count between any node and any observer.
    pub max_hops: u32,
    /// `delta / (2 * max_hops)`.
    pub epsilon0_lower_bound: f64,
}

pub fn resolution_gap(g: &Graph, observers: &ObserverSet) -> Result<ResolutionGap> {
    observers.require_pair()?;
    let n = g.node_count();
    let dm = g.distances();
    let mut seen = HashMap::new();
    let mut vectors: Vec<DistanceVector> = Vec::new();
    for u in 0..n {
        let v = distance_vector(g, observers, u)?;
        let key: Vec<i64> = v.0.iter().map(|&x| class_key(x)).collect();
        if seen.insert(key, ()).is_none() {
            vectors.push(v);
        }
    }
    if vectors.len() < 2 {
        return Err(Error::NoResolutionGap);
    }
    let mut delta = f64::INFINITY;
    for (i, a) in vectors.iter().enumerate() {
        for b in &vectors[i + 1..] {
            delta = delta.min(a.max_abs_diff(&b.0));
        }
    }
    let max_hops = (0..n)
        .flat_map(|u| observers.iter().map(move |o| (u, o)))
        .map(|(u, o)| dm.hops(u, o).max(dm.hops(o, u)))
        .max()
        .unwrap_or(0);
    Ok(ResolutionGap {
        delta,
        max_hops,
        epsilon0_lower_bound: delta / (2.0 * max_hops as f64),
    })
}
