//! Observer placement algorithms.
//!
//! * [`lv_obs`]: greedy growth of the number of equivalence classes, restarted
//!   from every seed node. Suited to low transmission variance.
//! * [`hv_obs`]: greedy growth of the set of nodes covered by short canonical
//!   paths between observers. Suited to high variance.
//! * [`entropy_greedy_placement`] and [`expected_distance_greedy_placement`]:
//!   the same seed loop driven by other partition objectives.
//! * [`betweenness_placement`], [`coverage_rate_placement`] and
//!   [`k_median_placement`]: the usual benchmarks.
//! * [`exhaustive_optimal_placement`] and [`min_drs_budget`]: brute-force
//!   oracles for small graphs.
//!
//! Every argmax/argmin breaks ties towards the lowest node id and seed loops
//! keep the first best seed, so parallel and sequential runs agree.

mod benchmarks;
mod exhaustive;
mod greedy;
mod path_cover;

pub use benchmarks::{
    betweenness_centrality, betweenness_placement, coverage_rate_placement, k_median_placement,
};
pub use exhaustive::{
    exhaustive_optimal_placement, exhaustive_optimal_placement_with_cap, min_drs_budget,
    DrsMethod, ExhaustiveObjective, DEFAULT_ENUMERATION_CAP,
};
pub use greedy::{entropy_greedy_placement, expected_distance_greedy_placement, lv_obs};
pub use path_cover::{hv_obs, p_l_nodes, select_length_constraint, LengthSelection};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::resolution::{
    entropy, expected_distance, partition, success_probability, DistanceMode, ObserverSet, Prior,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lv,
    Hv,
    Betweenness,
    Coverage,
    KMedian,
    Entropy,
    ExpectedDistance,
    Exhaustive,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Lv => "lv",
            Algorithm::Hv => "hv",
            Algorithm::Betweenness => "bc",
            Algorithm::Coverage => "coverage",
            Algorithm::KMedian => "kmedian",
            Algorithm::Entropy => "entropy",
            Algorithm::ExpectedDistance => "edist",
            Algorithm::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lv" => Algorithm::Lv,
            "hv" => Algorithm::Hv,
            "bc" => Algorithm::Betweenness,
            "coverage" => Algorithm::Coverage,
            "kmedian" => Algorithm::KMedian,
            "entropy" => Algorithm::Entropy,
            "edist" => Algorithm::ExpectedDistance,
            "exhaustive" => Algorithm::Exhaustive,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown placement algorithm `{other}`"
                )))
            }
        })
    }
}

/// Maximum weighted length of an observer-to-observer path that still
/// counts towards coverage.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LengthConstraint(f64);

impl LengthConstraint {
    /// Accepts `0 < length <= diameter` (up to rounding).
    pub fn new(g: &Graph, length: f64) -> Result<Self> {
        let diameter = g.weighted_diameter();
        if length.is_nan() || length <= 0.0 || length > diameter * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "length constraint {length} outside (0, {diameter}]"
            )));
        }
        Ok(LengthConstraint(length))
    }

    /// The weighted diameter: every observer pair qualifies.
    pub fn diameter(g: &Graph) -> Self {
        LengthConstraint(g.weighted_diameter())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Analytic quality of an observer set under a uniform prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementMetrics {
    pub success_probability: f64,
    pub expected_distance_weighted: f64,
    pub expected_distance_hops: f64,
    pub entropy: f64,
    /// `|P_L|`, for placements that carry a length constraint.
    pub path_cover: Option<usize>,
}

impl PlacementMetrics {
    pub fn compute(g: &Graph, observers: &ObserverSet, length: Option<LengthConstraint>) -> Self {
        let p = partition(g, observers);
        let prior = Prior::uniform(g.node_count());
        PlacementMetrics {
            success_probability: success_probability(&p, &prior),
            expected_distance_weighted: expected_distance(g, &p, &prior, DistanceMode::Weighted),
            expected_distance_hops: expected_distance(g, &p, &prior, DistanceMode::Hops),
            entropy: entropy(&p),
            path_cover: length.map(|l| p_l_nodes(g, observers.as_slice(), l).len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    pub algorithm: Algorithm,
    pub observers: ObserverSet,
    /// Observers in the order they were chosen.
    pub selection_order: Vec<NodeId>,
    /// Objective after each addition, starting with the first observer.
    pub objective_trace: Vec<f64>,
    pub metrics: PlacementMetrics,
    pub k: usize,
    pub length_constraint: Option<LengthConstraint>,
    pub seeds: Option<Vec<NodeId>>,
    /// Elementary operations spent (candidate-node evaluations for the
    /// partition greedies, observer-pair path scans for path covering).
    pub work: u64,
}

impl PlacementResult {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        g: &Graph,
        algorithm: Algorithm,
        selection_order: Vec<NodeId>,
        objective_trace: Vec<f64>,
        k: usize,
        length_constraint: Option<LengthConstraint>,
        seeds: Option<Vec<NodeId>>,
        work: u64,
    ) -> Self {
        let observers = ObserverSet::new(selection_order.clone()).expect("distinct observers");
        let metrics = PlacementMetrics::compute(g, &observers, length_constraint);
        PlacementResult {
            algorithm,
            observers,
            selection_order,
            objective_trace,
            metrics,
            k,
            length_constraint,
            seeds,
            work,
        }
    }

    /// Flat `key = value` record followed by one observer label per line.
    pub fn to_record(&self, g: &Graph) -> String {
        use std::fmt::Write;
        let m = &self.metrics;
        let mut out = String::new();
        let _ = writeln!(out, "algorithm = {}", self.algorithm);
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "observer_count = {}", self.observers.len());
        if let Some(l) = self.length_constraint {
            let _ = writeln!(out, "length_constraint = {}", l.value());
        }
        if let Some(seeds) = &self.seeds {
            let labels: Vec<&str> = seeds.iter().map(|&s| g.label(s)).collect();
            let _ = writeln!(out, "seeds = {}", labels.join(","));
        }
        let _ = writeln!(out, "ps = {}", m.success_probability);
        let _ = writeln!(out, "ed_weighted = {}", m.expected_distance_weighted);
        let _ = writeln!(out, "ed_hops = {}", m.expected_distance_hops);
        let _ = writeln!(out, "entropy = {}", m.entropy);
        if let Some(c) = m.path_cover {
            let _ = writeln!(out, "path_cover = {c}");
        }
        let trace: Vec<String> = self.objective_trace.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "objective_trace = {}", trace.join(","));
        let order: Vec<&str> = self.selection_order.iter().map(|&u| g.label(u)).collect();
        let _ = writeln!(out, "selection_order = {}", order.join(","));
        let _ = writeln!(out, "# observers");
        for u in self.observers.iter() {
            let _ = writeln!(out, "{}", g.label(u));
        }
        out
    }
}

pub(crate) fn check_budget(g: &Graph, k: usize, min: usize) -> Result<()> {
    let n = g.node_count();
    if k < min || k > n {
        Err(Error::InvalidBudget { k, n })
    } else {
        Ok(())
    }
}

pub(crate) fn seed_list(g: &Graph, seeds: Option<&[NodeId]>) -> Result<Vec<NodeId>> {
    match seeds {
        None => Ok((0..g.node_count()).collect()),
        Some(s) => {
            if s.is_empty() {
                return Err(Error::InvalidParameter("empty seed list".into()));
            }
            for &u in s {
                g.check_node(u)?;
            }
            let mut v = s.to_vec();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        }
    }
}

/// `a` beats `b` by more than rounding noise.
#[inline]
pub(crate) fn strictly_greater(a: f64, b: f64) -> bool {
    a > b + 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Runs a placement by algorithm tag.
pub fn place(
    g: &Graph,
    algorithm: Algorithm,
    k: usize,
    length: Option<LengthConstraint>,
    seeds: Option<&[NodeId]>,
) -> Result<PlacementResult> {
    match algorithm {
        Algorithm::Lv => lv_obs(g, k, seeds),
        Algorithm::Hv => hv_obs(g, k, length.unwrap_or_else(|| LengthConstraint::diameter(g)), seeds),
        Algorithm::Betweenness => betweenness_placement(g, k),
        Algorithm::Coverage => coverage_rate_placement(g, k),
        Algorithm::KMedian => k_median_placement(g, k),
        Algorithm::Entropy => entropy_greedy_placement(g, k, seeds),
        Algorithm::ExpectedDistance => {
            expected_distance_greedy_placement(g, k, DistanceMode::Weighted, seeds)
        }
        Algorithm::Exhaustive => {
            exhaustive_optimal_placement(g, k, ExhaustiveObjective::SuccessProbability)
        }
    }
}
