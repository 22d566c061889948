//! Low-variance greedy against the entropy and expected-distance greedies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{generate, GraphKind};
use crate::par;
use crate::placement::{entropy_greedy_placement, expected_distance_greedy_placement, lv_obs};
use crate::resolution::DistanceMode;

use super::mix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Random geometric graph on `n` nodes with connection radius `radius`.
    Rgg { n: usize, radius: f64 },
    /// Preferential attachment on `n` nodes with `m` edges per newcomer.
    Ba { n: usize, m: usize },
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Rgg { .. } => "rgg",
            Family::Ba { .. } => "ba",
        }
    }

    fn kind(self, seed: u64) -> GraphKind {
        match self {
            Family::Rgg { n, radius } => GraphKind::RandomGeometric { n, radius, seed },
            Family::Ba { n, m } => GraphKind::BarabasiAlbert { n, m, seed },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Rgg { n, radius } => write!(f, "rgg(n={n}, r={radius})"),
            Family::Ba { n, m } => write!(f, "ba(n={n}, m={m})"),
        }
    }
}

/// `rgg` is RGG(100, 0.2) and `ba` is BA(100, 3).
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rgg" => Ok(Family::Rgg { n: 100, radius: 0.2 }),
            "ba" => Ok(Family::Ba { n: 100, m: 3 }),
            _ => Err(Error::InvalidParameter(format!("unknown graph family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let se = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        MeanSe { mean, se }
    }
}

/// Relative differences for one budget, averaged over random graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub family: Family,
    pub k: usize,
    /// `(Ps(dist) - Ps(lv)) / Ps(lv)`.
    pub ps_dist: MeanSe,
    /// `(Ed(dist) - Ed(lv)) / (Ed(dist) + 1)`, weighted distance.
    pub ed_dist: MeanSe,
    /// `(Ps(ent) - Ps(lv)) / Ps(lv)`.
    pub ps_ent: MeanSe,
    pub trials: usize,
}

/// Draws `trials` graphs from `family` and, for every budget in `ks`,
/// compares the three greedy placements by their analytic metrics.
pub fn compare_objectives(
    family: Family,
    ks: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<CompareRow>> {
    if trials == 0 || ks.is_empty() {
        return Err(Error::InvalidParameter("need at least one trial and one budget".into()));
    }
    let graphs = (0..trials)
        .map(|t| generate(&family.kind(mix(seed ^ mix(t as u64)))).map(|g| g.graph))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let per_graph = par::map(&graphs, |g| -> Result<[f64; 3]> {
            let lv = lv_obs(g, k, None)?.metrics;
            let dist = expected_distance_greedy_placement(g, k, DistanceMode::Weighted, None)?.metrics;
            let ent = entropy_greedy_placement(g, k, None)?.metrics;
            Ok([
                (dist.success_probability - lv.success_probability) / lv.success_probability,
                (dist.expected_distance_weighted - lv.expected_distance_weighted)
                    / (dist.expected_distance_weighted + 1.0),
                (ent.success_probability - lv.success_probability) / lv.success_probability,
            ])
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let column = |c: usize| MeanSe::of(&per_graph.iter().map(|r| r[c]).collect::<Vec<_>>());
        rows.push(CompareRow {
            family,
            k,
            ps_dist: column(0),
            ed_dist: column(1),
            ps_ent: column(2),
            trials,
        });
    }
    Ok(rows)
}
