//! SI epidemics with random transmission delays, simulated as first-passage
//! percolation: one delay is drawn per edge and infection times are the
//! shortest-path distances over the sampled delays.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::graph::{dijkstra, Graph, NodeId};
use crate::resolution::ObserverSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransmissionModel {
    /// Every delay equals the edge weight.
    Deterministic,
    /// Normal with mean `w` and standard deviation `sigma * w`, conditioned
    /// on `[w/2, 3w/2]`.
    TruncatedGaussian { sigma: f64 },
    /// Uniform on `[(1 - epsilon) w, (1 + epsilon) w]`.
    UniformFactor { epsilon: f64 },
}

impl TransmissionModel {
    pub fn validate(self) -> Result<Self> {
        match self {
            TransmissionModel::TruncatedGaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")))
            }
            TransmissionModel::UniformFactor { epsilon } if !(0.0..1.0).contains(&epsilon) => {
                Err(Error::InvalidParameter(format!("epsilon must be in [0, 1), got {epsilon}")))
            }
            m => Ok(m),
        }
    }

    /// True when every draw returns the mean.
    pub fn is_deterministic(self) -> bool {
        match self {
            TransmissionModel::Deterministic => true,
            TransmissionModel::TruncatedGaussian { sigma } => sigma == 0.0,
            TransmissionModel::UniformFactor { epsilon } => epsilon == 0.0,
        }
    }

    /// Relative standard deviation handed to the Gaussian estimator. The
    /// uniform model is matched by its variance, `epsilon / sqrt(3)`.
    pub fn estimator_sigma(self) -> f64 {
        match self {
            TransmissionModel::Deterministic => 0.0,
            TransmissionModel::TruncatedGaussian { sigma } => sigma,
            TransmissionModel::UniformFactor { epsilon } => epsilon / 3f64.sqrt(),
        }
    }
}

impl fmt::Display for TransmissionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransmissionModel::Deterministic => f.write_str("deterministic"),
            TransmissionModel::TruncatedGaussian { sigma } => write!(f, "gaussian:{sigma}"),
            TransmissionModel::UniformFactor { epsilon } => write!(f, "uniform:{epsilon}"),
        }
    }
}

/// Parses `deterministic`, `gaussian:SIGMA` or `uniform:EPSILON`.
impl FromStr for TransmissionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown transmission model `{s}`"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let value = || -> Result<f64> { arg.ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let model = match name {
            "deterministic" if arg.is_none() => TransmissionModel::Deterministic,
            "gaussian" => TransmissionModel::TruncatedGaussian { sigma: value()? },
            "uniform" => TransmissionModel::UniformFactor { epsilon: value()? },
            _ => return Err(bad()),
        };
        model.validate()
    }
}

/// Draws one transmission delay for an edge of weight `w`. Deterministic
/// and zero-noise models return `w` without touching `rng`.
pub fn sample_delay<R: Rng + ?Sized>(model: TransmissionModel, w: f64, rng: &mut R) -> f64 {
    if model.is_deterministic() {
        return w;
    }
    match model {
        TransmissionModel::Deterministic => w,
        TransmissionModel::TruncatedGaussian { sigma } => {
            let z = truncated_standard_normal(0.5 / sigma, rng);
            w * (1.0 + sigma * z)
        }
        TransmissionModel::UniformFactor { epsilon } => {
            w * rng.random_range(1.0 - epsilon..=1.0 + epsilon)
        }
    }
}

/// Standard normal conditioned on `[-bound, bound]`, by inversion.
fn truncated_standard_normal<R: Rng + ?Sized>(bound: f64, rng: &mut R) -> f64 {
    let normal = Normal::standard();
    let lo = normal.cdf(-bound);
    let hi = normal.cdf(bound);
    let u = lo + (hi - lo) * rng.random::<f64>();
    normal.inverse_cdf(u).clamp(-bound, bound)
}

/// Infection times of one outbreak.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicTrace {
    pub source: NodeId,
    pub start_time: f64,
    pub infection_time: Vec<f64>,
    pub rng_seed: u64,
    pub model: TransmissionModel,
}

/// Draws one delay per edge, in edge order.
pub fn sample_delays(g: &Graph, model: TransmissionModel, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    g.edges()
        .iter()
        .map(|e| sample_delay(model, e.weight, &mut rng))
        .collect()
}

/// Runs an outbreak from `source` starting at time 0.
pub fn simulate(
    g: &Graph,
    model: TransmissionModel,
    source: NodeId,
    seed: u64,
) -> Result<EpidemicTrace> {
    g.check_node(source)?;
    let model = model.validate()?;
    let infection_time = if model.is_deterministic() {
        g.distances().row(source).to_vec()
    } else {
        let delays = sample_delays(g, model, seed);
        dijkstra(g, source, |nb| delays[nb.edge])
    };
    Ok(EpidemicTrace {
        source,
        start_time: 0.0,
        infection_time,
        rng_seed: seed,
        model,
    })
}

impl EpidemicTrace {
    /// CSV dump with `# source=`, `# seed=` and `# model=` header lines.
    pub fn write<W: Write>(&self, g: &Graph, mut out: W) -> Result<()> {
        let io = |e| Error::io("<trace>", e);
        writeln!(out, "# source={}", g.label(self.source)).map_err(io)?;
        writeln!(out, "# seed={}", self.rng_seed).map_err(io)?;
        writeln!(out, "# model={}", self.model).map_err(io)?;
        writeln!(out, "node,infection_time").map_err(io)?;
        for (u, t) in self.infection_time.iter().enumerate() {
            writeln!(out, "{},{}", g.label(u), t).map_err(io)?;
        }
        Ok(())
    }

    /// Reads a dump produced by [`EpidemicTrace::write`].
    pub fn read<R: BufRead>(g: &Graph, reader: R) -> Result<Self> {
        let mut source = None;
        let mut seed = 0;
        let mut model = TransmissionModel::Deterministic;
        let mut times = vec![f64::NAN; g.node_count()];
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<trace>", e))?;
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let line = line.trim();
            if let Some(header) = line.strip_prefix('#') {
                let (key, value) = header
                    .split_once('=')
                    .ok_or_else(|| parse_err(format!("bad header `{line}`")))?;
                let value = value.trim();
                match key.trim() {
                    "source" => source = Some(g.node_by_label(value)?),
                    "seed" => {
                        seed = value
                            .parse()
                            .map_err(|_| parse_err(format!("bad seed `{value}`")))?
                    }
                    "model" => model = value.parse()?,
                    _ => {}
                }
                continue;
            }
            if line.is_empty() || line == "node,infection_time" {
                continue;
            }
            let (label, t) = line
                .split_once(',')
                .ok_or_else(|| parse_err(format!("expected `node,time`, got `{line}`")))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad time `{t}`")))?;
            times[g.node_by_label(label.trim())?] = t;
        }
        let source = source.ok_or(Error::Parse {
            line: 0,
            message: "missing `# source=` header".into(),
        })?;
        if let Some(u) = times.iter().position(|t| t.is_nan()) {
            return Err(Error::Parse {
                line: 0,
                message: format!("no infection time for node {}", g.label(u)),
            });
        }
        Ok(EpidemicTrace {
            source,
            start_time: times[source],
            infection_time: times,
            rng_seed: seed,
            model,
        })
    }
}

/// What the observers saw.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub observers: ObserverSet,
    /// Infection time of each observer, in observer order.
    pub times: Vec<f64>,
    /// `t_i - t_1` for the observers after the reference.
    pub tau: Vec<f64>,
}

impl Observation {
    pub fn new(observers: ObserverSet, times: Vec<f64>) -> Result<Self> {
        observers.require_pair()?;
        if times.len() != observers.len() {
            return Err(Error::InvalidParameter(format!(
                "{} times for {} observers",
                times.len(),
                observers.len()
            )));
        }
        let tau = times[1..].iter().map(|t| t - times[0]).collect();
        Ok(Observation {
            observers,
            times,
            tau,
        })
    }
}

/// Reads the observers' infection times off a trace. With `limit = Some(m)`
/// only the `m` earliest observers are kept (ties to the lower id).
pub fn observe(
    trace: &EpidemicTrace,
    observers: &ObserverSet,
    limit: Option<usize>,
) -> Result<Observation> {
    observe_times(&trace.infection_time, observers, limit)
}

/// [`observe`] on a bare vector of infection times indexed by node. Only the
/// observers' entries are read.
pub fn observe_times(
    infection_time: &[f64],
    observers: &ObserverSet,
    limit: Option<usize>,
) -> Result<Observation> {
    observers.require_pair()?;
    if let Some(&o) = observers.as_slice().last() {
        if o >= infection_time.len() {
            return Err(Error::NodeOutOfRange(o));
        }
    }
    let mut kept: Vec<NodeId> = observers.as_slice().to_vec();
    if let Some(m) = limit {
        if m < 2 {
            return Err(Error::TooFewObservers {
                required: 2,
                got: m,
            });
        }
        let t = infection_time;
        kept.sort_by(|&a, &b| t[a].total_cmp(&t[b]).then(a.cmp(&b)));
        kept.truncate(m);
    }
    let observers = ObserverSet::new(kept)?;
    let times = observers.iter().map(|o| infection_time[o]).collect();
    Observation::new(observers, times)
}
