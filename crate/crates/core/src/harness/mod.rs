//! Monte-Carlo experiment driver.
//!
//! Every node in turn is the source of `runs` outbreaks per noise level.
//! Each outbreak is shared by all placements under test, and every run's
//! seed is a hash of `(master_seed, source, level, run)`. Results do not
//! depend on scheduling.
//!
//! # Config format
//!
//! One `key = value` pair per line, `#` starts a comment:
//!
//! ```text
//! graph = network.txt          # edge list, relative to the config file
//! model = gaussian             # or `uniform`
//! levels = 0, 0.1, 0.2, 0.3    # sigma (gaussian) or epsilon (uniform)
//! runs = 5                     # outbreaks per source and level
//! limit = 20                   # optional: keep only the earliest m observers
//! seed = 1
//! prior = prior.txt            # optional, used by the zero-noise estimator
//! placement = lv 5
//! placement = hv 5 L=4.5
//! placement = hv 5 grid=2,4,6,8
//! placement = bc 5
//! placement = fixed a,b,c      # node labels
//! ```

mod compare;

pub use compare::{compare_objectives, CompareRow, Family, MeanSe};

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::epidemic::{observe, simulate, TransmissionModel};
use crate::error::{Error, Result};
use crate::estimation::{gaussian_ml_estimate, zero_variance_estimate};
use crate::graph::{Graph, NodeId};
use crate::par;
use crate::placement::{place, select_length_constraint, Algorithm, LengthConstraint};
use crate::resolution::{ObserverSet, Prior};

/// Noise levels used when a config gives none.
pub const DEFAULT_LEVELS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    Gaussian,
    Uniform,
}

impl ModelFamily {
    pub fn model(self, level: f64) -> TransmissionModel {
        match self {
            ModelFamily::Gaussian => TransmissionModel::TruncatedGaussian { sigma: level },
            ModelFamily::Uniform => TransmissionModel::UniformFactor { epsilon: level },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LengthSpec {
    Diameter,
    Value(f64),
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlacementSpec {
    Algorithm {
        algorithm: Algorithm,
        k: usize,
        length: LengthSpec,
    },
    /// Observers given by label.
    Fixed(Vec<String>),
}

impl PlacementSpec {
    fn tag(&self) -> String {
        match self {
            PlacementSpec::Algorithm {
                algorithm, k, length,
            } => match length {
                LengthSpec::Diameter => format!("{algorithm}-{k}"),
                LengthSpec::Value(l) => format!("{algorithm}-{k}-L{l}"),
                LengthSpec::Grid(_) => format!("{algorithm}-{k}-Lgrid"),
            },
            PlacementSpec::Fixed(labels) => format!("fixed-{}", labels.len()),
        }
    }

    fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("placement `{text}`: {m}"));
        let mut parts = text.split_whitespace();
        let head = parts.next().ok_or_else(|| bad("empty"))?;
        if head == "fixed" {
            let labels: Vec<String> = parts
                .flat_map(|p| p.split(','))
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if labels.is_empty() {
                return Err(bad("no observers listed"));
            }
            return Ok(PlacementSpec::Fixed(labels));
        }
        let algorithm: Algorithm = head.parse().map_err(|e: Error| bad(&e.to_string()))?;
        let k = parts
            .next()
            .ok_or_else(|| bad("missing budget"))?
            .parse()
            .map_err(|_| bad("budget is not an integer"))?;
        let mut length = LengthSpec::Diameter;
        for opt in parts {
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
            if let Some(v) = opt.strip_prefix("L=") {
                length = LengthSpec::Value(num(v)?);
            } else if let Some(v) = opt.strip_prefix("grid=") {
                let grid = v.split(',').map(num).collect::<Result<Vec<_>>>()?;
                length = LengthSpec::Grid(grid);
            } else {
                return Err(bad(&format!("unknown option `{opt}`")));
            }
        }
        if length != LengthSpec::Diameter && algorithm != Algorithm::Hv {
            return Err(bad("only hv takes a length constraint"));
        }
        Ok(PlacementSpec::Algorithm {
            algorithm,
            k,
            length,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph_path: PathBuf,
    pub placements: Vec<PlacementSpec>,
    pub family: ModelFamily,
    pub levels: Vec<f64>,
    pub runs: usize,
    pub limit: Option<usize>,
    pub master_seed: u64,
    pub prior_path: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses the config text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut graph_path = None;
        let mut placements = Vec::new();
        let mut family = ModelFamily::Gaussian;
        let mut levels = DEFAULT_LEVELS.to_vec();
        let mut runs = 1;
        let mut limit = None;
        let mut master_seed = 0;
        let mut prior_path = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::Config(format!("line {}: {m}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| v.parse::<u64>().map_err(|_| err(format!("`{key}` wants an integer")));
            match key {
                "graph" => graph_path = Some(base.join(value)),
                "prior" => prior_path = Some(base.join(value)),
                "placement" => placements.push(PlacementSpec::parse(value)?),
                "model" => {
                    family = match value {
                        "gaussian" => ModelFamily::Gaussian,
                        "uniform" => ModelFamily::Uniform,
                        _ => return Err(err(format!("unknown model `{value}`"))),
                    }
                }
                "levels" | "sigma" => {
                    levels = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(format!("bad level list `{value}`")))?
                }
                "runs" => runs = int(value)? as usize,
                "limit" => limit = Some(int(value)? as usize),
                "seed" => master_seed = int(value)?,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        let cfg = ExperimentConfig {
            graph_path: graph_path.ok_or_else(|| Error::Config("missing `graph`".into()))?,
            placements,
            family,
            levels,
            runs,
            limit,
            master_seed,
            prior_path,
        };
        cfg.protocol().validate()?;
        if cfg.placements.is_empty() {
            return Err(Error::Config("no `placement` lines".into()));
        }
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            family: self.family,
            levels: self.levels.clone(),
            runs: self.runs,
            limit: self.limit,
            master_seed: self.master_seed,
        }
    }
}

/// Simulation settings shared by every placement.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub family: ModelFamily,
    pub levels: Vec<f64>,
    pub runs: usize,
    pub limit: Option<usize>,
    pub master_seed: u64,
}

impl Protocol {
    fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Config("empty level grid".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("levels must be strictly ascending".into()));
        }
        for &l in &self.levels {
            self.family.model(l).validate()?;
        }
        if let Some(m) = self.limit {
            if m < 2 {
                return Err(Error::Config("limit must be at least 2".into()));
            }
        }
        Ok(())
    }
}

/// A named observer set under test.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedObservers {
    pub tag: String,
    pub observers: ObserverSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub placement: String,
    pub sigma: f64,
    pub ps: f64,
    pub ps_se: f64,
    pub ed_hops: f64,
    pub ed_weighted: f64,
    pub runs: u64,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one outbreak.
pub fn run_seed(master: u64, source: NodeId, level: usize, run: usize) -> u64 {
    [source as u64, level as u64, run as u64]
        .into_iter()
        .fold(mix(master), |h, x| mix(h ^ x))
}

/// Computes the observer sets named by `specs`.
pub fn prepare_placements(g: &Graph, specs: &[PlacementSpec]) -> Result<Vec<PlacedObservers>> {
    let mut out: Vec<PlacedObservers> = Vec::with_capacity(specs.len());
    for spec in specs {
        let observers = match spec {
            PlacementSpec::Fixed(labels) => {
                let ids = labels
                    .iter()
                    .map(|l| g.node_by_label(l))
                    .collect::<Result<Vec<_>>>()?;
                ObserverSet::new(ids)?
            }
            PlacementSpec::Algorithm {
                algorithm,
                k,
                length,
            } => {
                let length = match length {
                    LengthSpec::Diameter => None,
                    LengthSpec::Value(l) => Some(LengthConstraint::new(g, *l)?),
                    LengthSpec::Grid(grid) => {
                        let sel = select_length_constraint(g, *k, grid)?;
                        log::info!("{}: selected L = {}", spec.tag(), sel.length.value());
                        Some(sel.length)
                    }
                };
                place(g, *algorithm, *k, length, None)?.observers
            }
        };
        let mut tag = spec.tag();
        let base = tag.clone();
        let mut copy = 1;
        while out.iter().any(|p| p.tag == tag) {
            copy += 1;
            tag = format!("{base}#{copy}");
        }
        out.push(PlacedObservers { tag, observers });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    hit: bool,
    hops: u32,
    weighted: f64,
}

/// Runs the protocol on `g` for every placement. Rows are sorted by
/// placement tag, then level.
pub fn run_on_graph(
    g: &Graph,
    prior: &Prior,
    placements: &[PlacedObservers],
    protocol: &Protocol,
) -> Result<Vec<MetricsRow>> {
    protocol.validate()?;
    if placements.is_empty() {
        return Err(Error::Config("no placements".into()));
    }
    for p in placements {
        for o in p.observers.iter() {
            g.check_node(o)?;
        }
        p.observers.require_pair()?;
    }
    let n = g.node_count();
    let dm = g.distances();
    let jobs: Vec<(usize, NodeId, usize)> = (0..protocol.levels.len())
        .flat_map(|l| (0..n).flat_map(move |s| (0..protocol.runs).map(move |r| (l, s, r))))
        .collect();
    let outcomes: Vec<Result<Vec<Outcome>>> = par::map(&jobs, |&(l, s, r)| {
        let model = protocol.family.model(protocol.levels[l]);
        let seed = run_seed(protocol.master_seed, s, l, r);
        let trace = simulate(g, model, s, seed)?;
        placements
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let obs = observe(&trace, &p.observers, protocol.limit)?;
                let estimate = if model.is_deterministic() {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ i as u64));
                    zero_variance_estimate(g, &obs, prior, &mut rng)?.estimate
                } else {
                    gaussian_ml_estimate(g, &obs, model.estimator_sigma(), None)?.estimate
                };
                Ok(Outcome {
                    hit: estimate == s,
                    hops: dm.hops(s, estimate),
                    weighted: dm.distance(s, estimate),
                })
            })
            .collect()
    });
    let levels = protocol.levels.len();
    let mut hits = vec![0u64; placements.len() * levels];
    let mut hops = vec![0u64; placements.len() * levels];
    let mut weighted = vec![0.0f64; placements.len() * levels];
    for (&(l, _, _), outcome) in jobs.iter().zip(outcomes) {
        for (i, o) in outcome?.into_iter().enumerate() {
            let cell = i * levels + l;
            hits[cell] += o.hit as u64;
            hops[cell] += o.hops as u64;
            weighted[cell] += o.weighted;
        }
    }
    let total = (n * protocol.runs) as u64;
    let mut rows = Vec::with_capacity(hits.len());
    for (i, p) in placements.iter().enumerate() {
        for (l, &level) in protocol.levels.iter().enumerate() {
            let cell = i * levels + l;
            let ps = hits[cell] as f64 / total as f64;
            rows.push(MetricsRow {
                placement: p.tag.clone(),
                sigma: level,
                ps,
                ps_se: (ps * (1.0 - ps) / total as f64).sqrt(),
                ed_hops: hops[cell] as f64 / total as f64,
                ed_weighted: weighted[cell] / total as f64,
                runs: total,
            });
        }
    }
    rows.sort_by(|a, b| a.placement.cmp(&b.placement).then(a.sigma.total_cmp(&b.sigma)));
    Ok(rows)
}

/// Loads the graph and prior, computes the placements and runs them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    let g = Graph::from_path(&cfg.graph_path)?;
    let prior = match &cfg.prior_path {
        Some(p) => Prior::from_path(&g, p)?,
        None => Prior::uniform(g.node_count()),
    };
    let placements = prepare_placements(&g, &cfg.placements)?;
    run_on_graph(&g, &prior, &placements, &cfg.protocol())
}

pub fn write_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn emit_csv(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// One `sigma ps` table per placement, in row order.
pub fn plot_data(rows: &[MetricsRow]) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for row in rows {
        if out.last().is_none_or(|(tag, _)| *tag != row.placement) {
            out.push((row.placement.clone(), String::new()));
        }
        let body = &mut out.last_mut().expect("just pushed").1;
        body.push_str(&format!("{} {}\n", row.sigma, row.ps));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};
    use crate::placement::lv_obs;
    use crate::resolution::{partition, success_probability};

    fn gen(kind: GraphKind) -> Graph {
        generate(&kind).unwrap().graph
    }

    fn protocol(levels: Vec<f64>, runs: usize) -> Protocol {
        Protocol {
            family: ModelFamily::Gaussian,
            levels,
            runs,
            limit: None,
            master_seed: 3,
        }
    }

    #[test]
    fn config_parsing() {
        let text = "graph = g.txt\nmodel = uniform\nlevels = 0, 0.1\nruns = 4\nlimit = 3\nseed = 9 # master\n\
                    placement = lv 3\nplacement = hv 3 L=2.5\nplacement = hv 2 grid=1,2\nplacement = fixed a,b\n";
        let cfg = ExperimentConfig::parse(text, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.graph_path, PathBuf::from("/tmp/g.txt"));
        assert_eq!(cfg.family, ModelFamily::Uniform);
        assert_eq!(cfg.levels, vec![0.0, 0.1]);
        assert_eq!((cfg.runs, cfg.limit, cfg.master_seed), (4, Some(3), 9));
        assert_eq!(cfg.placements.len(), 4);
        assert_eq!(cfg.placements[1], PlacementSpec::Algorithm { algorithm: Algorithm::Hv, k: 3, length: LengthSpec::Value(2.5) });
        assert_eq!(cfg.placements[3], PlacementSpec::Fixed(vec!["a".into(), "b".into()]));

        for bad in [
            "placement = lv 3\n",
            "graph = g\nplacement = lv x\n",
            "graph = g\nplacement = bc 3 L=2\n",
            "graph = g\nplacement = lv 3\nruns = 0\n",
            "graph = g\nplacement = lv 3\nlevels = 0.2, 0.1\n",
            "graph = g\nplacement = lv 3\nmodel = uniform\nlevels = 0, 1.5\n",
            "graph = g\nplacement = lv 3\ncolour = red\n",
            "graph = g\n",
        ] {
            assert!(ExperimentConfig::parse(bad, Path::new(".")).is_err(), "{bad}");
        }
    }

    #[test]
    fn zero_noise_matches_analytic_success() {
        let g = gen(GraphKind::RandomGeometric { n: 30, radius: 0.3, seed: 8 });
        let prior = Prior::uniform(30);
        let placements = vec![
            PlacedObservers { tag: "a".into(), observers: ObserverSet::new(vec![0, 4]).unwrap() },
            PlacedObservers { tag: "b".into(), observers: ObserverSet::new(vec![2, 11, 17]).unwrap() },
            PlacedObservers { tag: "drs".into(), observers: lv_obs(&g, 30, None).unwrap().observers },
        ];
        let rows = run_on_graph(&g, &prior, &placements, &protocol(vec![0.0], 40)).unwrap();
        for (row, p) in rows.iter().zip(&placements) {
            let exact = success_probability(&partition(&g, &p.observers), &prior);
            assert!((row.ps - exact).abs() <= 3.0 * row.ps_se + 1e-12, "{row:?} vs {exact}");
            assert_eq!(row.runs, 1200);
        }
        assert_eq!(rows[2].ps, 1.0);
        assert_eq!((rows[2].ed_hops, rows[2].ed_weighted), (0.0, 0.0));
    }

    #[test]
    fn path_success_decays_with_noise() {
        let levels: Vec<f64> = DEFAULT_LEVELS.to_vec();
        let mut at_03 = Vec::new();
        for len in [5usize, 20] {
            let g = gen(GraphKind::Path { n: len + 1, weight: 1.0 });
            let p = vec![PlacedObservers { tag: "ends".into(), observers: ObserverSet::new(vec![0, len]).unwrap() }];
            let rows = run_on_graph(&g, &Prior::uniform(len + 1), &p, &protocol(levels.clone(), 2000 / (len + 1) + 1))
                .unwrap();
            assert_eq!(rows[0].ps, 1.0);
            for w in rows.windows(2) {
                assert!(w[1].ps <= w[0].ps + 2.0 * (w[0].ps_se + w[1].ps_se), "{rows:?}");
            }
            at_03.push(rows[3].ps);
        }
        assert!(at_03[0] > at_03[1], "{at_03:?}");
    }

    #[test]
    fn deterministic_under_both_schedules() {
        let g = gen(GraphKind::BarabasiAlbert { n: 25, m: 2, seed: 2 });
        let placements = prepare_placements(
            &g,
            &[
                PlacementSpec::Algorithm { algorithm: Algorithm::Lv, k: 3, length: LengthSpec::Diameter },
                PlacementSpec::Algorithm { algorithm: Algorithm::Lv, k: 3, length: LengthSpec::Diameter },
                PlacementSpec::Algorithm { algorithm: Algorithm::Hv, k: 3, length: LengthSpec::Grid(vec![1.0, 2.0, 3.0]) },
            ],
        )
        .unwrap();
        assert_eq!(placements[1].tag, "lv-3#2");
        let mut proto = protocol(vec![0.0, 0.2], 2);
        proto.limit = Some(2);
        let mut a = Vec::new();
        write_csv(&run_on_graph(&g, &Prior::uniform(25), &placements, &proto).unwrap(), &mut a).unwrap();
        par::set_parallel(false);
        let mut b = Vec::new();
        write_csv(&run_on_graph(&g, &Prior::uniform(25), &placements, &proto).unwrap(), &mut b).unwrap();
        par::set_parallel(true);
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            MetricsRow { placement: "lv-3".into(), sigma: 0.1, ps: 1.0 / 3.0, ps_se: 0.1, ed_hops: 0.7, ed_weighted: 1e-17, runs: 30 },
            MetricsRow { placement: "fixed, odd".into(), sigma: 0.0, ps: 0.0, ps_se: 0.0, ed_hops: 2.0, ed_weighted: 2.5, runs: 1 },
        ];
        let mut buf = Vec::new();
        write_csv(&rows[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("placement,sigma,ps,ps_se,ed_hops,ed_weighted,runs\n"));
        assert!(!text.contains('\r'));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), rows);
        assert!(matches!(write_csv(&[], Vec::new()), Err(Error::EmptyRows)));
    }

    #[test]
    fn plot_tables() {
        let row = |p: &str, s: f64, ps: f64| MetricsRow { placement: p.into(), sigma: s, ps, ps_se: 0.0, ed_hops: 0.0, ed_weighted: 0.0, runs: 1 };
        let t = plot_data(&[row("a", 0.0, 1.0), row("a", 0.1, 0.5), row("b", 0.0, 0.25)]);
        assert_eq!(t, vec![("a".into(), "0 1\n0.1 0.5\n".into()), ("b".into(), "0 0.25\n".into())]);
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for s in 0..20 {
            for l in 0..6 {
                for r in 0..20 {
                    assert!(seen.insert(run_seed(1, s, l, r)));
                }
            }
        }
    }
}
