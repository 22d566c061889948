use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sourceloc::epidemic::{observe_times, simulate, TransmissionModel};
use sourceloc::estimation::{gaussian_ml_estimate, zero_variance_estimate};
use sourceloc::graph::{generate, GraphKind};
use sourceloc::harness::{self, ExperimentConfig, Family};
use sourceloc::placement::{place, select_length_constraint, Algorithm, LengthConstraint};
use sourceloc::{par, Graph, NodeId, ObserverSet, Prior};

#[derive(Parser)]
#[command(name = "sourceloc", version, about = "Observer placement and epidemic source localization")]
struct Cli {
    /// Run everything on the current thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose observers.
    Place {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = parse_algorithm)]
        algo: Algorithm,
        #[arg(long)]
        k: usize,
        /// Length constraint for hv.
        #[arg(long = "L", conflicts_with = "l_grid")]
        l: Option<f64>,
        /// Candidate length constraints; the selection rule picks one.
        #[arg(long = "L-grid", value_delimiter = ',')]
        l_grid: Option<Vec<f64>>,
        /// File with seed node labels (whitespace or comma separated).
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one outbreak and dump infection times.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        source: String,
        /// `deterministic`, `gaussian:SIGMA` or `uniform:EPSILON`.
        #[arg(long, default_value = "deterministic")]
        model: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the source from observer infection times.
    Estimate {
        #[arg(long)]
        graph: PathBuf,
        /// Observer labels, or a `place` output file.
        #[arg(long)]
        observers: PathBuf,
        /// `label,time` lines; a `simulate` dump works.
        #[arg(long)]
        times: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long)]
        limit: Option<usize>,
        /// Defaults to `zero` when sigma is 0 and `ml` otherwise.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        prior: Option<PathBuf>,
        /// Seed for tie-breaking in zero mode.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a Monte-Carlo experiment and write CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-placement `sigma ps` files.
        #[arg(long)]
        plotdata: Option<PathBuf>,
    },
    /// Compare the low-variance greedy with the entropy and distance greedies.
    Compare {
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write a synthetic graph as an edge list.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Zero,
    Ml,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Cycle,
    Star,
    Rgg,
    Ba,
    Tree,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: sourceloc::Error| e.to_string())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_graph(path: &Path) -> Result<Graph> {
    Graph::from_path(path).with_context(|| format!("loading graph {}", path.display()))
}

fn labels_in(text: &str) -> Vec<&str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty() && !l.contains('='))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Labels after a `# observers` line, or every label when there is none.
fn read_observers(g: &Graph, path: &Path) -> Result<ObserverSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let body = match text.find("# observers") {
        Some(i) => &text[i + "# observers".len()..],
        None => &text[..],
    };
    let ids = labels_in(body)
        .into_iter()
        .map(|l| g.node_by_label(l))
        .collect::<sourceloc::Result<Vec<NodeId>>>()?;
    Ok(ObserverSet::new(ids)?)
}

/// Infection times from `label,time` or `label time` lines; unknown nodes
/// stay NaN.
fn read_times(g: &Graph, path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut times = vec![f64::NAN; g.node_count()];
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line == "node,infection_time" {
            continue;
        }
        let mut parts = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty());
        let (Some(label), Some(t), None) = (parts.next(), parts.next(), parts.next()) else {
            bail!("{}:{}: expected `label,time`", path.display(), i + 1);
        };
        let t: f64 = t
            .parse()
            .with_context(|| format!("{}:{}: bad time `{t}`", path.display(), i + 1))?;
        times[g.node_by_label(label)?] = t;
    }
    Ok(times)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Place {
            graph,
            algo,
            k,
            l,
            l_grid,
            seeds,
            out,
        } => {
            let g = load_graph(&graph)?;
            let seeds = match seeds {
                Some(p) => {
                    let text = fs::read_to_string(&p)?;
                    Some(
                        labels_in(&text)
                            .into_iter()
                            .map(|s| g.node_by_label(s))
                            .collect::<sourceloc::Result<Vec<_>>>()?,
                    )
                }
                None => None,
            };
            let length = match (l, l_grid) {
                (Some(l), _) => Some(LengthConstraint::new(&g, l)?),
                (None, Some(grid)) => {
                    let sel = select_length_constraint(&g, k, &grid)?;
                    for (l, c) in &sel.sweep {
                        log::info!("L = {l}: |P_L| = {c} (reference {})", sel.reference_coverage);
                    }
                    Some(sel.length)
                }
                (None, None) => None,
            };
            if length.is_some() && algo != Algorithm::Hv {
                bail!("--L and --L-grid apply to hv only");
            }
            let result = place(&g, algo, k, length, seeds.as_deref())?;
            output(out.as_deref())?.write_all(result.to_record(&g).as_bytes())?;
        }
        Command::Simulate {
            graph,
            source,
            model,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let model: TransmissionModel = model.parse()?;
            let trace = simulate(&g, model, g.node_by_label(&source)?, seed)?;
            let mut w = output(out.as_deref())?;
            trace.write(&g, &mut w)?;
            w.flush()?;
        }
        Command::Estimate {
            graph,
            observers,
            times,
            sigma,
            limit,
            mode,
            prior,
            seed,
        } => {
            let g = load_graph(&graph)?;
            let observers = read_observers(&g, &observers)?;
            let times = read_times(&g, &times)?;
            if let Some(o) = observers.iter().find(|&o| times[o].is_nan()) {
                bail!("no infection time for observer {}", g.label(o));
            }
            let obs = observe_times(&times, &observers, limit)?;
            let mode = mode.unwrap_or(if sigma == 0.0 { Mode::Zero } else { Mode::Ml });
            let result = match mode {
                Mode::Zero => {
                    let prior = match prior {
                        Some(p) => Prior::from_path(&g, p)?,
                        None => Prior::uniform(g.node_count()),
                    };
                    zero_variance_estimate(&g, &obs, &prior, &mut ChaCha8Rng::seed_from_u64(seed))?
                }
                Mode::Ml => gaussian_ml_estimate(&g, &obs, sigma, None)?,
            };
            let mut w = output(None)?;
            writeln!(w, "estimate = {}", g.label(result.estimate))?;
            let ties: Vec<&str> = result.tie_info.iter().map(|&u| g.label(u)).collect();
            writeln!(w, "ties = {}", ties.join(","))?;
            if result.no_exact_match {
                writeln!(w, "no_exact_match = true")?;
            }
            writeln!(w, "# top scores")?;
            for (u, s) in result.ranking().into_iter().take(10) {
                writeln!(w, "{} {}", g.label(u), s)?;
            }
        }
        Command::Experiment {
            config,
            out,
            plotdata,
        } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let rows = harness::run_experiment(&cfg)?;
            harness::write_csv(&rows, output(out.as_deref())?)?;
            if let Some(dir) = plotdata {
                fs::create_dir_all(&dir)?;
                for (tag, body) in harness::plot_data(&rows) {
                    let name: String = tag
                        .chars()
                        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
                        .collect();
                    fs::write(dir.join(format!("{name}.dat")), body)?;
                }
            }
        }
        Command::Compare {
            family,
            k,
            trials,
            seed,
        } => {
            let family: Family = family.parse()?;
            let rows = harness::compare_objectives(family, &k, trials, seed)?;
            let mut w = output(None)?;
            writeln!(w, "# {family}, {trials} graphs; mean relative difference (standard error)")?;
            writeln!(w, "k,ps_dist,ps_dist_se,ed_dist,ed_dist_se,ps_ent,ps_ent_se")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
                    r.k, r.ps_dist.mean, r.ps_dist.se, r.ed_dist.mean, r.ed_dist.se, r.ps_ent.mean, r.ps_ent.se
                )?;
            }
        }
        Command::Generate {
            kind,
            n,
            radius,
            m,
            seed,
            out,
        } => {
            let kind = match kind {
                Kind::Path => GraphKind::Path { n, weight: 1.0 },
                Kind::Cycle => GraphKind::Cycle { n, weight: 1.0 },
                Kind::Star => GraphKind::Star { n, weight: 1.0 },
                Kind::Rgg => GraphKind::RandomGeometric { n, radius, seed },
                Kind::Ba => GraphKind::BarabasiAlbert { n, m, seed },
                Kind::Tree => GraphKind::RandomTree { n, max_weight: 1, seed },
            };
            let generated = generate(&kind)?;
            if let Some(used) = generated.seed_used.filter(|&s| s != seed) {
                log::warn!("seed {seed} gave a disconnected graph; used seed {used}");
            }
            let mut w = output(out.as_deref())?;
            generated.graph.write_edge_list(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.sequential {
        par::set_parallel(false);
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
