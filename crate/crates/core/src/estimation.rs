//! Source estimators.
//!
//! [`zero_variance_estimate`] matches the observed delay differences against
//! every node's distance vector. [`gaussian_ml_estimate`] scores each
//! candidate with a Gaussian likelihood whose covariance comes from the
//! candidate's shortest-path tree.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::epidemic::Observation;
use crate::error::{Error, Result};
use crate::graph::{shortest_path_tree, Graph, NodeId, ShortestPathTree, LENGTH_TOLERANCE};
use crate::par;
use crate::resolution::{resolution_gap, ObserverSet, Prior};

/// Relative score difference below which two candidates tie.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-9;

/// Relative ridge added to every covariance diagonal.
pub const RIDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    ZeroVariance,
    GaussianMl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub estimate: NodeId,
    /// Score per candidate, in candidate order. Higher is better. The
    /// zero-variance estimator scores by minus the sup-norm mismatch.
    pub score_table: Vec<(NodeId, f64)>,
    pub mode: EstimatorMode,
    /// Every candidate sharing the best score.
    pub tie_info: Vec<NodeId>,
    /// Zero-variance mode only: no distance vector was within tolerance and
    /// the nearest one was used.
    pub no_exact_match: bool,
}

impl EstimateResult {
    /// Candidates by decreasing score, ties to the lower id.
    pub fn ranking(&self) -> Vec<(NodeId, f64)> {
        let mut r = self.score_table.clone();
        r.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        r
    }
}

fn candidate_list(g: &Graph, candidates: Option<&[NodeId]>) -> Result<Vec<NodeId>> {
    match candidates {
        None => Ok((0..g.node_count()).collect()),
        Some([]) => Err(Error::InvalidParameter("empty candidate set".into())),
        Some(c) => {
            for &u in c {
                g.check_node(u)?;
            }
            let mut c = c.to_vec();
            c.sort_unstable();
            c.dedup();
            Ok(c)
        }
    }
}

fn check_observation(g: &Graph, obs: &Observation) -> Result<()> {
    obs.observers.require_pair()?;
    for o in obs.observers.iter() {
        g.check_node(o)?;
    }
    if obs.tau.len() + 1 != obs.observers.len() {
        return Err(Error::InvalidParameter("tau length does not match observers".into()));
    }
    Ok(())
}

/// Nearest-distance-vector estimator. Candidates whose distance vector is
/// closest to `tau` in sup norm form the matched class; the estimate is
/// drawn from `prior` restricted to it. A match is exact when the mismatch
/// is below rounding noise (integer weights) or below half the resolution
/// gap (real weights); otherwise `no_exact_match` is set.
pub fn zero_variance_estimate<R: Rng + ?Sized>(
    g: &Graph,
    obs: &Observation,
    prior: &Prior,
    rng: &mut R,
) -> Result<EstimateResult> {
    zero_variance_over(g, obs, prior, None, rng)
}

fn zero_variance_over<R: Rng + ?Sized>(
    g: &Graph,
    obs: &Observation,
    prior: &Prior,
    candidates: Option<&[NodeId]>,
    rng: &mut R,
) -> Result<EstimateResult> {
    check_observation(g, obs)?;
    if prior.as_slice().len() != g.node_count() {
        return Err(Error::InvalidParameter("prior size does not match graph".into()));
    }
    let candidates = candidate_list(g, candidates)?;
    let dm = g.distances();
    let o = obs.observers.as_slice();
    let score_table: Vec<(NodeId, f64)> = candidates
        .iter()
        .map(|&s| {
            let row = dm.row(s);
            let mismatch = o[1..]
                .iter()
                .zip(&obs.tau)
                .map(|(&oi, &t)| (row[oi] - row[o[0]] - t).abs())
                .fold(0.0, f64::max);
            (s, -mismatch)
        })
        .collect();
    let best = score_table.iter().map(|x| -x.1).fold(f64::INFINITY, f64::min);
    let scale = obs.tau.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    let noise = LENGTH_TOLERANCE * scale;
    let tie_info: Vec<NodeId> = score_table
        .iter()
        .filter(|x| -x.1 <= best + noise)
        .map(|x| x.0)
        .collect();
    let tolerance = if g.has_integral_weights() {
        noise
    } else {
        resolution_gap(g, &obs.observers)
            .map(|gap| gap.delta / 2.0)
            .unwrap_or(noise)
    };
    let estimate = draw_from_prior(prior, &tie_info, rng);
    Ok(EstimateResult {
        estimate,
        score_table,
        mode: EstimatorMode::ZeroVariance,
        tie_info,
        no_exact_match: best > tolerance,
    })
}

/// Samples one of `class` in proportion to the prior, uniformly when the
/// class carries no prior mass.
fn draw_from_prior<R: Rng + ?Sized>(prior: &Prior, class: &[NodeId], rng: &mut R) -> NodeId {
    if class.len() == 1 {
        return class[0];
    }
    let mass = prior.mass(class);
    if mass <= 0.0 {
        return class[rng.random_range(0..class.len())];
    }
    let mut r = rng.random::<f64>() * mass;
    for &u in class {
        r -= prior.probability(u);
        if r < 0.0 {
            return u;
        }
    }
    *class
        .iter()
        .rev()
        .find(|&&u| prior.probability(u) > 0.0)
        .expect("positive mass")
}

/// Covariance of the observed delay differences, `(k-1) x (k-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(pub DMatrix<f64>);

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

/// Tree with squared-weight depths and LCA queries.
struct WeightedTree<'t> {
    tree: &'t ShortestPathTree,
    /// Sum of squared weights from the root.
    w2: Vec<f64>,
}

impl<'t> WeightedTree<'t> {
    fn new(g: &Graph, tree: &'t ShortestPathTree) -> Self {
        let n = tree.parent.len();
        let max_depth = tree.depth.iter().copied().max().unwrap_or(0);
        let mut by_depth: Vec<Vec<NodeId>> = vec![Vec::new(); max_depth + 1];
        for v in 0..n {
            by_depth[tree.depth[v]].push(v);
        }
        let mut w2 = vec![0.0; n];
        for level in by_depth.iter().skip(1) {
            for &v in level {
                let p = tree.parent[v];
                let w = g.weight(p, v).expect("tree edge");
                w2[v] = w2[p] + w * w;
            }
        }
        WeightedTree { tree, w2 }
    }

    fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        let (parent, depth) = (&self.tree.parent, &self.tree.depth);
        while depth[a] > depth[b] {
            a = parent[a];
        }
        while depth[b] > depth[a] {
            b = parent[b];
        }
        while a != b {
            a = parent[a];
            b = parent[b];
        }
        a
    }

    /// Squared-weight length of the tree path between `a` and `b`.
    fn path_w2(&self, a: NodeId, b: NodeId) -> f64 {
        let c = self.lca(a, b);
        self.w2[a] + self.w2[b] - 2.0 * self.w2[c]
    }

    /// The node where the tree paths between `a`, `b` and `c` meet.
    fn median(&self, a: NodeId, b: NodeId, c: NodeId) -> NodeId {
        let depth = &self.tree.depth;
        [self.lca(a, b), self.lca(a, c), self.lca(b, c)]
            .into_iter()
            .max_by_key(|&x| depth[x])
            .expect("three candidates")
    }
}

fn covariance_unchecked(
    g: &Graph,
    tree: &ShortestPathTree,
    observers: &[NodeId],
    sigma: f64,
) -> DMatrix<f64> {
    let t = WeightedTree::new(g, tree);
    let o1 = observers[0];
    let rest = &observers[1..];
    let var = sigma * sigma;
    DMatrix::from_fn(rest.len(), rest.len(), |i, j| {
        if i == j {
            var * t.path_w2(o1, rest[i])
        } else {
            var * t.path_w2(o1, t.median(o1, rest[i], rest[j]))
        }
    })
}

/// Entry `(i, j)` is `sigma^2` times the summed squared weights of the
/// edges shared by the tree paths `o_1 -> o_{i+2}` and `o_1 -> o_{j+2}`.
pub fn covariance_matrix(
    g: &Graph,
    tree: &ShortestPathTree,
    observers: &ObserverSet,
    sigma: f64,
) -> Result<CovarianceMatrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    observers.require_pair()?;
    if tree.parent.len() != g.node_count() {
        return Err(Error::InvalidParameter("tree does not span the graph".into()));
    }
    for o in observers.iter() {
        g.check_node(o)?;
    }
    Ok(CovarianceMatrix(covariance_unchecked(
        g,
        tree,
        observers.as_slice(),
        sigma,
    )))
}

/// `-1/2 r' L^-1 r - 1/2 log det L` after adding the ridge.
fn gaussian_log_score(mut lambda: DMatrix<f64>, residual: DVector<f64>) -> f64 {
    let max_diag = lambda.diagonal().iter().fold(0.0f64, |m, &x| m.max(x));
    let mut ridge = RIDGE * max_diag.max(f64::MIN_POSITIVE);
    for i in 0..lambda.nrows() {
        lambda[(i, i)] += ridge;
    }
    loop {
        if let Some(chol) = lambda.clone().cholesky() {
            let l = chol.l();
            let log_det: f64 = 2.0 * l.diagonal().iter().map(|x| x.ln()).sum::<f64>();
            let quad = residual.dot(&chol.solve(&residual));
            return -0.5 * quad - 0.5 * log_det;
        }
        // rounding left the matrix indefinite: lift the diagonal further
        for i in 0..lambda.nrows() {
            lambda[(i, i)] += ridge * 9.0;
        }
        ridge *= 10.0;
    }
}

/// Approximate maximum-likelihood estimate. Each candidate `s` is scored
/// with mean `d(s, o_i) - d(s, o_1)` and the covariance built on the
/// shortest-path tree rooted at `s`. With `sigma = 0` this falls back to
/// [`zero_variance_estimate`] under a uniform prior.
pub fn gaussian_ml_estimate(
    g: &Graph,
    obs: &Observation,
    sigma: f64,
    candidates: Option<&[NodeId]>,
) -> Result<EstimateResult> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        return zero_variance_over(
            g,
            obs,
            &Prior::uniform(g.node_count()),
            candidates,
            &mut rng,
        );
    }
    check_observation(g, obs)?;
    let candidates = candidate_list(g, candidates)?;
    let dm = g.distances();
    let o = obs.observers.as_slice();
    let tau = DVector::from_column_slice(&obs.tau);
    let scores = par::map(&candidates, |&s| {
        let tree = shortest_path_tree(g, s);
        let lambda = covariance_unchecked(g, &tree, o, sigma);
        let row = dm.row(s);
        let mu = DVector::from_iterator(o.len() - 1, o[1..].iter().map(|&oi| row[oi] - row[o[0]]));
        gaussian_log_score(lambda, &tau - mu)
    });
    let score_table: Vec<(NodeId, f64)> = candidates.into_iter().zip(scores).collect();
    let best = score_table.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let tol = SCORE_TIE_TOLERANCE * best.abs().max(1.0);
    let tie_info: Vec<NodeId> = score_table
        .iter()
        .filter(|x| x.1 >= best - tol)
        .map(|x| x.0)
        .collect();
    Ok(EstimateResult {
        estimate: tie_info[0],
        score_table,
        mode: EstimatorMode::GaussianMl,
        tie_info,
        no_exact_match: false,
    })
}
