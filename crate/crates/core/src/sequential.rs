//! Sequential lateration: classical scaling of a seed clique, then classical
//! lateration of every other node against all of its already-placed neighbors.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedders::{classical_lateration, classical_scaling};
use crate::error::{invalid, Error, Result};
use crate::geometry::{embedding_error, shape_stats, sq_dist, Configuration};
use crate::graph::{for_each_clique, greedy_seed_cliques, CliqueStrategy, DissimilarityGraph, LaterativeOrdering};
use crate::stress::s_stress;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaterationOptions {
    pub clique: CliqueStrategy,
    /// Seed for sampling candidate seed cliques in the 'best' variant.
    pub seed: u64,
}

/// How a node received its coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Embedded together with the seed clique by classical scaling.
    Seed,
    /// Laterated at position `step` of the ordering.
    Laterated { step: usize },
}

#[derive(Clone, Debug)]
pub struct EmbeddingResult {
    pub config: Configuration,
    pub ordering: LaterativeOrdering,
    /// Indexed by node id.
    pub provenance: Vec<Provenance>,
    /// s-stress of `config` on the input graph.
    pub stress: f64,
    /// Seconds spent in the embedding call.
    pub wall_time: f64,
}

impl EmbeddingResult {
    pub fn seed_count(&self) -> usize {
        self.provenance.iter().filter(|p| **p == Provenance::Seed).count()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.config.write_csv(writer)
    }

    /// Diagnostics sidecar: stress, provenance counts, timing and, when
    /// known, the empirical accuracy ratio.
    pub fn diagnostics_json(&self, ratio: Option<f64>) -> serde_json::Value {
        let seeds = self.seed_count();
        serde_json::json!({
            "n": self.config.len(),
            "p": self.config.dim(),
            "stress": self.stress,
            "seed_nodes": seeds,
            "laterated_nodes": self.config.len() - seeds,
            "seed_clique": self.ordering.seed_clique(),
            "wall_time_s": self.wall_time,
            "ratio": ratio,
        })
    }
}

/// Stress, sorted seed tuple and embedding of one candidate seed, or why its walk failed.
type SeedOutcome = std::result::Result<(f64, Vec<usize>, Walked), WalkFailure>;

enum WalkFailure {
    Stalled,
    Degenerate { placed: usize },
}

/// Places `seed` by classical scaling and walks the frontier, most placed
/// neighbors first (ties: smaller id). A node whose landmarks are degenerate
/// is retried once it gains another placed neighbor.
fn walk(graph: &DissimilarityGraph, p: usize, seed: &[usize]) -> Result<std::result::Result<Walked, WalkFailure>> {
    let n = graph.node_count();
    let m = seed.len();
    let d2 = DMatrix::from_fn(m, m, |a, b| {
        if a == b {
            0.0
        } else {
            graph.d2(seed[a], seed[b]).expect("seed is a clique")
        }
    });
    let scaled = classical_scaling(&d2, p)?;

    let mut coords = vec![0.0; n * p];
    let mut placed = vec![false; n];
    let mut count = vec![0usize; n];
    let mut tried_at = vec![0usize; n];
    let mut provenance = vec![Provenance::Seed; n];
    let mut order = Vec::with_capacity(n);
    let mut landmarks = Vec::with_capacity(n - m);
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = BinaryHeap::new();

    let mut mark_placed = |v: usize, placed: &mut [bool], heap: &mut BinaryHeap<_>| {
        placed[v] = true;
        for u in graph.neighbor_ids(v) {
            if !placed[u] {
                count[u] += 1;
                if count[u] > p {
                    heap.push((count[u], Reverse(u)));
                }
            }
        }
    };
    for (a, &v) in seed.iter().enumerate() {
        coords[v * p..(v + 1) * p].copy_from_slice(scaled.config.point(a));
        order.push(v);
        mark_placed(v, &mut placed, &mut heap);
    }

    let mut deferred = 0usize;
    while let Some((c, Reverse(u))) = heap.pop() {
        if placed[u] || c <= tried_at[u] {
            continue;
        }
        let lm: Vec<usize> = graph.neighbor_ids(u).filter(|&w| placed[w]).collect();
        let mut pts = Vec::with_capacity(lm.len() * p);
        let mut dists = Vec::with_capacity(lm.len());
        for &w in &lm {
            pts.extend_from_slice(&coords[w * p..(w + 1) * p]);
            dists.push(graph.d2(u, w).expect("landmark is a neighbor"));
        }
        let lm_config = Configuration::new(lm.len(), p, pts)?;
        match classical_lateration(&lm_config, &dists) {
            Ok(z) => {
                if tried_at[u] > 0 {
                    deferred -= 1;
                }
                coords[u * p..(u + 1) * p].copy_from_slice(&z);
                provenance[u] = Provenance::Laterated { step: order.len() };
                order.push(u);
                landmarks.push(lm);
                mark_placed(u, &mut placed, &mut heap);
            }
            Err(Error::DegenerateLandmarks(_)) => {
                if tried_at[u] == 0 {
                    deferred += 1;
                }
                tried_at[u] = c;
            }
            Err(e) => return Err(e),
        }
    }
    if order.len() < n {
        return Ok(Err(if deferred > 0 {
            WalkFailure::Degenerate { placed: order.len() }
        } else {
            WalkFailure::Stalled
        }));
    }
    Ok(Ok(Walked {
        config: Configuration::new(n, p, coords)?,
        ordering: LaterativeOrdering {
            order,
            seed_size: m,
            landmarks,
        },
        provenance,
    }))
}

struct Walked {
    config: Configuration,
    ordering: LaterativeOrdering,
    provenance: Vec<Provenance>,
}

fn check_dims(graph: &DissimilarityGraph, p: usize) -> Result<()> {
    if p == 0 {
        return invalid("dimension p must be at least 1");
    }
    if graph.node_count() < p + 1 {
        return invalid(format!(
            "embedding in R^{p} needs at least {} nodes, got {}",
            p + 1,
            graph.node_count()
        ));
    }
    Ok(())
}

fn finish(graph: &DissimilarityGraph, w: Walked, started: Instant) -> Result<EmbeddingResult> {
    let stress = s_stress(&w.config, graph)?;
    Ok(EmbeddingResult {
        config: w.config,
        ordering: w.ordering,
        provenance: w.provenance,
        stress,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

fn failure_error(degenerate_at: Option<usize>) -> Error {
    match degenerate_at {
        Some(step) => Error::DegenerateStep { step },
        None => Error::NotLaterable,
    }
}

/// Sequential lateration from one given seed clique.
pub fn sequential_laterate_from(graph: &DissimilarityGraph, p: usize, seed: &[usize]) -> Result<EmbeddingResult> {
    let started = Instant::now();
    check_dims(graph, p)?;
    if seed.len() < p + 1 {
        return invalid(format!("seed clique needs at least {} nodes", p + 1));
    }
    for (a, &u) in seed.iter().enumerate() {
        if u >= graph.node_count() || seed[..a].contains(&u) {
            return invalid("seed nodes must be distinct node ids");
        }
        if seed[..a].iter().any(|&v| !graph.has_edge(u, v)) {
            return invalid("seed nodes do not form a clique");
        }
    }
    match walk(graph, p, seed)? {
        Ok(w) => finish(graph, w, started),
        Err(WalkFailure::Stalled) => Err(Error::NotLaterable),
        Err(WalkFailure::Degenerate { placed }) => Err(Error::DegenerateStep { step: placed }),
    }
}

/// The 'first' variant: greedy seed cliques are tried in order and the first
/// full embedding is returned.
pub fn sequential_laterate_first(
    graph: &DissimilarityGraph,
    p: usize,
    opts: &LaterationOptions,
) -> Result<EmbeddingResult> {
    let started = Instant::now();
    check_dims(graph, p)?;
    let mut degenerate_at = None;
    for seed in greedy_seed_cliques(graph, p, &opts.clique) {
        match walk(graph, p, &seed)? {
            Ok(w) => return finish(graph, w, started),
            Err(WalkFailure::Degenerate { placed }) => {
                degenerate_at = Some(degenerate_at.map_or(placed, |d: usize| d.max(placed)));
            }
            Err(WalkFailure::Stalled) => {}
        }
    }
    Err(failure_error(degenerate_at))
}

/// Candidate seeds for the 'best' variant: every `(p + 1)`-clique when there
/// are at most `budget`, otherwise a uniform sample of `budget` of them. The
/// greedy seed of the 'first' variant is always included.
fn candidate_seeds(graph: &DissimilarityGraph, p: usize, budget: usize, opts: &LaterationOptions) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut sample: Vec<Vec<usize>> = Vec::new();
    let mut seen = 0usize;
    for_each_clique(graph, p + 1, |c| {
        seen += 1;
        if sample.len() < budget {
            sample.push(c.to_vec());
        } else {
            let k = rng.random_range(0..seen);
            if k < budget {
                sample[k] = c.to_vec();
            }
        }
    });
    if let Some(first) = greedy_seed_cliques(graph, p, &opts.clique).into_iter().next() {
        let mut key = first.clone();
        key.sort_unstable();
        if !sample.contains(&key) {
            sample.push(first);
        }
    }
    sample
}

/// The 'best' variant: runs the walk from every candidate seed clique
/// (evaluated in parallel) and keeps the full embedding with the smallest
/// s-stress, ties broken by the lexicographically smallest sorted seed.
pub fn sequential_laterate_best(
    graph: &DissimilarityGraph,
    p: usize,
    budget: usize,
    opts: &LaterationOptions,
) -> Result<EmbeddingResult> {
    let started = Instant::now();
    check_dims(graph, p)?;
    if budget == 0 {
        return invalid("seed budget must be at least 1");
    }
    let seeds = candidate_seeds(graph, p, budget, opts);
    let outcomes: Vec<Result<SeedOutcome>> = seeds
        .par_iter()
        .map(|seed| {
            Ok(match walk(graph, p, seed)? {
                Ok(w) => {
                    let stress = s_stress(&w.config, graph)?;
                    let mut key = seed.clone();
                    key.sort_unstable();
                    Ok((stress, key, w))
                }
                Err(f) => Err(f),
            })
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>, Walked)> = None;
    let mut degenerate_at = None;
    for outcome in outcomes {
        match outcome? {
            Ok(cand) => {
                let better = match &best {
                    None => true,
                    Some((s, key, _)) => cand.0.total_cmp(s).then_with(|| cand.1.cmp(key)).is_lt(),
                };
                if better {
                    best = Some(cand);
                }
            }
            Err(WalkFailure::Degenerate { placed }) => {
                degenerate_at = Some(degenerate_at.map_or(placed, |d: usize| d.max(placed)));
            }
            Err(WalkFailure::Stalled) => {}
        }
    }
    match best {
        Some((_, _, w)) => finish(graph, w, started),
        None => Err(failure_error(degenerate_at)),
    }
}

/// Accuracy constant of the sequential procedure for a latent configuration
/// and the landmark sets of an ordering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryBound {
    /// `max_k (ρ_k / ω_k)²` over the seed clique and every landmark set.
    pub alpha: f64,
    /// `min_k ω_k`.
    pub omega_min: f64,
    /// `A_n`; may overflow to infinity for long orderings.
    pub a_n: f64,
    /// `ln A_n`, finite even when `a_n` overflows.
    pub ln_a_n: f64,
    /// Largest admissible `σ⁴` (`Σ ε² ≤ σ²`) for which the bound applies.
    pub sigma4_max: f64,
    pub c1: f64,
    pub c2: f64,
    pub n: usize,
    pub p: usize,
}

impl TheoryBound {
    /// Closed forms with `q = 1 + C₂α` and `M = max{C₁α, C₂/q}`:
    /// `A_n = q^{n-p-1} M / ((p+1) ω̲²)` and
    /// `σ⁴_max = min{(p+1)² (ω̲/C₁)⁴, (p+1) ω̲⁴ / (C₂² q^{n-p-2} M)}`.
    /// With `n = p + 1` only the seed is scaled: `A = C₁α / ((p+1) ω̲²)` and
    /// the second branch of `σ⁴_max` is absent.
    pub fn from_constants(alpha: f64, omega_min: f64, c1: f64, c2: f64, n: usize, p: usize) -> Result<Self> {
        if !(c1 >= 1.0 && c2 >= 1.0) {
            return invalid(format!("constants must be at least 1, got C1={c1}, C2={c2}"));
        }
        if !(omega_min > 0.0 && alpha.is_finite()) {
            return Err(Error::DegenerateLandmarks(format!("minimum width {omega_min}")));
        }
        if p == 0 || n < p + 1 {
            return invalid(format!("need n >= p + 1 >= 2, got n={n}, p={p}"));
        }
        let pp = (p + 1) as f64;
        let w2 = omega_min * omega_min;
        let q = 1.0 + c2 * alpha;
        let big_m = (c1 * alpha).max(c2 / q);
        let seed_branch = pp * pp * (omega_min / c1).powi(4);
        let (ln_a_n, sigma4_max) = if n == p + 1 {
            ((c1 * alpha / (pp * w2)).ln(), seed_branch)
        } else {
            let steps = (n - p - 1) as f64;
            let ln_a = steps * q.ln() + big_m.ln() - (pp * w2).ln();
            let ln_walk = pp.ln() + 4.0 * omega_min.ln() - 2.0 * c2.ln() - (steps - 1.0) * q.ln() - big_m.ln();
            (ln_a, seed_branch.min(ln_walk.exp()))
        };
        let a_n = if n == p + 1 {
            c1 * alpha / (pp * w2)
        } else {
            q.powi((n - p - 1) as i32) * big_m / (pp * w2)
        };
        Ok(Self {
            alpha,
            omega_min,
            a_n,
            ln_a_n,
            sigma4_max,
            c1,
            c2,
            n,
            p,
        })
    }
}

/// Computes [`TheoryBound`] from the diameters and widths of the seed
/// clique and every landmark set of `ordering`, measured on `latent`.
pub fn theory_bound(
    latent: &Configuration,
    ordering: &LaterativeOrdering,
    c1: f64,
    c2: f64,
    p: usize,
) -> Result<TheoryBound> {
    if latent.dim() != p {
        return invalid(format!("latent lives in R^{}, expected R^{p}", latent.dim()));
    }
    if ordering.order.len() != latent.len() {
        return invalid("ordering and latent configuration differ in size");
    }
    let sets = std::iter::once(ordering.seed_clique()).chain(ordering.landmarks.iter().map(Vec::as_slice));
    let mut alpha = 0.0f64;
    let mut omega_min = f64::INFINITY;
    for (k, set) in sets.enumerate() {
        let stats = shape_stats(&latent.select(set)?)?;
        if stats.width <= 0.0 {
            return Err(Error::DegenerateLandmarks(format!("landmark set {k} has zero width")));
        }
        alpha = alpha.max(stats.aspect);
        omega_min = omega_min.min(stats.width);
    }
    TheoryBound::from_constants(alpha, omega_min, c1, c2, latent.len(), p)
}

/// Realized accuracy of an embedding against the perturbation energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationDiagnostics {
    /// `min_g Σ_i ||y_i - g(x_i)||²`.
    pub total_error: f64,
    /// `Σ_E ε_ij²` with `ε_ij = d_ij² - ||x_i - x_j||²`.
    pub eps_sq_sum: f64,
    /// `total_error / eps_sq_sum`, absent without noise.
    pub ratio: Option<f64>,
    /// No noise, yet the error exceeds `1e-16 · n · ρ²`.
    pub realizable_violation: bool,
}

pub fn verify_perturbation_bound(
    latent: &Configuration,
    graph_noisy: &DissimilarityGraph,
    result: &EmbeddingResult,
) -> Result<PerturbationDiagnostics> {
    if latent.len() != graph_noisy.node_count() || latent.len() != result.config.len() {
        return invalid("latent, graph and embedding differ in size");
    }
    let n = latent.len();
    let total_error = embedding_error(&result.config, latent)? * n as f64;
    let eps_sq_sum: f64 = graph_noisy
        .edges()
        .iter()
        .map(|e| (e.d2 - sq_dist(latent.point(e.i), latent.point(e.j))).powi(2))
        .sum();
    let rho2 = max_sq_dist(latent);
    Ok(PerturbationDiagnostics {
        total_error,
        eps_sq_sum,
        ratio: (eps_sq_sum > 0.0).then(|| total_error / eps_sq_sum),
        realizable_violation: eps_sq_sum == 0.0 && total_error > 1e-16 * n as f64 * rho2,
    })
}

pub(crate) fn max_sq_dist(config: &Configuration) -> f64 {
    let mut best = 0.0f64;
    for i in 0..config.len() {
        for j in (i + 1)..config.len() {
            best = best.max(sq_dist(config.point(i), config.point(j)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_noise, find_laterative_ordering, geometric_graph, is_laterative_ordering, NoiseSpec};
    use proptest::prelude::*;
    use rand::Rng;

    fn rgg(n: usize, p: usize, r: f64, seed: u64) -> (Configuration, DissimilarityGraph) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<f64> = (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = Configuration::new(n, p, coords).unwrap();
        let g = geometric_graph(&x, r).unwrap();
        (x, g)
    }

    #[test]
    fn realizable_rgg_is_exact() {
        let (x, g) = rgg(200, 2, 0.45, 1);
        let res = sequential_laterate_first(&g, 2, &LaterationOptions::default()).unwrap();
        let rho2 = max_sq_dist(&x);
        assert!(embedding_error(&res.config, &x).unwrap() <= 1e-16 * rho2);
        assert!(is_laterative_ordering(&g, &res.ordering, 2));
        assert!(res.stress <= 1e-20);
        let diag = verify_perturbation_bound(&x, &g, &res).unwrap();
        assert_eq!(diag.eps_sq_sum, 0.0);
        assert!(diag.ratio.is_none());
        assert!(!diag.realizable_violation);
    }

    #[test]
    fn provenance_matches_ordering() {
        let (_, g) = rgg(120, 2, 0.5, 2);
        let res = sequential_laterate_first(&g, 2, &LaterationOptions::default()).unwrap();
        assert_eq!(res.seed_count(), res.ordering.seed_size);
        for (pos, &v) in res.ordering.order.iter().enumerate().skip(res.ordering.seed_size) {
            assert_eq!(res.provenance[v], Provenance::Laterated { step: pos });
        }
        let json = res.diagnostics_json(None);
        assert_eq!(json["seed_nodes"].as_u64().unwrap() as usize + json["laterated_nodes"].as_u64().unwrap() as usize, 120);
    }

    #[test]
    fn minimal_seed_flag() {
        let (_, g) = rgg(100, 2, 0.6, 3);
        let opts = LaterationOptions {
            clique: CliqueStrategy::minimal(2),
            ..Default::default()
        };
        let res = sequential_laterate_first(&g, 2, &opts).unwrap();
        assert_eq!(res.ordering.seed_size, 3);
    }

    #[test]
    fn not_laterable() {
        let x = Configuration::from_points(&(0..10).map(|i| [i as f64, 0.0]).collect::<Vec<_>>()).unwrap();
        let g = geometric_graph(&x, 1.0).unwrap();
        assert!(matches!(
            sequential_laterate_first(&g, 2, &LaterationOptions::default()),
            Err(Error::NotLaterable)
        ));
        assert!(matches!(
            sequential_laterate_best(&g, 2, 10, &LaterationOptions::default()),
            Err(Error::NotLaterable)
        ));
    }

    #[test]
    fn collinear_latent_stalls_on_degenerate_landmarks() {
        let x = Configuration::from_points(&(0..6).map(|i| [i as f64, 0.0]).collect::<Vec<_>>()).unwrap();
        let g = DissimilarityGraph::complete(&x);
        let opts = LaterationOptions {
            clique: CliqueStrategy::minimal(2),
            ..Default::default()
        };
        assert!(matches!(
            sequential_laterate_first(&g, 2, &opts),
            Err(Error::DegenerateStep { step: 3 })
        ));
    }

    #[test]
    fn degenerate_seed_falls_back_to_next() {
        let x = Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap();
        let g = DissimilarityGraph::complete(&x);
        let opts = LaterationOptions {
            clique: CliqueStrategy::minimal(2),
            ..Default::default()
        };
        let res = sequential_laterate_first(&g, 2, &opts).unwrap();
        assert!(embedding_error(&res.config, &x).unwrap() <= 1e-24);
        assert!(res.ordering.seed_clique().contains(&3));
    }

    #[test]
    fn deferred_node_is_retried() {
        // node 4 first sees the collinear landmarks 0, 1, 3; placing 5 unblocks it
        let x = Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [3.0, 0.0], [2.0, 1.0]])
            .unwrap();
        let edges = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3), (0, 4), (1, 4), (3, 4), (0, 5), (2, 5), (3, 5), (4, 5)];
        let g = DissimilarityGraph::new(6, edges.into_iter().map(|(i, j)| (i, j, sq_dist(x.point(i), x.point(j))))).unwrap();
        let res = sequential_laterate_from(&g, 2, &[0, 1, 2]).unwrap();
        assert!(embedding_error(&res.config, &x).unwrap() <= 1e-24);
        assert_eq!(res.ordering.order, vec![0, 1, 2, 3, 5, 4]);
        assert_eq!(res.ordering.landmarks_at(5), &[0, 1, 3, 5]);
        assert!(is_laterative_ordering(&g, &res.ordering, 2));
    }

    #[test]
    fn seed_validation() {
        let (_, g) = rgg(30, 2, 0.8, 4);
        assert!(sequential_laterate_from(&g, 2, &[0, 1]).is_err());
        assert!(sequential_laterate_from(&g, 2, &[0, 0, 1]).is_err());
        assert!(sequential_laterate_best(&g, 2, 0, &LaterationOptions::default()).is_err());
    }

    #[test]
    fn single_clique_best_equals_first() {
        let x = Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]]).unwrap();
        let (g, _) = apply_noise(&DissimilarityGraph::complete(&x), &NoiseSpec::additive(0.01, 5)).unwrap();
        let first = sequential_laterate_first(&g, 2, &LaterationOptions::default()).unwrap();
        let best = sequential_laterate_best(&g, 2, 50, &LaterationOptions::default()).unwrap();
        assert_eq!(first.config, best.config);
    }

    #[test]
    fn best_dominates_first() {
        let (x, g) = rgg(30, 2, 1.0, 6);
        let (noisy, _) = apply_noise(&g, &NoiseSpec::additive(0.01, 6)).unwrap();
        let opts = LaterationOptions::default();
        let first = sequential_laterate_first(&noisy, 2, &opts).unwrap();
        let best = sequential_laterate_best(&noisy, 2, usize::MAX, &opts).unwrap();
        assert!(best.stress <= first.stress);
        // realizable: every seed gives zero stress
        let exact = sequential_laterate_best(&g, 2, usize::MAX, &opts).unwrap();
        assert!(exact.stress <= 1e-20);
        assert!(embedding_error(&exact.config, &x).unwrap() <= 1e-16 * max_sq_dist(&x));
    }

    #[test]
    fn deterministic() {
        let (_, g) = rgg(150, 2, 0.4, 7);
        let (noisy, _) = apply_noise(&g, &NoiseSpec::additive(1e-3, 7)).unwrap();
        let opts = LaterationOptions::default();
        let a = sequential_laterate_best(&noisy, 2, 40, &opts).unwrap();
        let b = sequential_laterate_best(&noisy, 2, 40, &opts).unwrap();
        assert_eq!(a.config, b.config);
        assert_eq!(a.ordering, b.ordering);
    }

    /// Independent minimizer of s-stress on a complete graph: many random
    /// starts of plain gradient descent with step halving.
    fn multistart_min(d2: &[Vec<f64>], restarts: usize, seed: u64) -> Vec<[f64; 2]> {
        let n = d2.len();
        let stress = |y: &[[f64; 2]]| {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let e = (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2) - d2[i][j];
                    s += e * e;
                }
            }
            s
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = (f64::INFINITY, vec![[0.0; 2]; n]);
        for _ in 0..restarts {
            let mut y: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            let mut f = stress(&y);
            let mut step = 0.01;
            for _ in 0..3000 {
                let mut g = vec![[0.0; 2]; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let dx = y[i][0] - y[j][0];
                            let dy = y[i][1] - y[j][1];
                            let e = dx * dx + dy * dy - d2[i][j];
                            g[i][0] += 4.0 * e * dx;
                            g[i][1] += 4.0 * e * dy;
                        }
                    }
                }
                loop {
                    let t: Vec<[f64; 2]> = y.iter().zip(&g).map(|(a, b)| [a[0] - step * b[0], a[1] - step * b[1]]).collect();
                    let ft = stress(&t);
                    if ft < f {
                        y = t;
                        f = ft;
                        step *= 1.2;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-18 {
                        break;
                    }
                }
            }
            if f < best.0 {
                best = (f, y);
            }
        }
        best.1
    }

    #[test]
    fn small_instance_close_to_global_stress_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = Configuration::new(6, 2, (0..12).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let (noisy, _) = apply_noise(&DissimilarityGraph::complete(&x), &NoiseSpec::additive(1e-3, 12)).unwrap();
        let d2: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| noisy.d2(i, j).unwrap_or(0.0)).collect()).collect();
        let oracle = Configuration::from_points(&multistart_min(&d2, 200, 1)).unwrap();
        let res = sequential_laterate_first(&noisy, 2, &LaterationOptions::default()).unwrap();
        let seq_err = embedding_error(&res.config, &x).unwrap();
        let oracle_err = embedding_error(&oracle, &x).unwrap();
        assert!(s_stress(&oracle, &noisy).unwrap() <= res.stress * (1.0 + 1e-9));
        assert!(seq_err <= 10.0 * oracle_err, "{seq_err} vs {oracle_err}");
    }

    #[test]
    fn bound_arithmetic() {
        let b = TheoryBound::from_constants(1.0, 1.0, 1.0, 1.0, 4, 2).unwrap();
        assert!((b.a_n - 2.0 / 3.0).abs() <= 1e-15);
        assert!((b.ln_a_n - (2.0f64 / 3.0).ln()).abs() <= 1e-15);
        // n = p + 2: the walk branch is (p+1) ω̲⁴ / (C₂² M) with q⁰
        assert!((b.sigma4_max - 3.0f64.min(9.0)).abs() <= 1e-12);
        let seed_only = TheoryBound::from_constants(2.0, 0.5, 1.0, 3.0, 3, 2).unwrap();
        assert!((seed_only.a_n - 2.0 / (3.0 * 0.25)).abs() <= 1e-15);
        assert!(TheoryBound::from_constants(1.0, 1.0, 0.5, 1.0, 4, 2).is_err());
        assert!(TheoryBound::from_constants(1.0, 0.0, 1.0, 1.0, 4, 2).is_err());
    }

    /// `A_{p+1} = C₁α/((p+1)ω̲²)`, `A_{k+1} = max{(1 + C₂α) A_k, C₂/((p+1)ω̲²)}`.
    fn recursion(alpha: f64, omega: f64, c1: f64, c2: f64, n: usize, p: usize) -> f64 {
        let w = (p + 1) as f64 * omega * omega;
        let mut a = c1 * alpha / w;
        for _ in (p + 1)..n {
            a = ((1.0 + c2 * alpha) * a).max(c2 / w);
        }
        a
    }

    #[test]
    fn closed_form_matches_recursion() {
        for seed in 0..20u64 {
            let (x, g) = rgg(10, 2, 1.5, 40 + seed);
            let Some(ord) = find_laterative_ordering(&g, 2, &CliqueStrategy::minimal(2)).unwrap() else {
                continue;
            };
            let c1 = 1.0 + seed as f64 * 0.5;
            let c2 = 1.0 + seed as f64 * 0.25;
            let b = theory_bound(&x, &ord, c1, c2, 2).unwrap();
            let rec = recursion(b.alpha, b.omega_min, c1, c2, 10, 2);
            assert!((b.a_n - rec).abs() <= 1e-12 * rec, "{} vs {rec}", b.a_n);
        }
    }

    #[test]
    fn ratio_stable_across_noise_levels() {
        let (x, g) = rgg(150, 2, 0.5, 9);
        let mut ratios = Vec::new();
        for (k, s2) in [1e-5, 1e-4, 1e-3, 1e-2].into_iter().enumerate() {
            let (noisy, _) = apply_noise(&g, &NoiseSpec::additive(s2, 100 + k as u64)).unwrap();
            let res = sequential_laterate_first(&noisy, 2, &LaterationOptions::default()).unwrap();
            ratios.push(verify_perturbation_bound(&x, &noisy, &res).unwrap().ratio.unwrap());
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 50.0, "{ratios:?}");
    }

    #[test]
    fn tiny_instance_respects_theory_bound() {
        let x = Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.9], [0.6, 0.3]]).unwrap();
        let g = DissimilarityGraph::complete(&x);
        let ord = find_laterative_ordering(&g, 2, &CliqueStrategy::minimal(2)).unwrap().unwrap();
        let b = theory_bound(&x, &ord, 1.0, 1.0, 2).unwrap();
        for seed in 0..10 {
            let (noisy, rep) = apply_noise(&g, &NoiseSpec::additive(1e-8, seed)).unwrap();
            if rep.eps_sq_sum > b.sigma4_max.sqrt() {
                continue;
            }
            let res = sequential_laterate_from(&noisy, 2, ord.seed_clique()).unwrap();
            let d = verify_perturbation_bound(&x, &noisy, &res).unwrap();
            assert!(d.ratio.unwrap() <= b.a_n, "{} > {}", d.ratio.unwrap(), b.a_n);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn realizable_exactness(seed in 0u64..10_000, n in 20usize..80, p in 2usize..4) {
            let r = if p == 2 { 0.8 } else { 1.2 };
            let (x, g) = rgg(n, p, r, seed);
            if let Ok(res) = sequential_laterate_first(&g, p, &LaterationOptions::default()) {
                prop_assert!(embedding_error(&res.config, &x).unwrap() <= 1e-16 * max_sq_dist(&x));
            }
        }
    }
}
