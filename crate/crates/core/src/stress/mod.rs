//! s-stress and its minimizers.

mod gd;
mod instance;
mod smacof;

pub use gd::minimize_gd;
pub use instance::{make_scaling_instance, ScalingInstance};
pub use smacof::minimize_smacof;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fmt_f64;
use crate::geometry::{sq_dist, Configuration};
use crate::graph::DissimilarityGraph;
use crate::sequential::{sequential_laterate_first, LaterationOptions};

fn check_sizes(config: &Configuration, graph: &DissimilarityGraph) -> Result<()> {
    if config.len() != graph.node_count() {
        return invalid(format!(
            "configuration has {} points, graph has {} nodes",
            config.len(),
            graph.node_count()
        ));
    }
    Ok(())
}

/// `Σ_{(i,j) ∈ E} (||y_i - y_j||² - d_ij²)²`.
pub fn s_stress(config: &Configuration, graph: &DissimilarityGraph) -> Result<f64> {
    check_sizes(config, graph)?;
    Ok(s_stress_unchecked(config.coords(), config.dim(), graph))
}

pub(crate) fn s_stress_unchecked(coords: &[f64], dim: usize, graph: &DissimilarityGraph) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            let r = sq_dist(&coords[e.i * dim..(e.i + 1) * dim], &coords[e.j * dim..(e.j + 1) * dim]) - e.d2;
            r * r
        })
        .sum()
}

/// Analytic gradient of [`s_stress`], row-major `n × p`:
/// `∂/∂y_i = Σ_{j ~ i} 4(||y_i - y_j||² - d_ij²)(y_i - y_j)`.
pub fn s_stress_gradient(config: &Configuration, graph: &DissimilarityGraph) -> Result<Vec<f64>> {
    check_sizes(config, graph)?;
    let mut grad = vec![0.0; config.coords().len()];
    s_stress_gradient_into(config.coords(), config.dim(), graph, &mut grad);
    Ok(grad)
}

pub(crate) fn s_stress_gradient_into(coords: &[f64], dim: usize, graph: &DissimilarityGraph, grad: &mut [f64]) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    for e in graph.edges() {
        let (a, b) = (e.i * dim, e.j * dim);
        let r = sq_dist(&coords[a..a + dim], &coords[b..b + dim]) - e.d2;
        for k in 0..dim {
            let f = 4.0 * r * (coords[a + k] - coords[b + k]);
            grad[a + k] += f;
            grad[b + k] -= f;
        }
    }
}

/// Kruskal's raw stress `Σ_E (d_ij - ||y_i - y_j||)²`, the objective SMACOF majorizes.
pub fn raw_stress(config: &Configuration, graph: &DissimilarityGraph) -> Result<f64> {
    check_sizes(config, graph)?;
    Ok(raw_stress_unchecked(config.coords(), config.dim(), graph))
}

pub(crate) fn raw_stress_unchecked(coords: &[f64], dim: usize, graph: &DissimilarityGraph) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            let d = sq_dist(&coords[e.i * dim..(e.i + 1) * dim], &coords[e.j * dim..(e.j + 1) * dim]).sqrt();
            (e.d2.sqrt() - d).powi(2)
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Initial gradient-descent step; halved on a failed Armijo test and grown
    /// by 10% after every accepted step. Unused by SMACOF.
    pub step_size: f64,
    /// Stop once the relative decrease of the objective falls to this level.
    pub rel_tol: f64,
    /// Seed for random initialization.
    pub seed: u64,
    /// Record a per-iteration trace.
    pub trace: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            step_size: 1e-2,
            rel_tol: 1e-10,
            seed: 0,
            trace: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return invalid("max_iters must be at least 1");
        }
        if !(self.step_size > 0.0 && self.rel_tol > 0.0) {
            return invalid("step size and tolerance must be positive");
        }
        Ok(())
    }
}

/// Starting configuration for an optimizer.
#[derive(Clone, Debug, Default)]
pub enum Init {
    Given(Configuration),
    /// Gaussian cloud whose mean squared pair distance matches the mean squared dissimilarity.
    Random,
    /// Output of sequential lateration ('first' variant, default options).
    SequentialLateration,
    /// Sequential lateration when the graph allows it, random otherwise.
    #[default]
    Auto,
}

impl Init {
    pub(crate) fn resolve(&self, graph: &DissimilarityGraph, p: usize, seed: u64) -> Result<Configuration> {
        match self {
            Init::Given(c) => {
                check_sizes(c, graph)?;
                if c.dim() != p {
                    return invalid(format!("initial configuration lives in R^{}, expected R^{p}", c.dim()));
                }
                Ok(c.clone())
            }
            Init::Random => random_init(graph, p, seed),
            Init::SequentialLateration => {
                Ok(sequential_laterate_first(graph, p, &LaterationOptions::default())?.config)
            }
            Init::Auto => match sequential_laterate_first(graph, p, &LaterationOptions::default()) {
                Ok(r) => Ok(r.config),
                Err(Error::NotLaterable | Error::DegenerateStep { .. }) => random_init(graph, p, seed),
                Err(e) => Err(e),
            },
        }
    }
}

fn random_init(graph: &DissimilarityGraph, p: usize, seed: u64) -> Result<Configuration> {
    let mean_d2 = if graph.edge_count() == 0 {
        1.0
    } else {
        graph.edges().iter().map(|e| e.d2).sum::<f64>() / graph.edge_count() as f64
    };
    // E||y_i - y_j||² = 2p·sd² for i.i.d. N(0, sd²) coordinates
    let sd = (mean_d2 / (2.0 * p as f64)).sqrt().max(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Configuration::random_gaussian(graph.node_count(), p, sd, &mut rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// The objective being minimized: s-stress for GD, raw stress for SMACOF.
    pub stress: f64,
    pub grad_norm: f64,
    pub step: f64,
}

/// Final configuration plus convergence diagnostics.
#[derive(Clone, Debug)]
pub struct OptimizerReport {
    pub config: Configuration,
    pub iterations: usize,
    pub converged: bool,
    pub initial_s_stress: f64,
    pub s_stress: f64,
    pub raw_stress: f64,
    pub trace: Vec<TraceRow>,
}

impl OptimizerReport {
    pub fn write_trace_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "iteration,stress,grad_norm,step")?;
        for t in &self.trace {
            writeln!(
                writer,
                "{},{},{},{}",
                t.iteration,
                fmt_f64(t.stress),
                fmt_f64(t.grad_norm),
                fmt_f64(t.step)
            )?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::geometric_graph;
    use rand::Rng;

    #[test]
    fn two_point_example() {
        let c = Configuration::from_points(&[[0.0], [1.0]]).unwrap();
        let g = DissimilarityGraph::new(2, [(0, 1, 4.0)]).unwrap();
        assert_eq!(s_stress(&c, &g).unwrap(), 9.0);
        assert_eq!(raw_stress(&c, &g).unwrap(), 1.0);
    }

    #[test]
    fn single_edge_gradient() {
        let c = Configuration::from_points(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let g = DissimilarityGraph::new(2, [(0, 1, 0.0)]).unwrap();
        let grad = s_stress_gradient(&c, &g).unwrap();
        assert_eq!(grad, vec![4.0, 0.0, -4.0, 0.0]);
    }

    #[test]
    fn realizable_has_zero_stress_and_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = Configuration::random_gaussian(30, 2, 1.0, &mut rng).unwrap();
        let g = geometric_graph(&c, 1.5).unwrap();
        assert!(s_stress(&c, &g).unwrap() <= 1e-24);
        assert!(s_stress_gradient(&c, &g).unwrap().iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn matches_naive_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = Configuration::random_gaussian(25, 3, 1.0, &mut rng).unwrap();
        let g = geometric_graph(&c, 1.8).unwrap();
        let noisy = g
            .with_d2(g.edges().iter().map(|e| e.d2 * rng.random_range(0.5..1.5)).collect())
            .unwrap();
        let mut naive = 0.0;
        for i in 0..25 {
            for j in (i + 1)..25 {
                if let Some(d2) = noisy.d2(i, j) {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += (c.point(i)[k] - c.point(j)[k]).powi(2);
                    }
                    naive += (s - d2).powi(2);
                }
            }
        }
        let fast = s_stress(&c, &noisy).unwrap();
        assert!((fast - naive).abs() <= 1e-14 * naive);
    }

    #[test]
    fn gradient_matches_central_differences() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
            let c = Configuration::random_gaussian(12, 2, 1.0, &mut rng).unwrap();
            let g = geometric_graph(&c, 1.5).unwrap();
            let noisy = g
                .with_d2(g.edges().iter().map(|e| e.d2 * rng.random_range(0.5..1.5)).collect())
                .unwrap();
            let y = Configuration::random_gaussian(12, 2, 1.0, &mut rng).unwrap();
            let grad = s_stress_gradient(&y, &noisy).unwrap();
            let h = 1e-5;
            let mut fd = vec![0.0; grad.len()];
            for (k, v) in fd.iter_mut().enumerate() {
                let mut plus = y.coords().to_vec();
                let mut minus = plus.clone();
                plus[k] += h;
                minus[k] -= h;
                *v = (s_stress_unchecked(&plus, 2, &noisy) - s_stress_unchecked(&minus, 2, &noisy)) / (2.0 * h);
            }
            let diff: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = grad.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(diff <= 1e-6 * norm, "seed {seed}: {diff} vs {norm}");
        }
    }

    #[test]
    fn size_mismatch() {
        let c = Configuration::from_points(&[[0.0], [1.0]]).unwrap();
        let g = DissimilarityGraph::new(3, [(0, 1, 4.0)]).unwrap();
        assert!(s_stress(&c, &g).is_err());
        assert!(s_stress_gradient(&c, &g).is_err());
    }

    #[test]
    fn random_init_matches_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = Configuration::random_gaussian(400, 2, 3.0, &mut rng).unwrap();
        let g = DissimilarityGraph::complete(&c);
        let y = Init::Random.resolve(&g, 2, 9).unwrap();
        let mean_y: f64 = g.edges().iter().map(|e| sq_dist(y.point(e.i), y.point(e.j))).sum::<f64>()
            / g.edge_count() as f64;
        let mean_d: f64 = g.edges().iter().map(|e| e.d2).sum::<f64>() / g.edge_count() as f64;
        assert!((mean_y / mean_d - 1.0).abs() < 0.2);
    }
}
