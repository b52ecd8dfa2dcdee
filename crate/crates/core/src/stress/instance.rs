use crate::error::{invalid, Result};
use crate::geometry::{procrustes_align, sq_dist, Configuration};
use crate::graph::DissimilarityGraph;

/// Uniformly shrunk dissimilarities `d_ij² = η² ||x_i - x_j||²` on a fixed topology.
///
/// `η x` realizes them exactly, so it minimizes s-stress, while its
/// alignment error against `x` is `(1 - η)² Σ ||x_i - x̄||²`. This is the
/// family on which no method can beat error `a · Σ ε_ij²` with `a = 1/(8δ)`
/// (for edge lengths at most one).
#[derive(Clone, Debug)]
pub struct ScalingInstance {
    pub eta: f64,
    pub graph: DissimilarityGraph,
    pub latent: Configuration,
    pub analytic_minimizer: Configuration,
    /// `1 / (8δ)`, δ the maximum degree.
    pub a_const: f64,
    /// `Σ_E ε_ij²` with `ε_ij = (η² - 1) ||x_i - x_j||²`.
    pub eps_sq_sum: f64,
}

impl ScalingInstance {
    /// `min_g Σ ||y*_i - g(x_i)||²` for the analytic minimizer.
    pub fn minimizer_error(&self) -> Result<f64> {
        Ok(procrustes_align(&self.latent, &self.analytic_minimizer)?.error)
    }

    /// `a · Σ ε_ij²`.
    pub fn lower_bound(&self) -> f64 {
        self.a_const * self.eps_sq_sum
    }

    /// Smallest `η²` whose perturbation energy stays within `σ²`:
    /// `Σ ε² = (1 - η²)² Σ_E ||x_i - x_j||⁴ ≤ σ²` iff `η² ≥ 1 - σ / sqrt(Σ_E ||x_i - x_j||⁴)`.
    pub fn min_admissible_eta_sq(&self, sigma: f64) -> f64 {
        let quartic: f64 = self
            .graph
            .edges()
            .iter()
            .map(|e| sq_dist(self.latent.point(e.i), self.latent.point(e.j)).powi(2))
            .sum();
        if quartic == 0.0 {
            return 0.0;
        }
        (1.0 - sigma / quartic.sqrt()).max(0.0)
    }
}

/// Builds the shrunk instance on the edges of `topology` (its dissimilarities are ignored).
pub fn make_scaling_instance(latent: &Configuration, topology: &DissimilarityGraph, eta: f64) -> Result<ScalingInstance> {
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid(format!("eta must lie in (0, 1], got {eta}"));
    }
    if latent.len() != topology.node_count() {
        return invalid("latent configuration and topology differ in size");
    }
    let analytic_minimizer = latent.scaled(eta)?;
    let graph = topology.with_distances_of(&analytic_minimizer)?;
    let eps_sq_sum = graph
        .edges()
        .iter()
        .map(|e| {
            let eps = e.d2 - sq_dist(latent.point(e.i), latent.point(e.j));
            eps * eps
        })
        .sum();
    let delta = topology.max_degree();
    let a_const = if delta == 0 { 0.0 } else { 1.0 / (8.0 * delta as f64) };
    Ok(ScalingInstance {
        eta,
        graph,
        latent: latent.clone(),
        analytic_minimizer,
        a_const,
        eps_sq_sum,
    })
}
