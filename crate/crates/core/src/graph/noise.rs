use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::DissimilarityGraph;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// `d² = max{||x_i - x_j||² + ε, 0}`, `ε ~ N(0, ς²)`.
    AdditiveGaussian,
    /// `d = max{(1 + η)||x_i - x_j||, 0}`, `η ~ N(0, ς²)`.
    MultiplicativeGaussian,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    /// ς², the variance of ε (additive) or η (multiplicative).
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn additive(variance: f64, seed: u64) -> Self {
        Self {
            model: NoiseModel::AdditiveGaussian,
            variance,
            seed,
        }
    }

    pub fn multiplicative(variance: f64, seed: u64) -> Self {
        Self {
            model: NoiseModel::MultiplicativeGaussian,
            variance,
            seed,
        }
    }
}

/// What the noise actually did to the graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseReport {
    /// `Σ_E ε_ij²` with `ε_ij = d_ij²(noisy) - d_ij²(clean)`, truncation included.
    pub eps_sq_sum: f64,
    /// `Σ_E ε_ij²` over the noise as drawn, before clamping at zero. Its mean
    /// over edges concentrates at ς² for additive noise.
    pub drawn_sq_sum: f64,
    /// Edges whose squared dissimilarity was clamped at zero.
    pub truncated: usize,
}

/// Stream id for an edge: each edge draws from its own ChaCha stream, so the
/// noise on an edge does not depend on edge enumeration order.
fn edge_stream(i: usize, j: usize) -> u64 {
    ((i as u64) << 32) | j as u64
}

/// Perturbs every squared dissimilarity of `graph`, which is taken to hold
/// exact squared distances. Multiplicative noise is stored in the additive
/// convention `ε = d²(noisy) - d²(clean)`.
pub fn apply_noise(graph: &DissimilarityGraph, spec: &NoiseSpec) -> Result<(DissimilarityGraph, NoiseReport)> {
    if !(spec.variance >= 0.0 && spec.variance.is_finite()) {
        return invalid(format!("noise variance must be finite and >= 0, got {}", spec.variance));
    }
    if spec.model == NoiseModel::None || spec.variance == 0.0 {
        return Ok((
            graph.clone(),
            NoiseReport {
                eps_sq_sum: 0.0,
                drawn_sq_sum: 0.0,
                truncated: 0,
            },
        ));
    }
    let sd = spec.variance.sqrt();
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truncated = 0;
    let mut eps_sq_sum = 0.0;
    let mut drawn_sq_sum = 0.0;
    let noisy: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| {
            let mut rng = base.clone();
            rng.set_stream(edge_stream(e.i, e.j));
            let z: f64 = StandardNormal.sample(&mut rng);
            let raw = match spec.model {
                NoiseModel::AdditiveGaussian => {
                    drawn_sq_sum += sd * sd * z * z;
                    e.d2 + sd * z
                }
                NoiseModel::MultiplicativeGaussian => {
                    let d = (1.0 + sd * z) * e.d2.sqrt();
                    drawn_sq_sum += (d * d - e.d2).powi(2);
                    if d < 0.0 {
                        -1.0
                    } else {
                        d * d
                    }
                }
                NoiseModel::None => unreachable!(),
            };
            let d2 = if raw < 0.0 {
                truncated += 1;
                0.0
            } else {
                raw
            };
            eps_sq_sum += (d2 - e.d2) * (d2 - e.d2);
            d2
        })
        .collect();
    Ok((
        graph.with_d2(noisy)?,
        NoiseReport {
            eps_sq_sum,
            drawn_sq_sum,
            truncated,
        },
    ))
}

/// `ε_ij = d²(noisy) - d²(clean)` per edge, for two graphs on the same topology.
pub fn edge_perturbations(clean: &DissimilarityGraph, noisy: &DissimilarityGraph) -> Result<Vec<f64>> {
    if clean.node_count() != noisy.node_count() || clean.edge_count() != noisy.edge_count() {
        return invalid("graphs do not share a topology");
    }
    clean
        .edges()
        .iter()
        .zip(noisy.edges())
        .map(|(a, b)| {
            if (a.i, a.j) != (b.i, b.j) {
                invalid("graphs do not share a topology")
            } else {
                Ok(b.d2 - a.d2)
            }
        })
        .collect()
}
