use super::{Method, ScenarioConfig};
use crate::error::{invalid, Result};
use crate::graph::{DomainSpec, NoiseModel};
use crate::sequential::LaterationOptions;
use crate::stress::OptimizerConfig;

pub const PRESET_NAMES: [&str; 6] = ["fig2a", "fig2a-literal", "fig2b", "fig2c", "fig3a", "fig3b"];

const SIGMA2_GRID: [f64; 4] = [1e-5, 1e-4, 1e-3, 1e-2];

fn base(name: String, h: f64, kappa: f64, radius: f64, methods: Vec<Method>) -> ScenarioConfig {
    ScenarioConfig {
        name,
        n: 500,
        p: 2,
        domain: DomainSpec { h, kappa },
        radius,
        noise_model: NoiseModel::AdditiveGaussian,
        sigma2: SIGMA2_GRID.to_vec(),
        trials: 20,
        methods,
        seed: 0,
        optimizer: OptimizerConfig::default(),
        lateration: LaterationOptions::default(),
        best_budget: 200,
        parallel: true,
    }
}

/// Named scenario families for the perturbation and timing studies.
///
/// * `fig2a`: radius sweep on `Ω(0.2, 1)` with `r ∈ {0.225, 0.25, 0.275}`.
/// * `fig2a-literal`: the same sweep at `r ∈ {2.25, 2.5, 2.75}`; on a domain of
///   diameter `2√2` these graphs are nearly complete.
/// * `fig2b`: aspect-ratio sweep `κ ∈ {2, 3, 4}`, `h = 0.2`, `r = 0.3`.
/// * `fig2c`: hollowness sweep `h ∈ {0.25, 0.5, 0.75}`, `κ = 1`, `r = 0.3`.
/// * `fig3a`: sequential lateration against gradient descent and SMACOF on
///   `Ω(0.2, 1)`, `r = 0.3`.
/// * `fig3b`: timing at `n ∈ {250, 500, 1000, 2000}`, `ς² = 10⁻³`, trials run serially.
pub fn preset(name: &str) -> Result<Vec<ScenarioConfig>> {
    let seq = vec![Method::SeqLaterationFirst];
    let compare = vec![Method::SeqLaterationFirst, Method::Gd, Method::Smacof];
    Ok(match name {
        "fig2a" => [0.225, 0.25, 0.275]
            .iter()
            .map(|&r| base(format!("fig2a-r{r}"), 0.2, 1.0, r, seq.clone()))
            .collect(),
        "fig2a-literal" => [2.25, 2.5, 2.75]
            .iter()
            .map(|&r| base(format!("fig2a-literal-r{r}"), 0.2, 1.0, r, seq.clone()))
            .collect(),
        "fig2b" => [2.0, 3.0, 4.0]
            .iter()
            .map(|&k| base(format!("fig2b-kappa{k}"), 0.2, k, 0.3, seq.clone()))
            .collect(),
        "fig2c" => [0.25, 0.5, 0.75]
            .iter()
            .map(|&h| base(format!("fig2c-h{h}"), h, 1.0, 0.3, seq.clone()))
            .collect(),
        "fig3a" => vec![base("fig3a".into(), 0.2, 1.0, 0.3, compare)],
        "fig3b" => [250, 500, 1000, 2000]
            .iter()
            .map(|&n| ScenarioConfig {
                n,
                sigma2: vec![1e-3],
                trials: 5,
                parallel: false,
                ..base(format!("fig3b-n{n}"), 0.2, 1.0, 0.3, compare.clone())
            })
            .collect(),
        other => {
            return invalid(format!(
                "unknown preset '{other}', expected one of {}",
                PRESET_NAMES.join(", ")
            ))
        }
    })
}
