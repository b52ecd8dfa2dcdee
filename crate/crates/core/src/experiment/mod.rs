//! Scenario runner for the perturbation and timing studies.

mod analysis;
mod output;
mod presets;

pub use analysis::{level_medians, loglog_slope, median, timing_study, LevelMedian, SlopeFit, TimingRow};
pub use output::{read_results_csv, write_results_csv, write_svg_scatter, RESULTS_HEADER};
pub use presets::{preset, PRESET_NAMES};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{embedding_error, Configuration};
use crate::graph::{
    apply_noise, find_laterative_ordering, geometric_graph, sample_domain, DissimilarityGraph, DomainSpec, NoiseModel,
    NoiseSpec,
};
use crate::sequential::{sequential_laterate_best, sequential_laterate_first, EmbeddingResult, LaterationOptions};
use crate::stress::{minimize_gd, minimize_smacof, Init, OptimizerConfig};

/// Consecutive non-laterable draws tolerated before a scenario is declared infeasible.
pub const MAX_REJECTIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SeqLaterationFirst,
    SeqLaterationBest,
    Gd,
    Smacof,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::SeqLaterationFirst, Method::SeqLaterationBest, Method::Gd, Method::Smacof];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SeqLaterationFirst => "seq-lateration-first",
            Method::SeqLaterationBest => "seq-lateration-best",
            Method::Gd => "gd",
            Method::Smacof => "smacof",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method '{s}'")))
    }
}

fn default_model() -> NoiseModel {
    NoiseModel::AdditiveGaussian
}

fn default_budget() -> usize {
    200
}

fn default_true() -> bool {
    true
}

/// One cell family of an experiment: a domain, a radius, a noise grid and
/// the methods to compare. Every trial draws a fresh latent configuration
/// that is shared by all noise levels and methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub domain: DomainSpec,
    pub radius: f64,
    #[serde(default = "default_model")]
    pub noise_model: NoiseModel,
    pub sigma2: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub lateration: LaterationOptions,
    /// Seed-clique budget of the 'best' variant.
    #[serde(default = "default_budget")]
    pub best_budget: usize,
    /// Run trials on the thread pool; turn off for timing measurements.
    #[serde(default = "default_true")]
    pub parallel: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains([',', '"', '\n']) {
            return invalid("scenario name must be non-empty and free of commas, quotes and newlines");
        }
        if self.p != 2 {
            return invalid("domain sampling is implemented for p = 2 only");
        }
        if self.n < self.p + 1 {
            return invalid(format!("n must be at least {}", self.p + 1));
        }
        self.domain.validate()?;
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return invalid("radius must be positive");
        }
        if self.sigma2.is_empty() || self.sigma2.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return invalid("sigma2 grid must be non-empty with finite non-negative entries");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.methods.is_empty() {
            return invalid("method list must be non-empty");
        }
        if self.best_budget == 0 {
            return invalid("best_budget must be at least 1");
        }
        self.optimizer.validate()
    }

    /// Parses either a single scenario object or an array of them.
    pub fn from_json(text: &str) -> Result<Vec<ScenarioConfig>> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let list: Vec<ScenarioConfig> = if value.is_array() {
            serde_json::from_value(value)?
        } else {
            vec![serde_json::from_value(value)?]
        };
        for cfg in &list {
            cfg.validate()?;
        }
        Ok(list)
    }
}

/// One method applied to one (trial, noise level) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub r: f64,
    pub h: f64,
    pub kappa: f64,
    pub sigma2: f64,
    /// `s(ε)² = Σ_E ε_ij² / |E|`.
    pub mean_perturbation: f64,
    pub embedding_error: f64,
    pub s_stress: f64,
    pub wall_time_ms: f64,
    /// Whether the first latent draw of this trial was laterable.
    pub laterable: bool,
}

/// SplitMix64 finalizer, used to derive independent per-cell seeds.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Draw {
    latent: Configuration,
    graph: DissimilarityGraph,
    seed: u64,
    first_ok: bool,
}

/// Samples a latent configuration and its geometric graph, redrawing until
/// the greedy search finds a laterative ordering.
fn draw_laterable(cfg: &ScenarioConfig, trial_seed: u64) -> Result<Draw> {
    for attempt in 0..MAX_REJECTIONS {
        let seed = mix_seed(trial_seed, attempt as u64);
        let latent = sample_domain(&cfg.domain, cfg.n, seed)?;
        let graph = geometric_graph(&latent, cfg.radius)?;
        if find_laterative_ordering(&graph, cfg.p, &cfg.lateration.clique)?.is_some() {
            return Ok(Draw {
                latent,
                graph,
                seed,
                first_ok: attempt == 0,
            });
        }
    }
    Err(Error::ScenarioInfeasible(format!(
        "scenario '{}': {MAX_REJECTIONS} consecutive draws admitted no laterative ordering",
        cfg.name
    )))
}

fn run_trial(cfg: &ScenarioConfig, trial: usize) -> Result<Vec<ResultRow>> {
    let trial_seed = mix_seed(cfg.seed, trial as u64);
    let draw = draw_laterable(cfg, trial_seed)?;
    let mut rows = Vec::with_capacity(cfg.sigma2.len() * cfg.methods.len());
    for (level, &sigma2) in cfg.sigma2.iter().enumerate() {
        let spec = NoiseSpec {
            model: cfg.noise_model,
            variance: sigma2,
            seed: mix_seed(draw.seed, 0x6e6f_6973_6500 + level as u64),
        };
        let (noisy, report) = apply_noise(&draw.graph, &spec)?;
        let mean_perturbation = report.drawn_sq_sum / noisy.edge_count().max(1) as f64;
        let mut methods = cfg.methods.clone();
        methods.sort();
        methods.dedup();
        let first = if methods.iter().any(|m| *m != Method::SeqLaterationBest) {
            walk_outcome(sequential_laterate_first(&noisy, cfg.p, &cfg.lateration))?
        } else {
            None
        };
        for method in methods {
            let started = Instant::now();
            let (config, elapsed) = match method {
                Method::SeqLaterationFirst => match &first {
                    Some(r) => (Some(r.config.clone()), r.wall_time),
                    None => (None, 0.0),
                },
                Method::SeqLaterationBest => {
                    let res = walk_outcome(sequential_laterate_best(&noisy, cfg.p, cfg.best_budget, &cfg.lateration))?;
                    (res.map(|r| r.config), started.elapsed().as_secs_f64())
                }
                Method::Gd | Method::Smacof => {
                    // the optimizers start from the 'first' embedding, or at random if the
                    // walk failed; its time counts toward theirs
                    let (init, init_time) = match &first {
                        Some(r) => (Init::Given(r.config.clone()), r.wall_time),
                        None => (Init::Random, 0.0),
                    };
                    let started_opt = Instant::now();
                    let rep = if method == Method::Gd {
                        minimize_gd(&noisy, cfg.p, &init, &cfg.optimizer)?
                    } else {
                        minimize_smacof(&noisy, cfg.p, &init, &cfg.optimizer)?
                    };
                    (Some(rep.config), init_time + started_opt.elapsed().as_secs_f64())
                }
            };
            rows.push(make_row(cfg, trial, &draw, sigma2, mean_perturbation, method, config.as_ref(), &noisy, elapsed)?);
        }
    }
    Ok(rows)
}

/// The latent graph is laterable, but noise can still leave only degenerate
/// landmark sets. Such a walk counts as a failed embedding (infinite error)
/// rather than aborting the scenario.
fn walk_outcome(res: Result<EmbeddingResult>) -> Result<Option<EmbeddingResult>> {
    match res {
        Ok(r) => Ok(Some(r)),
        Err(Error::DegenerateStep { .. } | Error::DegenerateLandmarks(_) | Error::NotLaterable) => Ok(None),
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    cfg: &ScenarioConfig,
    trial: usize,
    draw: &Draw,
    sigma2: f64,
    mean_perturbation: f64,
    method: Method,
    config: Option<&Configuration>,
    noisy: &DissimilarityGraph,
    seconds: f64,
) -> Result<ResultRow> {
    let (embedding_error, s_stress) = match config {
        Some(c) => (embedding_error(c, &draw.latent)?, crate::stress::s_stress(c, noisy)?),
        None => (f64::INFINITY, f64::INFINITY),
    };
    Ok(ResultRow {
        scenario: cfg.name.clone(),
        trial,
        seed: draw.seed,
        method,
        n: cfg.n,
        p: cfg.p,
        r: cfg.radius,
        h: cfg.domain.h,
        kappa: cfg.domain.kappa,
        sigma2,
        mean_perturbation,
        embedding_error,
        s_stress,
        wall_time_ms: seconds * 1e3,
        laterable: draw.first_ok,
    })
}

/// Runs every (trial, noise level, method) cell of `cfg`. Output order is
/// `(sigma2, trial, method)`, independent of scheduling.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let per_trial: Vec<Result<Vec<ResultRow>>> = if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect()
    } else {
        (0..cfg.trials).map(|t| run_trial(cfg, t)).collect()
    };
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Runs several scenarios in turn; rows sorted by `(scenario, sigma2, trial, method)`.
pub fn run_experiment(scenarios: &[ScenarioConfig]) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for cfg in scenarios {
        rows.extend(run_scenario(cfg)?);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.sigma2.total_cmp(&b.sigma2))
            .then(a.trial.cmp(&b.trial))
            .then(a.method.cmp(&b.method))
    });
}

/// Applies the common command-line overrides to every scenario.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub radius: Option<f64>,
    pub sigma2: Option<Vec<f64>>,
    pub methods: Option<Vec<Method>>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, scenarios: &mut [ScenarioConfig]) {
        for cfg in scenarios {
            if let Some(n) = self.n {
                cfg.n = n;
            }
            if let Some(t) = self.trials {
                cfg.trials = t;
            }
            if let Some(r) = self.radius {
                cfg.radius = r;
            }
            if let Some(s) = &self.sigma2 {
                cfg.sigma2 = s.clone();
            }
            if let Some(m) = &self.methods {
                cfg.methods = m.clone();
            }
            if let Some(seed) = self.seed {
                cfg.seed = seed;
            }
        }
    }
}
