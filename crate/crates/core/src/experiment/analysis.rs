use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{run_scenario, Method, ResultRow, ScenarioConfig};
use crate::error::{invalid, Result};

/// Median of a non-empty sample (mean of the two central values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Medians across trials at one noise level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMedian {
    pub sigma2: f64,
    pub mean_perturbation: f64,
    pub embedding_error: f64,
    pub s_stress: f64,
    pub wall_time_ms: f64,
    pub trials: usize,
}

/// Per noise level (ascending), medians over the rows of `method`.
pub fn level_medians(rows: &[ResultRow], method: Method) -> Vec<LevelMedian> {
    let mut groups: BTreeMap<u64, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method) {
        // non-negative floats order like their bit patterns
        groups.entry(r.sigma2.to_bits()).or_default().push(r);
    }
    groups
        .into_values()
        .map(|g| {
            let pick = |f: fn(&ResultRow) -> f64| median(&g.iter().map(|r| f(r)).collect::<Vec<_>>());
            LevelMedian {
                sigma2: g[0].sigma2,
                mean_perturbation: pick(|r| r.mean_perturbation),
                embedding_error: pick(|r| r.embedding_error),
                s_stress: pick(|r| r.s_stress),
                wall_time_ms: pick(|r| r.wall_time_ms),
                trials: g.len(),
            }
        })
        .collect()
}

/// Least-squares line through `(log s(ε)², log error)` level medians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub levels: usize,
}

pub fn loglog_slope(rows: &[ResultRow], method: Method) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = level_medians(rows, method)
        .into_iter()
        .filter(|l| l.mean_perturbation > 0.0 && l.embedding_error > 0.0 && l.embedding_error.is_finite())
        .map(|l| (l.mean_perturbation.ln(), l.embedding_error.ln()))
        .collect();
    if pts.len() < 3 {
        return invalid(format!(
            "slope fit for {method} needs at least 3 noise levels with positive medians, got {}",
            pts.len()
        ));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("noise levels produced identical mean perturbations");
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r2,
        levels: pts.len(),
    })
}

/// Median wall time of one method at one problem size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub method: Method,
    pub median_ms: f64,
    pub trials: usize,
}

/// Runs `base` at every size in `n_grid` with trials executed one at a
/// time, so every method sees the same instances on an idle pool.
pub fn timing_study(base: &ScenarioConfig, n_grid: &[usize]) -> Result<(Vec<ResultRow>, Vec<TimingRow>)> {
    if n_grid.is_empty() {
        return invalid("size grid must be non-empty");
    }
    let mut all = Vec::new();
    let mut summary = Vec::new();
    for &n in n_grid {
        let cfg = ScenarioConfig {
            name: format!("{}-n{n}", base.name),
            n,
            parallel: false,
            ..base.clone()
        };
        let rows = run_scenario(&cfg)?;
        let mut methods = cfg.methods.clone();
        methods.sort();
        methods.dedup();
        for m in methods {
            let times: Vec<f64> = rows.iter().filter(|r| r.method == m).map(|r| r.wall_time_ms).collect();
            summary.push(TimingRow {
                n,
                method: m,
                median_ms: median(&times),
                trials: times.len(),
            });
        }
        all.extend(rows);
    }
    Ok((all, summary))
}
