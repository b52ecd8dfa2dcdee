use nalgebra::DMatrix;

use super::{raw_stress_unchecked, s_stress_unchecked, Init, OptimizerConfig, OptimizerReport, TraceRow};
use crate::error::{invalid, Error, Result};
use crate::geometry::{sq_dist, Configuration};
use crate::graph::DissimilarityGraph;

/// Ratios for pairs closer than this are set to zero in the Guttman transform.
const ZERO_DISTANCE: f64 = 1e-12;

/// SMACOF (iterative majorization) of raw stress `Σ_E (d_ij - ||y_i - y_j||)²`
/// with unit weights on the edges and targets `d_ij = sqrt(d_ij²)`.
///
/// Each step is the Guttman transform `Y ← V⁺ B(Z) Z`, where `V` is the
/// graph Laplacian of the edge set and `B(Z)` the Laplacian weighted by
/// `d_ij / ||z_i - z_j||`. `V⁺` is applied through a Cholesky factor of
/// `V + 11ᵀ/n`, and the centroid of the iterate is carried over so that an
/// exact configuration is a fixed point. Raw stress never increases; the
/// report carries both raw stress and s-stress. The graph must be connected.
pub fn minimize_smacof(
    graph: &DissimilarityGraph,
    p: usize,
    init: &Init,
    opt: &OptimizerConfig,
) -> Result<OptimizerReport> {
    opt.validate()?;
    if !graph.is_connected() {
        return invalid("SMACOF needs a connected graph");
    }
    let start = init.resolve(graph, p, opt.seed)?;
    let n = start.len();
    let initial_s = s_stress_unchecked(start.coords(), p, graph);
    if !initial_s.is_finite() {
        return Err(Error::NumericalFailure("initial s-stress is not finite".into()));
    }

    let mut v = DMatrix::from_element(n, n, 1.0 / n as f64);
    for e in graph.edges() {
        v[(e.i, e.i)] += 1.0;
        v[(e.j, e.j)] += 1.0;
        v[(e.i, e.j)] -= 1.0;
        v[(e.j, e.i)] -= 1.0;
    }
    let chol = v
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("edge Laplacian is not positive definite".into()))?;
    let targets: Vec<f64> = graph.edges().iter().map(|e| e.d2.sqrt()).collect();

    let mut y = start.coords().to_vec();
    let mut f = raw_stress_unchecked(&y, p, graph);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut bz = DMatrix::<f64>::zeros(n, p);

    while iterations < opt.max_iters {
        if f == 0.0 {
            converged = true;
            break;
        }
        // B(Z) Z minus the Laplacian term V Z gives half the negative raw-stress gradient
        bz.fill(0.0);
        let mut grad_sq = vec![0.0; n * p];
        for (e, &d) in graph.edges().iter().zip(&targets) {
            let (a, b) = (e.i * p, e.j * p);
            let dist = sq_dist(&y[a..a + p], &y[b..b + p]).sqrt();
            let ratio = if dist < ZERO_DISTANCE { 0.0 } else { d / dist };
            for k in 0..p {
                let diff = y[a + k] - y[b + k];
                bz[(e.i, k)] += ratio * diff;
                bz[(e.j, k)] -= ratio * diff;
                let g = 2.0 * (1.0 - ratio) * diff;
                grad_sq[a + k] += g;
                grad_sq[b + k] -= g;
            }
        }
        let mean: Vec<f64> = (0..p).map(|k| (0..n).map(|i| y[i * p + k]).sum::<f64>() / n as f64).collect();
        let solved = chol.solve(&bz);
        let mut next = vec![0.0; n * p];
        let mut moved = 0.0;
        for i in 0..n {
            for k in 0..p {
                let val = solved[(i, k)] + mean[k];
                moved += (val - y[i * p + k]).powi(2);
                next[i * p + k] = val;
            }
        }
        let f_new = raw_stress_unchecked(&next, p, graph);
        if !f_new.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite stress at iteration {iterations}")));
        }
        iterations += 1;
        y = next;
        if opt.trace {
            trace.push(TraceRow {
                iteration: iterations,
                stress: f_new,
                grad_norm: grad_sq.iter().map(|g| g * g).sum::<f64>().sqrt(),
                step: moved.sqrt(),
            });
        }
        let decrease = f - f_new;
        f = f_new;
        if decrease <= opt.rel_tol * f.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let s = s_stress_unchecked(&y, p, graph);
    Ok(OptimizerReport {
        config: Configuration::new(n, p, y)?,
        iterations,
        converged,
        initial_s_stress: initial_s,
        s_stress: s,
        raw_stress: f,
        trace,
    })
}
