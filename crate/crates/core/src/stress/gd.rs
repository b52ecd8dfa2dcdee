use super::{
    raw_stress_unchecked, s_stress_gradient_into, s_stress_unchecked, Init, OptimizerConfig, OptimizerReport, TraceRow,
};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::graph::DissimilarityGraph;

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const GROWTH: f64 = 1.1;
const MAX_HALVINGS: usize = 60;

/// Gradient descent on s-stress with an Armijo backtracking line search.
///
/// Every accepted iterate strictly lowers the s-stress, so the result never
/// has more stress than the initialization. Stops at `max_iters`, when the
/// relative decrease drops to `rel_tol`, at a zero gradient, or when the line
/// search cannot make progress.
pub fn minimize_gd(graph: &DissimilarityGraph, p: usize, init: &Init, opt: &OptimizerConfig) -> Result<OptimizerReport> {
    opt.validate()?;
    let start = init.resolve(graph, p, opt.seed)?;
    let n = start.len();
    let mut y = start.coords().to_vec();
    let mut f = s_stress_unchecked(&y, p, graph);
    if !f.is_finite() {
        return Err(Error::NumericalFailure("initial s-stress is not finite".into()));
    }
    let initial = f;
    let mut grad = vec![0.0; y.len()];
    let mut trial = vec![0.0; y.len()];
    let mut step = opt.step_size;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opt.max_iters {
        if f == 0.0 {
            converged = true;
            break;
        }
        s_stress_gradient_into(&y, p, graph, &mut grad);
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if !gnorm2.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite gradient at iteration {iterations}")));
        }
        if gnorm2 == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for ((t, a), g) in trial.iter_mut().zip(&y).zip(&grad) {
                *t = a - step * g;
            }
            let ft = s_stress_unchecked(&trial, p, graph);
            if ft.is_finite() && ft <= f - ARMIJO * step * gnorm2 {
                accepted = Some(ft);
                break;
            }
            step *= BACKTRACK;
        }
        let Some(f_new) = accepted else {
            converged = true;
            break;
        };
        iterations += 1;
        std::mem::swap(&mut y, &mut trial);
        if opt.trace {
            trace.push(TraceRow {
                iteration: iterations,
                stress: f_new,
                grad_norm: gnorm2.sqrt(),
                step,
            });
        }
        let decrease = f - f_new;
        f = f_new;
        step *= GROWTH;
        if decrease <= opt.rel_tol * f.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let raw = raw_stress_unchecked(&y, p, graph);
    Ok(OptimizerReport {
        config: Configuration::new(n, p, y)?,
        iterations,
        converged,
        initial_s_stress: initial,
        s_stress: f,
        raw_stress: raw,
        trace,
    })
}
