use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::svd::svd;
use super::{sq_dist, Configuration};
use crate::error::{invalid, Result};

/// Default relative condition threshold for [`in_general_position`].
pub const DEFAULT_COND_TOL: f64 = 1e-8;

/// Number of sampled directions for the width estimate when `p >= 3`.
const WIDTH_DIRECTIONS: usize = 20_000;
/// Best sampled directions that get a local Nelder–Mead refinement.
const WIDTH_REFINE_STARTS: usize = 5;

/// Diameter, width and their squared ratio for a point set.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShapeStats {
    pub diameter: f64,
    pub width: f64,
    /// `diameter² / width²`; infinite when the width vanishes.
    pub aspect: f64,
}

/// Exact diameter; width exact for `p <= 2`, an upper-bounding estimate otherwise.
///
/// For `p = 1` the two enclosing "hyperplanes" are points and the width equals
/// the diameter. For `p = 2` the width comes from rotating calipers over the
/// convex hull. For `p >= 3` the directional extent is minimized over a
/// quasi-uniform direction sample and the best candidates are polished with
/// Nelder–Mead; the estimate never undershoots the true width.
pub fn shape_stats(config: &Configuration) -> Result<ShapeStats> {
    if config.len() < 2 {
        return invalid("shape statistics need at least two points");
    }
    let mut diam2 = 0.0f64;
    for i in 0..config.len() {
        for j in (i + 1)..config.len() {
            diam2 = diam2.max(sq_dist(config.point(i), config.point(j)));
        }
    }
    let diameter = diam2.sqrt();
    let width = match config.dim() {
        1 => diameter,
        2 => caliper_width(&convex_hull_2d(config)),
        _ => sampled_width(config),
    }
    .min(diameter);
    let aspect = if width > 0.0 {
        diam2 / (width * width)
    } else {
        f64::INFINITY
    };
    Ok(ShapeStats {
        diameter,
        width,
        aspect,
    })
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull (Andrew's monotone chain), collinear points dropped.
///
/// Panics if the configuration is not planar.
pub fn convex_hull_2d(config: &Configuration) -> Vec<[f64; 2]> {
    assert_eq!(config.dim(), 2, "convex_hull_2d needs planar points");
    let mut pts: Vec<[f64; 2]> = config.points().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum over hull edges of the farthest hull vertex from the edge line.
/// The antipodal pointer only moves forward, so the sweep is linear in the hull size.
fn caliper_width(hull: &[[f64; 2]]) -> f64 {
    let h = hull.len();
    if h < 3 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut j = 1;
    for i in 0..h {
        let a = hull[i];
        let b = hull[(i + 1) % h];
        while cross(a, b, hull[(j + 1) % h]) > cross(a, b, hull[j]) {
            j = (j + 1) % h;
        }
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        best = best.min(cross(a, b, hull[j]) / len);
    }
    best
}

fn extent(config: &Configuration, dir: &[f64]) -> f64 {
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return f64::INFINITY;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for pt in config.points() {
        let s: f64 = pt.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>() / norm;
        lo = lo.min(s);
        hi = hi.max(s);
    }
    hi - lo
}

/// Direction sample on the unit sphere: a Fibonacci lattice on the upper
/// hemisphere in `R³`, seeded Gaussian directions beyond.
fn sample_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    if dim == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        return (0..count)
            .map(|k| {
                let z = 1.0 - (k as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * k as f64;
                vec![r * phi.cos(), r * phi.sin(), z]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1ec);
    (0..count)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

fn sampled_width(config: &Configuration) -> f64 {
    let dim = config.dim();
    // a set whose affine hull is a proper subspace fits between coincident hyperplanes
    let c = config.centroid();
    let centered = DMatrix::from_fn(config.len(), dim, |i, k| config.point(i)[k] - c[k]);
    let sv = svd(&centered);
    if config.len() <= dim || sv.min() <= 1e-12 * sv.max() {
        return 0.0;
    }
    let mut scored: Vec<(f64, Vec<f64>)> = sample_directions(dim, WIDTH_DIRECTIONS)
        .into_iter()
        .map(|d| (extent(config, &d), d))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let spacing = (WIDTH_DIRECTIONS as f64).powf(-1.0 / (dim as f64 - 1.0));
    let mut best = scored[0].0;
    for (_, start) in scored.iter().take(WIDTH_REFINE_STARTS) {
        let norm = start.iter().map(|v| v * v).sum::<f64>().sqrt();
        let start: Vec<f64> = start.iter().map(|v| v / norm).collect();
        let (_, val) = nelder_mead(|d| extent(config, d), &start, 2.0 * spacing, 2000, 1e-15);
        best = best.min(val);
    }
    best
}

/// Minimal Nelder–Mead with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2). Stops when the simplex value spread drops
/// below `ftol` (absolute) or after `max_evals` evaluations.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for k in 0..n {
        let mut v = start.to_vec();
        v[k] += step;
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= ftol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < vals[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                vals[n] = fe;
            } else {
                simplex[n] = reflected;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = reflected;
            vals[n] = fr;
        } else {
            let (contracted, fc) = if fr < vals[n] {
                let c = along(-0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = f(&c);
                (c, fc)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = contracted;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    vals[i] = f(&shrunk);
                    simplex[i] = shrunk;
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best].clone(), vals[best])
}

/// True iff the `p` difference vectors from the first listed point have
/// `σ_min / σ_max > cond_tol`.
pub fn in_general_position(config: &Configuration, indices: &[usize], cond_tol: f64) -> Result<bool> {
    let p = config.dim();
    if indices.len() != p + 1 {
        return invalid(format!(
            "general-position test in R^{p} needs {} indices, got {}",
            p + 1,
            indices.len()
        ));
    }
    for (k, &i) in indices.iter().enumerate() {
        if i >= config.len() {
            return invalid(format!("index {i} out of range (n = {})", config.len()));
        }
        if indices[..k].contains(&i) {
            return invalid(format!("index {i} listed twice"));
        }
    }
    let base = config.point(indices[0]);
    let diffs = DMatrix::from_fn(p, p, |r, c| config.point(indices[r + 1])[c] - base[c]);
    let sv = svd(&diffs);
    let max = sv.max();
    if max == 0.0 {
        return Ok(false);
    }
    Ok(sv.min() / max > cond_tol)
}
