//! Classical scaling for a complete seed and classical lateration for a single new point.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::geometry::svd::svd;
use crate::geometry::Configuration;

/// Relative singular-value threshold below which a landmark set is degenerate.
pub const LATERATION_COND_TOL: f64 = 1e-10;

const INPUT_TOL: f64 = 1e-12;
const ROUNDOFF_EIGEN: f64 = 64.0 * f64::EPSILON;

/// Result of [`classical_scaling`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingOutput {
    /// `m` points in `R^p`, one axis per retained eigenvector.
    pub config: Configuration,
    /// Top `p` eigenvalues of the doubly centered matrix, descending, before clamping.
    pub eigenvalues: Vec<f64>,
    /// Absolute mass of every eigenvalue that did not make it into the embedding:
    /// the discarded tail plus any negative retained eigenvalue.
    pub residual: f64,
    /// The `p`-th and `(p+1)`-th eigenvalues coincide to 1e-12 relative, so the
    /// retained subspace is not unique.
    pub eigen_tie: bool,
}

/// Classical (Torgerson–Gower) scaling of a complete squared-dissimilarity matrix.
///
/// `B = -½ J D J` with `J = I - 11ᵀ/m`; the embedding uses the top `p`
/// eigenpairs of `B` with negative eigenvalues clamped to zero. Each axis is
/// signed so that its first non-negligible coordinate is positive, which makes
/// the output a deterministic function of the input.
pub fn classical_scaling(d2: &DMatrix<f64>, p: usize) -> Result<ScalingOutput> {
    let m = d2.nrows();
    if d2.ncols() != m {
        return invalid("squared-dissimilarity matrix must be square");
    }
    if p == 0 {
        return invalid("embedding dimension must be at least 1");
    }
    if m < p + 1 {
        return invalid(format!("classical scaling in R^{p} needs at least {} points, got {m}", p + 1));
    }
    if d2.iter().any(|v| !v.is_finite()) {
        return invalid("squared dissimilarities must be finite");
    }
    let scale = d2.amax().max(1.0);
    for i in 0..m {
        if d2[(i, i)].abs() > INPUT_TOL * scale {
            return invalid(format!("non-zero diagonal entry at {i}"));
        }
        for j in (i + 1)..m {
            if (d2[(i, j)] - d2[(j, i)]).abs() > INPUT_TOL * scale {
                return invalid(format!("asymmetric entries at ({i},{j})"));
            }
        }
    }

    let row_mean: Vec<f64> = (0..m).map(|i| d2.row(i).sum() / m as f64).collect();
    let col_mean: Vec<f64> = (0..m).map(|j| d2.column(j).sum() / m as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / m as f64;
    let b = DMatrix::from_fn(m, m, |i, j| {
        // symmetrize the centered matrix so the eigensolver sees exact symmetry
        let a = d2[(i, j)] - row_mean[i] - col_mean[j] + grand;
        let c = d2[(j, i)] - row_mean[j] - col_mean[i] + grand;
        -0.25 * (a + c)
    });

    let eig = SymmetricEigen::new(b);
    let mut idx: Vec<usize> = (0..m).collect();
    // stable sort keeps index order among equal eigenvalues
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues: Vec<f64> = idx[..p].iter().map(|&k| eig.eigenvalues[k]).collect();
    let residual = idx[p..].iter().map(|&k| eig.eigenvalues[k].abs()).sum::<f64>()
        + eigenvalues.iter().filter(|v| **v < 0.0).map(|v| v.abs()).sum::<f64>();
    let top = eig.eigenvalues[idx[0]].abs().max(f64::MIN_POSITIVE);
    let eigen_tie = m > p && (eig.eigenvalues[idx[p - 1]] - eig.eigenvalues[idx[p]]).abs() <= 1e-12 * top;

    // eigenvalues at round-off level of the top one carry no geometry; keeping
    // them would give a flat configuration a spurious sqrt(ε)-sized axis
    let floor = ROUNDOFF_EIGEN * m as f64 * top;
    let mut coords = DMatrix::<f64>::zeros(m, p);
    for (axis, &k) in idx[..p].iter().enumerate() {
        let lambda = eig.eigenvalues[k];
        let s = if lambda > floor { lambda.sqrt() } else { 0.0 };
        let v = eig.eigenvectors.column(k);
        let vmax = v.amax();
        let flip = v
            .iter()
            .find(|x| x.abs() > 1e-12 * vmax)
            .is_some_and(|x| *x < 0.0);
        let sign = if flip { -s } else { s };
        for i in 0..m {
            coords[(i, axis)] = sign * v[i];
        }
    }
    Ok(ScalingOutput {
        config: Configuration::from_matrix(&coords)?,
        eigenvalues,
        residual,
        eigen_tie,
    })
}

/// Classical lateration: least-squares position of one point from its squared
/// dissimilarities to `m >= p + 1` landmarks.
///
/// With `c_i = y_i - ȳ`, subtracting the mean of the equations
/// `||z - c_i||² = d_i²` linearizes them to `C z = ½ [(||c_i||² - mean||c||²) - (d_i² - mean d²)]`,
/// solved with the pseudoinverse of the centered landmark matrix `C`.
pub fn classical_lateration(landmarks: &Configuration, d2_to_landmarks: &[f64]) -> Result<Vec<f64>> {
    let m = landmarks.len();
    let p = landmarks.dim();
    if d2_to_landmarks.len() != m {
        return invalid(format!("{m} landmarks but {} dissimilarities", d2_to_landmarks.len()));
    }
    if m < p + 1 {
        return invalid(format!("lateration in R^{p} needs at least {} landmarks, got {m}", p + 1));
    }
    let mean = landmarks.centroid();
    let centered = DMatrix::from_fn(m, p, |i, k| landmarks.point(i)[k] - mean[k]);
    let norms: Vec<f64> = (0..m).map(|i| centered.row(i).norm_squared()).collect();
    let mean_norm = norms.iter().sum::<f64>() / m as f64;
    let mean_d2 = d2_to_landmarks.iter().sum::<f64>() / m as f64;
    let rhs = DVector::from_fn(m, |i, _| 0.5 * ((norms[i] - mean_norm) - (d2_to_landmarks[i] - mean_d2)));

    let d = svd(&centered);
    let smax = d.max();
    let smin = d.min();
    if smax.is_nan() || smax <= 0.0 || smin / smax <= LATERATION_COND_TOL {
        return Err(Error::DegenerateLandmarks(format!(
            "singular value ratio {:e} at or below {LATERATION_COND_TOL:e}",
            if smax > 0.0 { smin / smax } else { 0.0 }
        )));
    }
    let mut w = d.u.transpose() * rhs;
    for (k, s) in d.s.iter().enumerate() {
        w[k] /= s;
    }
    let z = d.v * w;
    Ok(mean.iter().zip(z.iter()).map(|(a, b)| a + b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{embedding_error, pairwise_sq_dists, procrustes_align, shape_stats, RigidTransform};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg<P: AsRef<[f64]>>(points: &[P]) -> Configuration {
        Configuration::from_points(points).unwrap()
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let x = cfg(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]);
        let out = classical_scaling(&pairwise_sq_dists(&x), 2).unwrap();
        let d = pairwise_sq_dists(&out.config);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((d[(i, j)].sqrt() - 1.0).abs() <= 1e-12);
                }
            }
        }
        assert!(out.eigenvalues[0] >= out.eigenvalues[1]);
        // the double eigenvalue is fully retained in R², split by a 1D embedding
        assert!(!out.eigen_tie);
        assert!(classical_scaling(&pairwise_sq_dists(&x), 1).unwrap().eigen_tie);
    }

    #[test]
    fn collinear_in_one_dimension() {
        let x = cfg(&[[0.0], [1.0], [2.0]]);
        let out = classical_scaling(&pairwise_sq_dists(&x), 1).unwrap();
        assert!(procrustes_align(&x, &out.config).unwrap().error <= 1e-20);
        assert!(out.residual <= 1e-12);
    }

    #[test]
    fn rejects_bad_matrices() {
        let mut d = DMatrix::from_row_slice(3, 3, &[0., 1., 4., 1., 0., 1., 4., 1., 0.]);
        assert!(classical_scaling(&d, 2).is_ok());
        assert!(classical_scaling(&d, 3).is_err());
        d[(0, 1)] = 1.5;
        assert!(classical_scaling(&d, 1).is_err());
        let mut d = DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]);
        d[(1, 1)] = 1e-3;
        assert!(classical_scaling(&d, 1).is_err());
    }

    #[test]
    fn clamps_negative_eigenvalues() {
        // violates the triangle inequality badly: not Euclidean
        let d = DMatrix::from_row_slice(3, 3, &[0., 1., 100., 1., 0., 1., 100., 1., 0.]);
        let out = classical_scaling(&d, 2).unwrap();
        assert!(out.eigenvalues[1] < 0.0);
        assert!(out.residual > 0.0);
        assert!(out.config.coords().iter().all(|v| v.is_finite()));
        // the clamped axis collapses to zero
        assert!(out.config.points().all(|pt| pt[1] == 0.0));
    }

    #[test]
    fn deterministic_sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = Configuration::random_gaussian(8, 3, 1.0, &mut rng).unwrap();
        let a = classical_scaling(&pairwise_sq_dists(&x), 3).unwrap();
        let b = classical_scaling(&pairwise_sq_dists(&x), 3).unwrap();
        assert_eq!(a, b);
        for axis in 0..3 {
            let first = a.config.points().map(|p| p[axis]).find(|v| v.abs() > 1e-12).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn lateration_square_center() {
        let lm = cfg(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let y = classical_lateration(&lm, &[0.5; 4]).unwrap();
        assert!((y[0] - 0.5).abs() <= 1e-12 && (y[1] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn lateration_simplex_centroid() {
        // regular simplex in R^3: alternate cube corners
        let lm = cfg(&[[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]);
        let y = classical_lateration(&lm, &[3.0; 4]).unwrap();
        assert!(y.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn lateration_errors() {
        let line = cfg(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert!(matches!(
            classical_lateration(&line, &[1.0, 1.0, 1.0]),
            Err(Error::DegenerateLandmarks(_))
        ));
        let two = cfg(&[[0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(classical_lateration(&two, &[1.0, 1.0]), Err(Error::InvalidInput(_))));
        let tri = cfg(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(classical_lateration(&tri, &[1.0, 1.0]).is_err());
    }

    /// Minimizes the centered residual `Σ (r_i - r̄)²`, `r_i = d_i² - ||y - y_i||²`,
    /// on a grid around the landmarks, then polishes the best cell with a
    /// shrinking pattern search. Centering removes the `||y||²` term shared by
    /// all equations; this is the objective classical lateration solves exactly.
    fn grid_lateration_oracle(lm: &Configuration, d2: &[f64]) -> [f64; 2] {
        let obj = |y: [f64; 2]| -> f64 {
            let r: Vec<f64> = lm
                .points()
                .zip(d2)
                .map(|(p, d)| d - (y[0] - p[0]).powi(2) - (y[1] - p[1]).powi(2))
                .collect();
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            r.iter().map(|v| (v - mean).powi(2)).sum()
        };
        let (mut best, mut fbest) = ([0.0, 0.0], f64::INFINITY);
        let steps = 400;
        for a in 0..=steps {
            for b in 0..=steps {
                let y = [-2.0 + 4.0 * a as f64 / steps as f64, -2.0 + 4.0 * b as f64 / steps as f64];
                let f = obj(y);
                if f < fbest {
                    best = y;
                    fbest = f;
                }
            }
        }
        let mut h = 4.0 / steps as f64;
        while h > 1e-13 {
            let mut moved = false;
            for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h), (-h, -h), (h, -h), (-h, h)] {
                let y = [best[0] + dx, best[1] + dy];
                let f = obj(y);
                if f < fbest {
                    best = y;
                    fbest = f;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        best
    }

    /// Accuracy bound check: the ratio `||ŷ - x||² ω² / (ρ²ν² + ζ⁴/m)` is
    /// calibrated on one batch and must hold, with a factor-2 margin, on a fresh batch.
    #[test]
    fn perturbed_lateration_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draw = |rng: &mut ChaCha8Rng| {
            let m = 6;
            let x_lm = Configuration::from_points(
                &(0..m).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect::<Vec<_>>(),
            )
            .unwrap();
            let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let nu_scale = 1e-3;
            let y_lm = Configuration::from_points(
                &x_lm
                    .points()
                    .map(|p| [p[0] + nu_scale * rng.random_range(-1.0..1.0), p[1] + nu_scale * rng.random_range(-1.0..1.0)])
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let d2: Vec<f64> = x_lm
                .points()
                .map(|p| (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2) + 1e-3 * rng.random_range(-1.0..1.0))
                .collect();
            let y = classical_lateration(&y_lm, &d2).unwrap();
            let shape = shape_stats(&x_lm).unwrap();
            let nu2: f64 = x_lm.points().zip(y_lm.points()).map(|(a, b)| crate::geometry::sq_dist(a, b)).sum();
            let zeta4: f64 = x_lm
                .points()
                .zip(&d2)
                .map(|(p, d)| (d - (x[0] - p[0]).powi(2) - (x[1] - p[1]).powi(2)).powi(2))
                .sum();
            let err = (y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2);
            let rhs = (shape.diameter.powi(2) * nu2 + zeta4 / m as f64) / shape.width.powi(2);
            let oracle = grid_lateration_oracle(&y_lm, &d2);
            assert!((oracle[0] - y[0]).abs() <= 1e-6 && (oracle[1] - y[1]).abs() <= 1e-6, "oracle {oracle:?} vs {y:?}");
            err / rhs
        };
        let calibrated = (0..100).map(|_| draw(&mut rng)).fold(0.0, f64::max);
        for _ in 0..100 {
            assert!(draw(&mut rng) <= 2.0 * calibrated);
        }
        assert!(calibrated.is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lateration_is_rigid_equivariant(seed in any::<u64>(), m in 3usize..12, dim in 1usize..4) {
            prop_assume!(m > dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lm = Configuration::random_gaussian(m, dim, 1.0, &mut rng).unwrap();
            let x = Configuration::random_gaussian(1, dim, 1.0, &mut rng).unwrap();
            let noisy: Vec<f64> = lm.points().map(|p| crate::geometry::sq_dist(p, x.point(0)) * (1.0 + 0.01 * rng.random::<f64>())).collect();
            let g = RigidTransform::random(dim, 2.0, &mut rng);
            let y = classical_lateration(&lm, &noisy).unwrap();
            let gy = classical_lateration(&lm.transformed(&g).unwrap(), &noisy).unwrap();
            let expect = g.apply(&y);
            // rounding in the least-squares solve grows with the landmark conditioning
            let c = lm.centroid();
            let sv = svd(&DMatrix::from_fn(m, dim, |i, k| lm.point(i)[k] - c[k]));
            let cond = sv.max() / sv.min();
            let scale = 1.0 + expect.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for (a, b) in gy.iter().zip(&expect) {
                prop_assert!((a - b).abs() <= 1e-12 * cond * cond * scale);
            }
        }

        #[test]
        fn lateration_ignores_landmark_order(seed in any::<u64>(), m in 4usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lm = Configuration::random_gaussian(m, 2, 1.0, &mut rng).unwrap();
            let d2: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..4.0)).collect();
            let mut perm: Vec<usize> = (0..m).collect();
            perm.reverse();
            perm.swap(0, m / 2);
            let lm2 = lm.select(&perm).unwrap();
            let d2b: Vec<f64> = perm.iter().map(|&k| d2[k]).collect();
            let a = classical_lateration(&lm, &d2).unwrap();
            let b = classical_lateration(&lm2, &d2b).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
            }
        }

        #[test]
        fn scaling_recovers_realizable_configurations(seed in any::<u64>(), m in 3usize..25, dim in 1usize..4) {
            prop_assume!(m > dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Configuration::random_gaussian(m, dim, 1.0, &mut rng).unwrap();
            let rho2 = shape_stats(&x).unwrap().diameter.powi(2);
            let out = classical_scaling(&pairwise_sq_dists(&x), dim).unwrap();
            let err = procrustes_align(&x, &out.config).unwrap().error;
            prop_assert!(err <= 1e-18 * m as f64 * rho2, "err {err}");
            prop_assert!(embedding_error(&out.config, &x).unwrap() <= 1e-18 * rho2);
        }
    }
}
