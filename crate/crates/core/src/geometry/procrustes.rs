use nalgebra::{DMatrix, DVector};

use super::svd::svd;
use super::{sq_dist, Configuration, RigidTransform};
use crate::error::{invalid, Result};

/// Optimal rigid map and the residual it attains.
#[derive(Clone, Debug)]
pub struct Alignment {
    pub transform: RigidTransform,
    /// `Σ_i ||target_i - g(source_i)||²`, evaluated directly at the optimum.
    pub error: f64,
}

/// Finds `g(x) = Qx + t` (Q orthogonal, reflections allowed) minimizing
/// `Σ_i ||target_i - g(source_i)||²`.
///
/// Both configurations are centered and `Q` is the polar factor of the
/// cross-covariance `Σ (y_i - ȳ)(x_i - x̄)ᵀ`, obtained from its SVD. When
/// either side collapses to a single location the rotation is the identity
/// and only the means are matched.
pub fn procrustes_align(source: &Configuration, target: &Configuration) -> Result<Alignment> {
    if source.len() != target.len() || source.dim() != target.dim() {
        return invalid(format!(
            "cannot align {} points in R^{} with {} points in R^{}",
            source.len(),
            source.dim(),
            target.len(),
            target.dim()
        ));
    }
    let p = source.dim();
    let xm = source.centroid();
    let ym = target.centroid();

    let mut cross = DMatrix::<f64>::zeros(p, p);
    let mut spread = 0.0f64;
    for (x, y) in source.points().zip(target.points()) {
        for r in 0..p {
            let yc = y[r] - ym[r];
            for c in 0..p {
                cross[(r, c)] += yc * (x[c] - xm[c]);
            }
        }
        spread = spread.max(sq_dist(x, &xm)).max(sq_dist(y, &ym));
    }

    let orthogonal = if spread == 0.0 || cross.amax() == 0.0 {
        DMatrix::identity(p, p)
    } else {
        let d = svd(&cross);
        d.u * d.v.transpose()
    };
    let xm_v = DVector::from_column_slice(&xm);
    let translation = DVector::from_column_slice(&ym) - &orthogonal * xm_v;
    let transform = RigidTransform {
        orthogonal,
        translation,
    };
    let error = source
        .points()
        .zip(target.points())
        .map(|(x, y)| sq_dist(y, &transform.apply(x)))
        .sum();
    Ok(Alignment { transform, error })
}

/// `(1/n) min_g Σ_i ||embedded_i - g(latent_i)||²`.
pub fn embedding_error(embedded: &Configuration, latent: &Configuration) -> Result<f64> {
    let a = procrustes_align(latent, embedded)?;
    Ok(a.error / latent.len() as f64)
}
