//! Point configurations and the rigid-group geometry around them.

mod io;
mod procrustes;
pub(crate) mod svd;
mod shape;

pub use procrustes::{embedding_error, procrustes_align, Alignment};
pub use shape::{convex_hull_2d, in_general_position, shape_stats, ShapeStats, DEFAULT_COND_TOL};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// An ordered set of `n` points in `R^p`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    coords: Vec<f64>,
    n: usize,
    dim: usize,
}

impl Configuration {
    /// Builds a configuration from `n * dim` row-major coordinates.
    pub fn new(n: usize, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return invalid("configuration needs at least one point");
        }
        if dim == 0 {
            return invalid("configuration dimension must be at least 1");
        }
        if coords.len() != n * dim {
            return invalid(format!(
                "expected {} coordinates for {n} points in R^{dim}, got {}",
                n * dim,
                coords.len()
            ));
        }
        if let Some(bad) = coords.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite coordinate in point {}", bad / dim));
        }
        Ok(Self { coords, n, dim })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let Some(first) = points.first() else {
            return invalid("configuration needs at least one point");
        };
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, pt) in points.iter().enumerate() {
            let pt = pt.as_ref();
            if pt.len() != dim {
                return invalid(format!(
                    "point {i} has dimension {}, expected {dim}",
                    pt.len()
                ));
            }
            coords.extend_from_slice(pt);
        }
        Self::new(points.len(), dim, coords)
    }

    /// Rows of `m` are the points.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let (n, dim) = m.shape();
        let mut coords = Vec::with_capacity(n * dim);
        for i in 0..n {
            coords.extend(m.row(i).iter().copied());
        }
        Self::new(n, dim, coords)
    }

    /// `n` i.i.d. standard normal points scaled by `scale`.
    pub fn random_gaussian<R: Rng + ?Sized>(n: usize, dim: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let coords = (0..n * dim)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::new(n, dim, coords)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a configuration holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.dim, &self.coords)
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for pt in self.points() {
            for (acc, v) in c.iter_mut().zip(pt) {
                *acc += v;
            }
        }
        let n = self.n as f64;
        c.iter_mut().for_each(|v| *v /= n);
        c
    }

    /// Sub-configuration made of the listed points, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.n {
                return invalid(format!("point index {i} out of range (n = {})", self.n));
            }
            coords.extend_from_slice(self.point(i));
        }
        Self::new(indices.len(), self.dim, coords)
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.dim, self.coords.iter().map(|v| v * factor).collect())
    }

    pub fn transformed(&self, g: &RigidTransform) -> Result<Self> {
        if g.dim() != self.dim {
            return invalid(format!(
                "transform acts on R^{}, configuration lives in R^{}",
                g.dim(),
                self.dim
            ));
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for pt in self.points() {
            coords.extend(g.apply(pt));
        }
        Self::new(self.n, self.dim, coords)
    }

    /// Sum of squared distances to the centroid.
    pub fn centered_sq_norm(&self) -> f64 {
        let c = self.centroid();
        self.points().map(|pt| sq_dist(pt, &c)).sum()
    }
}

/// `x -> Q x + t` with `Q` orthogonal. Reflections are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidTransform {
    orthogonal: DMatrix<f64>,
    translation: DVector<f64>,
}

impl RigidTransform {
    pub const ORTHOGONALITY_TOL: f64 = 1e-10;

    pub fn new(orthogonal: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let p = orthogonal.nrows();
        if p == 0 || orthogonal.ncols() != p || translation.len() != p {
            return invalid("rigid transform needs a square p x p matrix and a p-vector");
        }
        let gram = orthogonal.transpose() * &orthogonal;
        let dev = (gram - DMatrix::identity(p, p)).amax();
        if !dev.is_finite() || dev > Self::ORTHOGONALITY_TOL {
            return invalid(format!("matrix is not orthogonal (max |Q^T Q - I| = {dev:e})"));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite translation");
        }
        Ok(Self {
            orthogonal,
            translation,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            orthogonal: DMatrix::identity(dim, dim),
            translation: DVector::zeros(dim),
        }
    }

    /// Counter-clockwise rotation by `angle` followed by a translation.
    pub fn rotation_2d(angle: f64, translation: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            orthogonal: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
            translation: DVector::from_column_slice(&translation),
        }
    }

    /// Random element of the full orthogonal group (Haar measure via QR with sign fix),
    /// with a Gaussian translation of scale `shift`.
    pub fn random<R: Rng + ?Sized>(dim: usize, shift: f64, rng: &mut R) -> Self {
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = a.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        let translation = DVector::from_fn(dim, |_, _| shift * rng.sample::<f64, _>(StandardNormal));
        Self {
            orthogonal: q,
            translation,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn orthogonal(&self) -> &DMatrix<f64> {
        &self.orthogonal
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn determinant(&self) -> f64 {
        self.orthogonal.determinant()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let p = self.dim();
        (0..p)
            .map(|r| {
                let mut acc = self.translation[r];
                for (c, v) in x.iter().enumerate() {
                    acc += self.orthogonal[(r, c)] * v;
                }
                acc
            })
            .collect()
    }

    pub fn inverse(&self) -> Self {
        let qt = self.orthogonal.transpose();
        let translation = -(&qt * &self.translation);
        Self {
            orthogonal: qt,
            translation,
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            orthogonal: &self.orthogonal * &other.orthogonal,
            translation: &self.orthogonal * &other.translation + &self.translation,
        }
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Symmetric matrix of squared Euclidean distances.
pub fn pairwise_sq_dists(config: &Configuration) -> DMatrix<f64> {
    let n = config.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sq_dist(config.point(i), config.point(j));
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}
