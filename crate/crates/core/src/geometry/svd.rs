//! One-sided Jacobi SVD for the small dense matrices used here (at most a few
//! hundred rows and a handful of columns). It converges to full working
//! precision, which nalgebra's bidiagonal SVD does not always reach.

use nalgebra::DMatrix;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) Vᵀ` with singular values in descending order.
/// `U` is `m × k`, `V` is `n × k`, `k = min(m, n)`; columns of `U` belonging
/// to zero singular values are completed to an orthonormal set.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn min(&self) -> f64 {
        self.s.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }
}

pub(crate) fn svd(a: &DMatrix<f64>) -> Svd {
    if a.nrows() < a.ncols() {
        let t = svd(&a.transpose());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (m, n) = a.shape();
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = u.column(i).norm_squared();
                let beta = u.column(j).norm_squared();
                let gamma = u.column(i).dot(&u.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut u, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, i)], mat[(r, j)]);
                        mat[(r, i)] = c * x - s * y;
                        mat[(r, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|k| u.column(k).norm()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let top = norms[idx[0]];
    let mut uu = DMatrix::<f64>::zeros(m, n);
    let mut vv = DMatrix::<f64>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &c) in idx.iter().enumerate() {
        s.push(norms[c]);
        vv.set_column(k, &v.column(c));
        if norms[c] > f64::EPSILON * top * m as f64 && norms[c] > 0.0 {
            uu.set_column(k, &(u.column(c) / norms[c]));
        } else {
            missing.push(k);
        }
    }
    // complete the left basis with Gram-Schmidt on unit vectors
    let mut e = 0;
    for k in missing {
        while e < m {
            let mut cand = DMatrix::<f64>::zeros(m, 1);
            cand[(e, 0)] = 1.0;
            e += 1;
            for _ in 0..2 {
                for q in 0..n {
                    if q != k {
                        let col = uu.column(q).clone_owned();
                        let proj = col.dot(&cand.column(0));
                        cand.column_mut(0).axpy(-proj, &col, 1.0);
                    }
                }
            }
            let nrm = cand.column(0).norm();
            if nrm > 1e-8 {
                uu.set_column(k, &(cand.column(0) / nrm));
                break;
            }
        }
    }
    Svd { u: uu, s, v: vv }
}
