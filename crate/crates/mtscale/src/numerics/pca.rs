//! Two-component PCA via an explicit covariance matrix and a cyclic Jacobi
//! eigensolver.
//!
//! The Jacobi iteration costs O(n^3) per sweep on an n x n symmetric
//! matrix, so the eigenproblem is posed on whichever side is smaller: the
//! D x D covariance when there are at least as many rows as columns, or the
//! T x T Gram matrix when the data is wider than it is tall (the usual case
//! for a few hundred recorded units over a hundred steps). The two
//! formulations share their nonzero spectrum exactly; a Gram eigenvector v
//! maps to the covariance eigenvector X'v / |X'v|. Covariance uses the
//! sample convention (divisor `T - 1`).

use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Result of [`pca_2d`].
#[derive(Debug, Clone)]
pub struct Pca2d {
    /// Centered data projected onto the two leading components, `T x 2`.
    pub projected: Matrix,
    /// The two leading eigenvalues of the sample covariance, non-increasing.
    pub explained_variance: Vector,
    /// Component vectors as columns, `D x 2`, orthonormal. Sign convention:
    /// the largest-magnitude entry of each component is positive.
    pub components: Matrix,
    /// Trace of the covariance matrix (total variance over all dimensions);
    /// divide `explained_variance` entries by this for variance fractions.
    pub total_variance: f64,
}

/// Project `data` (`T x D`, observations in rows) onto its two leading
/// principal components.
///
/// Columns are mean-centered first. Zero-variance input is not an error: it
/// yields all-zero projections, `explained_variance = [0, 0]` and canonical
/// basis vectors as components. Requires `T >= 2` and `D >= 2`.
pub fn pca_2d(data: &Matrix) -> Result<Pca2d> {
    let t = data.rows();
    let d = data.cols();
    if t < 2 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "pca_2d needs at least 2 rows and 2 columns, got {t}x{d}"
        )));
    }

    // Column means, then a centered copy.
    let mut means = vec![0.0; d];
    for r in 0..t {
        for (m, &v) in means.iter_mut().zip(data.row(r)) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= t as f64;
    }
    let mut centered = Matrix::zeros(t, d);
    let mut max_abs_data = 0.0f64;
    for r in 0..t {
        let src = data.row(r);
        let dst = centered.row_mut(r);
        for j in 0..d {
            dst[j] = src[j] - means[j];
            max_abs_data = max_abs_data.max(src[j].abs());
        }
    }

    let divisor = (t - 1) as f64;
    let total_variance = centered.sq_norm() / divisor;

    // Constant input leaves centering residue of a few ulps; treat variance
    // at rounding-noise scale as exactly zero rather than eigensolving noise.
    let noise_floor = 1e-28 * (1.0 + max_abs_data * max_abs_data);
    if total_variance <= noise_floor {
        let mut components = Matrix::zeros(d, 2);
        components.set(0, 0, 1.0);
        components.set(1, 1, 1.0);
        return Ok(Pca2d {
            projected: Matrix::zeros(t, 2),
            explained_variance: Vector::from_vec(vec![0.0, 0.0]),
            components,
            total_variance: 0.0,
        });
    }

    let (explained_variance, components) = if d > t {
        dual_top2(&centered, divisor, total_variance)
    } else {
        primal_top2(&centered, divisor)
    };

    // Projection of the centered data onto the chosen components.
    let mut projected = Matrix::zeros(t, 2);
    for r in 0..t {
        let row = centered.row(r);
        for k in 0..2 {
            let mut acc = 0.0;
            for i in 0..d {
                acc += row[i] * components.get(i, k);
            }
            projected.set(r, k, acc);
        }
    }

    Ok(Pca2d {
        projected,
        explained_variance,
        components,
        total_variance,
    })
}

/// Flip component column `k` so its largest-magnitude entry is positive.
fn sign_fix(components: &mut Matrix, k: usize) {
    let d = components.rows();
    let mut arg = 0;
    for i in 1..d {
        if components.get(i, k).abs() > components.get(arg, k).abs() {
            arg = i;
        }
    }
    if components.get(arg, k) < 0.0 {
        for i in 0..d {
            let v = -components.get(i, k);
            components.set(i, k, v);
        }
    }
}

/// Top-2 eigenpairs of the D x D sample covariance (used when T >= D).
fn primal_top2(centered: &Matrix, divisor: f64) -> (Vector, Matrix) {
    let t = centered.rows();
    let d = centered.cols();
    let mut cov = Matrix::zeros(d, d);
    for r in 0..t {
        let row = centered.row(r);
        for i in 0..d {
            let xi = row[i];
            if xi != 0.0 {
                for j in i..d {
                    let v = cov.get(i, j) + xi * row[j];
                    cov.set(i, j, v);
                }
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / divisor;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }

    let (eigvals, eigvecs) = jacobi_eigen_sym(&cov);

    // Two leading eigenpairs; tiny negative eigenvalues are rounding noise.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigvals[b].total_cmp(&eigvals[a]));
    let top = [order[0], order[1]];
    let mut components = Matrix::zeros(d, 2);
    for (k, &col) in top.iter().enumerate() {
        for i in 0..d {
            components.set(i, k, eigvecs.get(i, col));
        }
        sign_fix(&mut components, k);
    }
    let explained = Vector::from_vec(vec![eigvals[top[0]].max(0.0), eigvals[top[1]].max(0.0)]);
    (explained, components)
}

/// Top-2 eigenpairs via the T x T Gram matrix (used when D > T). The
/// nonzero spectrum matches the covariance's; each Gram eigenvector is
/// mapped through the data and normalized to give the component direction.
fn dual_top2(centered: &Matrix, divisor: f64, total_variance: f64) -> (Vector, Matrix) {
    let t = centered.rows();
    let d = centered.cols();
    let mut gram = Matrix::zeros(t, t);
    for i in 0..t {
        let ri = centered.row(i);
        for j in i..t {
            let rj = centered.row(j);
            let mut acc = 0.0;
            for c in 0..d {
                acc += ri[c] * rj[c];
            }
            let v = acc / divisor;
            gram.set(i, j, v);
            gram.set(j, i, v);
        }
    }

    let (eigvals, eigvecs) = jacobi_eigen_sym(&gram);
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| eigvals[b].total_cmp(&eigvals[a]));
    let top = [order[0], order[1]];

    let mut components = Matrix::zeros(d, 2);
    let mut lams = [0.0; 2];
    for (k, &col) in top.iter().enumerate() {
        lams[k] = eigvals[col].max(0.0);
        // A spectrum tail at rounding-noise scale has no data direction;
        // leave the column for the orthonormal fill below.
        if lams[k] <= total_variance * 1e-14 {
            lams[k] = 0.0;
            continue;
        }
        let mut dir = vec![0.0; d];
        for r in 0..t {
            let w = eigvecs.get(r, col);
            if w != 0.0 {
                for (c, &x) in centered.row(r).iter().enumerate() {
                    dir[c] += w * x;
                }
            }
        }
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (i, v) in dir.iter().enumerate() {
            components.set(i, k, v / norm);
        }
        sign_fix(&mut components, k);
    }
    orthonormal_fill(&mut components);
    (Vector::from_vec(lams.to_vec()), components)
}

/// Replace any all-zero component column with a unit vector orthogonal to
/// the other column, so the returned pair is always orthonormal.
fn orthonormal_fill(components: &mut Matrix) {
    let d = components.rows();
    for k in 0..2 {
        let zero = (0..d).all(|i| components.get(i, k) == 0.0);
        if !zero {
            continue;
        }
        let other = 1 - k;
        // Gram-Schmidt a canonical basis vector against the other column;
        // try candidates until one keeps a healthy residual.
        for cand in 0..d {
            let mut v = vec![0.0; d];
            v[cand] = 1.0;
            let dot: f64 = (0..d).map(|i| v[i] * components.get(i, other)).sum();
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= dot * components.get(i, other);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.5 {
                for (i, vi) in v.iter().enumerate() {
                    components.set(i, k, vi / norm);
                }
                sign_fix(components, k);
                break;
            }
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matrix of eigenvectors (as columns), unsorted.
fn jacobi_eigen_sym(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.rows();
    assert_eq!(n, m.cols(), "jacobi_eigen_sym needs a square matrix");
    let mut a = m.clone();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    // One Givens rotation zeroing a[p][q], applied to rows/cols of `a` and
    // accumulated into the eigenvector columns of `v`.
    fn rotate(mat: &mut Matrix, i: usize, j: usize, k: usize, l: usize, s: f64, tau: f64) {
        let g = mat.get(i, j);
        let h = mat.get(k, l);
        mat.set(i, j, g - s * (h + g * tau));
        mat.set(k, l, h + s * (g - h * tau));
    }

    for sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += a.get(p, q).abs();
            }
        }
        if off == 0.0 {
            break;
        }
        let tresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = 100.0 * a.get(p, q).abs();
                // Late sweeps: a rotation that cannot change the diagonal at
                // machine precision just zeroes the entry.
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a.set(p, q, 0.0);
                } else if a.get(p, q).abs() > tresh {
                    let mut h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        a.get(p, q) / h
                    } else {
                        let theta = 0.5 * h / a.get(p, q);
                        let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            t = -t;
                        }
                        t
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    h = t * a.get(p, q);
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    a.set(p, q, 0.0);
                    for j in 0..p {
                        rotate(&mut a, j, p, j, q, s, tau);
                    }
                    for j in p + 1..q {
                        rotate(&mut a, p, j, j, q, s, tau);
                    }
                    for j in q + 1..n {
                        rotate(&mut a, p, j, q, j, s, tau);
                    }
                    for j in 0..n {
                        rotate(&mut v, j, p, j, q, s, tau);
                    }
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }
    (d, v)
}
