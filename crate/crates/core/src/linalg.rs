//! One-sided Jacobi SVD for small square matrices.

use ndarray::Array2;

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Array2<f64>,
    /// Singular values in descending order.
    pub sigma: Vec<f64>,
    pub v: Array2<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// `a = u · diag(sigma) · vᵀ` with orthogonal `u` and `v`.
///
/// Columns of `u` belonging to zero singular values are completed to an
/// orthonormal basis, so `u` is orthogonal even for rank-deficient input.
pub fn svd(a: &Array2<f64>) -> Svd {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "svd expects a square matrix");
    // column-major working copies
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).to_vec()).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut sweeps = 0;
    let mut converged = n < 2;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..n {
                        alpha += cp[k] * cp[k];
                        beta += cq[k] * cq[k];
                        gamma += cp[k] * cq[k];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOLERANCE * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let scale = norms.iter().copied().fold(0.0, f64::max);
    let cutoff = scale * n as f64 * f64::EPSILON;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for &j in &order {
        sigma.push(norms[j]);
        v_cols.push(vcols[j].clone());
        if norms[j] > cutoff {
            u_cols.push(cols[j].iter().map(|x| x / norms[j]).collect());
        } else {
            missing.push(u_cols.len());
            u_cols.push(vec![0.0; n]);
        }
    }
    complete_basis(&mut u_cols, &missing);

    let u = Array2::from_shape_fn((n, n), |(i, j)| u_cols[j][i]);
    let v = Array2::from_shape_fn((n, n), |(i, j)| v_cols[j][i]);
    Svd {
        u,
        sigma,
        v,
        sweeps,
        converged,
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for k in 0..cp.len() {
        let (x, y) = (cp[k], cq[k]);
        cp[k] = c * x - s * y;
        cq[k] = s * x + c * y;
    }
}

/// Fill the columns listed in `missing` with unit vectors orthogonal to all
/// other columns, trying standard basis vectors in order.
fn complete_basis(cols: &mut [Vec<f64>], missing: &[usize]) {
    let n = cols.len();
    let mut filled: Vec<bool> = (0..n).map(|j| !missing.contains(&j)).collect();
    let mut candidate = 0;
    for &slot in missing {
        while candidate < n {
            let mut v: Vec<f64> = (0..n).map(|i| if i == candidate { 1.0 } else { 0.0 }).collect();
            candidate += 1;
            // two passes of Gram-Schmidt for stability
            for _ in 0..2 {
                for (j, col) in cols.iter().enumerate() {
                    if filled[j] {
                        let dot: f64 = col.iter().zip(&v).map(|(a, b)| a * b).sum();
                        for (x, c) in v.iter_mut().zip(col) {
                            *x -= dot * c;
                        }
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols[slot] = v.into_iter().map(|x| x / norm).collect();
                filled[slot] = true;
                break;
            }
        }
    }
}

/// `‖mᵀm − I‖_F`
pub fn orthogonality_defect(m: &Array2<f64>) -> f64 {
    let gram = m.t().dot(m);
    let eye = Array2::<f64>::eye(m.ncols());
    (&gram - &eye).mapv(|x| x * x).sum().sqrt()
}
