//! Dense symmetric linear algebra with deterministic conventions.
//!
//! Eigendecompositions are sorted ascending with a fixed sign convention
//! (first component of significant magnitude made positive) so that atom
//! lists and exported tables are reproducible across runs.

use nalgebra::{DMatrix, DVector};

/// Sorted symmetric eigendecomposition: `values[j]` ascending, `vectors`
/// columns orthonormal with the sign convention applied.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Full symmetric eigendecomposition, ascending, deterministic signs.
pub fn sym_eigen(m: &DMatrix<f64>) -> SymEigen {
    let n = m.nrows();
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (out, &idx) in order.iter().enumerate() {
        values.push(se.eigenvalues[idx]);
        let col = se.eigenvectors.column(idx);
        // First component with significant magnitude decides the sign.
        let scale = col.amax();
        let sign = col
            .iter()
            .find(|x| x.abs() > 1e-12 * scale)
            .map(|x| if *x < 0.0 { -1.0 } else { 1.0 })
            .unwrap_or(1.0);
        for i in 0..n {
            vectors[(i, out)] = sign * col[i];
        }
    }
    SymEigen { values, vectors }
}

impl SymEigen {
    /// Reconstruction residual `‖M − Σ λ ξ ξ*‖_max`.
    pub fn reconstruction_residual(&self, m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        let mut rec = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.vectors.column(j);
            rec += self.values[j] * &col * col.transpose();
        }
        max_abs_diff(&rec, m)
    }
}

/// SPD solve via Cholesky; `None` when the matrix is not positive definite.
pub fn cholesky_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().cholesky().map(|ch| ch.solve(b))
}

/// SPD inverse via Cholesky.
pub fn cholesky_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().cholesky().map(|ch| ch.inverse())
}

/// Conjugate gradients with Jacobi preconditioning, for SPD systems too
/// large for a dense factorization.
pub fn cg_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64, max_iter: usize) -> DVector<f64> {
    let n = b.len();
    let inv_diag: DVector<f64> = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let d = a[(i, i)];
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        }),
    );
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let b_norm = b.norm().max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        if r.norm() <= tol * b_norm {
            break;
        }
        let ap = a * &p;
        let alpha = rz / p.dot(&ap);
        x += alpha * &p;
        r -= alpha * &ap;
        z = r.component_mul(&inv_diag);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + beta * &p;
    }
    x
}

/// Spectral norm (largest singular value).
///
/// Blocks that are structurally a single entry or a single column reduce
/// exactly; everything else goes through the SVD.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let mut nonzero_cols: Vec<usize> = Vec::new();
    let mut nonzero_count = 0usize;
    let mut last = (0usize, 0usize);
    for j in 0..m.ncols() {
        let mut col_used = false;
        for i in 0..m.nrows() {
            if m[(i, j)] != 0.0 {
                nonzero_count += 1;
                last = (i, j);
                col_used = true;
            }
        }
        if col_used {
            nonzero_cols.push(j);
        }
    }
    match (nonzero_count, nonzero_cols.len()) {
        (0, _) => 0.0,
        (1, _) => m[last].abs(),
        (_, 1) => m.column(nonzero_cols[0]).norm(),
        _ => m.clone().svd(false, false).singular_values.max(),
    }
}

/// Orthonormal basis of the zero-sum (balanced) subspace of `ℝ^j`,
/// returned as the columns of a `j × (j−1)` matrix (Helmert construction).
pub fn balanced_basis(j: usize) -> DMatrix<f64> {
    assert!(j >= 1);
    let mut b = DMatrix::zeros(j, j.saturating_sub(1));
    for k in 1..j {
        let norm = (k as f64 * (k as f64 + 1.0)).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = 1.0 / norm;
        }
        b[(k, k - 1)] = -(k as f64) / norm;
    }
    b
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut m: f64 = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        m = m.max((x - y).abs());
    }
    m
}

/// Largest absolute deviation of a matrix from the identity.
pub fn max_abs_diff_identity(a: &DMatrix<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            m = m.max((a[(i, j)] - target).abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let e = sym_eigen(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = e.vectors.transpose() * &e.vectors;
        assert!(max_abs_diff_identity(&gram) < 1e-12);
        assert!(e.reconstruction_residual(&m) < 1e-12);
        // known spectrum 2 − √2, 2, 2 + √2
        assert_relative_eq!(e.values[0], 2.0 - 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(e.values[2], 2.0 + 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn eigen_signs_are_deterministic() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.5]);
        let a = sym_eigen(&m);
        let b = sym_eigen(&m);
        assert_eq!(a.vectors, b.vectors);
        for j in 0..2 {
            let col = a.vectors.column(j);
            let first = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn cg_matches_cholesky() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 5.0]);
        let b = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let x_ch = cholesky_solve(&a, &b).unwrap();
        let x_cg = cg_solve(&a, &b, 1e-14, 100);
        assert!((x_ch - x_cg).amax() < 1e-10);
    }

    #[test]
    fn spectral_norm_fast_paths() {
        let mut single = DMatrix::zeros(3, 2);
        single[(2, 1)] = -8.0;
        assert_eq!(spectral_norm(&single), 8.0);

        let mut col = DMatrix::zeros(3, 2);
        col[(0, 0)] = 3.0;
        col[(2, 0)] = 4.0;
        assert_eq!(spectral_norm(&col), 5.0);

        let dense = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let gram: DMatrix<f64> = dense.transpose() * &dense;
        let direct = gram.symmetric_eigen().eigenvalues.max().sqrt();
        assert_relative_eq!(spectral_norm(&dense), direct, epsilon = 1e-12);
    }

    #[test]
    fn balanced_basis_is_orthonormal_and_zero_sum() {
        let b = balanced_basis(5);
        let gram = b.transpose() * &b;
        assert!(max_abs_diff_identity(&gram) < 1e-12);
        for j in 0..4 {
            let sum: f64 = b.column(j).iter().sum();
            assert!(sum.abs() < 1e-12);
        }
    }
}
