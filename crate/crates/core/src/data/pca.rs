//! Principal component analysis.
//!
//! The covariance matrix is formed explicitly. Small problems are
//! diagonalised with cyclic Jacobi sweeps; wide ones (image pixels) use block
//! subspace iteration with Rayleigh-Ritz projection, which only needs the top
//! few eigenpairs. Both paths are deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{gemm, DataError, Matrix};

/// Above this input dimension the subspace solver is used.
const DENSE_LIMIT: usize = 256;
const MAX_SUBSPACE_ITERS: usize = 3000;
/// Ritz residuals relative to the top eigenvalue.
const SUBSPACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `k x d`, orthonormal rows, descending explained variance.
    components: Matrix,
    explained_variance: Vec<f64>,
    total_variance: f64,
}

/// Eigensolver selection for [`PcaModel::fit_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Jacobi up to 256 input dimensions, subspace iteration above.
    Auto,
    Dense,
    Subspace,
}

impl PcaModel {
    pub fn fit(matrix: &Matrix, k: usize) -> Result<Self, DataError> {
        Self::fit_with(matrix, k, Solver::Auto)
    }

    pub fn fit_with(matrix: &Matrix, k: usize, solver: Solver) -> Result<Self, DataError> {
        let (n, d) = (matrix.rows(), matrix.cols());
        if k == 0 || k > d || k >= n {
            return Err(DataError::Invalid(format!(
                "cannot extract {k} components from {n} rows of dimension {d}"
            )));
        }
        let mean = matrix.column_means();
        let mut centered = matrix.clone();
        for i in 0..n {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
                *v -= m;
            }
        }
        let mut cov = gemm(d, n, d, centered.as_slice(), (1, d), centered.as_slice(), (d, 1));
        let scale = 1.0 / (n - 1) as f64;
        cov.iter_mut().for_each(|v| *v *= scale);
        let total_variance: f64 = (0..d).map(|i| cov[i * d + i]).sum();
        if total_variance <= 0.0 {
            return Err(DataError::Degenerate);
        }

        let use_dense = match solver {
            Solver::Dense => true,
            Solver::Subspace => false,
            Solver::Auto => d <= DENSE_LIMIT,
        };
        let (values, vectors) =
            if use_dense { top_eigen_dense(&cov, d, k) } else { top_eigen_subspace(&cov, d, k) };

        let mut components = Matrix::new(k, d, vectors)?;
        for i in 0..k {
            let row = components.row_mut(i);
            let pivot = row.iter().enumerate().fold(0, |best, (j, v)| if v.abs() > row[best].abs() { j } else { best });
            if row[pivot] < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(Self { mean, components, explained_variance: values, total_variance })
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn num_components(&self) -> usize {
        self.components.rows()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &Matrix {
        &self.components
    }

    /// Covariance eigenvalues of the kept components (unbiased, `1/(N-1)`).
    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Trace of the training covariance.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// `(row - mean) components^T` for every row.
    pub fn transform(&self, matrix: &Matrix) -> Result<Matrix, DataError> {
        let d = self.input_dim();
        if matrix.cols() != d {
            return Err(DataError::Invalid(format!("expected {d} columns, got {}", matrix.cols())));
        }
        let mut centered = matrix.clone();
        for i in 0..matrix.rows() {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&self.mean) {
                *v -= m;
            }
        }
        let k = self.num_components();
        let out = gemm(matrix.rows(), d, k, centered.as_slice(), (d, 1), self.components.as_slice(), (1, d));
        Matrix::new(matrix.rows(), k, out)
    }

    /// Maps projected coordinates back to the input space.
    pub fn inverse_transform(&self, projected: &Matrix) -> Result<Matrix, DataError> {
        let (k, d) = (self.num_components(), self.input_dim());
        if projected.cols() != k {
            return Err(DataError::Invalid(format!("expected {k} columns, got {}", projected.cols())));
        }
        let mut out = gemm(projected.rows(), k, d, projected.as_slice(), (k, 1), self.components.as_slice(), (d, 1));
        for row in out.chunks_exact_mut(d) {
            for (v, m) in row.iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Matrix::new(projected.rows(), d, out)
    }
}

/// Eigen-decomposition of a small symmetric `n x n` matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in descending order and the matching
/// eigenvectors as the rows of an `n x n` row-major matrix.
pub(crate) fn jacobi_eigen(sym: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = sym.to_vec();
    // columns of v are eigenvectors
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum::<f64>().sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (arp, arq) = (a[r * n + p], a[r * n + q]);
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let (apr, aqr) = (a[p * n + r], a[q * n + r]);
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                for r in 0..n {
                    let (vrp, vrq) = (v[r * n + p], v[r * n + q]);
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend((0..n).map(|r| v[r * n + i]));
    }
    (values, vectors)
}

fn top_eigen_dense(cov: &[f64], d: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let (values, vectors) = jacobi_eigen(cov, d);
    (values[..k].to_vec(), vectors[..k * d].to_vec())
}

/// Orthonormalises the columns of a row-major `rows x cols` block in place
/// (modified Gram-Schmidt, applied twice).
fn orthonormalize_columns(block: &mut [f64], rows: usize, cols: usize) {
    for _ in 0..2 {
        for j in 0..cols {
            for prev in 0..j {
                let dot: f64 = (0..rows).map(|r| block[r * cols + j] * block[r * cols + prev]).sum();
                for r in 0..rows {
                    block[r * cols + j] -= dot * block[r * cols + prev];
                }
            }
            let norm = (0..rows).map(|r| block[r * cols + j].powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 {
                for r in 0..rows {
                    block[r * cols + j] /= norm;
                }
            }
        }
    }
}

fn top_eigen_subspace(cov: &[f64], d: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let p = (2 * k + 8).min(d);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5043_4131);
    let mut basis: Vec<f64> = (0..d * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthonormalize_columns(&mut basis, d, p);

    let mut ritz_values = vec![0.0; p];
    let mut ritz_vectors = basis.clone();
    for _ in 0..MAX_SUBSPACE_ITERS {
        let image = gemm(d, d, p, cov, (d, 1), &basis, (p, 1));
        let mut projected = gemm(p, d, p, &basis, (1, p), &image, (p, 1));
        for i in 0..p {
            for j in i + 1..p {
                let avg = 0.5 * (projected[i * p + j] + projected[j * p + i]);
                projected[i * p + j] = avg;
                projected[j * p + i] = avg;
            }
        }
        let (values, rotation) = jacobi_eigen(&projected, p);
        // rotation rows are eigenvectors; as a p x p matrix its transpose maps
        // the current basis onto the Ritz vectors
        ritz_vectors = gemm(d, p, p, &basis, (p, 1), &rotation, (1, p));
        let rotated_image = gemm(d, p, p, &image, (p, 1), &rotation, (1, p));
        ritz_values = values;

        let top = ritz_values[0].abs().max(f64::MIN_POSITIVE);
        let worst = (0..k)
            .map(|j| {
                (0..d)
                    .map(|r| (rotated_image[r * p + j] - ritz_values[j] * ritz_vectors[r * p + j]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if worst <= SUBSPACE_TOL * top {
            break;
        }
        basis = rotated_image;
        orthonormalize_columns(&mut basis, d, p);
    }
    let mut vectors = Vec::with_capacity(k * d);
    for j in 0..k {
        vectors.extend((0..d).map(|r| ritz_vectors[r * p + j]));
    }
    (ritz_values[..k].to_vec(), vectors)
}
