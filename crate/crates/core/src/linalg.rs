//! Small dense helpers on row-major symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};

/// Lower Cholesky factor (row-major) of `a + jitter·I`, or the failing pivot index.
pub fn cholesky(a: &[f64], n: usize, jitter: f64) -> Result<Vec<f64>, usize> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            if i == j {
                sum += jitter;
            }
            let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            sum -= dot(ri, rj);
            if i == j {
                if !(sum > 0.0) {
                    return Err(i);
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..n {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn to_dmatrix(a: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, a)
}

pub fn eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    SymmetricEigen::new(to_dmatrix(a, n)).eigenvalues.iter().copied().collect()
}

/// Factor `B` (row-major, `n × n`) with `B Bᵀ = V max(Λ, 0) Vᵀ`.
pub fn clipped_square_root(a: &[f64], n: usize) -> Vec<f64> {
    let eig = SymmetricEigen::new(to_dmatrix(a, n));
    let mut b = vec![0.0; n * n];
    for k in 0..n {
        let root = eig.eigenvalues[k].max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        for i in 0..n {
            b[i * n + k] = eig.eigenvectors[(i, k)] * root;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let a = [4.0, 2.0, 0.4, 2.0, 2.0, 0.5, 0.4, 0.5, 3.0];
        let l = cholesky(&a, 3, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert_eq!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2, 0.0), Err(1));
    }

    #[test]
    fn clipped_root_of_singular_matrix() {
        let a = [1.0, 1.0, 1.0, 1.0];
        let b = clipped_square_root(&a, 2);
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = (0..2).map(|k| b[i * 2 + k] * b[j * 2 + k]).sum();
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }
}
