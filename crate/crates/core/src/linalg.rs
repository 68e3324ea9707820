//! Minimal dense symmetric linear algebra: Cholesky factorization and
//! triangular solves. The Laplacian itself is stored sparsely; factorization
//! densifies because the meshes this crate targets are small (tens to a few
//! hundred vertices).

use alloc::vec::Vec;

use crate::fp;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix,
/// stored row-major packed (`l[i*(i+1)/2 + j]`, `j <= i`).
#[derive(Debug, Clone)]
pub(crate) struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    /// Factors the dense row-major `n x n` matrix `a`. Returns `None` when a
    /// pivot is not strictly positive (matrix not positive definite).
    pub(crate) fn factor(n: usize, a: &[f64]) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = alloc::vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * (i + 1) / 2 + k] * l[j * (j + 1) / 2 + k];
                }
                if i == j {
                    if sum <= 0.0 || sum.is_nan() {
                        return None;
                    }
                    l[i * (i + 1) / 2 + j] = fp::sqrt(sum);
                } else {
                    l[i * (i + 1) / 2 + j] = sum / l[j * (j + 1) / 2 + j];
                }
            }
        }
        Some(Self { n, l })
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` via the two triangular solves.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let l = &self.l;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut sum = x[i];
            for k in 0..i {
                sum -= l[i * (i + 1) / 2 + k] * x[k];
            }
            x[i] = sum / l[i * (i + 1) / 2 + i];
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in (i + 1)..n {
                sum -= l[k * (k + 1) / 2 + i] * x[k];
            }
            x[i] = sum / l[i * (i + 1) / 2 + i];
        }
        x
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    fp::sqrt(dot(a, a))
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(fp::abs(x)))
}
