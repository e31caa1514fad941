//! Dense symmetric matrices and Cholesky factorization.

use alloc::vec;
use alloc::vec::Vec;

/// Square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += v;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Matrix,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Cholesky {
    /// Factors a symmetric matrix, reading only its lower triangle.
    /// Returns `None` when a pivot is not strictly positive.
    pub fn factor(a: &Matrix) -> Option<Self> {
        let n = a.dim();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let (done, cur) = data.split_at_mut(i * n);
                let row_i = &mut cur[..n];
                let s = if j == i {
                    a.get(i, i) - dot(&row_i[..i], &row_i[..i])
                } else {
                    let row_j = &done[j * n..j * n + j];
                    (a.get(i, j) - dot(&row_i[..j], row_j)) / done[j * n + j]
                };
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    row_i[i] = libm::sqrt(s);
                } else {
                    row_i[j] = s;
                }
            }
        }
        Some(Self { l: Matrix { n, data } })
    }

    pub fn dim(&self) -> usize {
        self.l.n
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = self.l.row(i);
            y[i] = (b[i] - dot(&row[..i], &y[..i])) / row[i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.l.get(i, i);
            let xi = x[i];
            let row = self.l.row(i);
            for k in 0..i {
                x[k] -= row[k] * xi;
            }
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| libm::log(self.l.get(i, i))).sum::<f64>()
    }

    /// Full inverse `A⁻¹` (symmetric).
    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        // Row c of `u` holds column c of L⁻¹, i.e. u = L⁻ᵀ (upper triangular).
        let mut u = vec![0.0; n * n];
        for c in 0..n {
            let uc = &mut u[c * n..(c + 1) * n];
            uc[c] = 1.0 / self.l.get(c, c);
            for i in c + 1..n {
                let row = self.l.row(i);
                uc[i] = -dot(&row[c..i], &uc[c..i]) / row[i];
            }
        }
        let mut inv = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = dot(&u[i * n + j..(i + 1) * n], &u[j * n + j..(j + 1) * n]);
                inv.data[i * n + j] = v;
                inv.data[j * n + i] = v;
            }
        }
        inv
    }

    /// `L Lᵀ`, used to check factor quality.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.l.row(i)[..k], &self.l.row(j)[..k])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Matrix {
        // Hilbert-like plus diagonal: symmetric positive definite.
        Matrix::from_fn(n, |i, j| 1.0 / (1.0 + i as f64 + j as f64) + if i == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn factor_reconstructs() {
        let a = spd(12);
        let c = Cholesky::factor(&a).unwrap();
        let r = c.reconstruct();
        let err = Matrix::from_fn(12, |i, j| r.get(i, j) - a.get(i, j)).frobenius_norm();
        assert!(err < 1e-12 * a.frobenius_norm());
        for i in 0..12 {
            for j in i + 1..12 {
                assert_eq!(c.lower().get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn solve_and_inverse_agree() {
        let a = spd(9);
        let c = Cholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let x = c.solve(&b);
        for i in 0..9 {
            let ax: f64 = (0..9).map(|j| a.get(i, j) * x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-12);
        }
        let inv = c.inverse();
        for i in 0..9 {
            for j in 0..9 {
                let v: f64 = (0..9).map(|k| a.get(i, k) * inv.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn log_det_of_diagonal() {
        let a = Matrix::from_fn(3, |i, j| if i == j { (i + 2) as f64 } else { 0.0 });
        let c = Cholesky::factor(&a).unwrap();
        assert!((c.log_det() - libm::log(24.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let a = Matrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(Cholesky::factor(&a).is_none());
        let singular = Matrix::from_fn(2, |_, _| 1.0);
        assert!(Cholesky::factor(&singular).is_none());
    }
}
