//! Small dense symmetric linear algebra for local quadratic forms.
//!
//! Matrices here have the size of a 2-ball (tens of rows), so a cyclic Jacobi
//! eigen-solver is accurate and fast enough.

use std::ops::{Index, IndexMut};

use crate::error::LinalgError;
use crate::scalar::Scalar;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T M v`.
    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.matvec(v))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + c * b).collect();
        Self { n: self.n, data }
    }

    /// `self += c * u v^T`.
    pub fn add_outer(&mut self, c: T, u: &[T], v: &[T]) {
        for i in 0..self.n {
            let cu = c * u[i];
            if cu == T::zero() {
                continue;
            }
            for j in 0..self.n {
                self.data[i * self.n + j] += cu * v[j];
            }
        }
    }

    /// `self += c (e_a - e_b)(e_a - e_b)^T`.
    pub fn add_sq_diff(&mut self, c: T, a: usize, b: usize) {
        if a == b {
            return;
        }
        self[(a, a)] += c;
        self[(b, b)] += c;
        self[(a, b)] -= c;
        self[(b, a)] -= c;
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        let scale = T::one().max(self.max_abs());
        (0..self.n).all(|i| (i + 1..self.n).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    /// Principal submatrix on `keep`.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut m = Self::zeros(keep.len());
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = T::half() * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Eigen-decomposition `A = V diag(values) V^T`, values ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Matrix<T>,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }

    pub fn min(&self) -> (T, Vec<T>) {
        match self.values.first() {
            Some(&v) => (v, self.vector(0)),
            None => (T::infinity(), Vec::new()),
        }
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal mass is below rounding level.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> Result<SymmetricEigen<T>, LinalgError> {
    let n = a.dim();
    if !a.is_symmetric(T::tol(1e-10, 64.0)) {
        return Err(LinalgError::NotSymmetric);
    }
    let mut m = a.clone();
    m.symmetrize();
    let mut v = Matrix::identity(n);
    let frob = m.data.iter().map(|&x| x * x).sum::<T>().sqrt();
    let target = T::epsilon() * frob;
    let mut converged = n < 2 || frob == T::zero();
    for _ in 0..MAX_SWEEPS {
        if converged || off_diagonal(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal(&m);
        if off > target * T::lit(1e3) {
            return Err(LinalgError::NoConvergence {
                sweeps: MAX_SWEEPS,
                residual: off.to_f64_lossy(),
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n);
    for (c, &k) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, c)] = v[(r, k)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal<T: Scalar>(m: &Matrix<T>) -> T {
    let n = m.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn rotate<T: Scalar>(m: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == T::zero() {
        return;
    }
    let n = m.dim();
    let theta = (m[(q, q)] - m[(p, p)]) / (T::two() * apq);
    let t = if theta.abs() > T::lit(1e150) {
        T::half() / theta
    } else {
        let sign = if theta < T::zero() { -T::one() } else { T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    for k in 0..n {
        let (akp, akq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = c * akp - s * akq;
        m[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = c * apk - s * aqk;
        m[(q, k)] = s * apk + c * aqk;
    }
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues with
/// `|lambda| <= cutoff` are treated as zero.
pub fn pseudo_inverse<T: Scalar>(eig: &SymmetricEigen<T>, cutoff: T) -> Matrix<T> {
    let n = eig.values.len();
    let mut out = Matrix::zeros(n);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam.abs() > cutoff {
            let u = eig.vector(k);
            out.add_outer(T::one() / lam, &u, &u);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_small_matrix() {
        let a = Matrix::from_rows(&[vec![2.0_f64, 1.0], vec![1.0, 2.0]]);
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let (lam, u) = e.min();
        assert!((a.quad_form(&u) - lam).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]);
        assert_eq!(symmetric_eigen(&a).unwrap_err(), LinalgError::NotSymmetric);
    }

    #[test]
    fn pseudo_inverse_of_projection() {
        let a = Matrix::from_rows(&[vec![1.0_f64, 1.0], vec![1.0, 1.0]]);
        let e = symmetric_eigen(&a).unwrap();
        let p = pseudo_inverse(&e, 1e-12);
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            assert!((p[(i, j)] - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let e = symmetric_eigen(&Matrix::<f64>::identity(5)).unwrap();
        assert!(e.values.iter().all(|&v| v == 1.0));
    }
}
