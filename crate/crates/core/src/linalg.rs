//! Small dense linear algebra for the tiny matrices this crate works with.
//!
//! Everything here is deterministic: symmetric eigenvalues come from cyclic
//! Jacobi rotations and singular values from one-sided (Hestenes) Jacobi
//! orthogonalization, both of which are accurate to a few ulps on the
//! well-conditioned matrices of size at most a few dozen that appear in games.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T: Scalar = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds from row-major data; panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`
    pub fn t_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "t_mul_vec dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += *a * vi;
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// `basisᵀ · self · basis`, the compression of a square operator onto the
    /// span of the (orthonormal) columns of `basis`.
    pub fn compress(&self, basis: &Self) -> Self {
        basis.transpose().matmul(self).matmul(basis)
    }

    pub fn quadratic_form(&self, v: &[T]) -> T {
        dot(v, &self.mul_vec(v))
    }

    pub fn frobenius_norm(&self) -> T {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &a| acc.max(a.abs()))
    }
}

impl<T: Scalar> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the second matrix.
pub fn symmetric_eigen<T: Scalar>(a: &Mat<T>) -> (Vec<T>, Mat<T>) {
    assert_eq!(a.rows(), a.cols(), "symmetric_eigen needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    // symmetrize against round-off in the caller's construction
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (m[(i, j)] + m[(j, i)]) * T::lit(0.5);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = Mat::identity(n);
    let scale = m.frobenius_norm();
    if scale == T::zero() {
        return (vec![T::zero(); n], v);
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let columns: Vec<Vec<T>> = order.iter().map(|&i| v.column(i)).collect();
    (values, Mat::from_columns(n, &columns))
}

pub fn symmetric_eigenvalues<T: Scalar>(a: &Mat<T>) -> Vec<T> {
    symmetric_eigen(a).0
}

/// Singular values of an arbitrary `r × c` matrix, in descending order, by
/// one-sided Jacobi orthogonalization of its columns. Exactly `c` values are
/// returned; when `c > r` the trailing `c − r` of them are (numerically) zero,
/// which is the right answer for `inf ‖Bv‖/‖v‖` over `v ∈ ℝ^c`.
pub fn singular_values<T: Scalar>(b: &Mat<T>) -> Vec<T> {
    let (r, c) = (b.rows(), b.cols());
    let mut cols: Vec<Vec<T>> = (0..c).map(|j| b.column(j)).collect();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..c {
            for j in (i + 1)..c {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                let (head, tail) = cols.split_at_mut(j);
                for (a, b) in head[i].iter_mut().zip(tail[0].iter_mut()).take(r) {
                    let (ui, uj) = (*a, *b);
                    *a = cs * ui - sn * uj;
                    *b = sn * ui + cs * uj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols.iter().map(|c| norm2(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Orthonormal basis of the complement of the all-ones direction in `ℝ^k`,
/// as the last `k − 1` columns of the Householder reflection sending `e₁` to
/// `1/√k`.
pub fn ones_complement_basis<T: Scalar>(k: usize) -> Mat<T> {
    assert!(k >= 1);
    if k == 1 {
        return Mat::zeros(1, 0);
    }
    let inv_sqrt_k = T::one() / T::from_usize_lossy(k).sqrt();
    // u = e₁ − 𝟙/√k, H = I − 2uuᵀ/‖u‖²
    let mut u = vec![-inv_sqrt_k; k];
    u[0] += T::one();
    let uu = dot(&u, &u);
    let mut basis = Mat::zeros(k, k - 1);
    for j in 1..k {
        let coef = T::lit(2.0) * u[j] / uu;
        for i in 0..k {
            let delta = if i == j { T::one() } else { T::zero() };
            basis[(i, j - 1)] = delta - coef * u[i];
        }
    }
    basis
}

/// Modified Gram–Schmidt. Vectors whose residual norm falls below
/// `drop_tol` times the largest input norm are discarded.
pub fn gram_schmidt<T: Scalar>(vectors: &[Vec<T>], drop_tol: T) -> Vec<Vec<T>> {
    let scale = vectors.iter().map(|v| norm2(v)).fold(T::zero(), T::max);
    let mut basis: Vec<Vec<T>> = Vec::new();
    if scale == T::zero() {
        return basis;
    }
    for v in vectors {
        let mut r = v.clone();
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                axpy(-c, b, &mut r);
            }
        }
        let nr = norm2(&r);
        if nr > drop_tol * scale {
            basis.push(r.into_iter().map(|x| x / nr).collect());
        }
    }
    basis
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix,
/// or `None` if a non-positive pivot shows up.
pub fn cholesky<T: Scalar>(a: &Mat<T>) -> Option<Mat<T>> {
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= T::zero() || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_triangular_inverse<T: Scalar>(l: &Mat<T>) -> Mat<T> {
    let n = l.rows();
    let mut inv = Mat::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = T::one() / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = T::zero();
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// Minimum-norm least-squares solution of `M c = rhs` via the eigen-decomposition
/// of the normal equations, treating eigenvalues below `rank_tol · λ_max` as zero.
pub fn least_squares_min_norm<T: Scalar>(m: &Mat<T>, rhs: &[T], rank_tol: T) -> Vec<T> {
    let normal = m.transpose().matmul(m);
    let mt_rhs = m.t_mul_vec(rhs);
    let (vals, vecs) = symmetric_eigen(&normal);
    let lmax = vals.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let mut sol = vec![T::zero(); m.cols()];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= rank_tol * lmax || lam <= T::zero() {
            continue;
        }
        let vk = vecs.column(k);
        let coef = dot(&vk, &mt_rhs) / lam;
        axpy(coef, &vk, &mut sol);
    }
    sol
}
