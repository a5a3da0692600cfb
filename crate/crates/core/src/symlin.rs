//! Dense symmetric and rectangular linear algebra.
//!
//! Eigendecomposition uses cyclic Jacobi rotations; singular values and kernel
//! bases use one-sided (Hestenes) Jacobi on the rectangular matrix itself, so
//! that small singular values are resolved to `eps * sigma_max` rather than
//! `sqrt(eps) * sigma_max` as they would be through `B^T B`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Dense real `m x n` matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct RectMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Dense real symmetric matrix. Symmetry is exact: every constructor either
/// checks it or enforces it.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

/// Eigendecomposition `A = V diag(values) V^T` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenSym<T> {
    pub values: Vec<T>,
    /// Columns are unit eigenvectors.
    pub vectors: RectMatrix<T>,
}

fn check_finite<T: Scalar>(data: &[T]) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("non-finite matrix entry".into()))
    }
}

impl<T: Scalar> RectMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows. An empty outer vector yields a `0 x 0` matrix.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Self::from_row_major(m, n, rows.iter().flatten().copied().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[T]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(shape_err("add", self.shape(), other.shape()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape_err("matmul", self.shape(), other.shape()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx] + a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `A^T A`, exactly symmetric.
    pub fn gram(&self) -> SymMatrix<T> {
        SymMatrix::from_lower_fn(self.cols, |i, j| {
            (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum()
        })
    }

    /// Symmetric part `(A + A^T) / 2` of a square matrix.
    pub fn symmetric_part(&self) -> Result<SymMatrix<T>> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput(format!(
                "symmetric part of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let half = T::c(0.5);
        Ok(SymMatrix::from_lower_fn(self.rows, |i, j| {
            (self.get(i, j) + self.get(j, i)) * half
        }))
    }

    /// Singular values in descending order together with the right singular
    /// vectors (columns of the returned `n x n` orthogonal matrix, in matching
    /// order).
    pub fn svd_right(&self) -> Result<(Vec<T>, RectMatrix<T>)> {
        check_finite(&self.data)?;
        let (m, n) = self.shape();
        let mut u = self.clone();
        let mut v = RectMatrix::<T>::identity(n);
        let tol = T::epsilon() * T::from_count(m.max(1));
        // columns below this squared norm are numerically zero and left alone
        let fro2: T = self.data.iter().map(|&x| x * x).sum();
        let negligible = fro2 * T::epsilon() * T::epsilon();
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for k in 0..m {
                        let up = u.get(k, p);
                        let uq = u.get(k, q);
                        alpha = alpha + up * up;
                        beta = beta + uq * uq;
                        gamma = gamma + up * uq;
                    }
                    if alpha <= negligible
                        || beta <= negligible
                        || gamma.abs() <= tol * (alpha * beta).sqrt()
                    {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::c(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    rotate_cols(&mut u, p, q, c, s);
                    rotate_cols(&mut v, p, q, c, s);
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical("one-sided Jacobi SVD did not converge".into()));
        }
        let norms: Vec<T> = (0..n)
            .map(|j| (0..m).map(|k| u.get(k, j) * u.get(k, j)).sum::<T>().sqrt())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
        let sigma = order.iter().map(|&j| norms[j]).collect();
        let vs = RectMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
        Ok((sigma, vs))
    }

    /// Numerical rank under the decision `sigma_i > rank_tol * sigma_max`.
    pub fn rank(&self, rank_tol: T) -> Result<usize> {
        let (sigma, _) = self.svd_right()?;
        Ok(count_rank(&sigma, rank_tol))
    }
}

fn count_rank<T: Scalar>(sigma: &[T], rank_tol: T) -> usize {
    let smax = sigma.first().copied().unwrap_or(T::zero());
    if smax == T::zero() {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rank_tol * smax).count()
}

fn rotate_cols<T: Scalar>(m: &mut RectMatrix<T>, p: usize, q: usize, c: T, s: T) {
    for k in 0..m.rows {
        let mp = m.get(k, p);
        let mq = m.get(k, q);
        m.set(k, p, c * mp - s * mq);
        m.set(k, q, s * mp + c * mq);
    }
}

fn shape_err(op: &str, a: (usize, usize), b: (usize, usize)) -> Error {
    Error::InvalidInput(format!(
        "{op}: incompatible shapes {}x{} and {}x{}",
        a.0, a.1, b.0, b.1
    ))
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![T::one(); n])
    }

    pub fn from_diag(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds from a function of the lower triangle `(i, j), j <= i`; the upper
    /// triangle is mirrored.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Builds from nested rows, rejecting inputs that are not exactly
    /// symmetric.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = RectMatrix::from_rows(rows)?;
        Self::from_rect(&r)
    }

    /// Exact conversion; fails unless `a` is square and exactly symmetric.
    pub fn from_rect(a: &RectMatrix<T>) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::InvalidInput(format!(
                "expected square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        check_finite(&a.data)?;
        for i in 0..a.rows {
            for j in 0..i {
                if a.get(i, j) != a.get(j, i) {
                    return Err(Error::InvalidInput(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            n: a.rows,
            data: a.data.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn to_rect(&self) -> RectMatrix<T> {
        RectMatrix {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.to_rect().to_rows()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * k).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -T::one())
    }

    /// `self + k * other`.
    pub fn combine(&self, other: &Self, k: T) -> Result<Self> {
        if self.n != other.n {
            return Err(shape_err("combine", (self.n, self.n), (other.n, other.n)));
        }
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + k * b)
                .collect(),
        })
    }

    /// Congruence `V^T A V` for an `n x k` matrix `V`.
    pub fn congruence(&self, v: &RectMatrix<T>) -> Result<Self> {
        if v.rows != self.n {
            return Err(shape_err("congruence", (self.n, self.n), v.shape()));
        }
        let av = self.to_rect().matmul(v)?;
        Ok(Self::from_lower_fn(v.cols, |i, j| {
            (0..self.n).map(|k| v.get(k, i) * av.get(k, j)).sum()
        }))
    }

    /// Cyclic Jacobi eigendecomposition.
    pub fn eig(&self) -> Result<EigenSym<T>> {
        check_finite(&self.data)?;
        let n = self.n;
        let mut a = self.data.clone();
        let mut v = RectMatrix::<T>::identity(n);
        let fro = self.frobenius();
        let tol = T::c(1e-12).max(T::epsilon() * T::c(8.0)) * fro;
        let mut converged = false;
        for _ in 0..=MAX_SWEEPS {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum::<T>()
                .sqrt();
            if off <= tol {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == T::zero() {
                        continue;
                    }
                    let tau = (a[q * n + q] - a[p * n + p]) / (T::c(2.0) * apq);
                    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
                    let t = sign / (tau.abs() + (T::one() + tau * tau).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    a[p * n + q] = T::zero();
                    a[q * n + p] = T::zero();
                    rotate_cols(&mut v, p, q, c, s);
                }
            }
        }
        if !converged {
            return Err(Error::Numerical("Jacobi eigensolver did not converge".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| a[x * n + x].partial_cmp(&a[y * n + y]).unwrap());
        let values = order.iter().map(|&i| a[i * n + i]).collect();
        let vectors = RectMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
        Ok(EigenSym { values, vectors })
    }

    /// Largest eigenvalue; `-inf` for the empty matrix.
    pub fn lambda_max(&self) -> Result<T> {
        Ok(self.eig()?.values.last().copied().unwrap_or(T::neg_infinity()))
    }

    /// Smallest eigenvalue; `+inf` for the empty matrix.
    pub fn lambda_min(&self) -> Result<T> {
        Ok(self.eig()?.values.first().copied().unwrap_or(T::infinity()))
    }

    /// Relative negative-definiteness test: `lambda_max <= -tol * (1 + max|a_ij|)`.
    /// The empty matrix is negative definite by convention.
    pub fn is_neg_def(&self, tol: T) -> Result<bool> {
        if tol < T::zero() {
            return Err(Error::InvalidInput("tolerance must be nonnegative".into()));
        }
        if self.n == 0 {
            return Ok(true);
        }
        Ok(self.lambda_max()? <= -tol * (T::one() + self.max_abs()))
    }

    pub fn is_pos_def(&self, tol: T) -> Result<bool> {
        self.neg().is_neg_def(tol)
    }

    /// Principal square root of a positive semidefinite matrix. Eigenvalues
    /// down to `-1e-10 * (1 + max|a_ij|)` are clamped to zero.
    pub fn principal_sqrt(&self) -> Result<Self> {
        let e = self.eig()?;
        let floor = -T::c(1e-10) * (T::one() + self.max_abs());
        if let Some(&lmin) = e.values.first() {
            if lmin < floor {
                return Err(Error::NotPsd {
                    min_eig: lmin.to_f64_lossy(),
                });
            }
        }
        Ok(e.reassemble(|l| l.max(T::zero()).sqrt()))
    }
}

impl<T: Scalar> EigenSym<T> {
    /// `V diag(f(values)) V^T`, symmetrized exactly.
    pub fn reassemble(&self, f: impl Fn(T) -> T) -> SymMatrix<T> {
        let n = self.values.len();
        let d: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        SymMatrix::from_lower_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors.get(i, k) * d[k] * self.vectors.get(j, k))
                .sum()
        })
    }
}

/// Orthonormal basis of `Ker(B)` as the columns of an `n x k` matrix.
pub fn kernel_basis<T: Scalar>(b: &RectMatrix<T>, rank_tol: T) -> Result<RectMatrix<T>> {
    if rank_tol < T::zero() {
        return Err(Error::InvalidInput("rank_tol must be nonnegative".into()));
    }
    let n = b.cols();
    let (sigma, v) = b.svd_right()?;
    let rank = count_rank(&sigma, rank_tol);
    Ok(RectMatrix::from_fn(n, n - rank, |i, j| v.get(i, rank + j)))
}

pub fn eig_sym<T: Scalar>(a: &SymMatrix<T>) -> Result<EigenSym<T>> {
    a.eig()
}

pub fn is_neg_def<T: Scalar>(a: &SymMatrix<T>, tol: T) -> Result<bool> {
    a.is_neg_def(tol)
}

pub fn principal_sqrt<T: Scalar>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    a.principal_sqrt()
}

impl<T: fmt::Debug> fmt::Debug for RectMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RectMatrix{}x{}", self.rows, self.cols)?;
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

impl<T: fmt::Debug> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}", self.n)?;
        f.debug_list().entries(self.data.chunks(self.n.max(1))).finish()
    }
}
