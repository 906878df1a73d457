//! Dense row-major matrices over `f64` and `Complex64`, with just the
//! kernels the solvers and samplers need.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field element of a matrix: real or complex double precision.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const IS_COMPLEX: bool;

    fn zero() -> Self;
    fn from_real(re: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn is_finite(self) -> bool;
    fn div(self, rhs: Self) -> Self;
    fn sqrt_real(self) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn from_real(re: f64) -> Self {
        re
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn div(self, rhs: Self) -> Self {
        self / rhs
    }
    #[inline]
    fn sqrt_real(self) -> Self {
        self.sqrt()
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn from_real(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn div(self, rhs: Self) -> Self {
        self / rhs
    }
    /// Square root of the real part; used on Cholesky pivots only.
    #[inline]
    fn sqrt_real(self) -> Self {
        Complex64::new(self.re.sqrt(), 0.0)
    }
}

/// `Σ conj(x_i) y_i`, summed in a fixed order with four partial sums.
#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [T::zero(); 4];
    let xs = x.chunks_exact(4);
    let ys = y.chunks_exact(4);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (a, b) in xs.zip(ys) {
        acc[0] += a[0].conj() * b[0];
        acc[1] += a[1].conj() * b[1];
        acc[2] += a[2].conj() * b[2];
        acc[3] += a[3].conj() * b[3];
    }
    let mut tail = T::zero();
    for (a, b) in xr.iter().zip(yr) {
        tail += a.conj() * *b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `Σ x_i y_i` without conjugation (row of a matrix times a vector).
#[inline]
fn bilinear<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let xs = x.chunks_exact(4);
    let ys = y.chunks_exact(4);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (a, b) in xs.zip(ys) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    let mut tail = T::zero();
    for (a, b) in xr.iter().zip(yr) {
        tail += *a * *b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Euclidean norm.
pub fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
}

/// `y ← y + alpha·x`.
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

/// Dense matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
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
            m.data[i * n + i] = T::from_real(1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `out ← A x`.
    pub fn matvec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = bilinear(self.row(i), x);
        }
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        let mut out = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs2().sqrt()).fold(0.0, f64::max)
    }

    /// Largest `|A_ij − conj(A_ji)|`; zero for an exactly Hermitian matrix.
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.get(i, j) - self.get(j, i).conj()).abs2().sqrt();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Overwrite the strict lower triangle with the conjugate of the upper
    /// one and zero the imaginary part of the diagonal.
    pub(crate) fn hermitize_from_upper(&mut self) {
        let n = self.rows;
        for i in 0..n {
            let d = self.get(i, i);
            self.set(i, i, T::from_real(d.re()));
            for j in (i + 1)..n {
                let v = self.get(i, j).conj();
                self.set(j, i, v);
            }
        }
    }

    /// Solve `A x = b` for Hermitian positive definite `A` by Cholesky.
    ///
    /// Fails when a pivot is not positive relative to the matrix scale.
    pub fn cholesky_solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.rows;
        if self.cols != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.cols,
            });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        let tiny = f64::EPSILON * n as f64 * self.max_abs();
        // Lower factor L with A = L L*.
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = self.get(j, j).re();
            for k in 0..j {
                d -= l[j * n + k].abs2();
            }
            if !(d > tiny) {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            l[j * n + j] = T::from_real(djj);
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s.scale(1.0 / djj);
            }
        }
        // Forward: L y = b.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s.div(l[i * n + i]);
        }
        // Backward: L* x = y.
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i].conj() * y[k];
            }
            y[i] = s.div(l[i * n + i]);
        }
        Ok(y)
    }
}

/// `X Xᵀ` for a real row-major `rows × cols` buffer, exactly symmetric.
pub fn gram_real(x: &[f64], rows: usize, cols: usize) -> DenseMatrix<f64> {
    let mut out = DenseMatrix::zeros(rows, rows);
    gemm_abt(1.0, x, x, rows, cols, 0.0, &mut out.data);
    out.hermitize_from_upper();
    out
}

/// `X X*` for a complex matrix given as real and imaginary row-major parts,
/// exactly Hermitian.
pub fn gram_complex(xr: &[f64], xi: &[f64], rows: usize, cols: usize) -> DenseMatrix<Complex64> {
    let mut re = vec![0.0; rows * rows];
    let mut im = vec![0.0; rows * rows];
    // (Xr + iXi)(Xrᵀ − iXiᵀ) = XrXrᵀ + XiXiᵀ + i(XiXrᵀ − XrXiᵀ)
    gemm_abt(1.0, xr, xr, rows, cols, 0.0, &mut re);
    gemm_abt(1.0, xi, xi, rows, cols, 1.0, &mut re);
    gemm_abt(1.0, xi, xr, rows, cols, 0.0, &mut im);
    gemm_abt(-1.0, xr, xi, rows, cols, 1.0, &mut im);
    let data = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    let mut out = DenseMatrix { rows, cols: rows, data };
    out.hermitize_from_upper();
    out
}

/// `C ← alpha·A Bᵀ + beta·C` with `A`, `B` both `rows × inner` row-major.
fn gemm_abt(alpha: f64, a: &[f64], b: &[f64], rows: usize, inner: usize, beta: f64, c: &mut [f64]) {
    assert_eq!(a.len(), rows * inner);
    assert_eq!(b.len(), rows * inner);
    assert_eq!(c.len(), rows * rows);
    // SAFETY: slice lengths checked above; strides describe A (rows×inner,
    // row-major), Bᵀ (inner×rows, column access of B) and C (rows×rows).
    unsafe {
        matrixmultiply::dgemm(
            rows,
            inner,
            rows,
            alpha,
            a.as_ptr(),
            inner as isize,
            1,
            b.as_ptr(),
            1,
            inner as isize,
            beta,
            c.as_mut_ptr(),
            rows as isize,
            1,
        );
    }
}

/// General real row-major product helper used by the network code:
/// `C ← alpha·op(A) op(B) + beta·C` where strides select the transposes.
#[allow(clippy::too_many_arguments)]
pub(crate) fn dgemm_strided(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |rs: usize, cs: usize, r: usize, cc: usize| (r - 1) * rs + (cc - 1) * cs;
    if k > 0 {
        assert!(last(rsa, csa, m, k) < a.len());
        assert!(last(rsb, csb, k, n) < b.len());
    }
    assert_eq!(c.len(), m * n);
    // SAFETY: the largest offset touched in each operand is bounds-checked above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
