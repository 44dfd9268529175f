//! Small dense linear algebra: square complex matrices, a real least-squares
//! solver and a Hermitian eigenvalue routine.
//!
//! Everything here is sized for spin systems of at most ten spins, so plain
//! row-major storage and cubic algorithms are adequate.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;
#[allow(unused_imports)] // provides float math (sqrt, sin, ...) without std
use num_traits::Float;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense square complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m.data[k * diag.len() + k] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m.data[k * diag.len() + k] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data; `None` if the length is not a
    /// perfect square.
    pub fn from_rows(data: Vec<C64>) -> Option<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        (dim * dim == data.len()).then_some(Self { dim, data })
    }

    pub fn from_real_rows(data: &[f64]) -> Option<Self> {
        Self::from_rows(data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |r, c| a[r] * b[c].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.dim).map(|k| self.data[k * self.dim + k]).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.data[k * self.dim + k]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let d = self.dim * other.dim;
        Self::from_fn(d, |r, c| {
            self[(r / other.dim, c / other.dim)] * other[(r % other.dim, c % other.dim)]
        })
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out[r * n..(r + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch in apply");
        (0..self.dim)
            .map(|r| self.data[r * self.dim..(r + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// U·self·U†
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Tr(self† · other)
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn unitarity_error(&self) -> f64 {
        (&self.matmul(&self.adjoint()) - &Self::identity(self.dim)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.dim).all(|r| (0..self.dim).all(|c| r == c || self[(r, c)].norm() <= tol))
    }

    /// Left-multiplies in place by a 2×2 operator acting on one tensor factor.
    /// `stride` is the distance between basis states differing only in that
    /// factor (2^(n-1-k) for spin k of n).
    pub(crate) fn left_apply_local(&mut self, stride: usize, u: &[[C64; 2]; 2]) {
        let n = self.dim;
        for r0 in 0..n {
            if r0 & stride != 0 {
                continue;
            }
            let r1 = r0 | stride;
            for c in 0..n {
                let a = self.data[r0 * n + c];
                let b = self.data[r1 * n + c];
                self.data[r0 * n + c] = u[0][0] * a + u[0][1] * b;
                self.data[r1 * n + c] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// Right-multiplies in place by the adjoint of a local 2×2 operator.
    pub(crate) fn right_apply_local_adjoint(&mut self, stride: usize, u: &[[C64; 2]; 2]) {
        let n = self.dim;
        for r in 0..n {
            let row = &mut self.data[r * n..(r + 1) * n];
            for c0 in 0..n {
                if c0 & stride != 0 {
                    continue;
                }
                let c1 = c0 | stride;
                let a = row[c0];
                let b = row[c1];
                row[c0] = a * u[0][0].conj() + b * u[0][1].conj();
                row[c1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    /// self ← D·self for diagonal D.
    pub(crate) fn left_apply_diag(&mut self, d: &[C64]) {
        let n = self.dim;
        for (r, &dr) in d.iter().enumerate() {
            for x in &mut self.data[r * n..(r + 1) * n] {
                *x *= dr;
            }
        }
    }

    /// self ← D·self·D† for diagonal D.
    pub(crate) fn conjugate_by_diag(&mut self, d: &[C64]) {
        let n = self.dim;
        for r in 0..n {
            for c in 0..n {
                self.data[r * n + c] *= d[r] * d[c].conj();
            }
        }
    }

    pub(crate) fn map_indexed(&self, mut f: impl FnMut(usize, usize, C64) -> C64) -> Self {
        Self::from_fn(self.dim, |r, c| f(r, c, self[(r, c)]))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  [")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

/// The least-squares design matrix did not have full column rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankDeficient {
    pub column: usize,
}

/// Solves min ‖A x − b‖₂ for a real `rows × cols` matrix (row-major) by
/// Householder QR. Fails if A does not have full column rank.
pub fn least_squares(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> Result<Vec<f64>, RankDeficient> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    if rows < cols {
        return Err(RankDeficient { column: rows });
    }
    let mut q = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let at = |r: usize, c: usize| r * cols + c;

    for k in 0..cols {
        let norm = (k..rows).map(|r| q[at(r, k)] * q[at(r, k)]).sum::<f64>().sqrt();
        if norm <= 1e-10 * scale {
            return Err(RankDeficient { column: k });
        }
        let alpha = if q[at(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|r| q[at(r, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for c in k..cols {
                let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * q[at(k + i, c)]).sum();
                let f = 2.0 * dot / vnorm2;
                for (i, vi) in v.iter().enumerate() {
                    q[at(k + i, c)] -= f * vi;
                }
            }
            let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * rhs[k + i]).sum();
            let f = 2.0 * dot / vnorm2;
            for (i, vi) in v.iter().enumerate() {
                rhs[k + i] -= f * vi;
            }
        }
    }

    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = ((k + 1)..cols).map(|c| q[at(k, c)] * x[c]).sum();
        x[k] = (rhs[k] - s) / q[at(k, k)];
    }
    Ok(x)
}

/// Eigenvalues of a Hermitian matrix in ascending order (cyclic Jacobi on
/// the real symmetric embedding, keeping every other eigenvalue).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.dim();
    let d = 2 * n;
    let mut a = vec![0.0; d * d];
    for r in 0..n {
        for c in 0..n {
            let z = m[(r, c)];
            a[r * d + c] = z.re;
            a[(r + n) * d + c + n] = z.re;
            a[r * d + c + n] = -z.im;
            a[(r + n) * d + c] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..d).flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c))).map(|(r, c)| a[r * d + c] * a[r * d + c]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..d).map(|k| a[k * d + k]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev.into_iter().step_by(2).collect()
}
