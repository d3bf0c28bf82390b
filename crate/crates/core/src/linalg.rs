//! Small dense complex linear algebra: square matrices and a Hermitian
//! eigensolver (Householder tridiagonalization followed by implicit QL).

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, cone, cr, czero, Real, C};

/// Largest dense dimension the crate will materialize (12 qubits).
pub const DENSE_DIM_CAP: usize = 4096;

pub(crate) fn check_cap(dim: usize) -> Result<()> {
    if dim > DENSE_DIM_CAP {
        Err(Error::DimensionCap {
            dim,
            cap: DENSE_DIM_CAP,
        })
    } else {
        Ok(())
    }
}

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![czero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; panics if the length is not a square.
    pub fn from_rows(rows: &[&[C<T>]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix must be square");
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    pub fn diagonal(values: &[C<T>]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == czero() {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(czero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C<T>, other: &Self) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + s * b;
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C<T>, C<T>) -> C<T>) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|a| a.norm())
            .fold(T::zero(), |m, x| m.max(x))
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest elementwise deviation of `M^dagger M` from the identity.
    pub fn unitarity_defect(&self) -> T {
        self.adjoint()
            .matmul(self)
            .sub(&Self::identity(self.dim))
            .max_abs()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> T {
        let gram = self.adjoint().matmul(self);
        let eig = HermitianEigen::new(&gram);
        eig.values
            .last()
            .copied()
            .unwrap_or_else(T::zero)
            .max(T::zero())
            .sqrt()
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigendecomposition `A = V diag(values) V^dagger` of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending; eigenvector `j` is stored as row `j`
/// of an internal buffer so every eigenvector is contiguous.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    vectors: Vec<C<T>>,
    dim: usize,
}

impl<T: Real> HermitianEigen<T> {
    /// Only the lower triangle of `a` is trusted to be consistent; the input
    /// is assumed Hermitian.
    pub fn new(a: &CMatrix<T>) -> Self {
        let n = a.dim();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: Vec::new(),
                dim: 0,
            };
        }
        let mut work = a.clone();
        // Rows of `qt` are the columns of the accumulated unitary Q.
        let mut qt = CMatrix::<T>::identity(n);
        let mut u = vec![czero::<T>(); n];
        let mut p = vec![czero::<T>(); n];
        let mut s = vec![czero::<T>(); n];

        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let alpha = (0..m)
                .map(|i| work[(k + 1 + i, k)].norm_sqr())
                .sum::<T>()
                .sqrt();
            if alpha <= T::min_positive_value() {
                continue;
            }
            let x0 = work[(k + 1, k)];
            let phase = if x0.norm() > T::zero() {
                x0 / x0.norm()
            } else {
                cone()
            };
            for i in 0..m {
                u[i] = work[(k + 1 + i, k)];
            }
            u[0] = u[0] + phase * alpha;
            let vnorm = u[..m].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            let scale = T::lit(2.0).sqrt() / vnorm;
            for z in &mut u[..m] {
                *z = *z * scale;
            }

            // p = B u on the trailing block
            for i in 0..m {
                let row = &work.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
                p[i] = row
                    .iter()
                    .zip(&u[..m])
                    .fold(czero(), |acc, (b, x)| acc + b * x);
            }
            let half_upu = u[..m]
                .iter()
                .zip(&p[..m])
                .fold(czero::<T>(), |acc, (x, y)| acc + x.conj() * y)
                .re
                * T::lit(0.5);
            for i in 0..m {
                p[i] = p[i] - u[i] * half_upu;
            }
            for i in 0..m {
                let ui = u[i];
                let qi = p[i];
                let row = &mut work.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
                for (j, b) in row.iter_mut().enumerate() {
                    *b = *b - ui * p[j].conj() - qi * u[j].conj();
                }
            }
            let head = -(phase * alpha);
            work[(k + 1, k)] = head;
            work[(k, k + 1)] = head.conj();
            for i in 1..m {
                work[(k + 1 + i, k)] = czero();
                work[(k, k + 1 + i)] = czero();
            }

            // Q <- Q H, expressed on the rows of qt.
            for z in s.iter_mut() {
                *z = czero();
            }
            for j in 0..m {
                let uj = u[j];
                let row = qt.row(k + 1 + j);
                for (acc, q) in s.iter_mut().zip(row) {
                    *acc = *acc + uj * q;
                }
            }
            for j in 0..m {
                let ujc = u[j].conj();
                let start = (k + 1 + j) * n;
                for (q, acc) in qt.data[start..start + n].iter_mut().zip(&s) {
                    *q = *q - ujc * acc;
                }
            }
        }

        let mut d: Vec<T> = (0..n).map(|i| work[(i, i)].re).collect();
        let mut e = vec![T::zero(); n];
        let mut phase = cone::<T>();
        for k in 0..n - 1 {
            let off = work[(k + 1, k)];
            let mag = off.norm();
            e[k] = mag;
            if mag > T::zero() {
                phase = phase * (off / mag);
            }
            let start = (k + 1) * n;
            for q in &mut qt.data[start..start + n] {
                *q = *q * phase;
            }
        }

        tql2(&mut d, &mut e, &mut qt.data, n);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| d[i]).collect();
        let mut vectors = Vec::with_capacity(n * n);
        for &i in &order {
            vectors.extend_from_slice(&qt.data[i * n..(i + 1) * n]);
        }
        Self {
            values,
            vectors,
            dim: n,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, j: usize) -> &[C<T>] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    /// `V f(values) V^dagger`
    pub fn map_spectrum(&self, f: impl Fn(T) -> C<T>) -> CMatrix<T> {
        let n = self.dim;
        let fv: Vec<C<T>> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = CMatrix::zeros(n);
        for (j, w) in fv.iter().enumerate() {
            let v = self.vector(j);
            for r in 0..n {
                let a = v[r] * w;
                if a == czero() {
                    continue;
                }
                let row = &mut out.data[r * n..(r + 1) * n];
                for (o, b) in row.iter_mut().zip(v) {
                    *o = *o + a * b.conj();
                }
            }
        }
        out
    }

    /// `exp(-i A t)`
    pub fn propagator(&self, t: T) -> CMatrix<T> {
        self.map_spectrum(|e| cis(-e * t))
    }

    /// `exp(-i A t) |psi>` without forming the propagator.
    pub fn evolve(&self, t: T, psi: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(psi.len(), self.dim);
        let mut out = vec![czero(); self.dim];
        for j in 0..self.dim {
            let v = self.vector(j);
            let proj = v
                .iter()
                .zip(psi)
                .fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b);
            let w = proj * cis(-self.values[j] * t);
            for (o, a) in out.iter_mut().zip(v) {
                *o = *o + a * w;
            }
        }
        out
    }

    /// Reassembles `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        self.map_spectrum(cr)
    }
}

/// Implicit QL iteration on a real symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e[i]` coupling `i` and `i+1`. The plane
/// rotations are applied to the rows of `vt` (complex eigenvector rows).
fn tql2<T: Real>(d: &mut [T], e: &mut [T], vt: &mut [C<T>], n: usize) {
    if n < 2 {
        return;
    }
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let max_iter = 60 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut cc = T::one();
                let mut c2 = cc;
                let mut c3 = cc;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = cc;
                    s2 = s;
                    g = cc * e[i];
                    h = cc * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    cc = p / r;
                    p = cc * d[i] - s * g;
                    d[i + 1] = h + s * (cc * g + s * d[i]);

                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_next = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                        let old_next = *b;
                        *b = *a * s + old_next * cc;
                        *a = *a * cc - old_next * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = cc * p;
                if e[l].abs() <= eps * tst1 || iter >= max_iter {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
}
