// SPDX-License-Identifier: Apache-2.0

//! Dense matrix routines for small systems (K <= 64): products, LU solves,
//! the scaling-and-squaring matrix exponential, and a complex Schur-based
//! eigendecomposition.
//!
//! The exponential follows the Pade(13) scaling-and-squaring scheme with
//! the squaring count chosen from the 1-norm. The eigendecomposition is a
//! single-shift complex QR iteration on the Hessenberg form; callers must
//! treat it as an opt-in accelerator and check `condition`/`residual`
//! before trusting it, falling back to `expm` otherwise.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
use num_complex::{Complex64, ComplexFloat};

use crate::error::{Error, Result};

/// Square dense matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type RMatrix = Matrix<f64>;
pub type CMatrix = Matrix<Complex64>;

impl<T: ComplexFloat<Real = f64>> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
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

    /// Build from row slices; every row must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NonSquareGenerator {
                    rows: n,
                    cols: row.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x.iter())
                    .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    out_row[j] = out_row[j] + aik * orow[j];
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let n = self.n;
        let mut best = 0.0f64;
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += self[(i, j)].abs();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn scaled(&self, c: T) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| *v * c).collect(),
        }
    }

    fn add_assign_scaled(&mut self, other: &Self, c: T) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + *b * c;
        }
    }

    fn add_assign_identity(&mut self, c: T) {
        for i in 0..self.n {
            self[(i, i)] = self[(i, i)] + c;
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

/// Lift a real matrix into the complex plane.
pub fn complexify(a: &RMatrix) -> CMatrix {
    let n = a.dim();
    let mut out = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = Complex64::new(a[(i, j)], 0.0);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting
// ---------------------------------------------------------------------------

/// Packed LU factors of a square matrix with row pivoting.
pub struct LuFactors<T> {
    n: usize,
    lu: Matrix<T>,
    piv: Vec<usize>,
    /// Smallest pivot magnitude met during elimination; callers compare it
    /// against a norm-relative tolerance to detect rank deficiency.
    pub min_pivot: f64,
}

pub fn lu_factor<T: ComplexFloat<Real = f64>>(a: &Matrix<T>) -> Result<LuFactors<T>> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;

    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in (k + 1)..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularSystem { pivot: 0.0 });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            piv.swap(k, p);
        }
        min_pivot = min_pivot.min(best);
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] = lu[(i, j)] - sub;
            }
        }
    }

    Ok(LuFactors {
        n,
        lu,
        piv,
        min_pivot,
    })
}

impl<T: ComplexFloat<Real = f64>> LuFactors<T> {
    #[allow(clippy::needless_range_loop)]
    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &Matrix<T>) -> Matrix<T> {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Matrix<T> {
        self.solve_mat(&Matrix::identity(self.n))
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

/// Pade(13) numerator/denominator coefficients, constant term first.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which Pade(13) meets unit roundoff without scaling.
const THETA13: f64 = 5.371920351148152;

fn is_diagonal(a: &CMatrix) -> bool {
    let n = a.dim();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] != Complex64::ZERO {
                return false;
            }
        }
    }
    true
}

/// Matrix exponential exp(A) by scaling-and-squaring with a Pade(13)
/// approximant. Exactly diagonal inputs take a per-entry scalar path.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFiniteMatrix);
    }
    let n = a.dim();
    if n == 0 {
        return Ok(CMatrix::zeros(0));
    }
    if is_diagonal(a) {
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            out[(i, i)] = a[(i, i)].exp();
        }
        return Ok(out);
    }

    let norm = a.one_norm();
    let squarings = if norm > THETA13 {
        Float::ceil(Float::log2(norm / THETA13)) as u32
    } else {
        0
    };
    let scale = Complex64::new(Float::powi(0.5f64, squarings as i32), 0.0);
    let a1 = a.scaled(scale);

    let a2 = a1.matmul(&a1);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    let c = |k: usize| Complex64::new(PADE13[k], 0.0);

    // U = A [ A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I ]
    let mut w = a6.scaled(c(13));
    w.add_assign_scaled(&a4, c(11));
    w.add_assign_scaled(&a2, c(9));
    let mut u_inner = a6.matmul(&w);
    u_inner.add_assign_scaled(&a6, c(7));
    u_inner.add_assign_scaled(&a4, c(5));
    u_inner.add_assign_scaled(&a2, c(3));
    u_inner.add_assign_identity(c(1));
    let u = a1.matmul(&u_inner);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut z = a6.scaled(c(12));
    z.add_assign_scaled(&a4, c(10));
    z.add_assign_scaled(&a2, c(8));
    let mut v = a6.matmul(&z);
    v.add_assign_scaled(&a6, c(6));
    v.add_assign_scaled(&a4, c(4));
    v.add_assign_scaled(&a2, c(2));
    v.add_assign_identity(c(0));

    // exp(A1) ~ (V - U)^(-1) (V + U)
    let mut vm = v.clone();
    vm.add_assign_scaled(&u, -Complex64::ONE);
    let mut vp = v;
    vp.add_assign_scaled(&u, Complex64::ONE);
    let factors = lu_factor(&vm)?;
    let mut e = factors.solve_mat(&vp);

    for _ in 0..squarings {
        e = e.matmul(&e);
    }
    Ok(e)
}

/// exp(A) for a real matrix, returning the real part (imaginary residue of
/// the complex path is dropped; it is at rounding level for real input).
pub fn expm_real(a: &RMatrix) -> Result<RMatrix> {
    let e = expm(&complexify(a))?;
    let n = a.dim();
    let mut out = RMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = e[(i, j)].re;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Complex eigendecomposition (Hessenberg + single-shift QR)
// ---------------------------------------------------------------------------

/// Eigendecomposition A = V diag(values) V^(-1) with quality certificates.
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
    /// 1-norm condition estimate of the eigenvector matrix.
    pub condition: f64,
    /// ||A V - V diag(values)||_1 / (1 + ||A||_1).
    pub residual: f64,
}

fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == Complex64::ZERO {
        return (1.0, Complex64::ZERO);
    }
    let af = f.abs();
    let ag = g.abs();
    let r = Float::sqrt(af * af + ag * ag);
    if af == 0.0 {
        return (0.0, g.conj() / ag);
    }
    let c = af / r;
    let s = (f / af) * g.conj() / r;
    (c, s)
}

/// Reduce `h` to upper Hessenberg form by Householder similarity, with the
/// transformation accumulated into `q` (which must start as the identity).
fn hessenberg(h: &mut CMatrix, q: &mut CMatrix) {
    let n = h.dim();
    if n < 3 {
        return;
    }
    let mut w = vec![Complex64::ZERO; n];
    for k in 0..n - 2 {
        let mut sigma = 0.0f64;
        for i in (k + 1)..n {
            sigma += h[(i, k)].norm_sqr();
        }
        let sigma = Float::sqrt(sigma);
        if sigma == 0.0 {
            continue;
        }
        let alpha = h[(k + 1, k)];
        let phase = if alpha == Complex64::ZERO {
            Complex64::ONE
        } else {
            alpha / alpha.abs()
        };
        // u = x + phase * |x| * e1, reflector P = I - 2 w w* with w = u/|u|
        let mut unorm = 0.0f64;
        for i in (k + 1)..n {
            let ui = if i == k + 1 {
                alpha + phase * sigma
            } else {
                h[(i, k)]
            };
            w[i] = ui;
            unorm += ui.norm_sqr();
        }
        let unorm = Float::sqrt(unorm);
        if unorm == 0.0 {
            continue;
        }
        for wi in w.iter_mut().take(n).skip(k + 1) {
            *wi /= unorm;
        }

        // left: H <- P H on rows k+1..n
        for j in k..n {
            let mut dot = Complex64::ZERO;
            for i in (k + 1)..n {
                dot += w[i].conj() * h[(i, j)];
            }
            let two_dot = dot * 2.0;
            for i in (k + 1)..n {
                let sub = w[i] * two_dot;
                h[(i, j)] -= sub;
            }
        }
        // right: H <- H P on columns k+1..n
        for i in 0..n {
            let mut dot = Complex64::ZERO;
            for j in (k + 1)..n {
                dot += h[(i, j)] * w[j];
            }
            let two_dot = dot * 2.0;
            for j in (k + 1)..n {
                let sub = two_dot * w[j].conj();
                h[(i, j)] -= sub;
            }
        }
        // accumulate Q <- Q P
        for i in 0..n {
            let mut dot = Complex64::ZERO;
            for j in (k + 1)..n {
                dot += q[(i, j)] * w[j];
            }
            let two_dot = dot * 2.0;
            for j in (k + 1)..n {
                let sub = two_dot * w[j].conj();
                q[(i, j)] -= sub;
            }
        }
        // restore the exact zeros below the subdiagonal
        h[(k + 1, k)] = -phase * sigma;
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::ZERO;
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = tr_half + root;
    let l2 = tr_half - root;
    if (l1 - d).abs() <= (l2 - d).abs() {
        l1
    } else {
        l2
    }
}

/// Single-shift QR iteration driving the Hessenberg matrix to upper
/// triangular (complex Schur) form. Returns false on non-convergence.
fn schur(h: &mut CMatrix, q: &mut CMatrix) -> bool {
    let n = h.dim();
    if n < 2 {
        return true;
    }
    let eps = f64::EPSILON;
    let hnorm = h.one_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    let mut total = 0usize;
    let max_total = 60 * n;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi > 0 {
        // deflation scan
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].abs() + h[(lo, lo)].abs();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(lo, lo - 1)].abs() <= eps * s {
                h[(lo, lo - 1)] = Complex64::ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        if total > max_total {
            return false;
        }
        since_deflation += 1;

        let shift = if since_deflation.is_multiple_of(16) {
            // exceptional shift to break limit cycles
            h[(hi, hi)] + Complex64::new(1.5 * h[(hi, hi - 1)].abs(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }

        // left rotations zeroing the subdiagonal of the active block
        rotations.clear();
        for i in lo..hi {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            rotations.push((c, s));
            for j in i..n {
                let top = h[(i, j)];
                let bot = h[(i + 1, j)];
                h[(i, j)] = top * c + s * bot;
                h[(i + 1, j)] = -s.conj() * top + bot * c;
            }
        }
        // right application of the conjugate rotations, and Q accumulation
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let i = lo + idx;
            for r in 0..n {
                let left = h[(r, i)];
                let right = h[(r, i + 1)];
                h[(r, i)] = left * c + s.conj() * right;
                h[(r, i + 1)] = -s * left + right * c;
            }
            for r in 0..n {
                let left = q[(r, i)];
                let right = q[(r, i + 1)];
                q[(r, i)] = left * c + s.conj() * right;
                q[(r, i + 1)] = -s * left + right * c;
            }
        }

        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    true
}

/// Full eigendecomposition. Returns `None` when the QR iteration fails to
/// converge or the eigenvector matrix is numerically singular; callers are
/// expected to also reject results with a large `condition` or `residual`.
pub fn eigen_decompose(a: &CMatrix) -> Option<Eigen> {
    let n = a.dim();
    if n == 0 || !a.is_finite() {
        return None;
    }
    if n == 1 {
        return Some(Eigen {
            values: vec![a[(0, 0)]],
            vectors: CMatrix::identity(1),
            inverse: CMatrix::identity(1),
            condition: 1.0,
            residual: 0.0,
        });
    }

    let mut t = a.clone();
    let mut q = CMatrix::identity(n);
    hessenberg(&mut t, &mut q);
    if !schur(&mut t, &mut q) {
        return None;
    }

    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    // eigenvectors of the triangular factor by back-substitution
    let tnorm = t.one_norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut x = CMatrix::zeros(n);
    for j in 0..n {
        x[(j, j)] = Complex64::ONE;
        for i in (0..j).rev() {
            let mut sum = Complex64::ZERO;
            for k in (i + 1)..=j {
                sum += t[(i, k)] * x[(k, j)];
            }
            let mut den = t[(i, i)] - values[j];
            if den.abs() < small {
                den = Complex64::new(small, 0.0);
            }
            x[(i, j)] = -sum / den;
        }
    }

    let mut vectors = q.matmul(&x);
    for j in 0..n {
        let mut norm = 0.0f64;
        for i in 0..n {
            norm += vectors[(i, j)].norm_sqr();
        }
        let norm = Float::sqrt(norm);
        if norm == 0.0 {
            return None;
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        for i in 0..n {
            vectors[(i, j)] *= inv;
        }
    }

    let factors = lu_factor(&vectors).ok()?;
    let inverse = factors.inverse();
    let condition = vectors.one_norm() * inverse.one_norm();

    // residual ||A V - V L||_1 / (1 + ||A||_1)
    let av = a.matmul(&vectors);
    let mut res = 0.0f64;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            col += (av[(i, j)] - vectors[(i, j)] * values[j]).abs();
        }
        res = res.max(col);
    }
    let residual = res / (1.0 + a.one_norm());

    Some(Eigen {
        values,
        vectors,
        inverse,
        condition,
        residual,
    })
}

impl Eigen {
    /// Apply exp(scale * A) to a vector through the eigenbasis.
    pub fn apply_exp(&self, scale: f64, y: &[Complex64]) -> Vec<Complex64> {
        let mut z = self.inverse.matvec(y);
        for (zi, lambda) in z.iter_mut().zip(self.values.iter()) {
            *zi *= (*lambda * scale).exp();
        }
        self.vectors.matvec(&z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rand_cmatrix(n: usize, rng: &mut impl Rng, scale: f64) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(
                    scale * (rng.random::<f64>() * 2.0 - 1.0),
                    scale * (rng.random::<f64>() * 2.0 - 1.0),
                );
            }
        }
        m
    }

    /// Order-20 Taylor series; accurate to ~1e-14 for ||A|| <~ 1.
    fn expm_taylor(a: &CMatrix) -> CMatrix {
        let n = a.dim();
        let mut sum = CMatrix::identity(n);
        let mut term = CMatrix::identity(n);
        for k in 1..=20u32 {
            term = term.matmul(a);
            term = term.scaled(Complex64::new(1.0 / k as f64, 0.0));
            sum.add_assign_scaled(&term, Complex64::ONE);
        }
        sum
    }

    fn mat_close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        a.data()
            .iter()
            .zip(b.data().iter())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn expm_zero_is_identity() {
        let e = expm(&CMatrix::zeros(3)).unwrap();
        assert_eq!(e, CMatrix::identity(3));
    }

    #[test]
    fn expm_diagonal_is_scalar_exp() {
        let mut a = CMatrix::zeros(2);
        a[(0, 0)] = Complex64::new(-1.0, 0.0);
        a[(1, 1)] = Complex64::new(-2.0, 0.5);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - Complex64::new(-1.0, 0.0).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - Complex64::new(-2.0, 0.5).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], Complex64::ZERO);
    }

    #[test]
    fn expm_nilpotent_closed_form() {
        // A = [[0,1],[0,0]] gives exp(A) = I + A exactly
        let mut a = CMatrix::zeros(2);
        a[(0, 1)] = Complex64::ONE;
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - Complex64::ONE).abs() < 1e-15);
        assert!((e[(0, 1)] - Complex64::ONE).abs() < 1e-15);
        assert!(e[(1, 0)].abs() < 1e-15);
        assert!((e[(1, 1)] - Complex64::ONE).abs() < 1e-15);
    }

    #[test]
    fn expm_matches_taylor_oracle_at_small_norm() {
        let mut rng = crate::rng::stream_rng(11, 0);
        for _ in 0..20 {
            let a = rand_cmatrix(4, &mut rng, 0.25);
            let e = expm(&a).unwrap();
            let t = expm_taylor(&a);
            assert!(mat_close(&e, &t, 1e-12), "Pade vs Taylor mismatch");
        }
    }

    #[test]
    fn expm_semigroup_under_scaling() {
        let mut rng = crate::rng::stream_rng(12, 0);
        for _ in 0..10 {
            let a = rand_cmatrix(5, &mut rng, 2.0);
            let full = expm(&a).unwrap();
            let half = expm(&a.scaled(Complex64::new(0.5, 0.0))).unwrap();
            let squared = half.matmul(&half);
            assert!(mat_close(&full, &squared, 1e-11 * (1.0 + full.one_norm())));
        }
    }

    #[test]
    fn expm_rejects_non_finite() {
        let mut a = CMatrix::zeros(2);
        a[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(expm(&a), Err(Error::NonFiniteMatrix));
    }

    #[test]
    fn lu_solves_random_systems() {
        let mut rng = crate::rng::stream_rng(13, 0);
        for _ in 0..20 {
            let a = rand_cmatrix(6, &mut rng, 1.0);
            let x: Vec<Complex64> = (0..6)
                .map(|_| Complex64::new(rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            let b = a.matvec(&x);
            let solved = lu_factor(&a).unwrap().solve_vec(&b);
            for (u, v) in solved.iter().zip(x.iter()) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lu_detects_exactly_singular() {
        let mut a = CMatrix::zeros(2);
        a[(0, 0)] = Complex64::ONE;
        a[(0, 1)] = Complex64::ONE;
        // second row zero
        assert!(matches!(lu_factor(&a), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn eigen_reconstructs_random_matrices() {
        let mut rng = crate::rng::stream_rng(14, 0);
        for trial in 0..20 {
            let n = 2 + (trial % 5);
            let a = rand_cmatrix(n, &mut rng, 1.0);
            let e = eigen_decompose(&a).expect("random dense matrices should decompose");
            assert!(e.residual < 1e-12, "residual {}", e.residual);
            // A v = lambda v per column
            for j in 0..n {
                let v: Vec<Complex64> = (0..n).map(|i| e.vectors[(i, j)]).collect();
                let av = a.matvec(&v);
                for i in 0..n {
                    assert!((av[i] - e.values[j] * v[i]).abs() < 1e-9 * (1.0 + a.one_norm()));
                }
            }
        }
    }

    #[test]
    fn eigen_apply_exp_matches_expm() {
        let mut rng = crate::rng::stream_rng(15, 0);
        for _ in 0..10 {
            let a = rand_cmatrix(4, &mut rng, 1.0);
            let e = eigen_decompose(&a).unwrap();
            if e.condition > 1e8 || e.residual > 1e-12 {
                continue;
            }
            let y: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            let scale = 0.7;
            let via_eig = e.apply_exp(scale, &y);
            let dense = expm(&a.scaled(Complex64::new(scale, 0.0))).unwrap();
            let via_expm = dense.matvec(&y);
            for (u, v) in via_eig.iter().zip(via_expm.iter()) {
                assert!((u - v).abs() < 1e-10 * e.condition.max(1.0));
            }
        }
    }

    #[test]
    fn eigen_flags_defective_matrix() {
        // Jordan block: eigendecomposition must be detectably unusable.
        let mut a = CMatrix::zeros(2);
        a[(0, 0)] = Complex64::new(-1.0, 0.0);
        a[(0, 1)] = Complex64::ONE;
        a[(1, 1)] = Complex64::new(-1.0, 0.0);
        match eigen_decompose(&a) {
            None => {}
            Some(e) => assert!(
                e.condition > 1e8 || e.residual > 1e-12,
                "defective matrix passed certification: cond {} residual {}",
                e.condition,
                e.residual
            ),
        }
    }
}
