//! Dense and banded complex linear algebra used by the operator and
//! cumulant code. Matrices are row-major.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::ops::{Index, IndexMut};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Matrix { rows, cols, data }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        let mut out = Matrix::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            out.row_mut(i - r0).copy_from_slice(&self.row(i)[c0..c1]);
        }
        out
    }

    pub fn top_left(&self, n: usize) -> Matrix {
        self.block(0, n, 0, n)
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_in_place(&mut self, s: C64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// `self + s·I`.
    pub fn shift(&self, s: C64) -> Matrix {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += s;
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm_into(self, other, &mut out);
        out
    }

    /// `self · other*`.
    pub fn matmul_adjoint(&self, other: &Matrix) -> Matrix {
        self.matmul(&other.adjoint())
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &Matrix) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            let row = self.row(i);
            for (k, a) in row.iter().enumerate() {
                acc += a * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, z) in sums.iter_mut().zip(self.row(i)) {
                *s += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest singular value by power iteration on `A*A`.
    pub fn spectral_norm(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let adj = self.adjoint();
        let mut v: Vec<C64> = (0..self.cols).map(|j| C64::new(1.0 + 0.1 * (j % 7) as f64, 0.0)).collect();
        let mut estimate = 0.0;
        for _ in 0..500 {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            let w = adj.matvec(&self.matvec(&v));
            let next = w.iter().zip(&v).map(|(a, b)| (a * b.conj()).re).sum::<f64>().max(0.0).sqrt();
            v = w;
            if (next - estimate).abs() <= 1e-13 * next {
                return next;
            }
            estimate = next;
        }
        estimate
    }

    /// Lower and upper bandwidth: the largest `i - j` and `j - i` over nonzero entries.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut lower, mut upper) = (0usize, 0usize);
        for i in 0..self.rows {
            for (j, z) in self.row(i).iter().enumerate() {
                if *z != ZERO {
                    if i > j {
                        lower = lower.max(i - j);
                    } else {
                        upper = upper.max(j - i);
                    }
                }
            }
        }
        (lower, upper)
    }

    /// `½(A + A*)`, exactly Hermitian in floating point.
    pub fn hermitian_part(&self) -> Matrix {
        let mut out = self.clone();
        out.hermitian_part_in_place();
        out
    }

    pub fn hermitian_part_in_place(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        for i in 0..n {
            let d = self.data[i * n + i];
            self.data[i * n + i] = C64::new(d.re, 0.0);
            for j in i + 1..n {
                let a = self.data[i * n + j];
                let b = self.data[j * n + i];
                let h = (a + b.conj()) * 0.5;
                self.data[i * n + j] = h;
                self.data[j * n + i] = h.conj();
            }
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `out ← a·b` through the packed complex kernel.
fn gemm_into(a: &Matrix, b: &Matrix, out: &mut Matrix) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.data.iter_mut().for_each(|z| *z = ZERO);
        return;
    }
    // SAFETY: Complex64 is repr(C) with layout [re, im], matching the
    // kernel's element type; the pointers cover exactly m·k, k·n and m·n
    // elements with the row-major strides passed alongside.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.data.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.data.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            out.data.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign_flips: usize,
}

impl Lu {
    /// Fails when a pivot falls below `1e-14·max|A|`.
    pub fn factor(a: &Matrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::invalid("LU factorization needs a square matrix"));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign_flips = 0;
        let floor = 1e-14 * a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, best) =
                (k..n).map(|i| (i, lu.data[i * n + k].norm())).fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= floor {
                return Err(Error::Singular { pivot: best });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign_flips += 1;
            }
            let pivot = lu.data[k * n + k];
            let (upper, lower) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row = &mut lower[i * n..(i + 1) * n];
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != ZERO {
                    for (x, u) in row[k + 1..].iter_mut().zip(pivot_row) {
                        *x -= factor * u;
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign_flips })
    }

    pub fn size(&self) -> usize {
        self.lu.rows
    }

    /// Smallest pivot modulus, a cheap conditioning signal.
    pub fn min_pivot(&self) -> f64 {
        (0..self.size()).map(|i| self.lu[(i, i)].norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.size();
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: C64 = row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: C64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves for every column of `b`.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let n = self.size();
        assert_eq!(b.rows, n);
        let mut out = Matrix::zeros(n, b.cols);
        for j in 0..b.cols {
            let x = self.solve(&b.column(j));
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Matrix {
        self.solve_matrix(&Matrix::identity(self.size()))
    }

    /// Complex logarithm of the determinant (principal branch per pivot).
    pub fn log_det(&self) -> C64 {
        let mut acc = C64::new(0.0, if self.sign_flips % 2 == 1 { std::f64::consts::PI } else { 0.0 });
        for i in 0..self.size() {
            acc += self.lu[(i, i)].ln();
        }
        acc
    }
}

/// LU with partial pivoting for a band matrix with `kl` sub- and `ku`
/// super-diagonals. Column-major band storage with `kl` extra rows for
/// the fill-in created by row interchanges.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<C64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &Matrix, kl: usize, ku: usize) -> Result<BandedLu> {
        if !a.is_square() {
            return Err(Error::invalid("banded LU needs a square matrix"));
        }
        let n = a.rows;
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![ZERO; ld * n];
        // A[r, c] lives at ab[c*ld + kv + r - c].
        for c in 0..n {
            for r in c.saturating_sub(ku)..(c + kl + 1).min(n) {
                ab[c * ld + kv + r - c] = a[(r, c)];
            }
        }
        let floor = 1e-14 * a.max_abs().max(f64::MIN_POSITIVE);
        let mut pivots = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = -1.0;
            for p in 0..=km {
                let v = ab[j * ld + kv + p].norm();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            if best <= floor {
                return Err(Error::Singular { pivot: best });
            }
            pivots[j] = j + jp;
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let r1 = c * ld + kv + j - c;
                    let r2 = c * ld + kv + j + jp - c;
                    ab.swap(r1, r2);
                }
            }
            let pivot = ab[j * ld + kv];
            for p in 1..=km {
                ab[j * ld + kv + p] /= pivot;
            }
            for c in j + 1..=ju {
                let u = ab[c * ld + kv + j - c];
                if u == ZERO {
                    continue;
                }
                for p in 1..=km {
                    let l = ab[j * ld + kv + p];
                    ab[c * ld + kv + j + p - c] -= l * u;
                }
            }
        }
        Ok(BandedLu { n, kl, ku, ld, ab, pivots })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Solves in place; `first_nonzero` lets sparse right-hand sides skip
    /// the leading part of the forward sweep.
    pub fn solve_in_place(&self, b: &mut [C64], first_nonzero: usize) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let kv = self.kl + self.ku;
        let ld = self.ld;
        for j in first_nonzero.saturating_sub(self.kl)..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != ZERO {
                let km = self.kl.min(n - 1 - j);
                for q in 1..=km {
                    b[j + q] -= self.ab[j * ld + kv + q] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[j * ld + kv];
            let bj = b[j];
            if bj != ZERO {
                for r in j.saturating_sub(kv)..j {
                    b[r] -= self.ab[j * ld + kv + r - j] * bj;
                }
            }
        }
    }
}

/// Matrix exponential by scaling and squaring around a Taylor core.
///
/// The series is summed until the next term is below `tol` relative to the
/// scaled norm bound of 1/2, which bounds the backward error by `tol`.
pub fn expm(a: &Matrix, tol: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::invalid("matrix exponential needs a square matrix"));
    }
    let n = a.rows;
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(Error::Degenerate("matrix exponential of a non-finite matrix".into()));
    }
    if norm > 700.0 * n.max(1) as f64 {
        return Err(Error::Degenerate(format!("matrix exponential overflows (norm {norm:e})")));
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let scaled = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    let tol = tol.max(f64::EPSILON);
    let mut result = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    let mut bound = 1.0;
    for k in 1..=40 {
        term = term.matmul(&scaled);
        term.scale_in_place(C64::new(1.0 / k as f64, 0.0));
        result = result.add(&term);
        bound *= scaled_norm / k as f64;
        if bound < tol {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if result.as_slice().iter().any(|z| !z.is_finite()) {
        return Err(Error::Degenerate("matrix exponential overflowed".into()));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn test_matrix(n: usize) -> Matrix {
        Matrix::from_fn(n, n, |i, j| {
            let x = (i * 7 + j * 13) as f64;
            c((x * 0.37).sin() + if i == j { 3.0 } else { 0.0 }, (x * 0.11).cos() * 0.5)
        })
    }

    #[test]
    fn gemm_matches_naive_product() {
        let a = Matrix::from_fn(5, 3, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.5));
        let b = Matrix::from_fn(3, 4, |i, j| c((i + 2 * j) as f64, -(i as f64)));
        let p = a.matmul(&b);
        for i in 0..5 {
            for j in 0..4 {
                let direct: C64 = (0..3).map(|k| a[(i, k)] * b[(k, j)]).sum();
                assert!((p[(i, j)] - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lu_solves_and_inverts() {
        let a = test_matrix(12);
        let lu = Lu::factor(&a).unwrap();
        let inv = lu.inverse();
        let id = a.matmul(&inv);
        assert!(id.sub(&Matrix::identity(12)).max_abs() < 1e-12);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = Matrix::from_fn(3, 3, |i, _| c(i as f64, 0.0));
        assert!(matches!(Lu::factor(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn log_det_of_diagonal() {
        let a = Matrix::diagonal(&[c(2.0, 0.0), c(-3.0, 0.0), c(0.0, 1.0)]);
        let det = Lu::factor(&a).unwrap().log_det().exp();
        assert!((det - c(0.0, -6.0)).norm() < 1e-12);
    }

    #[test]
    fn banded_lu_matches_dense_solve() {
        let n = 40;
        let (kl, ku) = (2, 3);
        let a = Matrix::from_fn(n, n, |i, j| {
            if i > j + kl || j > i + ku {
                ZERO
            } else {
                let x = (3 * i + 5 * j) as f64;
                // Weak diagonal forces row interchanges.
                c((x * 0.7).sin() + if i == j { 0.05 } else { 0.0 }, (x * 0.3).cos())
            }
        });
        let lu = BandedLu::factor(&a, kl, ku).unwrap();
        for start in [0usize, 7, 39] {
            let mut b = vec![ZERO; n];
            for (i, v) in b.iter_mut().enumerate().skip(start) {
                *v = c(1.0 / (1 + i) as f64, (i as f64).sin());
            }
            let dense = Lu::factor(&a).unwrap().solve(&b);
            lu.solve_in_place(&mut b, start);
            for i in 0..n {
                assert!((b[i] - dense[i]).norm() < 1e-9 * (1.0 + dense[i].norm()), "row {i}");
            }
        }
    }

    #[test]
    fn expm_examples() {
        let z = expm(&Matrix::zeros(4, 4), 1e-12).unwrap();
        assert!(z.sub(&Matrix::identity(4)).max_abs() < 1e-15);

        let thetas = [0.3, -1.2, 2.9, 40.0];
        let d = Matrix::diagonal(&thetas.map(|t| c(0.0, t)));
        let e = expm(&d, 1e-12).unwrap();
        for (i, t) in thetas.iter().enumerate() {
            assert!((e[(i, i)] - c(0.0, *t).exp()).norm() < 1e-11);
        }

        let nil = Matrix::from_vec(2, 2, vec![ZERO, ONE, ZERO, ZERO]);
        let e = expm(&nil, 1e-12).unwrap();
        assert!(e.sub(&Matrix::from_vec(2, 2, vec![ONE, ONE, ZERO, ONE])).max_abs() < 1e-15);
    }

    #[test]
    fn expm_of_commuting_sum() {
        let a = test_matrix(6).scale(c(0.2, 0.0));
        let e1 = expm(&a, 1e-13).unwrap();
        let e_half = expm(&a.scale(c(0.5, 0.0)), 1e-13).unwrap();
        assert!(e1.sub(&e_half.matmul(&e_half)).max_abs() < 1e-11 * e1.max_abs());
    }

    #[test]
    fn spectral_norm_of_unitary_is_one() {
        let t: f64 = 0.7;
        let u = Matrix::from_vec(2, 2, vec![c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0)]);
        assert!((u.spectral_norm() - 1.0).abs() < 1e-10);
    }
}
