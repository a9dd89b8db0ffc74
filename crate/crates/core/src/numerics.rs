//! Dense real linear algebra used by the checkers and the oracle.
//!
//! Everything here works on small row-major matrices: cyclic Jacobi for
//! symmetric eigenproblems, Gauss-Jordan inversion, and a scaling-and-squaring
//! matrix exponential. Tolerance comparisons scale by `1 + ‖M‖_F`.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const DEFAULT_EIG_TOL: f64 = 1e-10;
pub const DEFAULT_PSD_TOL: f64 = 1e-8;
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-12;
pub const DEFAULT_EXP_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;
const EXP_TAYLOR_DEGREE: usize = 18;
const EXP_MAX_SQUARINGS: u32 = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e} > {bound:.3e})")]
    NotSymmetric { asymmetry: f64, bound: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is singular (pivot {pivot:.3e} below {bound:.3e})")]
    Singular { pivot: f64, bound: f64 },
    #[error("matrix exponential overflow (norm {norm:.3e})")]
    Overflow { norm: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid matrix: {0}")]
    Invalid(String),
}

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::Invalid("matrix must have at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(NumericsError::Invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(NumericsError::Invalid(format!("non-finite entry {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, NumericsError> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(NumericsError::Invalid(format!(
                    "row {i} has {} entries, expected {ncols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let ncols = columns.len();
        let nrows = columns.first().map(Vec::len).unwrap_or(0);
        if columns.iter().any(|c| c.len() != nrows) {
            return Err(NumericsError::Invalid("columns have unequal length".into()));
        }
        let mut data = vec![0.0; nrows * ncols];
        for (j, c) in columns.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                data[i * ncols + j] = v;
            }
        }
        Self::new(nrows, ncols, data)
    }

    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, &a) in u.iter().enumerate() {
            for (j, &b) in v.iter().enumerate() {
                m[(i, j)] = a * b;
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
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

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length does not match matrix columns");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T x` without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "vector length does not match matrix rows");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * alpha).collect() }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `(M + M^T) / 2`.
    pub fn symmetric_part(&self) -> Matrix {
        let t = self.transpose();
        self.add(&t).scale(0.5)
    }

    /// `x^T M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `1 + ‖M‖_F`, the scale used by every tolerance comparison.
    pub fn tol_scale(&self) -> f64 {
        1.0 + self.frobenius_norm()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn powi(&self, k: usize) -> Matrix {
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    /// Panics on a shape mismatch; use [`Matrix::matmul`] for a checked product.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("matrix shape mismatch")
    }
}

impl Mul<&Matrix> for Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        &self * rhs
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?}", self.to_rows())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_vec(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Symmetric eigen-decomposition with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `U diag(f(λ)) U^T`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            for i in 0..n {
                let uik = u[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += uik * u[(j, k)];
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// The sweep order is fixed (row-major over the strict upper triangle), so
/// results are reproducible for a given build. Each eigenvector is signed so
/// that its largest-magnitude component (lowest index on ties) is positive.
pub fn sym_eig(m: &Matrix, eig_tol: f64) -> Result<SymEig, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::DimensionMismatch(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let bound = eig_tol * m.tol_scale();
    let asymmetry = m.max_asymmetry();
    if asymmetry > bound {
        return Err(NumericsError::NotSymmetric { asymmetry, bound });
    }
    let n = m.rows;
    let mut a = m.symmetric_part();
    let mut v = Matrix::identity(n);
    let fro = a.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * fro || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        // One more look: a sweep can finish exactly at the threshold.
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].abs())
            .fold(0.0, f64::max);
        if off > bound {
            return Err(NumericsError::NoConvergence { sweeps: JACOBI_MAX_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        normalize_sign(&mut col);
        for (i, val) in col.into_iter().enumerate() {
            vectors[(i, k)] = val;
        }
    }
    Ok(SymEig { eigenvalues, eigenvectors: vectors })
}

/// Applies the Jacobi rotation in the (p, q) plane: `A <- J^T A J`, `V <- V J`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Flips `v` so its largest-magnitude entry (first on near-ties) is positive.
pub fn normalize_sign(v: &mut [f64]) {
    let max = max_abs_vec(v);
    if max == 0.0 {
        return;
    }
    let lead = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)).unwrap_or(0);
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.positive, self.zero, self.negative)
    }
}

pub fn inertia(m: &Matrix, zero_tol: f64) -> Result<Inertia, NumericsError> {
    let eig = sym_eig(m, DEFAULT_EIG_TOL.max(zero_tol))?;
    Ok(inertia_of(&eig, zero_tol * m.tol_scale()))
}

pub fn inertia_of(eig: &SymEig, band: f64) -> Inertia {
    let mut out = Inertia { positive: 0, zero: 0, negative: 0 };
    for &l in &eig.eigenvalues {
        if l > band {
            out.positive += 1;
        } else if l < -band {
            out.negative += 1;
        } else {
            out.zero += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    NegSemidefinite,
    NotNegSemidefinite,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitenessReport {
    pub class: Definiteness,
    pub lambda_max: f64,
    /// `psd_tol * (1 + ‖M‖_F)`.
    pub band: f64,
}

/// Three-way test of `M ⪯ 0` against the band `psd_tol * (1 + ‖M‖_F)`.
///
/// The negative-semidefinite test is applied first, so with `psd_tol = 0`
/// an exactly zero `λ_1` classifies as `NegSemidefinite`.
pub fn definiteness(m: &Matrix, psd_tol: f64) -> Result<DefinitenessReport, NumericsError> {
    let eig = sym_eig(m, DEFAULT_EIG_TOL.max(psd_tol))?;
    Ok(classify_lambda_max(eig.lambda_max(), psd_tol * m.tol_scale()))
}

pub fn classify_lambda_max(lambda_max: f64, band: f64) -> DefinitenessReport {
    let class = if lambda_max <= -band {
        Definiteness::NegSemidefinite
    } else if lambda_max >= band {
        Definiteness::NotNegSemidefinite
    } else {
        Definiteness::Marginal
    };
    DefinitenessReport { class, lambda_max, band }
}

pub fn lambda_max(m: &Matrix) -> Result<f64, NumericsError> {
    Ok(sym_eig(m, DEFAULT_EIG_TOL)?.lambda_max())
}

/// Gauss-Jordan inversion with partial pivoting.
pub fn invert(m: &Matrix, singular_tol: f64) -> Result<Matrix, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let bound = singular_tol * m.frobenius_norm();
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let (piv_row, piv) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv <= bound || piv == 0.0 {
            return Err(NumericsError::Singular { pivot: piv, bound });
        }
        if piv_row != col {
            swap_rows(&mut a, piv_row, col);
            swap_rows(&mut inv, piv_row, col);
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= f * a[(col, j)];
                inv[(r, j)] -= f * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

fn swap_rows(m: &mut Matrix, i: usize, j: usize) {
    let cols = m.cols;
    for k in 0..cols {
        m.data.swap(i * cols + k, j * cols + k);
    }
}

/// `e^{At}` by scaling and squaring a degree-18 Taylor polynomial.
///
/// The argument is scaled until `‖At‖_1 / 2^s ≤ 1/2`; at that radius the
/// truncation error of the series is below `1e-22`, comfortably inside
/// `DEFAULT_EXP_TOL` for every `‖At‖ ≤ 64`.
pub fn mat_exp(a: &Matrix, t: f64) -> Result<Matrix, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::DimensionMismatch("matrix exponential of a non-square matrix".into()));
    }
    if !t.is_finite() {
        return Err(NumericsError::Invalid(format!("time {t} is not finite")));
    }
    let n = a.rows;
    let at = a.scale(t);
    let norm = at.norm_1();
    if !norm.is_finite() {
        return Err(NumericsError::Overflow { norm });
    }
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    if squarings > EXP_MAX_SQUARINGS {
        return Err(NumericsError::Overflow { norm });
    }
    let scaled = at.scale(0.5f64.powi(squarings as i32));

    // Horner evaluation of sum_k X^k / k!.
    let mut result = Matrix::identity(n);
    for k in (1..=EXP_TAYLOR_DEGREE).rev() {
        result = (&scaled * &result).scale(1.0 / k as f64);
        for i in 0..n {
            result[(i, i)] += 1.0;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
        if !result.is_finite() {
            return Err(NumericsError::Overflow { norm });
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn eig_of_diagonal() {
        let m = Matrix::from_diag(&[3.0, 1.0, -2.0]);
        let e = sym_eig(&m, DEFAULT_EIG_TOL).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0, -2.0]);
        assert!(close(&e.eigenvectors, &Matrix::identity(3), 0.0));
    }

    #[test]
    fn eig_of_two_by_two() {
        // Characteristic polynomial (2-λ)^2 - 1 = 0 gives λ = 3, 1.
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = sym_eig(&m, DEFAULT_EIG_TOL).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u1 = e.eigenvector(0);
        let u2 = e.eigenvector(1);
        assert!((u1[0] - s).abs() < 1e-14 && (u1[1] - s).abs() < 1e-14);
        assert!((u2[0].abs() - s).abs() < 1e-14 && (u2[0] + u2[1]).abs() < 1e-14);
    }

    #[test]
    fn eig_of_identity() {
        let e = sym_eig(&Matrix::identity(4), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn eig_rejects_asymmetric() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m, DEFAULT_EIG_TOL), Err(NumericsError::NotSymmetric { .. })));
    }

    #[test]
    fn inertia_examples() {
        let i = inertia(&Matrix::from_diag(&[1.0, 1.0, -1.0]), 1e-10).unwrap();
        assert_eq!(i, Inertia { positive: 2, zero: 0, negative: 1 });
        let z = inertia(&Matrix::zeros(3, 3), 1e-10).unwrap();
        assert_eq!(z, Inertia { positive: 0, zero: 3, negative: 0 });
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_eq!(inertia(&m, 1e-10).unwrap(), Inertia { positive: 2, zero: 0, negative: 0 });
    }

    #[test]
    fn definiteness_examples() {
        let neg = definiteness(&Matrix::identity(3).scale(-1.0), 1e-9).unwrap();
        assert_eq!(neg.class, Definiteness::NegSemidefinite);
        let ind = definiteness(&Matrix::from_diag(&[1.0, -1.0]), 1e-9).unwrap();
        assert_eq!(ind.class, Definiteness::NotNegSemidefinite);
        let zero = definiteness(&Matrix::zeros(2, 2), 1e-9).unwrap();
        assert_eq!(zero.class, Definiteness::Marginal);
        // A zero tolerance collapses the band onto the negative side.
        let pinned = definiteness(&Matrix::zeros(2, 2), 0.0).unwrap();
        assert_eq!(pinned.class, Definiteness::NegSemidefinite);
    }

    #[test]
    fn invert_examples() {
        let inv = invert(&Matrix::from_diag(&[2.0, 4.0]), DEFAULT_SINGULAR_TOL).unwrap();
        assert!(close(&inv, &Matrix::from_diag(&[0.5, 0.25]), 0.0));
        let m = Matrix::identity(2).sub(&Matrix::identity(2).scale(-0.1));
        let inv = invert(&m, DEFAULT_SINGULAR_TOL).unwrap();
        assert!(close(&inv, &Matrix::identity(2).scale(1.0 / 1.1), 1e-15));
        let sing = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(invert(&sing, DEFAULT_SINGULAR_TOL), Err(NumericsError::Singular { .. })));
    }

    #[test]
    fn invert_with_pivoting() {
        let m = Matrix::from_rows(&[[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [4.0, -3.0, 8.0]]).unwrap();
        let inv = invert(&m, DEFAULT_SINGULAR_TOL).unwrap();
        assert!(close(&(&m * &inv), &Matrix::identity(3), 1e-13));
    }

    #[test]
    fn exp_examples() {
        let a = Matrix::from_rows(&[[0.3, -1.2], [2.0, 0.1]]).unwrap();
        assert!(close(&mat_exp(&a, 0.0).unwrap(), &Matrix::identity(2), 0.0));

        let rot = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let e = mat_exp(&rot, FRAC_PI_2).unwrap();
        assert!(close(&e, &rot, 1e-14));

        let d = mat_exp(&Matrix::from_diag(&[1.0, -1.0]), 1.0).unwrap();
        assert!(close(&d, &Matrix::from_diag(&[E, 1.0 / E]), 1e-14));
    }

    #[test]
    fn exp_overflow() {
        let a = Matrix::from_diag(&[1.0]);
        assert!(matches!(mat_exp(&a, 1e308), Err(NumericsError::Overflow { .. })));
        assert!(matches!(mat_exp(&a, 800.0), Err(NumericsError::Overflow { .. })));
    }

    #[test]
    fn matrix_construction_errors() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(Matrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(Matrix::new(0, 1, vec![]).is_err());
    }
}
