//! Small dense linear algebra.
//!
//! Rank, kernel and the pseudoinverse of dimension matrices are computed
//! exactly over the rationals, so rank decisions never depend on a tolerance.
//! [`RealMatrix::pinv`] covers general floating-point input through an SVD.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, primitive_integer_vector, to_f64, Rational};

/// Default relative singular-value cutoff for floating-point input.
pub const DEFAULT_RANK_RTOL: f64 = 1e-12;

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter().map(|r| r.as_ref().iter().map(|&x| crate::rational::int(x)).collect()).collect(),
        )
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::LengthMismatch { expected: rows, got: col.len() });
            }
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// Column selection.
    pub fn select_columns(&self, cols: &[usize]) -> RatMatrix {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out[(i, jj)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(to_f64).collect() }
    }

    /// Reduced row echelon form and the (strictly increasing, 0-based) pivot
    /// columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = (r..a.rows).find(|&i| !a[(i, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(p, r);
            let inv = a[(r, col)].recip();
            for j in col..a.cols {
                let x = &a[(r, j)] * &inv;
                a[(r, j)] = x;
            }
            for i in 0..a.rows {
                if i == r || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in col..a.cols {
                    let x = &a[(r, j)] * &f;
                    a[(i, j)] -= x;
                }
            }
            pivots.push(col);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical kernel basis: one vector per free column of the RREF, each
    /// scaled to coprime integers with its first nonzero entry positive.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![Rational::zero(); self.cols];
                v[free] = Rational::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(row, free)].clone();
                }
                primitive_integer_vector(&v)
            })
            .collect()
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = red[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Exact Moore–Penrose pseudoinverse by rank factorization `A = C·F`,
    /// with `C` the pivot columns of `A` and `F` the nonzero rows of its RREF:
    /// `A† = Fᵀ (F Fᵀ)⁻¹ (CᵀC)⁻¹ Cᵀ`.
    pub fn pinv(&self) -> RatMatrix {
        let (red, pivots) = self.rref();
        let r = pivots.len();
        if r == 0 {
            return Self::zeros(self.cols, self.rows);
        }
        let c = self.select_columns(&pivots);
        let f = Self::new(r, self.cols, red.data[..r * self.cols].to_vec()).expect("shape");
        let ft = f.transpose();
        let ct = c.transpose();
        let ffi = f.mul(&ft).expect("shape").inverse().expect("F has full row rank");
        let cci = ct.mul(&c).expect("shape").inverse().expect("C has full column rank");
        ft.mul(&ffi).and_then(|m| m.mul(&cci)).and_then(|m| m.mul(&ct)).expect("shape")
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> Rational {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(Signed::abs).sum::<Rational>())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(format_rational).collect()).collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for (i, row) in cells.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            write!(f, "[{}]", padded.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMatrix {}x{}\n{self}", self.rows, self.cols)
    }
}

/// Minimum-norm least-squares solution `y = A†b` and its residual
/// `‖Ay − b‖_∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinNormSolution {
    pub y: Vec<Rational>,
    pub residual: Rational,
}

impl MinNormSolution {
    pub fn y_f64(&self) -> Vec<f64> {
        self.y.iter().map(to_f64).collect()
    }

    pub fn residual_f64(&self) -> f64 {
        to_f64(&self.residual)
    }

    pub fn is_exact(&self) -> bool {
        self.residual.is_zero()
    }
}

pub fn min_norm_solve(a: &RatMatrix, b: &[Rational]) -> Result<MinNormSolution> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch { expected: a.rows(), got: b.len() });
    }
    let y = a.pinv().mul_vec(b)?;
    let residual = residual_inf(a, &y, b)?;
    Ok(MinNormSolution { y, residual })
}

/// `‖Ay − b‖_∞` in exact arithmetic.
pub fn residual_inf(a: &RatMatrix, y: &[Rational], b: &[Rational]) -> Result<Rational> {
    let ay = a.mul_vec(y)?;
    Ok(ay.iter().zip(b).map(|(x, t)| (x - t).abs()).max().unwrap_or_else(Rational::zero))
}

/// `‖Ay − b‖_∞` for a floating-point exponent vector.
pub fn residual_inf_f64(a: &RatMatrix, y: &[f64], b: &[Rational]) -> Result<f64> {
    if y.len() != a.cols() || b.len() != a.rows() {
        return Err(Error::LengthMismatch { expected: a.cols(), got: y.len() });
    }
    let ar = a.to_real();
    Ok((0..a.rows())
        .map(|i| {
            let s: f64 = (0..a.cols()).map(|j| ar.get(i, j) * y[j]).sum();
            (s - to_f64(&b[i])).abs()
        })
        .fold(0.0, f64::max))
}

/// Dense row-major matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch { expected: rows * cols, got: data.len() });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(k / cols.max(1), k % cols.max(1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let c = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::new(rows.len(), c, rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Largest entrywise absolute difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &RealMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Moore–Penrose pseudoinverse through a one-sided Jacobi SVD. Singular
    /// values at or below `tol` are treated as zero; `None` uses
    /// `1e-12 · max(m, n) · σ_max`.
    pub fn pinv(&self, tol: Option<f64>) -> Result<RealMatrix> {
        if let Some(t) = tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance {t} must be >= 0")));
            }
        }
        if self.rows < self.cols {
            return Ok(self.transpose().pinv(tol)?.transpose());
        }
        let (u, sigma, v) = self.jacobi_svd();
        let smax = sigma.iter().copied().fold(0.0, f64::max);
        let cutoff = tol.unwrap_or(DEFAULT_RANK_RTOL * self.rows.max(self.cols) as f64 * smax);
        let mut out = Self::zeros(self.cols, self.rows);
        for (j, &s) in sigma.iter().enumerate() {
            if s <= cutoff || s == 0.0 {
                continue;
            }
            for i in 0..self.cols {
                let vij = v[i * self.cols + j] / s;
                for k in 0..self.rows {
                    out.data[i * self.rows + k] += vij * u[k * self.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Singular values of the matrix, in no particular order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows < self.cols {
            self.transpose().jacobi_svd().1
        } else {
            self.jacobi_svd().1
        }
    }

    /// One-sided Jacobi (Hestenes) SVD for `rows >= cols`: returns `U` with
    /// orthonormal columns (`rows × cols`), the singular values and `V`
    /// (`cols × cols`), all row-major.
    fn jacobi_svd(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (m, n) = (self.rows, self.cols);
        let mut u = self.data.clone();
        let mut v = Self::identity(n).data;
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                    for i in 0..m {
                        let (a, b) = (u[i * n + p], u[i * n + q]);
                        alpha += a * a;
                        beta += b * b;
                        gamma += a * b;
                    }
                    if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for (mat, rows) in [(&mut u, m), (&mut v, n)] {
                        for i in 0..rows {
                            let (a, b) = (mat[i * n + p], mat[i * n + q]);
                            mat[i * n + p] = c * a - s * b;
                            mat[i * n + q] = s * a + c * b;
                        }
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let sigma: Vec<f64> =
            (0..n).map(|j| (0..m).map(|i| u[i * n + j] * u[i * n + j]).sum::<f64>().sqrt()).collect();
        for (j, &s) in sigma.iter().enumerate() {
            if s > 0.0 {
                for i in 0..m {
                    u[i * n + j] /= s;
                }
            }
        }
        (u, sigma, v)
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "{:?}", self.row(i))?;
        }
        Ok(())
    }
}
