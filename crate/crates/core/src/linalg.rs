//! Dense complex linear algebra.
//!
//! Everything in this crate (states, observables, Gram matrices, dual
//! constraint matrices) is carried by [`ComplexMatrix`]. Matrices are small:
//! the largest operator ever assembled is 1024×1024 and the largest matrix
//! ever diagonalized is a few dozen rows, so the routines below favour
//! accuracy and simplicity over speed.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Products with more entries than this are rejected by [`kron`].
pub const MAX_KRON_ENTRIES: usize = 1 << 26;

/// Largest dimension accepted by [`char_poly_coeffs`].
pub const MAX_CHAR_POLY_DIM: usize = 8;

/// Hermiticity tolerance accepted by [`hermitian_eigen`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default absolute tolerance on the minimum eigenvalue for PSD checks.
pub const PSD_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {op} on {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |m_ij - conj(m_ji)| = {defect:e}")]
    NotHermitian { defect: f64 },
    #[error("kronecker product would have {entries} entries (limit {MAX_KRON_ENTRIES})")]
    TooLarge { entries: usize },
    #[error("characteristic polynomial limited to dimension {MAX_CHAR_POLY_DIM}, got {dim}")]
    CharPolyDimension { dim: usize },
    #[error("entry count {len} does not match shape {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a real matrix from row-major entries.
    ///
    /// Panics if `entries.len() != rows * cols`; intended for literal tables.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "real entries do not fit shape");
        Self {
            rows,
            cols,
            data: entries.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend(r.as_ref().iter().map(|&v| Complex64::new(v, 0.0)));
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Column vector with the given entries.
    pub fn column(entries: Vec<Complex64>) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries,
        }
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn re(&self, i: usize, j: usize) -> f64 {
        self[(i, j)].re
    }

    pub fn set_re(&mut self, i: usize, j: usize, v: f64) {
        self[(i, j)] = Complex64::new(v, 0.0);
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Real parts as nested rows.
    pub fn to_real_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.re(i, j)).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.re(i, i)).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |m_ij - conj(m_ji)|; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Tr(self · rhs) without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Result<Complex64> {
        if self.cols != rhs.rows || self.rows != rhs.cols {
            return Err(LinalgError::DimensionMismatch {
                op: "trace_product",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self[(i, j)] * rhs[(j, i)];
            }
        }
        Ok(acc)
    }

    /// ⟨v|self|v⟩ for a column vector `v`.
    pub fn expectation(&self, v: &Self) -> Result<Complex64> {
        if v.cols != 1 || !self.is_square() || self.rows != v.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "expectation",
                left: self.shape(),
                right: v.shape(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            let vi = v.data[i].conj();
            if vi == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                row += self[(i, j)] * v.data[j];
            }
            acc += vi * row;
        }
        Ok(acc)
    }

    /// ⟨self|other⟩ for column vectors (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.cols != 1 || other.cols != 1 || self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "inner",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// |v⟩⟨v| for a column vector.
    pub fn outer_self(&self) -> Self {
        assert_eq!(self.cols, 1, "outer_self expects a column vector");
        Self::from_fn(self.rows, self.rows, |i, j| self.data[i] * self.data[j].conj())
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    /// Reorders a vector's basis (or both indices of a square matrix) so
    /// that new index `i` takes the old index `perm[i]`.
    pub fn permute_basis(&self, perm: &[usize]) -> Self {
        if self.cols == 1 {
            assert_eq!(perm.len(), self.rows);
            Self::column(perm.iter().map(|&k| self.data[k]).collect())
        } else {
            assert!(self.is_square() && perm.len() == self.rows);
            Self::from_fn(self.rows, self.cols, |i, j| self[(perm[i], perm[j])])
        }
    }

    /// Principal submatrix on the given indices.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix add")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix sub")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix mul")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                if z.im == 0.0 {
                    write!(f, "{:>12.6} ", z.re)?;
                } else {
                    write!(f, "{:>12.6}{:+.6}i ", z.re, z.im)?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Standard Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let entries = rows.saturating_mul(cols);
    if entries > MAX_KRON_ENTRIES {
        return Err(LinalgError::TooLarge { entries });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let s = a[(ai, aj)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for bi in 0..b.rows {
                let dst = (ai * b.rows + bi) * cols + aj * b.cols;
                let src = &b.data[bi * b.cols..(bi + 1) * b.cols];
                for (d, v) in out.data[dst..dst + b.cols].iter_mut().zip(src) {
                    *d = s * v;
                }
            }
        }
    }
    Ok(out)
}

/// `m ⊗ m ⊗ … ⊗ m` with `count` factors; the 1×1 identity for `count == 0`.
pub fn kron_power(m: &ComplexMatrix, count: usize) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(1);
    for _ in 0..count {
        acc = kron(&acc, m)?;
    }
    Ok(acc)
}

/// Left-to-right Kronecker product of a list of factors.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(1);
    for f in factors {
        acc = kron(&acc, f)?;
    }
    Ok(acc)
}

/// Spectrum of a Hermitian matrix, eigenvalues ascending with matching
/// eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// V · diag(f(λ)) · V†
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let d = v.rows();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(d, d, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &w) in weights.iter().enumerate() {
                if w != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * w;
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi on a dense real symmetric matrix (row-major, `n`×`n`).
///
/// Returns unsorted eigenvalues and the accumulated rotation (columns are
/// eigenvectors).
fn jacobi_symmetric(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return (vec![0.0; n], v);
    }
    let threshold = JACOBI_REL_TOL * total;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
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
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Real input is diagonalized directly. Complex input goes through the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is the
/// Hermitian spectrum doubled; one complex eigenvector per pair is recovered
/// by complex Gram-Schmidt over the embedded eigenvectors.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<EigenResult> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian { defect });
    }
    let d = m.rows;
    if d == 0 {
        return Ok(EigenResult {
            eigenvalues: vec![],
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = if m.is_real() {
        let sym: Vec<f64> = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| 0.5 * (m.re(i, j) + m.re(j, i)))
            .collect();
        let (vals, vecs) = jacobi_symmetric(sym, d);
        (0..d)
            .map(|k| {
                let col = (0..d).map(|i| Complex64::new(vecs[i * d + k], 0.0)).collect();
                (vals[k], col)
            })
            .collect()
    } else {
        complex_via_embedding(m)
    };

    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut eigenvectors = ComplexMatrix::zeros(d, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for (k, (val, col)) in pairs.into_iter().enumerate() {
        eigenvalues.push(val);
        for (i, z) in col.into_iter().enumerate() {
            eigenvectors[(i, k)] = z;
        }
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

fn complex_via_embedding(m: &ComplexMatrix) -> Vec<(f64, Vec<Complex64>)> {
    let d = m.rows;
    let n = 2 * d;
    let mut emb = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            // Symmetrize before embedding so the real problem is exactly symmetric.
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            emb[i * n + j] = z.re;
            emb[i * n + (j + d)] = -z.im;
            emb[(i + d) * n + j] = z.im;
            emb[(i + d) * n + (j + d)] = z.re;
        }
    }
    let (_, vecs) = jacobi_symmetric(emb, n);
    let mut candidates: Vec<Vec<Complex64>> = (0..n)
        .map(|k| {
            (0..d)
                .map(|i| Complex64::new(vecs[i * n + k], vecs[(i + d) * n + k]))
                .collect()
        })
        .collect();

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while basis.len() < d {
        // Pick the candidate with the largest component outside the current basis.
        let mut best: Option<(usize, f64)> = None;
        for (idx, cand) in candidates.iter_mut().enumerate() {
            for b in &basis {
                let overlap: Complex64 = b.iter().zip(cand.iter()).map(|(x, y)| x.conj() * y).sum();
                for (c, bx) in cand.iter_mut().zip(b) {
                    *c -= overlap * bx;
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.is_none_or(|(_, n)| norm > n) {
                best = Some((idx, norm));
            }
        }
        let (idx, norm) = best.expect("embedding has 2d candidates");
        let mut chosen = candidates.swap_remove(idx);
        for z in chosen.iter_mut() {
            *z /= norm;
        }
        basis.push(chosen);
    }

    basis
        .into_iter()
        .map(|v| {
            let mut mv = vec![Complex64::new(0.0, 0.0); d];
            for i in 0..d {
                for j in 0..d {
                    mv[i] += m[(i, j)] * v[j];
                }
            }
            let rayleigh: Complex64 = v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
            (rayleigh.re, v)
        })
        .collect()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.min())
}

/// True iff the minimum eigenvalue is at least `-tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m)? >= -tol)
}

/// Number of eigenvalues whose magnitude exceeds `tol`.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> Result<usize> {
    Ok(hermitian_eigen(m)?
        .eigenvalues
        .iter()
        .filter(|l| l.abs() > tol)
        .count())
}

/// Coefficients of det(tI − M) in descending powers of t, leading 1.
///
/// Faddeev–LeVerrier recursion: `M_k = A·M_{k−1} + c_{n−k+1}·I`,
/// `c_{n−k} = −tr(A·M_k)/k`.
pub fn char_poly_coeffs(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n > MAX_CHAR_POLY_DIM {
        return Err(LinalgError::CharPolyDimension { dim: n });
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian { defect });
    }
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut mk = ComplexMatrix::zeros(n, n);
    let ident = ComplexMatrix::identity(n);
    for k in 1..=n {
        let prev = *coeffs.last().expect("non-empty");
        mk = &m.matmul(&mk)? + &ident.scale_complex(prev);
        let c = -m.trace_product(&mk)? / k as f64;
        coeffs.push(c);
    }
    Ok(coeffs.into_iter().map(|c| c.re).collect())
}

impl ComplexMatrix {
    fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }
}

/// Sign-alternation PSD criterion on characteristic polynomial coefficients
/// (descending powers, leading 1).
///
/// Trailing coefficients within the zero threshold are dropped; every
/// retained coefficient must be nonzero and adjacent retained coefficients
/// must have opposite signs. A coefficient of `t^{n−k}` counts as zero when
/// `|c_k| ≤ tol · s^k`, with `s = max_k |c_k|^{1/k}` an upper estimate of the
/// spectral radius scale, so the threshold tracks the matrix magnitude.
pub fn horn_psd_test(coeffs: &[f64], tol: f64) -> bool {
    if coeffs.is_empty() {
        return false;
    }
    let lead = coeffs[0];
    if lead == 0.0 {
        return false;
    }
    let c: Vec<f64> = coeffs.iter().map(|v| v / lead).collect();
    let scale = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| v.abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let is_zero = |k: usize| c[k].abs() <= tol * scale.powi(k as i32);
    let mut last = c.len() - 1;
    while last > 0 && is_zero(last) {
        last -= 1;
    }
    for k in 1..=last {
        if is_zero(k) {
            return false;
        }
        if c[k] * c[k - 1] >= 0.0 {
            return false;
        }
    }
    true
}

/// Number of trailing coefficients treated as zero by [`horn_psd_test`].
pub fn trailing_zero_count(coeffs: &[f64], tol: f64) -> usize {
    if coeffs.is_empty() || coeffs[0] == 0.0 {
        return 0;
    }
    let c: Vec<f64> = coeffs.iter().map(|v| v / coeffs[0]).collect();
    let scale = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| v.abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .take_while(|(k, v)| v.abs() <= tol * scale.powi(*k as i32))
        .count()
}

/// Pauli matrices and the 2×2 identity.
pub mod pauli {
    use super::ComplexMatrix;
    use num_complex::Complex64;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> ComplexMatrix {
        let i = Complex64::new(0.0, 1.0);
        ComplexMatrix::from_vec(2, 2, vec![Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)])
            .expect("2x2")
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// Hadamard-type conjugator (1/√2)[[1,1],[1,−1]].
    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, 2, &[s, s, s, -s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_identities() {
        let i4 = kron(&pauli::identity(), &pauli::identity()).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
        let zz = kron(&pauli::z(), &pauli::z()).unwrap();
        assert_eq!(zz, ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_associative_four_factors() {
        let xz = kron(&pauli::x(), &pauli::z()).unwrap();
        let twice = kron(&xz, &xz).unwrap();
        let flat = kron_all([&pauli::x(), &pauli::z(), &pauli::x(), &pauli::z()]).unwrap();
        assert!(twice.max_abs_diff(&flat) <= 1e-12);
    }

    #[test]
    fn kron_rejects_oversized() {
        let big = ComplexMatrix::zeros(1 << 6, 1 << 6);
        assert!(kron(&big, &big).is_ok());
        let huge = ComplexMatrix::zeros(1 << 14, 1);
        let wide = ComplexMatrix::zeros(1, 1 << 13);
        let err = kron(&huge, &kron(&wide, &ComplexMatrix::zeros(1 << 7, 1)).unwrap());
        assert!(matches!(err, Err(LinalgError::TooLarge { .. })));
    }

    #[test]
    fn eigen_identity_and_pauli() {
        let e = hermitian_eigen(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let e = hermitian_eigen(&pauli::x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let e = hermitian_eigen(&pauli::y()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        match hermitian_eigen(&m) {
            Err(LinalgError::NotHermitian { defect }) => assert!((defect - 2.0).abs() < 1e-15),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn eigen_complex_degenerate_reconstructs() {
        // Spectrum (-1, 2, 2) with a complex off-diagonal block.
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 0)] = c(2.0, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        m[(2, 2)] = c(0.5, 0.0);
        m[(1, 2)] = c(0.0, -1.5);
        m[(2, 1)] = c(0.0, 1.5);
        let e = hermitian_eigen(&m).unwrap();
        let expected = [-1.0, 2.0, 2.0];
        for (a, b) in e.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{:?}", e.eigenvalues);
        }
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-12);
        let v = &e.eigenvectors;
        assert!((&v.adjoint() * v).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&ComplexMatrix::zeros(3, 3), 1e-9).unwrap());
        assert!(!is_psd(&ComplexMatrix::diag_real(&[1.0, -0.5]), 1e-9).unwrap());
        let p = 0.6;
        let q = 1.0 - p;
        let m = ComplexMatrix::from_real(2, 2, &[1.0, -q, -q, q / 2.0]).scale(p);
        assert!(is_psd(&m, 1e-9).unwrap());
    }

    #[test]
    fn char_poly_small_cases() {
        let coeffs = char_poly_coeffs(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(coeffs, vec![1.0, -2.0, 1.0]);
        let coeffs = char_poly_coeffs(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(coeffs, vec![1.0, 0.0, 0.0]);
        // (t-1)(t-2)(t-3) = t^3 - 6t^2 + 11t - 6
        let coeffs = char_poly_coeffs(&ComplexMatrix::diag_real(&[1.0, 2.0, 3.0])).unwrap();
        for (a, b) in coeffs.iter().zip([1.0, -6.0, 11.0, -6.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            char_poly_coeffs(&ComplexMatrix::identity(9)),
            Err(LinalgError::CharPolyDimension { dim: 9 })
        ));
    }

    #[test]
    fn horn_examples() {
        assert!(horn_psd_test(&[1.0, -2.0, 1.0], 1e-12));
        assert!(!horn_psd_test(&[1.0, 0.5, 0.1], 1e-12));
        // diag(1, 0): t^2 - t, trailing zero allowed
        assert!(horn_psd_test(&[1.0, -1.0, 0.0], 1e-12));
        // diag(1, -1): t^2 - 1, interior zero forbidden
        assert!(!horn_psd_test(&[1.0, 0.0, -1.0], 1e-12));
        assert_eq!(trailing_zero_count(&[1.0, -1.0, 0.0, 0.0], 1e-12), 2);
    }

    #[test]
    fn trace_product_matches_matmul() {
        let a = kron(&pauli::x(), &pauli::y()).unwrap();
        let b = kron(&pauli::z(), &pauli::y()).unwrap();
        let direct = (&a * &b).trace();
        assert!((a.trace_product(&b).unwrap() - direct).norm() < 1e-15);
    }
}
