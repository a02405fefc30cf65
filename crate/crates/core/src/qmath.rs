//! Dense complex linear algebra sized for small Hilbert spaces.
//!
//! Matrices are capped at [`MAX_ENTRIES`] entries. Eigendecompositions are
//! delegated to `nalgebra` and singular value decompositions to `faer`; this
//! module owns the tolerances, ordering and phase conventions the quantum
//! layer relies on.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

pub use num_complex::Complex64 as Complex;

/// Absolute tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero by PSD operations.
pub const PSD_TOL: f64 = 1e-10;
/// Largest number of entries a single matrix may hold.
pub const MAX_ENTRIES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmathError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{rows}x{cols} matrix exceeds the {MAX_ENTRIES}-entry limit")]
    TooLarge { rows: usize, cols: usize },
    #[error("expected {expected} entries, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("non-finite entry")]
    NonFinite,
    #[error("zero dimension")]
    Empty,
}

fn check_shape(rows: usize, cols: usize) -> Result<(), QmathError> {
    if rows == 0 || cols == 0 {
        return Err(QmathError::Empty);
    }
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_ENTRIES => Ok(()),
        _ => Err(QmathError::TooLarge { rows, cols }),
    }
}

fn all_finite<'a>(mut it: impl Iterator<Item = &'a Complex>) -> bool {
    it.all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex>) -> Result<Self, QmathError> {
        check_shape(rows, cols)?;
        if entries.len() != rows * cols {
            return Err(QmathError::WrongLength {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if !all_finite(entries.iter()) {
            return Err(QmathError::NonFinite);
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    /// Builds a real-valued matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, QmathError> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, QmathError> {
        check_shape(rows, cols)?;
        Ok(Self {
            inner: DMatrix::zeros(rows, cols),
        })
    }

    pub fn identity(n: usize) -> Result<Self, QmathError> {
        check_shape(n, n)?;
        Ok(Self {
            inner: DMatrix::identity(n, n),
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, QmathError> {
        let n = diag.len();
        check_shape(n, n)?;
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(QmathError::NonFinite);
        }
        let mut inner = DMatrix::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            inner[(i, i)] = Complex::new(x, 0.0);
        }
        Ok(Self { inner })
    }

    /// The vector as an `n x 1` column matrix.
    pub fn column(v: &ComplexVector) -> Result<Self, QmathError> {
        check_shape(v.dim(), 1)?;
        Ok(Self {
            inner: DMatrix::from_column_slice(v.dim(), 1, v.as_slice()),
        })
    }

    /// `|a><b|`.
    pub fn outer(a: &ComplexVector, b: &ComplexVector) -> Result<Self, QmathError> {
        check_shape(a.dim(), b.dim())?;
        Ok(Self {
            inner: &a.inner * b.inner.adjoint(),
        })
    }

    pub(crate) fn from_inner(inner: DMatrix<Complex>) -> Result<Self, QmathError> {
        check_shape(inner.nrows(), inner.ncols())?;
        if !all_finite(inner.iter()) {
            return Err(QmathError::NonFinite);
        }
        Ok(Self { inner })
    }

    pub(crate) fn as_inner(&self) -> &DMatrix<Complex> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.inner[(row, col)]
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex> {
        self.inner.transpose().iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex {
        self.inner.trace()
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, QmathError> {
        self.same_shape(other)?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QmathError> {
        self.same_shape(other)?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, QmathError> {
        if self.cols() != other.rows() {
            return Err(QmathError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        check_shape(self.rows(), other.cols())?;
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector, QmathError> {
        if self.cols() != v.dim() {
            return Err(QmathError::ShapeMismatch {
                left: self.shape(),
                right: (v.dim(), 1),
            });
        }
        Ok(ComplexVector {
            inner: &self.inner * &v.inner,
        })
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, QmathError> {
        self.same_shape(other)?;
        Ok(self
            .inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |M[i][j] - conj(M[j][i])|`.
    pub fn hermitian_deviation(&self) -> Result<f64, QmathError> {
        if !self.is_square() {
            return Err(QmathError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        Ok(worst)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation().is_ok_and(|d| d <= tol)
    }

    fn same_shape(&self, other: &Self) -> Result<(), QmathError> {
        if self.shape() != other.shape() {
            return Err(QmathError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    fn require_hermitian(&self) -> Result<(), QmathError> {
        let deviation = self.hermitian_deviation()?;
        if deviation > HERMITIAN_TOL {
            return Err(QmathError::NotHermitian { deviation });
        }
        Ok(())
    }
}

/// A dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    inner: DVector<Complex>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex>) -> Result<Self, QmathError> {
        check_shape(entries.len(), 1)?;
        if !all_finite(entries.iter()) {
            return Err(QmathError::NonFinite);
        }
        Ok(Self {
            inner: DVector::from_vec(entries),
        })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self, QmathError> {
        Self::new(entries.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self, QmathError> {
        check_shape(dim, 1)?;
        if index >= dim {
            return Err(QmathError::WrongLength {
                expected: dim,
                found: index + 1,
            });
        }
        let mut inner = DVector::zeros(dim);
        inner[index] = Complex::new(1.0, 0.0);
        Ok(Self { inner })
    }

    pub(crate) fn from_inner(inner: DVector<Complex>) -> Self {
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.len()
    }

    pub fn as_slice(&self) -> &[Complex] {
        self.inner.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.inner.norm_squared()
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex, QmathError> {
        if self.dim() != other.dim() {
            return Err(QmathError::ShapeMismatch {
                left: (self.dim(), 1),
                right: (other.dim(), 1),
            });
        }
        Ok(self.inner.dotc(&other.inner))
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, QmathError> {
        if self.dim() != other.dim() {
            return Err(QmathError::ShapeMismatch {
                left: (self.dim(), 1),
                right: (other.dim(), 1),
            });
        }
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn kron(&self, other: &Self) -> Result<Self, QmathError> {
        check_shape(self.dim() * other.dim(), 1)?;
        Ok(Self {
            inner: self.inner.kronecker(&other.inner),
        })
    }
}

/// Spectrum of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<ComplexVector>,
}

impl HermitianEigen {
    /// `sum_i f(lambda_i) v_i v_i^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut inner = DMatrix::<Complex>::zeros(n, n);
        for (&value, v) in self.values.iter().zip(&self.vectors) {
            let w = f(value);
            if w != 0.0 {
                inner += (&v.inner * v.inner.adjoint()) * Complex::new(w, 0.0);
            }
        }
        ComplexMatrix { inner }
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector(&self, keep: impl Fn(f64) -> bool) -> ComplexMatrix {
        self.map_spectrum(|x| if keep(x) { 1.0 } else { 0.0 })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }
}

/// Rotates `v` so its largest-magnitude component is real and nonnegative.
fn fix_phase(v: &mut DVector<Complex>) {
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict comparison with slack keeps the first index on near-ties
        if z.norm() > best + 1e-12 {
            best = z.norm();
            pivot = i;
        }
    }
    if best > 0.0 {
        let phase = v[pivot].conj() / v[pivot].norm();
        *v *= phase;
        v[pivot] = Complex::new(v[pivot].re.abs(), 0.0);
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending. Each eigenvector has its
/// largest-magnitude component made real and nonnegative.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen, QmathError> {
    m.require_hermitian()?;
    let eig = SymmetricEigen::new(m.inner.clone());
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = eig.eigenvectors.column(i).into_owned();
            fix_phase(&mut v);
            ComplexVector { inner: v }
        })
        .collect();
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues at or below the numerical-rank floor `n * eps * max|lambda|`
/// are treated as exact zeros.
pub fn sqrtm_psd(m: &ComplexMatrix) -> Result<ComplexMatrix, QmathError> {
    let eig = eig_hermitian(m)?;
    if let Some(&lowest) = eig.values.last() {
        if lowest < -PSD_TOL {
            return Err(QmathError::NotPsd { eigenvalue: lowest });
        }
    }
    let floor = rank_floor(&eig.values);
    Ok(eig.map_spectrum(|x| if x <= floor { 0.0 } else { x.sqrt() }))
}

fn rank_floor(values: &[f64]) -> f64 {
    let top = values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    values.len() as f64 * f64::EPSILON * top
}

/// `tr|M|` for Hermitian `M`, the sum of absolute eigenvalues.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64, QmathError> {
    let eig = eig_hermitian(m)?;
    Ok(eig.values.iter().map(|x| x.abs()).sum())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, QmathError> {
    let rows = a.rows().checked_mul(b.rows()).ok_or(QmathError::TooLarge {
        rows: usize::MAX,
        cols: 0,
    })?;
    let cols = a.cols().checked_mul(b.cols()).ok_or(QmathError::TooLarge {
        rows: 0,
        cols: usize::MAX,
    })?;
    check_shape(rows, cols)?;
    Ok(ComplexMatrix {
        inner: a.inner.kronecker(&b.inner),
    })
}

/// Thin singular value decomposition `M = U diag(s) V^dagger`.
///
/// For square input `u` and `v` are unitary.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let a = faer::Mat::<Complex>::from_fn(rows, cols, |i, j| m.inner[(i, j)]);
    // faer returns nonnegative singular values in nonincreasing order
    let dec = a.thin_svd().expect("svd of a finite matrix converges");
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let k = s.nrows();
    Svd {
        u: ComplexMatrix {
            inner: DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        },
        singular_values: (0..k).map(|i| s[i].re.max(0.0)).collect(),
        v: ComplexMatrix {
            inner: DMatrix::from_fn(cols, k, |i, j| v[(i, j)]),
        },
    }
}
