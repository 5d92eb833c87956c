//! Dense complex-matrix primitives for small Hilbert spaces.
//!
//! Everything here works on validated square matrices of dimension 1–64:
//! Hermitian eigendecomposition, spectral matrix functions (square root,
//! pseudo-inverse square root, unitary exponential), trace products, and
//! tolerance-aware positivity checks. All operations are pure functions
//! over immutable inputs.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported Hilbert-space dimension. Dense storage only.
pub const MAX_DIM: usize = 64;

/// Max-abs deviation from `m == m†` tolerated before a matrix is rejected
/// as non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Eigenvalues below `-PSD_TOL` fail positivity checks; eigenvalues in
/// `[-PSD_TOL, 0)` are treated as floating-point noise and clamped to zero.
pub const PSD_TOL: f64 = 1e-9;

/// Relative rank cutoff for pseudo-inverses: eigenvalues at or below
/// `RANK_CUTOFF_REL * max_eigenvalue` are treated as exact zeros.
pub const RANK_CUTOFF_REL: f64 = 1e-9;

/// Errors from matrix construction and spectral operations.
#[derive(Debug, Clone, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |m - m\u{2020}| = {deviation:.3e} exceeds {HERMITICITY_TOL:.0e}")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e} < -{PSD_TOL:.0e}")]
    NotPsd { eigenvalue: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("invalid dimension {dim}: must be between 1 and {MAX_DIM}")]
    InvalidDimension { dim: usize },
    #[error("matrix entries must be finite (no NaN or infinity)")]
    NonFinite,
    #[error("expected {expected} rows of {expected} entries, got a {rows}x{cols} layout")]
    BadShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
}

/// A validated square complex matrix of dimension 1–64 with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, validating shape,
    /// dimension bounds, and finiteness.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self, LinalgError> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(LinalgError::BadShape {
                expected: dim,
                rows: entries.len() / dim.max(1),
                cols: dim,
            });
        }
        if !entries.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self {
            inner: DMatrix::from_row_iterator(dim, dim, entries),
        })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        check_dim(dim)?;
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(LinalgError::BadShape {
                    expected: dim,
                    rows: r + 1,
                    cols: row.len(),
                });
            }
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix entrywise from `f(row, col)`. Panics on an invalid
    /// dimension; intended for internally computed operators.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            inner: DMatrix::from_fn(dim, dim, &mut f),
        }
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    /// Diagonal matrix with real diagonal entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |r, c| {
            if r == c {
                C64::new(diag[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    /// Row-major copy of all entries.
    pub fn entries(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| self.inner[(r, c)])
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Max-abs deviation from Hermiticity, `max_ij |m_ij - conj(m_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                dev = dev.max((self.inner[(r, c)] - self.inner[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= HERMITICITY_TOL
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute difference between two matrices.
    /// Panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    /// Matrix product. Panics on dimension mismatch.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self {
            inner: &self.inner * &other.inner,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self {
            inner: &self.inner - &other.inner,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: &self.inner * C64::new(factor, 0.0),
        }
    }

    /// Conjugation `u * self * u†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.mul(self).mul(&u.adjoint())
    }

    /// Matrix-vector product. Panics on dimension mismatch.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim(), v.len(), "dimension mismatch");
        let d = self.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.inner[(r, c)] * v[c]).sum())
            .collect()
    }

    /// Averages the matrix with its adjoint, removing rounding-level
    /// Hermiticity violations from upstream arithmetic.
    pub fn hermitize(&self) -> Self {
        Self {
            inner: (&self.inner + self.inner.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    fn from_inner(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }
}

impl Serialize for ComplexMatrix {
    /// Wire format: an array of rows, each entry a two-element `[re, im]`.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let d = self.dim();
        let rows: Vec<Vec<[f64; 2]>> = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        let e = self.get(r, c);
                        [e.re, e.im]
                    })
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues sorted
/// ascending, matching unitary matrix of column eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// Rebuilds `V diag(f(lambda)) V†` from this spectrum.
    pub fn map_rebuild(&self, mut f: impl FnMut(f64) -> C64) -> ComplexMatrix {
        let d = self.eigenvalues.len();
        let v = &self.eigenvectors.inner;
        let diag = DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                f(self.eigenvalues[r])
            } else {
                C64::new(0.0, 0.0)
            }
        });
        ComplexMatrix::from_inner(v * diag * v.adjoint())
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::MAX, f64::min)
    }
}

fn check_dim(dim: usize) -> Result<(), LinalgError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(LinalgError::InvalidDimension { dim });
    }
    Ok(())
}

fn require_hermitian(m: &ComplexMatrix) -> Result<(), LinalgError> {
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted ascending.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum, LinalgError> {
    require_hermitian(m)?;
    // Symmetrize first so the decomposition sees an exactly Hermitian input.
    let eig = SymmetricEigen::new(m.hermitize().inner);
    let d = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_inner(eigenvectors),
    })
}

fn psd_spectrum(m: &ComplexMatrix) -> Result<Spectrum, LinalgError> {
    let mut spectrum = eig_hermitian(m)?;
    for lambda in &mut spectrum.eigenvalues {
        if *lambda < -PSD_TOL {
            return Err(LinalgError::NotPsd { eigenvalue: *lambda });
        }
        if *lambda < 0.0 {
            *lambda = 0.0;
        }
    }
    Ok(spectrum)
}

/// Principal square root of a Hermitian PSD matrix.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let spectrum = psd_spectrum(m)?;
    Ok(spectrum
        .map_rebuild(|l| C64::new(l.sqrt(), 0.0))
        .hermitize())
}

/// Pseudo-inverse square root of a Hermitian PSD matrix: eigenvalues at or
/// below the relative rank cutoff map to 0, the rest to `lambda^(-1/2)`.
pub fn psd_pinv_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let spectrum = psd_spectrum(m)?;
    let cutoff = RANK_CUTOFF_REL * spectrum.max_eigenvalue().max(0.0);
    Ok(spectrum
        .map_rebuild(|l| {
            if l <= cutoff {
                C64::new(0.0, 0.0)
            } else {
                C64::new(1.0 / l.sqrt(), 0.0)
            }
        })
        .hermitize())
}

/// Orthogonal projector onto the support (range) of a Hermitian PSD matrix.
pub fn support_projector(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let spectrum = psd_spectrum(m)?;
    let cutoff = RANK_CUTOFF_REL * spectrum.max_eigenvalue().max(0.0);
    Ok(spectrum
        .map_rebuild(|l| {
            if l <= cutoff {
                C64::new(0.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .hermitize())
}

/// Unitary generated by a Hermitian matrix: `exp(-i h duration)` with
/// hbar = 1.
pub fn exp_hermitian_generator(
    h: &ComplexMatrix,
    duration: f64,
) -> Result<ComplexMatrix, LinalgError> {
    let spectrum = eig_hermitian(h)?;
    Ok(spectrum.map_rebuild(|l| (C64::new(0.0, -l * duration)).exp()))
}

/// `Tr(a b)` computed as `sum_jk a_jk b_kj` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64, LinalgError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let d = a.dim();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            acc += a.get(j, k) * b.get(k, j);
        }
    }
    Ok(acc)
}

/// Trace distance `(1/2) ||a - b||_1` between Hermitian matrices.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, LinalgError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let spectrum = eig_hermitian(&a.sub(b))?;
    Ok(0.5 * spectrum.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}
