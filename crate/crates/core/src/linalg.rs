//! Dense real-matrix primitives: largest singular value, symmetric eigen
//! extremes, Hermitian dilation, matrix exponential and Loewner order.
//!
//! All matrices are real. Real symmetric matrices play the role of Hermitian
//! ones throughout the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Default relative tolerance for iterative eigen/singular value solvers.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Iteration cap for power iteration.
pub const MAX_ITERATIONS: usize = 10_000;

/// Largest dimension for which a full symmetric eigendecomposition is used.
/// Larger problems go through power iteration.
pub const FULL_EIGEN_MAX_DIM: usize = 512;

// Sweep cap handed to nalgebra's implicit QR.
const EIGEN_MAX_SWEEPS: usize = 10_000;

/// A dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from entries in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParam {
                name: "shape",
                reason: format!("{rows}x{cols} has a zero dimension"),
            });
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", entries.len()),
            });
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Wraps an nalgebra matrix, rejecting NaN/Inf entries.
    pub fn from_nalgebra(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidParam {
                name: "shape",
                reason: "matrix has a zero dimension".into(),
            });
        }
        if inner.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { inner })
    }

    /// Builds a matrix from `f(i, j)`; panics if `f` yields a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let inner = DMatrix::from_fn(rows, cols, f);
        assert!(inner.iter().all(|x| x.is_finite()), "non-finite entry");
        Self { inner }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| 0.0)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Diagonal matrix with the given diagonal.
    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(
            diag.len(),
            diag.len(),
            |i, j| if i == j { diag[i] } else { 0.0 },
        )
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

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.inner.transpose().as_slice().to_vec()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| factor * self.inner[(i, j)])
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(shape_mismatch((self.cols(), rhs.cols()), rhs.shape()));
        }
        Self::from_nalgebra(&self.inner * &rhs.inner)
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(shape_mismatch(self.shape(), rhs.shape()));
        }
        Self::from_nalgebra(&self.inner + &rhs.inner)
    }

    /// `self * selfᵀ`.
    pub fn gram_rows(&self) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner * self.inner.transpose(),
        }
    }

    /// `selfᵀ * self`.
    pub fn gram_cols(&self) -> DenseMatrix {
        DenseMatrix {
            inner: self.inner.transpose() * &self.inner,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.inner.iter().all(|&x| x == 0.0)
    }
}

/// A real symmetric matrix. Symmetry is exact, not tolerated.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: DMatrix<f64>,
}

impl HermitianMatrix {
    /// Accepts a square matrix whose entries satisfy `a[i][j] == a[j][i]` exactly.
    pub fn from_dense(m: DenseMatrix) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{r}x{c}"),
            });
        }
        for i in 0..r {
            for j in (i + 1)..r {
                if m.inner[(i, j)] != m.inner[(j, i)] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Ok(Self { inner: m.inner })
    }

    /// Symmetrizes `m` as `(m + mᵀ) / 2`, then mirrors the upper triangle so
    /// the result is exactly symmetric.
    pub fn symmetrize(m: &DMatrix<f64>) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c || r == 0 {
            return Err(Error::DimensionMismatch {
                expected: "non-empty square matrix".into(),
                found: format!("{r}x{c}"),
            });
        }
        let inner = DMatrix::from_fn(r, r, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            0.5 * (m[(a, b)] + m[(b, a)])
        });
        if inner.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { inner })
    }

    /// Builds from the upper triangle `f(i, j)` with `i <= j`.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut inner = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        HermitianMatrix::from_dense(DenseMatrix::from_nalgebra(inner)?)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_dense(DenseMatrix::diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix {
            inner: self.inner.clone(),
        }
    }

    /// `self²`, symmetric by construction.
    pub fn square(&self) -> Result<Self> {
        Self::symmetrize(&(&self.inner * &self.inner))
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::symmetrize(&(&self.inner * factor))
    }

    pub fn add(&self, rhs: &HermitianMatrix) -> Result<Self> {
        check_same_dim(self, rhs)?;
        Self::symmetrize(&(&self.inner + &rhs.inner))
    }

    pub fn sub(&self, rhs: &HermitianMatrix) -> Result<Self> {
        check_same_dim(self, rhs)?;
        Self::symmetrize(&(&self.inner - &rhs.inner))
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = symmetric_eigen(&self.inner)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }
}

fn check_same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", a.dim()),
            found: format!("{0}x{0}", b.dim()),
        });
    }
    Ok(())
}

fn shape_mismatch(expected: (usize, usize), found: (usize, usize)) -> Error {
    Error::DimensionMismatch {
        expected: format!("{}x{}", expected.0, expected.1),
        found: format!("{}x{}", found.0, found.1),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParam {
            name: "tol",
            reason: format!("must be positive and finite, got {tol}"),
        });
    }
    Ok(())
}

fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS).ok_or(Error::NoConvergence {
        iterations: EIGEN_MAX_SWEEPS,
    })
}

fn max_eigenvalue_full(m: &DMatrix<f64>) -> Result<f64> {
    let eig = symmetric_eigen(m)?;
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest singular value `sup_{|x|=1} |Bx|`.
///
/// The smaller Gram matrix (`BᵀB` or `BBᵀ`) is formed and its top eigenvalue
/// taken: through a full symmetric eigendecomposition up to
/// [`FULL_EIGEN_MAX_DIM`], otherwise through [`power_iteration_sigma_max`].
/// Returns exactly `0.0` for the zero matrix.
pub fn largest_singular_value(b: &DenseMatrix, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if b.inner.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if b.is_zero() {
        return Ok(0.0);
    }
    let k = b.rows().min(b.cols());
    if k > FULL_EIGEN_MAX_DIM {
        return power_iteration_sigma_max(b, tol);
    }
    let gram = if b.rows() <= b.cols() {
        b.gram_rows()
    } else {
        b.gram_cols()
    };
    Ok(max_eigenvalue_full(&gram.inner)?.max(0.0).sqrt())
}

/// Power iteration on the smaller Gram matrix, started from the normalized
/// all-ones vector. Stops when the eigen-residual `|Gv - λv|` drops below
/// `tol·λ`; fails with [`Error::NoConvergence`] after [`MAX_ITERATIONS`].
pub fn power_iteration_sigma_max(b: &DenseMatrix, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if b.inner.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if b.is_zero() {
        return Ok(0.0);
    }
    let a = &b.inner;
    let wide = a.nrows() <= a.ncols();
    // Apply G = AAᵀ (wide) or AᵀA (tall) without forming it.
    let apply = |v: &DVector<f64>| -> DVector<f64> {
        if wide {
            a * (a.transpose() * v)
        } else {
            a.transpose() * (a * v)
        }
    };
    let k = a.nrows().min(a.ncols());
    let lambda = power_iterate(k, apply, tol)?;
    Ok(lambda.max(0.0).sqrt())
}

// Dominant eigenvalue of a PSD operator by power iteration.
fn power_iterate(
    dim: usize,
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    tol: f64,
) -> Result<f64> {
    let mut v = DVector::from_element(dim, 1.0 / (dim as f64).sqrt());
    for _ in 0..MAX_ITERATIONS {
        let w = apply(&v);
        let norm = w.norm();
        if norm == 0.0 {
            // v lies in the null space; restart from a basis vector sweep.
            if let Some(e) = (0..dim)
                .map(|i| basis(dim, i))
                .find(|e| apply(e).norm() > 0.0)
            {
                v = e;
                continue;
            }
            return Ok(0.0);
        }
        let lambda = v.dot(&w);
        let residual = (&w - &v * lambda).norm();
        if residual <= tol * lambda.abs() {
            return Ok(lambda);
        }
        v = w / norm;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

fn basis(dim: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(dim);
    e[i] = 1.0;
    e
}

/// The `(m+n)×(m+n)` block matrix `[[0, B], [Bᵀ, 0]]`.
pub fn hermitian_dilation(b: &DenseMatrix) -> Result<HermitianMatrix> {
    if b.inner.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (m, n) = b.shape();
    let mut inner = DMatrix::zeros(m + n, m + n);
    inner.view_mut((0, m), (m, n)).copy_from(&b.inner);
    inner
        .view_mut((m, 0), (n, m))
        .copy_from(&b.inner.transpose());
    Ok(HermitianMatrix { inner })
}

/// Largest (algebraic) eigenvalue.
///
/// Full eigendecomposition up to [`FULL_EIGEN_MAX_DIM`]; beyond that, power
/// iteration on `H + sI` with `s = |H|₁` so the algebraically largest
/// eigenvalue dominates.
pub fn lambda_max(h: &HermitianMatrix, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if h.dim() <= FULL_EIGEN_MAX_DIM {
        return max_eigenvalue_full(&h.inner);
    }
    let shift = one_norm(&h.inner);
    if shift == 0.0 {
        return Ok(0.0);
    }
    let shifted = &h.inner + DMatrix::identity(h.dim(), h.dim()) * shift;
    let top = power_iterate(h.dim(), |v| &shifted * v, tol)?;
    Ok(top - shift)
}

/// Smallest (algebraic) eigenvalue.
pub fn lambda_min(h: &HermitianMatrix, tol: f64) -> Result<f64> {
    let neg = HermitianMatrix { inner: -&h.inner };
    Ok(-lambda_max(&neg, tol)?)
}

/// Maximum absolute column sum.
fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^H` via symmetric eigendecomposition.
pub fn matrix_exp(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    if h.inner.iter().all(|&x| x == 0.0) {
        return Ok(HermitianMatrix::identity(h.dim()));
    }
    let eig = symmetric_eigen(&h.inner)?;
    let exp_vals = eig.eigenvalues.map(f64::exp);
    if exp_vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let v = &eig.eigenvectors;
    let assembled = v * DMatrix::from_diagonal(&exp_vals) * v.transpose();
    HermitianMatrix::symmetrize(&assembled)
}

/// `A ⪯ B` in the Loewner order, i.e. `λmin(B − A) ≥ −tol`.
pub fn psd_order_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    check_same_dim(a, b)?;
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidParam {
            name: "tol",
            reason: format!("must be nonnegative, got {tol}"),
        });
    }
    let diff = b.sub(a)?;
    let min = diff.eigenvalues()?[0];
    Ok(min >= -tol)
}

/// Operator norm of a symmetric matrix, `max |λ|`.
pub fn spectral_norm_symmetric(h: &HermitianMatrix) -> Result<f64> {
    let vals = h.eigenvalues()?;
    Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
}
