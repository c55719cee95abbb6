//! Seeded random-matrix families: iid sub-Gaussian matrices, Gaussian
//! Toeplitz matrices, and the fixed matrix series behind their variance
//! parameters.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;
use crate::models::SubGaussianModel;

/// An `m×n` matrix of independent draws from `model`, filled row by row.
pub fn sample_iid_matrix<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    model: &SubGaussianModel,
    rng: &mut R,
) -> DenseMatrix {
    let entries: Vec<f64> = (0..m * n).map(|_| model.sample(rng)).collect();
    DenseMatrix::from_row_major(m, n, entries).expect("finite draws of a valid shape")
}

/// `d×d` matrix with ones on the first superdiagonal.
pub fn shift_matrix(d: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d, d, |i, j| if j == i + 1 { 1.0 } else { 0.0 })
}

/// `C^power` for the `d×d` shift matrix: ones at `(i, i + power)`.
pub fn shift_power(d: usize, power: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d, d, |i, j| if j == i + power { 1.0 } else { 0.0 })
}

/// Fixed matrices `D_k` of a series `Σ x_k D_k` with iid coefficients
/// drawn from `model`.
#[derive(Debug, Clone)]
pub struct MatrixSeries {
    terms: Vec<DenseMatrix>,
    model: SubGaussianModel,
}

impl MatrixSeries {
    pub fn new(terms: Vec<DenseMatrix>, model: SubGaussianModel) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyList)?;
        let shape = first.shape();
        if let Some(bad) = terms.iter().find(|t| t.shape() != shape) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", shape.0, shape.1),
                found: format!("{}x{}", bad.rows(), bad.cols()),
            });
        }
        Ok(Self { terms, model })
    }

    pub fn terms(&self) -> &[DenseMatrix] {
        &self.terms
    }

    pub fn model(&self) -> &SubGaussianModel {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.terms[0].shape()
    }

    /// `Σ_k coefficients[k] · D_k`.
    pub fn combine(&self, coefficients: &[f64]) -> Result<DenseMatrix> {
        if coefficients.len() != self.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} coefficients", self.terms.len()),
                found: format!("{} coefficients", coefficients.len()),
            });
        }
        let (m, n) = self.shape();
        let mut acc = DMatrix::zeros(m, n);
        for (x, term) in coefficients.iter().zip(&self.terms) {
            acc += term.as_nalgebra() * *x;
        }
        DenseMatrix::from_nalgebra(acc)
    }

    /// Draws one coefficient per term, in term order, and combines.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DenseMatrix {
        let coefficients: Vec<f64> = self.terms.iter().map(|_| self.model.sample(rng)).collect();
        self.combine(&coefficients)
            .expect("coefficient count matches")
    }
}

/// The `m·n` unit matrices `E_ij` in row-major order, with Gaussian
/// coefficients by default.
pub fn entrywise_basis_series(m: usize, n: usize) -> MatrixSeries {
    entrywise_basis_series_with(m, n, SubGaussianModel::gaussian())
}

pub fn entrywise_basis_series_with(m: usize, n: usize, model: SubGaussianModel) -> MatrixSeries {
    let terms = (0..m * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            DenseMatrix::from_fn(m, n, |r, c| if r == i && c == j { 1.0 } else { 0.0 })
        })
        .collect();
    MatrixSeries::new(terms, model).expect("nonempty, equal shapes")
}

/// The `2d − 1` fixed terms of the Toeplitz series
/// `T = γ₀ I + Σ_j γ_j C^j + Σ_j γ_{−j} (C^j)ᵀ`.
///
/// Order: `I`, then `C, …, C^{d−1}`, then `Cᵀ, …, (C^{d−1})ᵀ`. This is also
/// the coefficient draw order used by [`sample_toeplitz`].
pub fn toeplitz_series_terms(d: usize) -> MatrixSeries {
    assert!(d >= 1, "Toeplitz dimension must be positive");
    let mut terms = Vec::with_capacity(2 * d - 1);
    terms.push(DenseMatrix::identity(d));
    terms.extend((1..d).map(|j| shift_power(d, j)));
    terms.extend((1..d).map(|j| shift_power(d, j).transpose()));
    MatrixSeries::new(terms, SubGaussianModel::gaussian()).expect("nonempty, equal shapes")
}

/// Coefficients `γ_{−(d−1)}, …, γ_{d−1}` of a `d×d` Toeplitz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    d: usize,
    coefficients: Vec<f64>,
}

impl ToeplitzSpec {
    /// `coefficients[k]` is `γ_{k − (d − 1)}`.
    pub fn new(d: usize, coefficients: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be a positive integer"));
        }
        if coefficients.len() != 2 * d - 1 {
            return Err(Error::DimensionMismatch {
                expected: format!("{} coefficients", 2 * d - 1),
                found: format!("{} coefficients", coefficients.len()),
            });
        }
        if coefficients.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { d, coefficients })
    }

    /// From coefficients in series order: `γ₀, γ₁, …, γ_{d−1}, γ_{−1}, …, γ_{−(d−1)}`.
    pub fn from_series_order(d: usize, draws: &[f64]) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be a positive integer"));
        }
        if draws.len() != 2 * d - 1 {
            return Err(Error::DimensionMismatch {
                expected: format!("{} coefficients", 2 * d - 1),
                found: format!("{} coefficients", draws.len()),
            });
        }
        let mut coefficients = vec![0.0; 2 * d - 1];
        let center = d - 1;
        coefficients[center] = draws[0];
        for j in 1..d {
            coefficients[center + j] = draws[j];
            coefficients[center - j] = draws[d - 1 + j];
        }
        Self::new(d, coefficients)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `γ_k` for `−(d−1) ≤ k ≤ d−1`.
    pub fn gamma(&self, k: isize) -> f64 {
        self.coefficients[(k + self.d as isize - 1) as usize]
    }

    /// Coefficients in series order (inverse of [`ToeplitzSpec::from_series_order`]).
    pub fn series_order(&self) -> Vec<f64> {
        let d = self.d as isize;
        std::iter::once(self.gamma(0))
            .chain((1..d).map(|j| self.gamma(j)))
            .chain((1..d).map(|j| self.gamma(-j)))
            .collect()
    }

    /// Fills entry `(i, j)` with `γ_{j−i}`.
    pub fn realize(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.d, self.d, |i, j| self.gamma(j as isize - i as isize))
    }

    /// Assembles `Σ γ_k (term_k)` over [`toeplitz_series_terms`].
    pub fn realize_by_series(&self) -> DenseMatrix {
        toeplitz_series_terms(self.d)
            .combine(&self.series_order())
            .expect("2d - 1 coefficients")
    }
}

/// Draws the `2d − 1` standard normal coefficients in series order and
/// returns their spec.
pub fn sample_toeplitz_spec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ToeplitzSpec {
    assert!(d >= 1, "Toeplitz dimension must be positive");
    let gaussian = SubGaussianModel::gaussian();
    let draws: Vec<f64> = (0..2 * d - 1).map(|_| gaussian.sample(rng)).collect();
    ToeplitzSpec::from_series_order(d, &draws).expect("d >= 1")
}

/// A `d×d` Gaussian Toeplitz matrix.
pub fn sample_toeplitz<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DenseMatrix {
    sample_toeplitz_spec(d, rng).realize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rademacher_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = sample_iid_matrix(3, 3, &SubGaussianModel::rademacher(), &mut rng);
        assert!(b.to_row_major().iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn iid_sampling_is_deterministic() {
        let g = SubGaussianModel::gaussian();
        let a = sample_iid_matrix(4, 6, &g, &mut ChaCha8Rng::seed_from_u64(11));
        let b = sample_iid_matrix(4, 6, &g, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn shift_matrix_examples() {
        assert_eq!(shift_matrix(2).to_row_major(), vec![0.0, 1.0, 0.0, 0.0]);
        let c = shift_matrix(3);
        let c2 = c.matmul(&c).unwrap();
        let mut expected = vec![0.0; 9];
        expected[2] = 1.0;
        assert_eq!(c2.to_row_major(), expected);
        assert_eq!(c2, shift_power(3, 2));
    }

    #[test]
    fn shift_matrix_is_nilpotent() {
        for d in 1..10 {
            let c = shift_matrix(d);
            let mut p = DenseMatrix::identity(d);
            for _ in 0..d {
                p = p.matmul(&c).unwrap();
            }
            assert!(p.is_zero(), "d = {d}");
        }
    }

    #[test]
    fn toeplitz_term_counts() {
        let t1 = toeplitz_series_terms(1);
        assert_eq!(t1.len(), 1);
        assert_eq!(t1.terms()[0], DenseMatrix::identity(1));
        assert_eq!(toeplitz_series_terms(3).len(), 5);
    }

    #[test]
    fn toeplitz_gram_sum_is_d_identity() {
        for d in 2..=16 {
            let (rows, cols) = crate::bounds::gram_sums(toeplitz_series_terms(d).terms()).unwrap();
            let expected = DenseMatrix::identity(d).scale(d as f64);
            assert_eq!(rows, expected, "d = {d}");
            assert_eq!(cols, expected, "d = {d}");
        }
    }

    #[test]
    fn shift_power_gram_identities() {
        let d = 5;
        for j in 1..d {
            let cj = shift_power(d, j);
            let left = cj.matmul(&cj.transpose()).unwrap();
            let right = cj.transpose().matmul(&cj).unwrap();
            // Σ_{k=1}^{d−j} E_kk and Σ_{k=j+1}^{d} E_kk, 1-based
            let left_diag: Vec<f64> = (1..=d)
                .map(|k| if k <= d - j { 1.0 } else { 0.0 })
                .collect();
            let right_diag: Vec<f64> = (1..=d).map(|k| if k > j { 1.0 } else { 0.0 }).collect();
            assert_eq!(left, DenseMatrix::diagonal(&left_diag));
            assert_eq!(right, DenseMatrix::diagonal(&right_diag));
        }
    }

    #[test]
    fn toeplitz_has_constant_diagonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = sample_toeplitz(6, &mut rng);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(t.get(i, j), t.get(i + 1, j + 1));
            }
        }
        let one = sample_toeplitz(1, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(one.shape(), (1, 1));
    }

    #[test]
    fn toeplitz_series_and_diagonal_fill_agree() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = sample_toeplitz_spec(1 + seed as usize % 9, &mut rng);
            assert_eq!(spec.realize(), spec.realize_by_series());
        }
    }

    #[test]
    fn toeplitz_draw_order() {
        // γ₀ first, then positive lags, then negative lags
        let spec = ToeplitzSpec::from_series_order(3, &[0.0, 1.0, 2.0, -1.0, -2.0]).unwrap();
        assert_eq!(spec.coefficients(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let t = spec.realize();
        assert_eq!(
            t.to_row_major(),
            vec![0.0, 1.0, 2.0, -1.0, 0.0, 1.0, -2.0, -1.0, 0.0]
        );
        assert_eq!(spec.series_order(), vec![0.0, 1.0, 2.0, -1.0, -2.0]);
        assert!(ToeplitzSpec::from_series_order(3, &[0.0; 4]).is_err());
        assert!(ToeplitzSpec::new(0, vec![]).is_err());
    }

    #[test]
    fn entrywise_basis_examples() {
        let one = entrywise_basis_series(1, 1);
        assert_eq!(one.terms(), &[DenseMatrix::identity(1)]);
        let basis = entrywise_basis_series(2, 3);
        assert_eq!(basis.len(), 6);
        for (k, term) in basis.terms().iter().enumerate() {
            let e = term.to_row_major();
            assert_eq!(e.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(e.iter().filter(|&&x| x == 0.0).count(), 5);
            assert_eq!(e[k], 1.0);
        }
    }

    #[test]
    fn entrywise_reconstruction_matches_iid_sampling() {
        for model in crate::models::standard_models() {
            let direct = sample_iid_matrix(3, 4, &model, &mut ChaCha8Rng::seed_from_u64(8));
            let series = entrywise_basis_series_with(3, 4, model.clone());
            let rebuilt = series.sample(&mut ChaCha8Rng::seed_from_u64(8));
            assert_eq!(direct, rebuilt);
        }
    }

    #[test]
    fn series_rejects_mixed_shapes() {
        let r = MatrixSeries::new(
            vec![DenseMatrix::zeros(2, 2), DenseMatrix::zeros(2, 3)],
            SubGaussianModel::gaussian(),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            MatrixSeries::new(vec![], SubGaussianModel::gaussian()),
            Err(Error::EmptyList)
        ));
    }
}
