//! Closed-form tail bounds for the largest singular value, evaluated in
//! natural-log space.
//!
//! The raw prefactors (`5^(m+n)`) overflow `f64` long before the bounds stop
//! being interesting, so every bound is carried as `ln P` and only converted
//! (and clamped to 1) when reported.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_dilation, spectral_norm_symmetric, DenseMatrix, HermitianMatrix};

/// Net radius used for every covering argument.
pub const NET_EPSILON: f64 = 0.5;

/// Which bound produced a [`LogProbBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundTag {
    /// `2·5^(m+n)·exp(−c t²)` from a ½-net union bound.
    Net,
    /// `d·exp(−t²/(2b²ρ))` for a Hermitian sub-Gaussian series.
    Series,
    /// `(m+n)·exp(−t²/(2b²ρ))` for a rectangular series via dilation.
    RectSeries,
    /// `(m+n)·exp(−t²/(2b²m))` for an iid matrix written as `Σ x_ij E_ij`.
    Entrywise,
    /// Pointwise minimum of [`BoundTag::Net`] and [`BoundTag::Entrywise`].
    Refined,
    /// Two-branch bound for a `d×d` Gaussian Toeplitz matrix.
    Toeplitz,
}

impl BoundTag {
    pub const ALL: [BoundTag; 6] = [
        BoundTag::Net,
        BoundTag::Series,
        BoundTag::RectSeries,
        BoundTag::Entrywise,
        BoundTag::Refined,
        BoundTag::Toeplitz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundTag::Net => "net",
            BoundTag::Series => "series",
            BoundTag::RectSeries => "rect-series",
            BoundTag::Entrywise => "entrywise",
            BoundTag::Refined => "refined",
            BoundTag::Toeplitz => "toeplitz",
        }
    }
}

impl fmt::Display for BoundTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundTag::ALL
            .into_iter()
            .find(|tag| tag.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

/// Which piece of a two-branch bound was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// The series/entrywise piece (small `t`).
    Series,
    /// The net piece (large `t`).
    Net,
}

/// Parameters a bound was evaluated with.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BoundParams {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub rho: Option<f64>,
    pub t: f64,
}

/// A tail-probability bound stored as its natural log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogProbBound {
    /// `ln` of the raw bound; positive when the raw bound exceeds 1.
    pub log_value: f64,
    pub tag: BoundTag,
    pub params: BoundParams,
    /// Reported probability is `min(exp(log_value), 1)`.
    pub clamped: bool,
    /// Minimizing Chernoff parameter `θ* = t/(b²ρ)` for series bounds.
    pub optimal_theta: Option<f64>,
    /// Active piece for two-branch bounds.
    pub branch: Option<Branch>,
    /// Printed switch-over threshold for two-branch bounds, when defined.
    pub threshold: Option<f64>,
}

impl LogProbBound {
    fn new(tag: BoundTag, log_value: f64, params: BoundParams) -> Self {
        Self {
            log_value,
            tag,
            params,
            clamped: false,
            optimal_theta: None,
            branch: None,
            threshold: None,
        }
    }

    /// The bound on the linear scale, clamped to 1 when `clamped` is set.
    pub fn probability(&self) -> f64 {
        let p = self.log_value.exp();
        if self.clamped {
            p.min(1.0)
        } else {
            p
        }
    }

    /// `min(exp(log_value), 1)` regardless of the `clamped` flag.
    pub fn clamped_probability(&self) -> f64 {
        self.log_value.exp().min(1.0)
    }

    pub fn log10_value(&self) -> f64 {
        self.log_value / std::f64::consts::LN_10
    }
}

/// The `ρ` of a matrix series.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct VarianceParam(f64);

impl VarianceParam {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(invalid(
                "rho",
                format!("must be nonnegative and finite, got {rho}"),
            ));
        }
        Ok(Self(rho))
    }

    pub fn rho(self) -> f64 {
        self.0
    }
}

fn check_dim(name: &'static str, v: usize) -> Result<f64> {
    if v == 0 {
        return Err(invalid(name, "must be a positive integer"));
    }
    Ok(v as f64)
}

fn check_positive(name: &'static str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ));
    }
    Ok(v)
}

fn check_t(t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(
            "t",
            format!("must be nonnegative and finite, got {t}"),
        ));
    }
    Ok(t)
}

/// `ln` of the covering bound `(1 + 2/ε)^dim` for an ε-net of the unit
/// sphere in `R^dim`. At `ε = 1/2` this is `dim·ln 5`.
pub fn covering_cardinality_bound(dim: usize, epsilon: f64) -> Result<f64> {
    let dim = check_dim("dim", dim)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(
            "epsilon",
            format!("must lie in (0, 1], got {epsilon}"),
        ));
    }
    Ok(dim * (2.0 / epsilon).ln_1p())
}

/// `P(‖B‖ > t) ≤ 2·5^(m+n)·exp(−c t²)` for an `m×n` matrix with iid
/// sub-Gaussian entries with tail constant `c`.
pub fn net_bound(m: usize, n: usize, c: f64, t: f64) -> Result<LogProbBound> {
    check_dim("m", m)?;
    check_dim("n", n)?;
    let c = check_positive("c", c)?;
    let t = check_t(t)?;
    let log_cover = (m + n) as f64 * (1.0 + 2.0 / NET_EPSILON).ln();
    let log_value = std::f64::consts::LN_2 + log_cover - c * t * t;
    Ok(LogProbBound::new(
        BoundTag::Net,
        log_value,
        BoundParams {
            m: Some(m),
            n: Some(n),
            c: Some(c),
            t,
            ..Default::default()
        },
    ))
}

/// `P(λmax(Σ x_k H_k) ≥ t) ≤ d·exp(−t²/(2b²ρ))` for a `d`-dimensional
/// Hermitian series. The Chernoff parameter attaining the infimum,
/// `θ* = t/(b²ρ)`, is recorded as metadata.
pub fn series_bound(d: usize, b: f64, rho: f64, t: f64) -> Result<LogProbBound> {
    let df = check_dim("d", d)?;
    let b = check_positive("b", b)?;
    let rho = check_positive("rho", rho)?;
    let t = check_t(t)?;
    let mut bound = LogProbBound::new(
        BoundTag::Series,
        df.ln() - t * t / (2.0 * b * b * rho),
        BoundParams {
            d: Some(d),
            b: Some(b),
            rho: Some(rho),
            t,
            ..Default::default()
        },
    );
    bound.optimal_theta = Some(t / (b * b * rho));
    Ok(bound)
}

/// `P(‖Σ x_k D_k‖ ≥ t) ≤ (m+n)·exp(−t²/(2b²ρ))` for an `m×n` series.
pub fn rect_series_bound(m: usize, n: usize, b: f64, rho: f64, t: f64) -> Result<LogProbBound> {
    check_dim("m", m)?;
    check_dim("n", n)?;
    let mut bound = series_bound(m + n, b, rho, t)?;
    bound.tag = BoundTag::RectSeries;
    bound.params.d = None;
    bound.params.m = Some(m);
    bound.params.n = Some(n);
    Ok(bound)
}

/// `P(‖B‖ > t) ≤ (m+n)·exp(−t²/(2b²m))` for an `m×n` iid sub-Gaussian matrix.
///
/// The exponent uses `ρ = m` as published. The variance parameter actually
/// computed from the `E_ij` basis is `max(m, n)`; see
/// [`entrywise_rho_discrepancy`].
pub fn entrywise_bound(m: usize, n: usize, b: f64, t: f64) -> Result<LogProbBound> {
    let mf = check_dim("m", m)?;
    check_dim("n", n)?;
    let mut bound = rect_series_bound(m, n, b, mf, t)?;
    bound.tag = BoundTag::Entrywise;
    Ok(bound)
}

/// The `t*` at which [`net_bound`] and [`entrywise_bound`] coincide:
///
/// `t* = sqrt( 2b²m / (1 − 2b²mc) · ln((m+n) / (2·5^(m+n))) )`
///
/// `None` when `2b²mc = 1` or the radicand is not positive (which happens
/// whenever `2b²mc < 1`, since the log term is always negative).
pub fn refined_crossover(m: usize, n: usize, b: f64, c: f64) -> Result<Option<f64>> {
    let mf = check_dim("m", m)?;
    check_dim("n", n)?;
    let b = check_positive("b", b)?;
    let c = check_positive("c", c)?;
    let scale = 2.0 * b * b * mf;
    let k = scale * c;
    if k == 1.0 {
        return Ok(None);
    }
    let log_ratio = ((m + n) as f64).ln()
        - std::f64::consts::LN_2
        - (m + n) as f64 * (1.0 + 2.0 / NET_EPSILON).ln();
    let radicand = scale / (1.0 - k) * log_ratio;
    Ok((radicand > 0.0 && radicand.is_finite()).then(|| radicand.sqrt()))
}

/// Pointwise minimum of [`net_bound`] and [`entrywise_bound`], clamped at 1.
///
/// When the crossover `t*` exists this is exactly the two-piece bound
/// (entrywise for `t ≤ t*`, net beyond); the minimum also covers regimes
/// where the piecewise form is undefined. Ties go to the entrywise piece.
pub fn refined_bound(m: usize, n: usize, b: f64, c: f64, t: f64) -> Result<LogProbBound> {
    let net = net_bound(m, n, c, t)?;
    let entry = entrywise_bound(m, n, b, t)?;
    let (log_value, branch) = if entry.log_value <= net.log_value {
        (entry.log_value, Branch::Series)
    } else {
        (net.log_value, Branch::Net)
    };
    let mut bound = LogProbBound::new(
        BoundTag::Refined,
        log_value,
        BoundParams {
            m: Some(m),
            n: Some(n),
            b: Some(b),
            c: Some(c),
            rho: Some(m as f64),
            t,
            ..Default::default()
        },
    );
    bound.clamped = true;
    bound.branch = Some(branch);
    bound.threshold = refined_crossover(m, n, b, c)?;
    Ok(bound)
}

/// The two pieces of the Gaussian Toeplitz bound at `t`, in log space:
/// `(ln(2d) − t²/(2d), ln 2 + d·ln 5 − t²/2)`.
pub fn toeplitz_branches(d: usize, t: f64) -> Result<(f64, f64)> {
    let df = check_dim("d", d)?;
    let t = check_t(t)?;
    let series = (2.0 * df).ln() - t * t / (2.0 * df);
    let net = std::f64::consts::LN_2 + df * (1.0 + 2.0 / NET_EPSILON).ln() - 0.5 * t * t;
    Ok((series, net))
}

/// The published switch-over point of the Toeplitz bound,
/// `sqrt( 2d/(1 − 2d) · ln(2d / (2·5^d)) )`; `None` when not real.
///
/// This is not in general where the two pieces cross; see
/// [`toeplitz_branch_crossing`].
pub fn toeplitz_threshold(d: usize) -> Result<Option<f64>> {
    let df = check_dim("d", d)?;
    let log_ratio = (2.0 * df).ln() - std::f64::consts::LN_2 - df * 5f64.ln();
    let radicand = 2.0 * df / (1.0 - 2.0 * df) * log_ratio;
    Ok((radicand > 0.0 && radicand.is_finite()).then(|| radicand.sqrt()))
}

/// The `t` where the two Toeplitz pieces are equal; `None` for `d = 1`,
/// where they share an exponent and never meet.
pub fn toeplitz_branch_crossing(d: usize) -> Result<Option<f64>> {
    let df = check_dim("d", d)?;
    if d == 1 {
        return Ok(None);
    }
    let gap = std::f64::consts::LN_2 + df * 5f64.ln() - (2.0 * df).ln();
    let radicand = 2.0 * df * gap / (df - 1.0);
    Ok((radicand > 0.0).then(|| radicand.sqrt()))
}

/// Gaussian Toeplitz bound: `min(2d·exp(−t²/(2d)), 2·5^d·exp(−t²/2))`,
/// clamped at 1. The published threshold is attached as metadata.
pub fn toeplitz_bound(d: usize, t: f64) -> Result<LogProbBound> {
    let (series, net) = toeplitz_branches(d, t)?;
    let (log_value, branch) = if series <= net {
        (series, Branch::Series)
    } else {
        (net, Branch::Net)
    };
    let mut bound = LogProbBound::new(
        BoundTag::Toeplitz,
        log_value,
        BoundParams {
            d: Some(d),
            b: Some(1.0),
            c: Some(0.5),
            rho: Some(d as f64),
            t,
            ..Default::default()
        },
    );
    bound.clamped = true;
    bound.branch = Some(branch);
    bound.threshold = toeplitz_threshold(d)?;
    Ok(bound)
}

/// `ρ = ‖Σ_k H_k²‖` for a Hermitian series.
pub fn variance_param_hermitian(hs: &[HermitianMatrix]) -> Result<VarianceParam> {
    let first = hs.first().ok_or(Error::EmptyList)?;
    let dim = first.dim();
    let mut sum = HermitianMatrix::zeros(dim);
    for h in hs {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim}x{dim}"),
                found: format!("{0}x{0}", h.dim()),
            });
        }
        sum = sum.add(&h.square()?)?;
    }
    VarianceParam::new(spectral_norm_symmetric(&sum)?)
}

/// `ρ = max(‖Σ_k D_k D_kᵀ‖, ‖Σ_k D_kᵀ D_k‖)` for a rectangular series.
pub fn variance_param_rect(ds: &[DenseMatrix]) -> Result<VarianceParam> {
    let (row_gram, col_gram) = gram_sums(ds)?;
    let rho_rows = spectral_norm_symmetric(&HermitianMatrix::symmetrize(row_gram.as_nalgebra())?)?;
    let rho_cols = spectral_norm_symmetric(&HermitianMatrix::symmetrize(col_gram.as_nalgebra())?)?;
    VarianceParam::new(rho_rows.max(rho_cols))
}

/// `(Σ_k D_k D_kᵀ, Σ_k D_kᵀ D_k)`.
pub fn gram_sums(ds: &[DenseMatrix]) -> Result<(DenseMatrix, DenseMatrix)> {
    let first = ds.first().ok_or(Error::EmptyList)?;
    let (m, n) = first.shape();
    let mut rows = DenseMatrix::zeros(m, m);
    let mut cols = DenseMatrix::zeros(n, n);
    for d in ds {
        if d.shape() != (m, n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{m}x{n}"),
                found: format!("{}x{}", d.rows(), d.cols()),
            });
        }
        rows = rows.add(&d.gram_rows())?;
        cols = cols.add(&d.gram_cols())?;
    }
    Ok((rows, cols))
}

/// `ρ` of a rectangular series computed through the Hermitian dilations of
/// its terms. Agrees with [`variance_param_rect`].
pub fn variance_param_dilated(ds: &[DenseMatrix]) -> Result<VarianceParam> {
    let dilated = ds
        .iter()
        .map(hermitian_dilation)
        .collect::<Result<Vec<_>>>()?;
    variance_param_hermitian(&dilated)
}

/// Difference between the variance parameter of the entrywise basis of an
/// `m×n` matrix and the `ρ = m` that the entrywise bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoDiscrepancy {
    pub m: usize,
    pub n: usize,
    /// `ρ` used by [`entrywise_bound`].
    pub stated: f64,
    /// `ρ` from the Gram sums of `{E_ij}`; equals `max(m, n)`.
    pub computed: f64,
}

impl RhoDiscrepancy {
    pub fn is_consistent(&self) -> bool {
        self.stated == self.computed
    }

    pub fn note(&self) -> String {
        if self.is_consistent() {
            format!(
                "entrywise basis {}x{}: computed rho = {} matches the rho = m used by the entrywise bound",
                self.m, self.n, self.computed
            )
        } else {
            format!(
                "entrywise basis {}x{}: computed rho = max(m, n) = {} but the entrywise bound uses rho = m = {}; \
                 sum E_ij E_ij^T = n I_m and sum E_ij^T E_ij = m I_n",
                self.m, self.n, self.computed, self.stated
            )
        }
    }
}

/// Computes `ρ` for the `E_ij` basis of shape `(m, n)` and compares it with
/// the `ρ = m` in [`entrywise_bound`].
pub fn entrywise_rho_discrepancy(m: usize, n: usize) -> Result<RhoDiscrepancy> {
    check_dim("m", m)?;
    check_dim("n", n)?;
    let basis = crate::ensembles::entrywise_basis_series(m, n);
    let computed = variance_param_rect(basis.terms())?.rho();
    Ok(RhoDiscrepancy {
        m,
        n,
        stated: m as f64,
        computed,
    })
}
