//! Centered sub-Gaussian scalar distributions.
//!
//! Each model carries two constants: `c`, the tail exponent in
//! `P(|x| > t) ≤ 2·exp(−c·t²)`, and `b`, the mgf constant in
//! `E exp(θx) ≤ exp(b²θ²/2)`. They are stored, not derived.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::stats::gaussian_two_sided_tail;

/// User-supplied sampler for a custom model.
pub type Sampler = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ModelKind {
    StandardGaussian,
    Rademacher,
    /// Uniform on `[-half_width, half_width]`.
    UniformSymmetric {
        half_width: f64,
    },
    Custom {
        name: String,
        sampler: Sampler,
    },
}

impl fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::StandardGaussian => f.write_str("StandardGaussian"),
            ModelKind::Rademacher => f.write_str("Rademacher"),
            ModelKind::UniformSymmetric { half_width } => f
                .debug_struct("UniformSymmetric")
                .field("half_width", half_width)
                .finish(),
            ModelKind::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubGaussianModel {
    kind: ModelKind,
    c: f64,
    b: f64,
}

impl SubGaussianModel {
    /// Standard normal: `c = 1/2`, `b = 1` (the mgf is exactly `exp(θ²/2)`).
    pub fn gaussian() -> Self {
        Self {
            kind: ModelKind::StandardGaussian,
            c: 0.5,
            b: 1.0,
        }
    }

    /// Uniform on `{−1, +1}`: `c = 1/2`, `b = 1` (`cosh θ ≤ exp(θ²/2)`).
    pub fn rademacher() -> Self {
        Self {
            kind: ModelKind::Rademacher,
            c: 0.5,
            b: 1.0,
        }
    }

    /// Uniform on `[−a, a]`: `c = 1/(2a²)`, `b = a` (Hoeffding's lemma).
    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid(
                "half_width",
                format!("must be positive, got {half_width}"),
            ));
        }
        Ok(Self {
            kind: ModelKind::UniformSymmetric { half_width },
            c: 1.0 / (2.0 * half_width * half_width),
            b: half_width,
        })
    }

    /// A user model. Only positivity of `c` and `b` is checked; whether the
    /// sampler actually satisfies them is the caller's claim (see
    /// [`empirical_mgf_check`]).
    pub fn custom(name: impl Into<String>, c: f64, b: f64, sampler: Sampler) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", format!("must be positive, got {c}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid("b", format!("must be positive, got {b}")));
        }
        Ok(Self {
            kind: ModelKind::Custom {
                name: name.into(),
                sampler,
            },
            c,
            b,
        })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Tail constant.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Mgf constant.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// The configuration key this model parses from.
    pub fn key(&self) -> String {
        match &self.kind {
            ModelKind::StandardGaussian => "gaussian".into(),
            ModelKind::Rademacher => "rademacher".into(),
            ModelKind::UniformSymmetric { half_width } => format!("uniform:{half_width}"),
            ModelKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// One draw. Gaussian draws use `rand_distr`'s ziggurat sampler.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            ModelKind::StandardGaussian => rng.sample(StandardNormal),
            ModelKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ModelKind::UniformSymmetric { half_width } => {
                rng.random_range(-*half_width..=*half_width)
            }
            ModelKind::Custom { sampler, .. } => {
                let mut dyn_rng = DynRng(rng);
                sampler(&mut dyn_rng)
            }
        }
    }

    /// Exact `P(|x| > t)` for the built-in kinds; `None` for custom models.
    pub fn exact_abs_tail(&self, t: f64) -> Option<f64> {
        let t = t.max(0.0);
        match &self.kind {
            ModelKind::StandardGaussian => Some(gaussian_two_sided_tail(t)),
            ModelKind::Rademacher => Some(if t < 1.0 { 1.0 } else { 0.0 }),
            ModelKind::UniformSymmetric { half_width } => Some((1.0 - t / half_width).max(0.0)),
            ModelKind::Custom { .. } => None,
        }
    }

    /// Exact `E exp(θx)` for the built-in kinds; `None` for custom models.
    pub fn exact_mgf(&self, theta: f64) -> Option<f64> {
        match &self.kind {
            ModelKind::StandardGaussian => Some((0.5 * theta * theta).exp()),
            ModelKind::Rademacher => Some(theta.cosh()),
            ModelKind::UniformSymmetric { half_width } => {
                let z = theta * half_width;
                Some(if z == 0.0 { 1.0 } else { z.sinh() / z })
            }
            ModelKind::Custom { .. } => None,
        }
    }

    /// `2·exp(−c·t²)`.
    pub fn tail_envelope(&self, t: f64) -> f64 {
        2.0 * (-self.c * t * t).exp()
    }

    /// `exp(b²θ²/2)`.
    pub fn mgf_envelope(&self, theta: f64) -> f64 {
        (0.5 * self.b * self.b * theta * theta).exp()
    }
}

impl FromStr for SubGaussianModel {
    type Err = Error;

    /// Parses `gaussian`, `rademacher` or `uniform:<a>`.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        match key.as_str() {
            "gaussian" => Ok(Self::gaussian()),
            "rademacher" => Ok(Self::rademacher()),
            _ => {
                let Some(rest) = key.strip_prefix("uniform:") else {
                    return Err(Error::UnknownModel(s.to_string()));
                };
                let a: f64 = rest
                    .parse()
                    .map_err(|_| Error::UnknownModel(s.to_string()))?;
                Self::uniform(a)
            }
        }
    }
}

// Adapter so a generic `R: Rng + ?Sized` can be handed to a `dyn RngCore` sampler.
struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// The built-in models; the uniform one uses half-width 1.
pub fn standard_models() -> Vec<SubGaussianModel> {
    vec![
        SubGaussianModel::gaussian(),
        SubGaussianModel::rademacher(),
        SubGaussianModel::uniform(1.0).expect("positive half-width"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfCheck {
    pub theta: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    /// Estimate exceeds the bound by more than three standard errors.
    pub flagged: bool,
}

/// Monte Carlo check of `E exp(θx) ≤ exp(b²θ²/2)` on a grid of θ.
///
/// The same `n_samples` draws are reused for every θ.
pub fn empirical_mgf_check<R: Rng + ?Sized>(
    model: &SubGaussianModel,
    theta_grid: &[f64],
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<MgfCheck>> {
    if n_samples < 10_000 {
        return Err(invalid(
            "n_samples",
            format!("must be at least 10000, got {n_samples}"),
        ));
    }
    if let Some(bad) = theta_grid.iter().find(|t| !t.is_finite()) {
        return Err(invalid("theta", format!("non-finite value {bad}")));
    }
    let draws: Vec<f64> = (0..n_samples).map(|_| model.sample(rng)).collect();
    let n = n_samples as f64;
    theta_grid
        .iter()
        .map(|&theta| {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for &x in &draws {
                let v = (theta * x).exp();
                if !v.is_finite() || !(v * v).is_finite() {
                    return Err(Error::OverflowAtTheta { theta });
                }
                sum += v;
                sum_sq += v * v;
            }
            let estimate = sum / n;
            let var = ((sum_sq / n - estimate * estimate) * n / (n - 1.0)).max(0.0);
            let std_error = (var / n).sqrt();
            let bound = model.mgf_envelope(theta);
            Ok(MgfCheck {
                theta,
                estimate,
                std_error,
                bound,
                flagged: estimate > bound + 3.0 * std_error,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_constants() {
        let models = standard_models();
        assert_eq!(models.len(), 3);
        assert_eq!((models[0].c(), models[0].b()), (0.5, 1.0));
        assert_eq!((models[1].c(), models[1].b()), (0.5, 1.0));
        assert_eq!((models[2].c(), models[2].b()), (0.5, 1.0));
        let u = SubGaussianModel::uniform(2.0).unwrap();
        assert_eq!((u.c(), u.b()), (0.125, 2.0));
    }

    #[test]
    fn gaussian_mgf_matches_envelope() {
        let g = SubGaussianModel::gaussian();
        for theta in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            assert_eq!(g.exact_mgf(theta).unwrap(), g.mgf_envelope(theta));
        }
    }

    #[test]
    fn rademacher_tail_at_half() {
        let r = SubGaussianModel::rademacher();
        assert_eq!(r.exact_abs_tail(0.5), Some(1.0));
        let env = r.tail_envelope(0.5);
        assert!((env - 2.0 * (-0.125f64).exp()).abs() < 1e-15);
        assert!((env - 1.765).abs() < 1e-3);
    }

    #[test]
    fn uniform_tail_vanishes_beyond_support() {
        let u = SubGaussianModel::uniform(1.0).unwrap();
        assert_eq!(u.exact_abs_tail(1.0), Some(0.0));
        assert_eq!(u.exact_abs_tail(3.0), Some(0.0));
    }

    #[test]
    fn tail_condition_holds_for_builtins() {
        for model in standard_models() {
            for t in [0.5, 1.0, 2.0, 4.0] {
                let exact = model.exact_abs_tail(t).unwrap();
                assert!(exact <= model.tail_envelope(t), "{:?} t={t}", model.kind());
            }
        }
    }

    #[test]
    fn draws_respect_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = SubGaussianModel::rademacher();
        let u = SubGaussianModel::uniform(0.75).unwrap();
        for _ in 0..10_000 {
            let x = r.sample(&mut rng);
            assert!(x == 1.0 || x == -1.0);
            let y = u.sample(&mut rng);
            assert!((-0.75..=0.75).contains(&y));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = SubGaussianModel::gaussian();
        let a: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..100).map(|_| g.sample(&mut rng)).collect()
        };
        let b: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..100).map(|_| g.sample(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_sample_mean() {
        let g = SubGaussianModel::gaussian();
        let mut rng = ChaCha8Rng::seed_from_u64(20261015);
        let n = 1_000_000;
        let mean = (0..n).map(|_| g.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.005, "mean {mean}");
    }

    #[test]
    fn parse_keys() {
        assert!(matches!(
            "gaussian".parse::<SubGaussianModel>().unwrap().kind(),
            ModelKind::StandardGaussian
        ));
        assert!(matches!(
            "Rademacher".parse::<SubGaussianModel>().unwrap().kind(),
            ModelKind::Rademacher
        ));
        let u: SubGaussianModel = "uniform:2.5".parse().unwrap();
        assert_eq!(u.b(), 2.5);
        assert_eq!(u.key(), "uniform:2.5");
        assert!(matches!(
            "cauchy".parse::<SubGaussianModel>(),
            Err(Error::UnknownModel(_))
        ));
        assert!("uniform:-1".parse::<SubGaussianModel>().is_err());
        assert!("uniform:abc".parse::<SubGaussianModel>().is_err());
    }

    #[test]
    fn custom_model_uses_sampler() {
        let sampler: Sampler = Arc::new(
            |rng: &mut dyn RngCore| {
                if rng.next_u32() & 1 == 0 {
                    0.5
                } else {
                    -0.5
                }
            },
        );
        let model = SubGaussianModel::custom("half", 2.0, 0.5, sampler).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(model.sample(&mut rng).abs(), 0.5);
        }
        assert!(model.exact_abs_tail(1.0).is_none());
        let bad: Sampler = Arc::new(|_| 0.0);
        assert!(SubGaussianModel::custom("x", 0.0, 1.0, bad).is_err());
    }

    #[test]
    fn mgf_check_theta_zero_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = empirical_mgf_check(
            &SubGaussianModel::rademacher(),
            &[0.0, 1.0],
            10_000,
            &mut rng,
        )
        .unwrap();
        assert_eq!(report[0].estimate, 1.0);
        assert_eq!(report[0].bound, 1.0);
        assert!(!report[0].flagged);
        // cosh(1) ≈ 1.5431 under e^0.5 ≈ 1.6487
        assert!((report[1].estimate - 1f64.cosh()).abs() < 4.0 * report[1].std_error);
        assert!((report[1].bound - 0.5f64.exp()).abs() < 1e-15);
        assert!(!report[1].flagged);
    }

    #[test]
    fn mgf_check_requires_enough_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(empirical_mgf_check(&SubGaussianModel::gaussian(), &[1.0], 100, &mut rng).is_err());
    }

    #[test]
    fn mgf_check_overflow() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = SubGaussianModel::rademacher();
        assert_eq!(
            empirical_mgf_check(&r, &[800.0], 10_000, &mut rng),
            Err(Error::OverflowAtTheta { theta: 800.0 })
        );
    }

    #[test]
    fn mgf_check_no_flags_on_grid() {
        let grid: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64).collect();
        for (k, model) in standard_models().iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
            let report = empirical_mgf_check(model, &grid, 100_000, &mut rng).unwrap();
            for row in report {
                assert!(!row.flagged, "{:?} {:?}", model.kind(), row);
            }
        }
    }
}
