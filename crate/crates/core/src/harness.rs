//! Seeded, parallel Monte Carlo estimation of `P(‖B‖ > t)` and checks that
//! each bound dominates the empirical tail.
//!
//! Every trial draws its matrix from its own generator (see [`crate::rng`]),
//! computes `σmax` once, and the per-trial values are collected in trial
//! order. Counting happens after collection, so the output is a pure
//! function of the inputs regardless of the worker count.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    entrywise_bound, entrywise_rho_discrepancy, net_bound, rect_series_bound, refined_bound,
    series_bound, toeplitz_bound, BoundTag, LogProbBound,
};
use crate::ensembles::{sample_iid_matrix, sample_toeplitz};
use crate::error::{invalid, Error, Result};
use crate::json::{sig17, to_json_string};
use crate::linalg::{largest_singular_value, DenseMatrix, DEFAULT_TOL};
use crate::models::SubGaussianModel;
use crate::rng::trial_rng;
use crate::stats::clopper_pearson;

pub const DEFAULT_CONFIDENCE: f64 = 0.99;
pub const MIN_TRIALS: u64 = 100;

/// Default trial count: 10⁵ for small shapes, 10⁴ once a dimension reaches 64.
pub fn default_trials(ensemble: &EnsembleSpec) -> u64 {
    let largest = match ensemble {
        EnsembleSpec::Iid { m, n, .. } => (*m).max(*n),
        EnsembleSpec::Toeplitz { d } => *d,
    };
    if largest >= 64 {
        10_000
    } else {
        100_000
    }
}

/// A random-matrix family to simulate.
#[derive(Debug, Clone)]
pub enum EnsembleSpec {
    /// `m×n` with iid entries from `model`.
    Iid {
        m: usize,
        n: usize,
        model: SubGaussianModel,
    },
    /// `d×d` Gaussian Toeplitz.
    Toeplitz { d: usize },
}

impl EnsembleSpec {
    pub fn iid(m: usize, n: usize, model: SubGaussianModel) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "must be a positive integer"));
        }
        if n == 0 {
            return Err(invalid("n", "must be a positive integer"));
        }
        Ok(Self::Iid { m, n, model })
    }

    pub fn toeplitz(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be a positive integer"));
        }
        Ok(Self::Toeplitz { d })
    }

    pub fn sample(&self, rng: &mut impl rand::Rng) -> DenseMatrix {
        match self {
            EnsembleSpec::Iid { m, n, model } => sample_iid_matrix(*m, *n, model, rng),
            EnsembleSpec::Toeplitz { d } => sample_toeplitz(*d, rng),
        }
    }

    /// The bounds that apply to this ensemble.
    pub fn applicable_tags(&self) -> &'static [BoundTag] {
        match self {
            EnsembleSpec::Iid { .. } => &[
                BoundTag::Net,
                BoundTag::Series,
                BoundTag::RectSeries,
                BoundTag::Entrywise,
                BoundTag::Refined,
            ],
            EnsembleSpec::Toeplitz { .. } => &[BoundTag::RectSeries, BoundTag::Toeplitz],
        }
    }

    /// Evaluates the bound `tag` at `t` for this ensemble.
    ///
    /// For iid matrices the series bounds use the variance parameter computed
    /// from the `E_ij` basis, `ρ = max(m, n)`; `series` is the Hermitian
    /// bound on the dilation (dimension `m + n`), which equals `rect-series`.
    /// For Toeplitz matrices `rect-series` uses `ρ = d`.
    pub fn bound(&self, tag: BoundTag, t: f64) -> Result<LogProbBound> {
        match (self, tag) {
            (EnsembleSpec::Iid { m, n, model }, BoundTag::Net) => net_bound(*m, *n, model.c(), t),
            (EnsembleSpec::Iid { m, n, model }, BoundTag::Series) => {
                series_bound(m + n, model.b(), (*m).max(*n) as f64, t)
            }
            (EnsembleSpec::Iid { m, n, model }, BoundTag::RectSeries) => {
                rect_series_bound(*m, *n, model.b(), (*m).max(*n) as f64, t)
            }
            (EnsembleSpec::Iid { m, n, model }, BoundTag::Entrywise) => {
                entrywise_bound(*m, *n, model.b(), t)
            }
            (EnsembleSpec::Iid { m, n, model }, BoundTag::Refined) => {
                refined_bound(*m, *n, model.b(), model.c(), t)
            }
            (EnsembleSpec::Toeplitz { d }, BoundTag::RectSeries) => {
                rect_series_bound(*d, *d, 1.0, *d as f64, t)
            }
            (EnsembleSpec::Toeplitz { d }, BoundTag::Toeplitz) => toeplitz_bound(*d, t),
            _ => Err(Error::TagNotApplicable {
                tag: tag.to_string(),
                ensemble: self.to_string(),
            }),
        }
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSpec::Iid { m, n, model } => write!(f, "iid {m}x{n} {}", model.key()),
            EnsembleSpec::Toeplitz { d } => write!(f, "gaussian toeplitz {d}x{d}"),
        }
    }
}

/// Parses `start:stop:step` (endpoints included within half a step) or a
/// comma-separated list.
pub fn parse_t_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidGrid(format!("`{s}` is not a number")))
    };
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidGrid(format!(
                "`{spec}` must have the form start:stop:step"
            )));
        }
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if stop < start {
            return Err(Error::InvalidGrid(format!(
                "stop {stop} is below start {start}"
            )));
        }
        let count = ((stop - start) / step + 0.5).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else {
        spec.split(',').map(parse).collect::<Result<Vec<_>>>()?
    };
    validate_grid(&grid)?;
    Ok(grid)
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidGrid(format!(
            "values must be finite and nonnegative, got {bad}"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "values must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// `σmax` of every trial, in trial order.
///
/// `threads` of `None` uses rayon's global pool; any worker count yields the
/// same vector.
pub fn simulate_sigma_max(
    ensemble: &EnsembleSpec,
    n_trials: u64,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<Vec<f64>> {
    let run = || {
        (0..n_trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(master_seed, i);
                largest_singular_value(&ensemble.sample(&mut rng), DEFAULT_TOL)
            })
            .collect::<Result<Vec<f64>>>()
    };
    match threads {
        None => run(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| invalid("threads", e.to_string()))?
            .install(run),
    }
}

/// Empirical tail and attached bounds at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRecord {
    pub t: f64,
    /// Natural-log bound values by tag.
    pub bounds: BTreeMap<BoundTag, f64>,
    /// Trials with `σmax > t`.
    pub empirical_count: u64,
    pub n_trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailRecord {
    pub fn empirical_p(&self) -> f64 {
        self.empirical_count as f64 / self.n_trials as f64
    }
}

/// Empirical tail curve over an ascending t-grid.
#[derive(Debug, Clone)]
pub struct TailCurve {
    pub ensemble: EnsembleSpec,
    pub master_seed: u64,
    pub confidence: f64,
    pub n_trials: u64,
    pub records: Vec<TailRecord>,
    pub median_sigma_max: f64,
    pub wall_clock_secs: f64,
}

/// Runs `n_trials` draws and records, for each grid `t`, how many exceeded
/// it together with a Clopper–Pearson interval at `confidence`.
pub fn estimate_tail(
    ensemble: &EnsembleSpec,
    t_grid: &[f64],
    n_trials: u64,
    master_seed: u64,
    confidence: f64,
) -> Result<TailCurve> {
    estimate_tail_with_threads(ensemble, t_grid, n_trials, master_seed, confidence, None)
}

pub fn estimate_tail_with_threads(
    ensemble: &EnsembleSpec,
    t_grid: &[f64],
    n_trials: u64,
    master_seed: u64,
    confidence: f64,
    threads: Option<usize>,
) -> Result<TailCurve> {
    validate_grid(t_grid)?;
    if n_trials < MIN_TRIALS {
        return Err(invalid(
            "n_trials",
            format!("must be at least {MIN_TRIALS}, got {n_trials}"),
        ));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(
            "confidence",
            format!("must lie in (0, 1), got {confidence}"),
        ));
    }
    let start = Instant::now();
    let mut sigmas = simulate_sigma_max(ensemble, n_trials, master_seed, threads)?;
    sigmas.sort_by(f64::total_cmp);

    let records = t_grid
        .iter()
        .map(|&t| {
            let at_most = sigmas.partition_point(|&s| s <= t);
            let count = (sigmas.len() - at_most) as u64;
            let (ci_low, ci_high) = clopper_pearson(count, n_trials, confidence)?;
            Ok(TailRecord {
                t,
                bounds: BTreeMap::new(),
                empirical_count: count,
                n_trials,
                ci_low,
                ci_high,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TailCurve {
        ensemble: ensemble.clone(),
        master_seed,
        confidence,
        n_trials,
        records,
        median_sigma_max: median_sorted(&sigmas),
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

impl TailCurve {
    /// Evaluates each tag at every grid point and stores the log values.
    pub fn attach_bounds(&mut self, tags: &[BoundTag]) -> Result<()> {
        for record in &mut self.records {
            for &tag in tags {
                let bound = self.ensemble.bound(tag, record.t)?;
                record.bounds.insert(tag, bound.log_value);
            }
        }
        Ok(())
    }

    /// Tags present on every record, in tag order.
    pub fn tags(&self) -> Vec<BoundTag> {
        let Some(first) = self.records.first() else {
            return Vec::new();
        };
        first
            .bounds
            .keys()
            .copied()
            .filter(|tag| self.records.iter().all(|r| r.bounds.contains_key(tag)))
            .collect()
    }

    /// CSV with header `t,<tag>_log10_bound...,empirical_p,ci_low,ci_high,n_trials`.
    pub fn to_csv(&self) -> String {
        let tags = self.tags();
        let mut out = String::from("t");
        for tag in &tags {
            let _ = write!(out, ",{}_log10_bound", tag.as_str().replace('-', "_"));
        }
        out.push_str(",empirical_p,ci_low,ci_high,n_trials\n");
        for r in &self.records {
            out.push_str(&sig17(r.t));
            for tag in &tags {
                let _ = write!(out, ",{}", sig17(r.bounds[tag] / std::f64::consts::LN_10));
            }
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                sig17(r.empirical_p()),
                sig17(r.ci_low),
                sig17(r.ci_high),
                r.n_trials
            );
        }
        out
    }

    /// JSON array of row objects with the same keys as [`TailCurve::to_csv`].
    pub fn to_json(&self) -> String {
        let tags = self.tags();
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .records
            .iter()
            .map(|r| {
                let mut row = serde_json::Map::new();
                row.insert("t".into(), r.t.into());
                for tag in &tags {
                    row.insert(
                        format!("{}_log10_bound", tag.as_str().replace('-', "_")),
                        (r.bounds[tag] / std::f64::consts::LN_10).into(),
                    );
                }
                row.insert("empirical_p".into(), r.empirical_p().into());
                row.insert("ci_low".into(), r.ci_low.into());
                row.insert("ci_high".into(), r.ci_high.into());
                row.insert("n_trials".into(), r.n_trials.into());
                row
            })
            .collect();
        to_json_string(&rows)
    }
}

/// Outcome of one (tag, t) comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationCell {
    pub tag: BoundTag,
    pub t: f64,
    pub log10_bound: f64,
    /// `min(bound, 1)`.
    pub bound: f64,
    pub empirical_p: f64,
    pub ci_low: f64,
    /// `bound − ci_low`.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagSummary {
    pub tag: BoundTag,
    pub pass: bool,
    pub failures: usize,
    pub tightest_margin: f64,
    pub tightest_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub ensemble: String,
    pub seed: u64,
    pub n_trials: u64,
    pub confidence: f64,
    pub median_sigma_max: f64,
    pub wall_clock_secs: f64,
    pub verdict: Verdict,
    pub summaries: Vec<TagSummary>,
    pub cells: Vec<DominationCell>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// Human-readable summary, one line per tag.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ensemble: {}", self.ensemble);
        let _ = writeln!(
            out,
            "seed: {}  trials: {}  confidence: {}",
            self.seed, self.n_trials, self.confidence
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<12} {}  failures={}  tightest margin {} at t={}",
                s.tag.as_str(),
                if s.pass { "PASS" } else { "FAIL" },
                s.failures,
                sig17(s.tightest_margin),
                sig17(s.tightest_t)
            );
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(
            out,
            "verdict: {}",
            match self.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
            }
        );
        out
    }
}

/// Checks `min(bound, 1) ≥ ci_low` for every tag at every grid point.
///
/// Tags not yet attached to the curve are evaluated from its ensemble.
pub fn verify_domination(curve: &TailCurve, tags: &[BoundTag]) -> Result<VerificationReport> {
    if curve.records.is_empty() {
        return Err(Error::InvalidGrid("curve has no records".into()));
    }
    let mut cells = Vec::new();
    let mut summaries = Vec::new();
    for &tag in tags {
        let mut summary = TagSummary {
            tag,
            pass: true,
            failures: 0,
            tightest_margin: f64::INFINITY,
            tightest_t: curve.records[0].t,
        };
        for r in &curve.records {
            let log_value = match r.bounds.get(&tag) {
                Some(&v) => v,
                None => curve.ensemble.bound(tag, r.t)?.log_value,
            };
            let bound = log_value.exp().min(1.0);
            let pass = bound >= r.ci_low;
            let margin = bound - r.ci_low;
            if !pass {
                summary.pass = false;
                summary.failures += 1;
            }
            if margin < summary.tightest_margin {
                summary.tightest_margin = margin;
                summary.tightest_t = r.t;
            }
            cells.push(DominationCell {
                tag,
                t: r.t,
                log10_bound: log_value / std::f64::consts::LN_10,
                bound,
                empirical_p: r.empirical_p(),
                ci_low: r.ci_low,
                margin,
                pass,
            });
        }
        summaries.push(summary);
    }
    let verdict = if summaries.iter().all(|s| s.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    let mut notes = Vec::new();
    if let EnsembleSpec::Iid { m, n, .. } = &curve.ensemble {
        if tags
            .iter()
            .any(|t| matches!(t, BoundTag::Entrywise | BoundTag::Refined))
        {
            let disc = entrywise_rho_discrepancy(*m, *n)?;
            if !disc.is_consistent() {
                notes.push(disc.note());
            }
        }
    }

    Ok(VerificationReport {
        ensemble: curve.ensemble.to_string(),
        seed: curve.master_seed,
        n_trials: curve.n_trials,
        confidence: curve.confidence,
        median_sigma_max: curve.median_sigma_max,
        wall_clock_secs: curve.wall_clock_secs,
        verdict,
        summaries,
        cells,
        notes,
    })
}

/// Simulates `d×d` Gaussian Toeplitz matrices and checks the Toeplitz bound.
pub fn toeplitz_experiment(
    d: usize,
    t_grid: &[f64],
    n_trials: u64,
    master_seed: u64,
    confidence: f64,
    threads: Option<usize>,
) -> Result<(TailCurve, VerificationReport)> {
    let ensemble = EnsembleSpec::toeplitz(d)?;
    let mut curve = estimate_tail_with_threads(
        &ensemble,
        t_grid,
        n_trials,
        master_seed,
        confidence,
        threads,
    )?;
    curve.attach_bounds(&[BoundTag::Toeplitz])?;
    let report = verify_domination(&curve, &[BoundTag::Toeplitz])?;
    Ok((curve, report))
}
