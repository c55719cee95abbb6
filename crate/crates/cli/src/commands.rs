use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};
use svtail_core::bounds::{refined_crossover, toeplitz_branch_crossing, toeplitz_threshold};
use svtail_core::ensembles::toeplitz_series_terms;
use svtail_core::harness::{default_trials, estimate_tail_with_threads, parse_t_grid};
use svtail_core::json::{sig17, to_json_string};
use svtail_core::{
    toeplitz_experiment, variance_param_rect, verify_domination, BoundTag, EnsembleSpec, Error,
    SubGaussianModel, TailCurve, VerificationReport,
};

use crate::args::{
    BoundArgs, Format, GridArgs, OutputArgs, RunArgs, ShapeArgs, SimArgs, ToeplitzArgs, VerifyArgs,
};

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration: exit 2.
    Config(String),
    /// Runtime failure (I/O, numerical): exit 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::NonFinite | Error::OverflowAtTheta { .. } => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

type CmdResult = Result<Outcome, CliError>;

// Effective configuration, echoed as a rerunnable command line.
struct Echo(String);

impl Echo {
    fn new(cmd: &str) -> Self {
        Self(format!("svtail {cmd}"))
    }

    fn arg(&mut self, flag: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = write!(self.0, " --{flag} {value}");
        self
    }

    fn flag(&mut self, flag: &str) -> &mut Self {
        let _ = write!(self.0, " --{flag}");
        self
    }

    fn emit(&self) {
        eprintln!("# config: {}", self.0);
    }
}

fn ensemble_from(
    shape: &ShapeArgs,
    fallback: Option<(usize, usize)>,
) -> Result<EnsembleSpec, CliError> {
    match (shape.m, shape.n, shape.d) {
        (None, None, Some(d)) => {
            if !shape.model.eq_ignore_ascii_case("gaussian") {
                return Err(CliError::Config(
                    "invalid --model: Toeplitz ensembles are Gaussian only".into(),
                ));
            }
            EnsembleSpec::toeplitz(d).map_err(field_error("d"))
        }
        (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => Err(CliError::Config(
            "invalid --d: give either --d or --m/--n, not both".into(),
        )),
        (m, n, None) => {
            let (m, n) = match (m, n, fallback) {
                (Some(m), Some(n), _) => (m, n),
                (None, None, Some(default)) => default,
                (None, _, _) => return Err(CliError::Config("missing --m".into())),
                (_, None, _) => return Err(CliError::Config("missing --n".into())),
            };
            let model: SubGaussianModel = shape.model.parse().map_err(field_error("model"))?;
            EnsembleSpec::iid(m, n, model).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

fn field_error(field: &'static str) -> impl Fn(Error) -> CliError {
    move |e| CliError::Config(format!("invalid --{field}: {e}"))
}

fn echo_shape(echo: &mut Echo, ensemble: &EnsembleSpec) {
    match ensemble {
        EnsembleSpec::Iid { m, n, model } => {
            echo.arg("m", m).arg("n", n).arg("model", model.key());
        }
        EnsembleSpec::Toeplitz { d } => {
            echo.arg("d", d);
        }
    }
}

fn grid_from(
    grid: &GridArgs,
    default: Option<&str>,
) -> Result<Option<(Vec<f64>, String)>, CliError> {
    if let Some(t) = grid.t {
        let values = parse_t_grid(&t.to_string()).map_err(field_error("t"))?;
        return Ok(Some((values, format!("--t {t}"))));
    }
    match grid.t_grid.as_deref().or(default) {
        Some(spec) => {
            let values = parse_t_grid(spec).map_err(field_error("t-grid"))?;
            Ok(Some((values, format!("--t-grid {spec}"))))
        }
        None => Ok(None),
    }
}

fn tags_from(spec: Option<&str>, default: &[BoundTag]) -> Result<Vec<BoundTag>, CliError> {
    match spec {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(',')
            .map(|t| t.parse::<BoundTag>().map_err(field_error("bounds")))
            .collect(),
    }
}

fn default_tags(ensemble: &EnsembleSpec) -> &'static [BoundTag] {
    match ensemble {
        EnsembleSpec::Iid { .. } => &[BoundTag::Net, BoundTag::Entrywise, BoundTag::Refined],
        EnsembleSpec::Toeplitz { .. } => &[BoundTag::Toeplitz],
    }
}

fn tags_csv(tags: &[BoundTag]) -> String {
    tags.iter()
        .map(|t| t.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

fn check_tags(ensemble: &EnsembleSpec, tags: &[BoundTag]) -> Result<(), CliError> {
    for tag in tags {
        if !ensemble.applicable_tags().contains(tag) {
            return Err(CliError::Config(format!(
                "invalid --bounds: `{tag}` does not apply to {ensemble}"
            )));
        }
    }
    Ok(())
}

fn write_output(out: &OutputArgs, content: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => write_file(path, content),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Runtime(format!("writing standard output: {e}")))
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Config(format!("invalid --out {}: {e}", path.display())))
}

fn run_settings(run: &RunArgs, ensemble: &EnsembleSpec) -> Result<u64, CliError> {
    let trials = run.trials.unwrap_or_else(|| default_trials(ensemble));
    if trials == 0 {
        return Err(CliError::Config(
            "invalid --trials: must be at least 1".into(),
        ));
    }
    if !(run.confidence > 0.0 && run.confidence < 1.0) {
        return Err(CliError::Config(format!(
            "invalid --confidence: must lie in (0, 1), got {}",
            run.confidence
        )));
    }
    if run.threads == Some(0) {
        return Err(CliError::Config(
            "invalid --threads: must be at least 1".into(),
        ));
    }
    Ok(trials)
}

fn echo_run(echo: &mut Echo, run: &RunArgs, trials: u64) {
    echo.arg("trials", trials)
        .arg("seed", run.seed)
        .arg("confidence", run.confidence);
    if let Some(k) = run.threads {
        echo.arg("threads", k);
    }
}

fn echo_output(echo: &mut Echo, out: &OutputArgs) {
    echo.arg("format", out.format.as_str());
    if let Some(path) = &out.out {
        echo.arg("out", path.display());
    }
}

fn curve_text(curve: &TailCurve, format: Format) -> String {
    match format {
        Format::Csv => curve.to_csv(),
        Format::Json => curve.to_json(),
    }
}

pub fn cmd_bound(args: &BoundArgs) -> CmdResult {
    let ensemble = ensemble_from(&args.shape, None)?;
    let tags = tags_from(args.bounds.as_deref(), default_tags(&ensemble))?;
    check_tags(&ensemble, &tags)?;
    let grid = grid_from(&args.grid, None)?;
    if grid.is_none() && !args.crossover {
        return Err(CliError::Config(
            "missing --t-grid: give --t, --t-grid or --crossover".into(),
        ));
    }

    let mut echo = Echo::new("bound");
    echo_shape(&mut echo, &ensemble);
    if let Some((_, g)) = &grid {
        let _ = write!(echo.0, " {g}");
    }
    echo.arg("bounds", tags_csv(&tags));
    if args.crossover {
        echo.flag("crossover");
    }
    echo_output(&mut echo, &args.output);
    echo.emit();

    let crossover = match &ensemble {
        EnsembleSpec::Iid { m, n, model } => refined_crossover(*m, *n, model.b(), model.c())?,
        EnsembleSpec::Toeplitz { d } => toeplitz_branch_crossing(*d)?,
    };
    let published = match &ensemble {
        EnsembleSpec::Toeplitz { d } => Some(toeplitz_threshold(*d)?),
        EnsembleSpec::Iid { .. } => None,
    };

    let mut rows = Vec::new();
    if let Some((values, _)) = &grid {
        for &t in values {
            let mut row = Vec::with_capacity(tags.len());
            for &tag in &tags {
                row.push(ensemble.bound(tag, t)?);
            }
            rows.push((t, row));
        }
    }

    let text = match args.output.format {
        Format::Csv => {
            let mut out = String::new();
            if args.crossover {
                let _ = writeln!(out, "crossover_t={}", opt_sig17(crossover));
                if let Some(p) = published {
                    let _ = writeln!(out, "published_threshold_t={}", opt_sig17(p));
                }
            }
            if !rows.is_empty() {
                out.push('t');
                for tag in &tags {
                    let col = tag.as_str().replace('-', "_");
                    let _ = write!(out, ",{col}_log10_bound,{col}_probability");
                }
                out.push('\n');
                for (t, bounds) in &rows {
                    out.push_str(&sig17(*t));
                    for b in bounds {
                        let _ = write!(
                            out,
                            ",{},{}",
                            sig17(b.log10_value()),
                            sig17(b.clamped_probability())
                        );
                    }
                    out.push('\n');
                }
            }
            out
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert(
                "crossover_t".into(),
                crossover.map_or(Value::Null, Value::from),
            );
            if let Some(p) = published {
                doc.insert(
                    "published_threshold_t".into(),
                    p.map_or(Value::Null, Value::from),
                );
            }
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|(t, bounds)| {
                    let mut row = Map::new();
                    row.insert("t".into(), (*t).into());
                    for b in bounds {
                        let col = b.tag.as_str().replace('-', "_");
                        row.insert(format!("{col}_log10_bound"), b.log10_value().into());
                        row.insert(format!("{col}_probability"), b.clamped_probability().into());
                    }
                    Value::Object(row)
                })
                .collect();
            doc.insert("rows".into(), Value::Array(json_rows));
            to_json_string(&doc) + "\n"
        }
    };
    write_output(&args.output, &text)?;
    Ok(Outcome::Success)
}

fn opt_sig17(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), sig17)
}

pub fn cmd_simulate(args: &SimArgs) -> CmdResult {
    let ensemble = ensemble_from(&args.shape, None)?;
    let (grid, grid_echo) = grid_from(&args.grid, Some("0:12:0.5"))?.expect("default grid");
    let tags = tags_from(args.bounds.as_deref(), &[])?;
    check_tags(&ensemble, &tags)?;
    let trials = run_settings(&args.run, &ensemble)?;

    let mut echo = Echo::new("simulate");
    echo_shape(&mut echo, &ensemble);
    let _ = write!(echo.0, " {grid_echo}");
    if !tags.is_empty() {
        echo.arg("bounds", tags_csv(&tags));
    }
    echo_run(&mut echo, &args.run, trials);
    echo_output(&mut echo, &args.output);
    echo.emit();

    let mut curve = estimate_tail_with_threads(
        &ensemble,
        &grid,
        trials,
        args.run.seed,
        args.run.confidence,
        args.run.threads,
    )?;
    curve.attach_bounds(&tags)?;
    write_output(&args.output, &curve_text(&curve, args.output.format))?;
    Ok(Outcome::Success)
}

fn finish_report(report: &VerificationReport, path: Option<&Path>) -> CmdResult {
    if let Some(path) = path {
        fs::write(path, report.to_json() + "\n")
            .map_err(|e| CliError::Config(format!("invalid --report {}: {e}", path.display())))?;
    }
    Ok(if report.passed() {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

pub fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let ensemble = ensemble_from(&args.shape, Some((5, 5)))?;
    let (grid, grid_echo) = grid_from(&args.grid, Some("0:12:0.5"))?.expect("default grid");
    let tags = tags_from(args.bounds.as_deref(), default_tags(&ensemble))?;
    check_tags(&ensemble, &tags)?;
    let trials = run_settings(&args.run, &ensemble)?;

    let mut echo = Echo::new("verify");
    echo_shape(&mut echo, &ensemble);
    let _ = write!(echo.0, " {grid_echo}");
    echo.arg("bounds", tags_csv(&tags));
    echo_run(&mut echo, &args.run, trials);
    echo_output(&mut echo, &args.output);
    if let Some(path) = &args.report {
        echo.arg("report", path.display());
    }
    echo.emit();

    let mut curve = estimate_tail_with_threads(
        &ensemble,
        &grid,
        trials,
        args.run.seed,
        args.run.confidence,
        args.run.threads,
    )?;
    curve.attach_bounds(&tags)?;
    let report = verify_domination(&curve, &tags)?;
    if let Some(path) = &args.output.out {
        write_file(path, &curve_text(&curve, args.output.format))?;
    }
    print!("{}", report.to_text());
    finish_report(&report, args.report.as_deref())
}

pub fn cmd_toeplitz(args: &ToeplitzArgs) -> CmdResult {
    let ensemble = EnsembleSpec::toeplitz(args.d).map_err(field_error("d"))?;
    if args.show_rho {
        let mut echo = Echo::new("toeplitz");
        echo.arg("d", args.d).flag("show-rho");
        echo.emit();
        let rho = variance_param_rect(toeplitz_series_terms(args.d).terms())?;
        println!("rho = {}", rho.rho());
        return Ok(Outcome::Success);
    }
    let (grid, grid_echo) = grid_from(&args.grid, Some("0:20:1"))?.expect("default grid");
    let trials = run_settings(&args.run, &ensemble)?;

    let mut echo = Echo::new("toeplitz");
    echo.arg("d", args.d);
    let _ = write!(echo.0, " {grid_echo}");
    echo_run(&mut echo, &args.run, trials);
    echo_output(&mut echo, &args.output);
    if let Some(path) = &args.report {
        echo.arg("report", path.display());
    }
    echo.emit();

    let (curve, report) = toeplitz_experiment(
        args.d,
        &grid,
        trials,
        args.run.seed,
        args.run.confidence,
        args.run.threads,
    )?;
    write_output(&args.output, &curve_text(&curve, args.output.format))?;
    eprint!("{}", report.to_text());
    finish_report(&report, args.report.as_deref())
}
