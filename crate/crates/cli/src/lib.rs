//! Library side of the `mqed` command-line tool: scenario I/O, observable
//! evaluation, dual-scenario emission, duality verification and sweeps.

use mqed_core::scenario::evaluate;
use mqed_core::{dualize_scenario, ObservableResult, Quantity, Scenario, ScenarioError};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable holding the default number of sweep workers.
pub const JOBS_ENV: &str = "MQED_JOBS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Scenario {
        path: PathBuf,
        #[source]
        source: ScenarioError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("duality verification failed: {0}")]
    Verification(Box<VerificationReport>),
}

impl CliError {
    /// Stable exit-code contract: 1 validation/input, 2 quadrature, 3 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario { source, .. } if source.is_quadrature() => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Scenario::from_toml_str(&text).map_err(|source| CliError::Scenario {
        path: path.to_path_buf(),
        source,
    })
}

fn evaluate_at(path: &Path, scenario: &Scenario) -> Result<ObservableResult, CliError> {
    evaluate(scenario).map_err(|source| CliError::Scenario {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// On-disk result record: the observable plus unit tags.
#[derive(Debug, Clone, Serialize)]
pub struct ResultFile<'a> {
    pub value: f64,
    pub unit: &'static str,
    pub quadrature_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_si: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_si: Option<&'static str>,
    pub quantity: Quantity,
    pub scenario_hash: Option<&'a str>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    pub notices: &'a [String],
    pub settings: mqed_core::QuadratureSettings,
}

impl<'a> From<&'a ObservableResult> for ResultFile<'a> {
    fn from(r: &'a ObservableResult) -> Self {
        Self {
            value: r.value,
            unit: r.quantity.reduced_symbol(),
            quadrature_error: r.quadrature_error,
            value_si: r.value_si,
            unit_si: r.value_si.map(|_| r.quantity.si_symbol()),
            quantity: r.quantity,
            scenario_hash: r.scenario_hash.as_deref(),
            notices: &r.notices,
            settings: r.settings,
        }
    }
}

pub fn render_result(result: &ObservableResult) -> String {
    toml::to_string(&ResultFile::from(result)).expect("result records serialise to TOML")
}

/// Evaluates a scenario file and writes the result record.
pub fn run_compute(scenario: &Path, out: Option<&Path>) -> Result<ObservableResult, CliError> {
    let s = load_scenario(scenario)?;
    let result = evaluate_at(scenario, &s)?;
    emit(out, &render_result(&result))?;
    Ok(result)
}

/// Writes the dual (`θ = π/2`) scenario in canonical form.
pub fn run_dualize(scenario: &Path, out: Option<&Path>) -> Result<Scenario, CliError> {
    let dual = dualize_scenario(&load_scenario(scenario)?);
    emit(out, &dual.to_toml_string())?;
    Ok(dual)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub value: f64,
    pub dual_value: f64,
    pub absolute_difference: f64,
    pub relative_difference: f64,
    pub rtol: f64,
    /// Both values at or below this magnitude count as agreeing.
    pub abs_floor: f64,
    pub quadrature_error: f64,
    pub dual_quadrature_error: f64,
    pub passed: bool,
    pub scenario_hash: String,
    pub dual_hash: String,
}

impl VerificationReport {
    pub fn new(original: &ObservableResult, dual: &ObservableResult, rtol: f64, abs_floor: f64) -> Self {
        let (a, b) = (original.value, dual.value);
        let absolute_difference = (a - b).abs();
        let scale = a.abs().max(b.abs());
        let relative_difference = if scale > 0.0 {
            absolute_difference / scale
        } else {
            0.0
        };
        let passed = relative_difference <= rtol || (a.abs() <= abs_floor && b.abs() <= abs_floor);
        Self {
            value: a,
            dual_value: b,
            absolute_difference,
            relative_difference,
            rtol,
            abs_floor,
            quadrature_error: original.quadrature_error,
            dual_quadrature_error: dual.quadrature_error,
            passed,
            scenario_hash: original.scenario_hash.clone().unwrap_or_default(),
            dual_hash: dual.scenario_hash.clone().unwrap_or_default(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("reports serialise to TOML")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: value {:e}, dual {:e}, relative difference {:e} (rtol {:e})",
            if self.passed { "pass" } else { "fail" },
            self.value,
            self.dual_value,
            self.relative_difference,
            self.rtol
        )
    }
}

/// Computes the observable for a scenario and for its dual (generated, or
/// read from `dual` when given) with identical quadrature settings.
pub fn run_verify_duality(
    scenario: &Path,
    dual: Option<&Path>,
    rtol: f64,
) -> Result<VerificationReport, CliError> {
    if !(rtol >= 0.0 && rtol.is_finite()) {
        return Err(CliError::Usage(format!("--rtol must be non-negative, got {rtol}")));
    }
    let s = load_scenario(scenario)?;
    let (d, dual_path) = match dual {
        Some(p) => (load_scenario(p)?, p),
        None => (dualize_scenario(&s), scenario),
    };
    if d.quadrature != s.quadrature {
        return Err(CliError::Usage(
            "scenario and dual candidate must use identical quadrature settings".into(),
        ));
    }
    let original = evaluate_at(scenario, &s)?;
    let dual_result = evaluate_at(dual_path, &d)?;
    let report = VerificationReport::new(&original, &dual_result, rtol, s.quadrature.abs_tol);
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::Verification(Box::new(report)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
    /// Worker threads; `None` uses `MQED_JOBS` or the machine default.
    pub jobs: Option<usize>,
}

impl SweepRequest {
    /// Grid values in order; the endpoints are hit exactly.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0 {
            return Err(CliError::Usage("--points must be at least 1".into()));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(CliError::Usage("sweep bounds must be finite".into()));
        }
        if self.log && !(self.from > 0.0 && self.to > 0.0) {
            return Err(CliError::Usage("--log requires positive bounds".into()));
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| {
                if i + 1 == n && n > 1 {
                    return self.to;
                }
                let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                if self.log {
                    (self.from.ln() + f * (self.to.ln() - self.from.ln())).exp()
                } else {
                    self.from + f * (self.to - self.from)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub value: f64,
    pub error: f64,
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("parameter,value,error\n");
    for r in rows {
        // `{:?}` on f64 is locale-independent and round-trips exactly.
        let _ = writeln!(out, "{:?},{:?},{:?}", r.parameter, r.value, r.error);
    }
    out
}

/// Evaluates the scenario over a parameter grid, in parallel, rows in grid order.
pub fn run_sweep(
    scenario: &Path,
    request: &SweepRequest,
    out: Option<&Path>,
) -> Result<Vec<SweepRow>, CliError> {
    let grid = request.grid()?;
    let base = load_scenario(scenario)?;
    let wrap = |source| CliError::Scenario {
        path: scenario.to_path_buf(),
        source,
    };
    // Reject bad paths before spawning any work.
    base.with_parameter(&request.param, grid[0]).map_err(wrap)?;

    let jobs = match request.jobs {
        Some(j) => j,
        None => match std::env::var(JOBS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{JOBS_ENV}={v:?} is not a count")))?,
            Err(_) => 0,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Result<Vec<SweepRow>, ScenarioError> = pool.install(|| {
        grid.par_iter()
            .map(|&x| {
                let s = base.with_parameter(&request.param, x)?;
                let r = evaluate(&s)?;
                Ok(SweepRow {
                    parameter: x,
                    value: r.value,
                    error: r.quadrature_error,
                })
            })
            .collect()
    });
    let rows = rows.map_err(wrap)?;
    emit(out, &render_csv(&rows))?;
    Ok(rows)
}
