//! Batch front end: read a system or target file, run one command, write
//! `report.json`, `manifest.json` and any images into the output directory.
//!
//! Exit status: 0 for a definitive result, 2 for an inconclusive one, 1 for
//! errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::density::{osc_near, singular_near, DensityError, SingularOptions, TargetTuple, DEFAULT_CANDIDATE_BUDGET};
use crate::fourier::{
    fourier_product_limit, search_singularity_certificate, v_w_membership, FourierError, Membership, SingularitySearch,
    DEFAULT_W_MAX,
};
use crate::geometry::{chaos_game_histogram, measure_estimate, rasterize_attractor_with, GeometryError, DEFAULT_ANCHOR_BUDGET};
use crate::intlinalg::ExpandingMatrix;
use crate::overlap::DEFAULT_STATE_BUDGET;
use crate::report::{
    character_sum_json, classify, complex_json, conjugacy_json, osc_json, singularity_json, system_json, Annexes,
    ClassifyOptions, Status, SystemFile, TargetFile,
};
use crate::system::{AffineSystem, SystemError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

pub const DEFAULT_DEPTH: usize = 8;
pub const DEFAULT_RESOLUTION: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Render,
    Fourier,
    SearchOsc,
    SearchSingular,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Render => "render",
            Command::Fourier => "fourier",
            Command::SearchOsc => "search-osc",
            Command::SearchSingular => "search-singular",
        }
    }
}

fn parse_w(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("bad entry {t:?}: {e}")))
        .collect()
}

/// Alias so the argument parser treats `--w` as one comma-separated value.
pub type Frequency = Vec<i64>;

/// Resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Parser)]
#[command(name = "dichotomy", version, about = "Classify homogeneous self-affine systems and certify the outcome")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// System or target JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// State budget (classify), anchor budget (render) or candidate budget (search-singular).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Integer frequency, e.g. "1,0".
    #[arg(long, value_parser = parse_w, allow_hyphen_values = true)]
    pub w: Option<Frequency>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub wmax: Option<i64>,
    /// Also write PNG images.
    #[arg(long)]
    pub png: bool,
    /// Let search-singular perturb every digit if the last one is exhausted.
    #[arg(long)]
    pub perturb_all: bool,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            input: input.into(),
            out: out.into(),
            depth: None,
            resolution: None,
            samples: None,
            seed: 0,
            budget: None,
            w: None,
            epsilon: None,
            wmax: None,
            png: false,
            perturb_all: false,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |f: &str| Err(CliError::Config(format!("--{f} must be positive")));
        if self.depth == Some(0) {
            return bad("depth");
        }
        if self.resolution == Some(0) {
            return bad("resolution");
        }
        if self.samples == Some(0) {
            return bad("samples");
        }
        if self.budget == Some(0) {
            return bad("budget");
        }
        if self.wmax.is_some_and(|x| x <= 0) {
            return bad("wmax");
        }
        if self.epsilon.is_some_and(|x| !(x > 0.0 && x.is_finite())) {
            return bad("epsilon");
        }
        Ok(())
    }

    /// Echo of the resolved configuration, without timestamps.
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command.name(),
            "input": self.input.display().to_string(),
            "depth": self.depth,
            "resolution": self.resolution,
            "samples": self.samples,
            "seed": self.seed,
            "budget": self.budget,
            "w": self.w,
            "epsilon": self.epsilon,
            "wmax": self.wmax,
            "png": self.png,
            "perturb_all": self.perturb_all,
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Fourier(#[from] FourierError),
    #[error("{0}")]
    Density(#[from] DensityError),
    #[error("{0}")]
    System(#[from] SystemError),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

impl CliError {
    /// Machine-readable code stored in the report.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read_error",
            CliError::Parse { .. } => "parse_error",
            CliError::Validation(_) => "validation_error",
            CliError::Config(_) => "config_error",
            CliError::Geometry(GeometryError::System(SystemError::BudgetExceeded { .. })) => "budget_exceeded",
            CliError::Geometry(_) => "geometry_error",
            CliError::Fourier(_) => "fourier_error",
            CliError::Density(_) => "search_error",
            CliError::System(SystemError::BudgetExceeded { .. }) => "budget_exceeded",
            CliError::System(_) => "system_error",
            CliError::Write { .. } => "write_error",
        }
    }
}

/// A parsed input file.
#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    System(AffineSystem),
    Targets {
        matrix: ExpandingMatrix,
        targets: Vec<Vec<f64>>,
        epsilon: Option<f64>,
    },
}

fn parse_error(e: serde_json::Error) -> CliError {
    CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

/// Read a system (`digits`) or target (`targets`) file.
pub fn parse_input(path: &Path) -> Result<Input, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Read { path: path.display().to_string(), message: e.to_string() })?;
    parse_input_str(&text)
}

pub fn parse_input_str(text: &str) -> Result<Input, CliError> {
    let value: Value = serde_json::from_str(text).map_err(parse_error)?;
    if value.get("targets").is_some() {
        let file: TargetFile = serde_json::from_str(text).map_err(parse_error)?;
        let validation = |e: String| CliError::Validation(e);
        let matrix = crate::intlinalg::certify_expanding(&file.matrix, crate::intlinalg::DEFAULT_MAX_ITER)
            .map_err(|e| validation(e.to_string()))?;
        let probe = TargetTuple::new(file.targets.clone(), file.epsilon.unwrap_or(1.0)).map_err(|e| validation(e.to_string()))?;
        probe.check(&matrix).map_err(|e| validation(e.to_string()))?;
        Ok(Input::Targets { matrix, targets: file.targets, epsilon: file.epsilon })
    } else {
        let file: SystemFile = serde_json::from_str(text).map_err(parse_error)?;
        Ok(Input::System(file.into_system().map_err(|e| CliError::Validation(e.to_string()))?))
    }
}

/// Result of one run: exit status and the report that was written.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
}

/// Run a command and write its artifacts. Errors are also recorded in
/// `report.json` when the output directory is writable.
pub fn run(config: &RunConfig) -> Outcome {
    let result = config.validate().and_then(|_| execute(config));
    let (exit_code, mut report) = match result {
        Ok((status, report)) => (if status == Status::Definitive { EXIT_OK } else { EXIT_INCONCLUSIVE }, report),
        Err(e) => (
            EXIT_ERROR,
            json!({
                "branch": null,
                "certificates": [],
                "estimates": {},
                "status": "error",
                "error": { "code": e.code(), "message": e.to_string() },
            }),
        ),
    };
    report["manifest"] = json!({
        "tool": "dichotomy",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config.to_json(),
    });
    let written = fs::create_dir_all(&config.out)
        .map_err(|e| e.to_string())
        .and_then(|_| write_json(&config.out.join("report.json"), &report))
        .and_then(|_| {
            let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            let manifest = json!({
                "tool": "dichotomy",
                "version": env!("CARGO_PKG_VERSION"),
                "config": config.to_json(),
                "exit_code": exit_code,
                "timestamp_unix": stamp,
            });
            write_json(&config.out.join("manifest.json"), &manifest)
        });
    match written {
        Ok(()) => Outcome { exit_code, report },
        Err(message) => {
            eprintln!("cannot write output: {message}");
            Outcome { exit_code: EXIT_ERROR, report }
        }
    }
}

fn write_json(path: &Path, v: &Value) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| e.to_string())?;
    text.push('\n');
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, f: impl FnOnce(&Path) -> Result<(), GeometryError>) -> Result<(), CliError> {
    f(path).map_err(|e| CliError::Write { path: path.display().to_string(), message: e.to_string() })
}

fn need_system(input: Input) -> Result<AffineSystem, CliError> {
    match input {
        Input::System(s) => Ok(s),
        Input::Targets { .. } => Err(CliError::Validation("expected a system file (with \"digits\")".into())),
    }
}

fn need_targets(input: Input, flag: Option<f64>) -> Result<(ExpandingMatrix, TargetTuple), CliError> {
    match input {
        Input::Targets { matrix, targets, epsilon } => {
            let eps = flag
                .or(epsilon)
                .ok_or_else(|| CliError::Validation("epsilon missing: give --epsilon or an \"epsilon\" field".into()))?;
            Ok((matrix, TargetTuple::new(targets, eps)?))
        }
        Input::System(_) => Err(CliError::Validation("expected a target file (with \"targets\")".into())),
    }
}

fn execute(config: &RunConfig) -> Result<(Status, Value), CliError> {
    fs::create_dir_all(&config.out).map_err(|e| CliError::Write { path: config.out.display().to_string(), message: e.to_string() })?;
    let input = parse_input(&config.input)?;
    match config.command {
        Command::Classify => run_classify(config, need_system(input)?),
        Command::Render => run_render(config, need_system(input)?),
        Command::Fourier => run_fourier(config, need_system(input)?),
        Command::SearchOsc => run_search_osc(config, input),
        Command::SearchSingular => run_search_singular(config, input),
    }
}

fn run_classify(config: &RunConfig, sys: AffineSystem) -> Result<(Status, Value), CliError> {
    let mut opts = ClassifyOptions { state_budget: config.budget.unwrap_or(DEFAULT_STATE_BUDGET), ..Default::default() };
    if let Some(depth) = config.depth {
        let res = config.resolution.unwrap_or(DEFAULT_RESOLUTION);
        opts.annexes = Annexes {
            measure: Some((depth, res)),
            dimension: (depth >= 3).then(|| (depth - 2..=depth).collect()),
            fourier_wmax: config.wmax,
        };
    } else {
        opts.annexes.fourier_wmax = config.wmax;
    }
    let report = classify(&sys, &opts)?;
    let mut v = report.to_json(&sys);
    v["system"] = system_json(&sys);
    Ok((report.status, v))
}

fn run_render(config: &RunConfig, sys: AffineSystem) -> Result<(Status, Value), CliError> {
    let depth = config.depth.unwrap_or(DEFAULT_DEPTH);
    let res = config.resolution.unwrap_or(DEFAULT_RESOLUTION);
    let budget = config.budget.unwrap_or(DEFAULT_ANCHOR_BUDGET);
    let raster = rasterize_attractor_with(&sys, depth, res, budget)?;
    let out = &config.out;
    write_file(&out.join("attractor.pgm"), |p| raster.write_pgm(p))?;
    write_file(&out.join("attractor.json"), |p| raster.write_sidecar(p))?;
    if config.png {
        write_file(&out.join("attractor.png"), |p| raster.write_png(p))?;
    }
    let mut estimates = json!({
        "occupied_cells": raster.occupied(),
        "cell_size": raster.cell_size(),
        "measure": measure_estimate(&sys, depth, res)?,
    });
    let mut images = vec!["attractor.pgm"];
    if let Some(samples) = config.samples {
        let hist = chaos_game_histogram(&sys, samples, res, config.seed)?;
        write_file(&out.join("histogram.pgm"), |p| hist.write_pgm(p))?;
        write_file(&out.join("histogram.json"), |p| hist.write_sidecar(p))?;
        if config.png {
            write_file(&out.join("histogram.png"), |p| hist.write_png(p))?;
        }
        estimates["histogram_occupied_cells"] = json!(hist.occupied());
        images.push("histogram.pgm");
    }
    Ok((
        Status::Definitive,
        json!({
            "branch": null,
            "certificates": [],
            "estimates": estimates,
            "status": "definitive",
            "images": images,
            "system": system_json(&sys),
        }),
    ))
}

fn run_fourier(config: &RunConfig, sys: AffineSystem) -> Result<(Status, Value), CliError> {
    let (norm, conj) = sys.normalize()?;
    let base = |v: Value| -> Value {
        let mut v = v;
        v["branch"] = Value::Null;
        v["system"] = system_json(&sys);
        v["normalized_system"] = system_json(&norm);
        v["conjugacy"] = conjugacy_json(&conj);
        v
    };
    let certified = |c: &crate::fourier::SingularityCertificate| -> Result<Value, CliError> {
        let p = fourier_product_limit(c, &norm, 1e-6)?;
        Ok(base(json!({
            "membership": true,
            "failing_power": null,
            "w": c.w,
            "certificates": [singularity_json(c)],
            "estimates": { "product_limit": { "value": complex_json(p.value), "error_bound": p.error_bound, "last_index": p.last } },
            "status": "definitive",
        })))
    };
    if let Some(w) = &config.w {
        return match v_w_membership(&norm, w) {
            Ok(Membership::Certified(c)) => Ok((Status::Definitive, certified(&c)?)),
            Ok(Membership::FailingPower { n, sum }) => Ok((
                Status::Definitive,
                base(json!({
                    "membership": false,
                    "failing_power": n,
                    "w": w,
                    "certificates": [],
                    "estimates": { "failing_sum": character_sum_json(&sum) },
                    "status": "definitive",
                })),
            )),
            Err(FourierError::DenominatorOverflow { n }) => Ok((
                Status::Inconclusive,
                base(json!({
                    "membership": null,
                    "failing_power": null,
                    "w": w,
                    "certificates": [],
                    "estimates": {},
                    "status": "inconclusive",
                    "reason": format!("S_{n} could only be evaluated numerically"),
                })),
            )),
            Err(e) => Err(e.into()),
        };
    }
    let wmax = config.wmax.unwrap_or(DEFAULT_W_MAX);
    match search_singularity_certificate(&norm, wmax)? {
        SingularitySearch::Found(c) => Ok((Status::Definitive, certified(&c)?)),
        SingularitySearch::NotFound { tried, inconclusive } => Ok((
            Status::Inconclusive,
            base(json!({
                "membership": null,
                "failing_power": null,
                "certificates": [],
                "estimates": { "search": { "wmax": wmax, "tried": tried, "inconclusive": inconclusive } },
                "status": "inconclusive",
                "reason": "no certificate found",
            })),
        )),
    }
}

fn write_system(config: &RunConfig, sys: &AffineSystem) -> Result<(), CliError> {
    let path = config.out.join("system.json");
    write_json(&path, &system_json(sys)).map_err(|message| CliError::Write { path: path.display().to_string(), message })
}

fn run_search_osc(config: &RunConfig, input: Input) -> Result<(Status, Value), CliError> {
    let (m, t) = need_targets(input, config.epsilon)?;
    let r = osc_near(&m, &t)?;
    write_system(config, &r.system)?;
    Ok((
        Status::Definitive,
        json!({
            "branch": "osc",
            "certificates": [osc_json(&r.certificate)],
            "estimates": { "achieved_distance": r.distance, "epsilon": t.epsilon, "scale": r.scale },
            "status": "definitive",
            "system": system_json(&r.system),
        }),
    ))
}

fn run_search_singular(config: &RunConfig, input: Input) -> Result<(Status, Value), CliError> {
    let (m, t) = need_targets(input, config.epsilon)?;
    let w = config.w.clone().unwrap_or_else(|| {
        let mut e = vec![0; m.dim()];
        e[0] = 1;
        e
    });
    let opts = SingularOptions {
        budget: config.budget.map(|b| b as usize).unwrap_or(DEFAULT_CANDIDATE_BUDGET),
        perturb_all: config.perturb_all,
    };
    match singular_near(&m, &t, &w, opts) {
        Ok(r) => {
            write_system(config, &r.system)?;
            Ok((
                Status::Definitive,
                json!({
                    "branch": null,
                    "certificates": [singularity_json(&r.certificate)],
                    "estimates": {
                        "achieved_distance": r.distance,
                        "epsilon": t.epsilon,
                        "perturbed_digit": r.perturbed + 1,
                        "candidates_scanned": r.scanned,
                    },
                    "status": "definitive",
                    "system": system_json(&r.system),
                    "normalized_system": system_json(&r.normalized),
                    "conjugacy": conjugacy_json(&r.conjugacy),
                }),
            ))
        }
        Err(DensityError::SearchExhausted { scanned }) => Ok((
            Status::Inconclusive,
            json!({
                "branch": null,
                "certificates": [],
                "estimates": { "candidates_scanned": scanned },
                "status": "inconclusive",
                "reason": "candidate budget exhausted",
            }),
        )),
        Err(e) => Err(e.into()),
    }
}

/// Entry point for the binary: parse arguments, run, return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => {
            let outcome = run(&config);
            println!("{}", serde_json::to_string(&json!({
                "status": outcome.report["status"],
                "branch": outcome.report["branch"],
                "exit_code": outcome.exit_code,
            })).unwrap_or_default());
            outcome.exit_code
        }
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_canonicalizes() {
        let Input::System(s) = parse_input_str(r#"{"matrix":[[3]],"digits":[{"scale":0,"vec":[0]},{"scale":1,"vec":[3]},{"scale":0,"vec":[2]}]}"#).unwrap() else {
            panic!()
        };
        assert_eq!(s.digits()[1].scale, 0);
        assert_eq!(s.digits()[1].vec, vec![1]);
    }

    #[test]
    fn wrong_digit_count() {
        let e = parse_input_str(r#"{"matrix":[[3]],"digits":[{"scale":0,"vec":[0]},{"scale":0,"vec":[1]}]}"#).unwrap_err();
        assert_eq!(e.code(), "validation_error");
        assert!(e.to_string().contains("expected 3"), "{e}");
    }

    #[test]
    fn small_determinant_rejected() {
        let e = parse_input_str(r#"{"matrix":[[2]],"digits":[{"scale":0,"vec":[0]},{"scale":0,"vec":[1]}]}"#).unwrap_err();
        assert_eq!(e.code(), "validation_error");
    }

    #[test]
    fn parse_error_location() {
        let e = parse_input_str("{\n  \"matrix\": [[3]],\n  \"digits\": oops\n}").unwrap_err();
        match e {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn frequency_flag() {
        assert_eq!(parse_w("1,-2, 3").unwrap(), vec![1, -2, 3]);
        assert!(parse_w("1,x").is_err());
        let c = RunConfig::try_parse_from(["dichotomy", "fourier", "--input", "a", "--out", "b", "--w", "-1,2"]).unwrap();
        assert_eq!(c.w, Some(vec![-1, 2]));
        assert_eq!(c.command, Command::Fourier);
    }
}
