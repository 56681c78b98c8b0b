//! Command-line front end for the cotranslation toolkit: JSON experiment
//! specs in, JSON reports out.

pub mod commands;
pub mod spec;

use std::fmt;
use std::str::FromStr;

use cotrans::report::Check;
use serde::Serialize;
use serde_json::Value;

pub use commands::run;
pub use spec::ExperimentSpec;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The spec or the command line is malformed. Exit code 2.
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn schema(e: cotrans::Error) -> Self {
        CliError::Schema(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        EXIT_SCHEMA
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    VerifyGroupoid,
    VerifyCotranslation,
    CheckRelations,
    SkewVerify,
    Evaluate,
    Difference,
    Evolve,
    DerivativeIdentities,
    PartialVerify,
    Complete,
    Factorize,
    Gallery,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::VerifyGroupoid,
        Command::VerifyCotranslation,
        Command::CheckRelations,
        Command::SkewVerify,
        Command::Evaluate,
        Command::Difference,
        Command::Evolve,
        Command::DerivativeIdentities,
        Command::PartialVerify,
        Command::Complete,
        Command::Factorize,
        Command::Gallery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyGroupoid => "verify-groupoid",
            Command::VerifyCotranslation => "verify-cotranslation",
            Command::CheckRelations => "check-relations",
            Command::SkewVerify => "skew-verify",
            Command::Evaluate => "evaluate",
            Command::Difference => "difference",
            Command::Evolve => "evolve",
            Command::DerivativeIdentities => "derivative-identities",
            Command::PartialVerify => "partial-verify",
            Command::Complete => "complete",
            Command::Factorize => "factorize",
            Command::Gallery => "gallery",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Schema(format!("unknown command {s:?}")))
    }
}

/// Overrides taken from the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub radius: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(tol) = self.tol {
            spec.sampling.tol = Some(tol);
        }
        if let Some(radius) = self.radius {
            spec.sampling.radius = Some(radius);
        }
    }
}

/// The machine-readable result of one run. Keys are emitted in a fixed
/// order; `results` objects are sorted by key.
#[derive(Clone, Debug, Serialize)]
pub struct Output {
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

impl Output {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Per-check table, failing rows first.
    pub fn render(&self) -> String {
        let report = cotrans::Report { checks: self.checks.clone() };
        let mut out = report.render();
        if let Some(a) = self.results.get("affine") {
            out.push_str(&format!("affine: A = {}, b = {}\n", a["A"], a["b"]));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        out
    }
}

/// Cap rayon's pool from `COTRANS_THREADS`. Unset leaves the default.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Schema(format!("COTRANS_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Schema(e.to_string()))
}
