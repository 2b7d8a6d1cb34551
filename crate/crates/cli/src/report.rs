use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Success = 0,
    /// Input or hypothesis validation.
    Validation = 2,
    /// A mathematical diagnostic failed: spectrum violation or winding mismatch.
    Diagnostic = 3,
    Usage = 64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: Exit,
    pub message: String,
}

impl Failure {
    pub fn new(code: Exit, message: impl ToString) -> Self {
        Failure { code, message: message.to_string() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

/// Everything needed to reproduce a run; `payload` depends only on the
/// input digest, configuration and seed.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub configuration: Value,
    pub seed: u64,
    pub payload: Value,
    pub timing: Timing,
    pub version: String,
}

impl RunReport {
    pub fn new(command: &str, input_digest: &str, configuration: Value, seed: u64, payload: Value, start: Instant) -> Self {
        RunReport {
            command: command.into(),
            input_digest: input_digest.into(),
            configuration,
            seed,
            payload,
            timing: Timing { elapsed_ms: start.elapsed().as_millis() },
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

/// A finished command: the report (absent when nothing was computed), an
/// optional CSV body and the exit status.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Option<RunReport>,
    pub csv: Option<Vec<u8>>,
    pub code: Exit,
    pub message: Option<String>,
}

impl From<Failure> for Outcome {
    fn from(f: Failure) -> Self {
        Outcome { report: None, csv: None, code: f.code, message: Some(f.message) }
    }
}
