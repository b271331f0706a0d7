//! The JSON document written to stdout.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::scenario::Scenario;

pub const TOOL: &str = "qf";

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub results: Value,
    pub timing_ms: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    CheckFailed,
    ValidationError,
    Inconclusive,
    SizeCap,
    InternalError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed | Status::InternalError => 1,
            Status::ValidationError => 2,
            Status::Inconclusive => 3,
            Status::SizeCap => 4,
        }
    }
}

/// sha256 over the command and the resolved scenario.
pub fn digest(command: &str, scenario: Option<&Scenario>) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    if let Some(sc) = scenario {
        h.update(serde_json::to_vec(sc).expect("scenario serializes"));
    }
    format!("{:x}", h.finalize())
}

/// A number, or one of the tokens `"infinity"`, `"-infinity"`, `"inconclusive"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("inconclusive")
    } else if x > 0.0 {
        json!("infinity")
    } else {
        json!("-infinity")
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}
