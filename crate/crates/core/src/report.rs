//! Versioned JSON envelope shared by every CLI report.

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::{Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

pub(crate) fn opt_big_as_string<S: Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.collect_str(b),
        None => s.serialize_none(),
    }
}

pub(crate) fn ratio_as_string<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{}/{}", r.numer(), r.denom()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<P: Serialize, R: Serialize> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: P,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
    pub result: R,
}

impl<P: Serialize, R: Serialize> Report<P, R> {
    pub fn new(command: &str, params: P, pass: bool, result: R) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            params,
            pass,
            timing_ms: None,
            result,
        }
    }

    pub fn with_timing(mut self, ms: Option<u64>) -> Self {
        self.timing_ms = ms;
        self
    }
}
