//! Deterministic artifact writers: CSV with 17 significant digits and
//! Unix newlines, plus the JSON sidecar types ("schema": 1).

use serde::{Deserialize, Serialize};

use crate::{Failure, Format, Method};

/// One float cell: 17 significant decimal digits, locale-independent.
pub fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new(columns: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, values: &[f64]) {
        let mut first = true;
        for &v in values {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&cell(v));
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Config echo embedded in every geodesic sidecar; re-parses into the
/// flags that reproduce the run.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub command: String,
    pub n: usize,
    pub dim: usize,
    pub alpha: f64,
    pub t_final: f64,
    pub dt: f64,
    pub method: Method,
    pub init: String,
    pub chart_a: String,
    pub chart_b: String,
    pub stride: usize,
    pub format: Format,
    pub out: String,
}

#[derive(Serialize, Deserialize)]
pub struct BreakdownInfo {
    pub time: f64,
}

#[derive(Serialize, Deserialize)]
pub struct Sidecar {
    pub schema: u32,
    pub config: ConfigEcho,
    /// Time series `[t, C]` of the conserved quantity (dim 1 only).
    pub conserved_c: Option<Vec<[f64; 2]>>,
    pub breakdown: Option<BreakdownInfo>,
    /// Max |u_closed - u_pde| over the common time range, when the run
    /// evaluated a closed form with a PDE cross-check.
    pub closed_form_max_diff: Option<f64>,
}

/// Single-file JSON trajectory (used with `--format json`).
#[derive(Serialize)]
pub struct JsonTrajectory<'a> {
    pub schema: u32,
    pub config: &'a ConfigEcho,
    pub conserved_c: &'a Option<Vec<[f64; 2]>>,
    pub breakdown: &'a Option<BreakdownInfo>,
    pub closed_form_max_diff: &'a Option<f64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn write_file(path: &str, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Internal(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}
