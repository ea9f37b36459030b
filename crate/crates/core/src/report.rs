//! Structured-text (TOML) reports. Every report opens with a `[header]`
//! table carrying the caps, tolerances and grids the run used.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance::{
    DEFAULT_STATE_CAP, DEFAULT_TRANSPORT_CAP, EQ_TOL, INEQ_SLACK, INPUT_WEIGHT_TOL, WEIGHT_SUM_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub model_file: String,
    pub metric: String,
    pub state_cap: usize,
    pub transport_cap: usize,
    pub eq_tol: f64,
    pub ineq_slack: f64,
    pub weight_sum_tol: f64,
    pub input_weight_tol: f64,
    pub t_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ReportHeader {
    pub fn new(command: &str, model_file: &str, metric: &str) -> Self {
        ReportHeader {
            tool: "gibbsgap".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            model_file: model_file.into(),
            metric: metric.into(),
            state_cap: DEFAULT_STATE_CAP,
            transport_cap: DEFAULT_TRANSPORT_CAP,
            eq_tol: EQ_TOL,
            ineq_slack: INEQ_SLACK,
            weight_sum_tol: WEIGHT_SUM_TOL,
            input_weight_tol: INPUT_WEIGHT_TOL,
            t_grid: Vec::new(),
            lambda_grid: Vec::new(),
            seed: None,
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: &'a ReportHeader,
    #[serde(flatten)]
    body: &'a T,
}

/// `header` followed by the fields of `body` as one TOML document.
pub fn render<T: Serialize>(header: &ReportHeader, body: &T) -> Result<String> {
    toml::to_string(&Document { header, body }).map_err(|e| Error::Internal(format!("report serialization: {e}")))
}
