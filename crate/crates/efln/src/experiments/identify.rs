//! Single-record system identification: fit the adaptive models to a
//! measured or synthesized input/output record in one pass and score the
//! fit with summary error metrics.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{Algorithm, ExperimentError};
use crate::expansion::ExpansionConfig;
use crate::filter::{AdaptiveFilter, FilterConfig, TapDelayLine};
use crate::plants::{load_two_column_csv, HysteresisGenerator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    /// Two-column text file: input sample, output sample.
    Csv { path: PathBuf },
    /// Built-in hysteretic benchmark record.
    Synthetic { samples: usize },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic { samples: 8000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdentifyConfig {
    pub source: DataSource,
    pub taps: usize,
    pub order: usize,
    pub mu_w: f64,
    pub mu_q: f64,
    pub lambda: f64,
    pub mcc_sigma: f64,
    pub algorithms: Vec<Algorithm>,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        Self {
            source: DataSource::default(),
            taps: 7,
            order: 2,
            mu_w: 0.02,
            mu_q: 0.02,
            lambda: 1.0,
            mcc_sigma: 1.0,
            algorithms: vec![Algorithm::EflnIsr, Algorithm::SovfIsr],
        }
    }
}

/// Fit quality of one model over the whole record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyReport {
    pub label: String,
    pub algorithm: Algorithm,
    /// Root mean square prediction error.
    pub rmse: f64,
    /// Relative error, percent: error energy over output energy.
    pub re_percent: f64,
    /// Largest absolute prediction error.
    pub mae: f64,
    /// Per-sample prediction errors, in record order.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyOutcome {
    pub samples: usize,
    /// The record the models were fit to, kept for trace output.
    pub inputs: Vec<f64>,
    pub desired: Vec<f64>,
    pub reports: Vec<IdentifyReport>,
}

impl IdentifyOutcome {
    /// Model prediction at each sample: desired minus prediction error.
    pub fn predicted(&self, report: &IdentifyReport) -> Vec<f64> {
        self.desired
            .iter()
            .zip(report.errors.iter())
            .map(|(d, e)| d - e)
            .collect()
    }
}

pub fn run_identify(cfg: &IdentifyConfig) -> Result<IdentifyOutcome, ExperimentError> {
    if cfg.algorithms.is_empty() {
        return Err(ExperimentError::NoAlgorithms);
    }
    let (inputs, desired) = load_record(&cfg.source)?;
    if inputs.is_empty() {
        return Err(ExperimentError::EmptyData);
    }
    let desired_energy: f64 = desired.iter().map(|d| d * d).sum();
    if desired_energy == 0.0 {
        return Err(ExperimentError::ZeroDesired);
    }

    let mut reports = Vec::with_capacity(cfg.algorithms.len());
    for &algorithm in &cfg.algorithms {
        let expansion = ExpansionConfig::new(algorithm.expansion_kind(), cfg.taps, cfg.order)?;
        let cost = algorithm.cost(cfg.lambda, cfg.mcc_sigma)?;
        let mu_q = if algorithm.adapts_factor() {
            cfg.mu_q
        } else {
            0.0
        };
        let filter_cfg = FilterConfig::new(expansion, cost, cfg.mu_w, mu_q);
        let mut filter = AdaptiveFilter::new(filter_cfg)?;
        let mut delay = TapDelayLine::new(cfg.taps);
        let mut errors = Vec::with_capacity(inputs.len());
        for (&u, &d) in inputs.iter().zip(desired.iter()) {
            delay.push(u);
            let record = filter
                .step(delay.window(), d)
                .map_err(ExperimentError::Filter)?;
            errors.push(record.e);
        }
        reports.push(score(algorithm, errors, desired_energy));
    }
    Ok(IdentifyOutcome {
        samples: inputs.len(),
        inputs,
        desired,
        reports,
    })
}

fn load_record(source: &DataSource) -> Result<(Vec<f64>, Vec<f64>), ExperimentError> {
    match source {
        DataSource::Csv { path } => load_two_column_csv(path).map_err(ExperimentError::Csv),
        DataSource::Synthetic { samples } => Ok(HysteresisGenerator::with_samples(*samples).generate()),
    }
}

/// RMSE, relative error (percent of output energy), and largest absolute
/// error of a prediction-error sequence.
pub fn error_metrics(errors: &[f64], desired_energy: f64) -> (f64, f64, f64) {
    let m = errors.len() as f64;
    let error_energy: f64 = errors.iter().map(|e| e * e).sum();
    let rmse = (error_energy / m).sqrt();
    let re_percent = (error_energy / desired_energy).sqrt() * 100.0;
    let mae = errors.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    (rmse, re_percent, mae)
}

fn score(algorithm: Algorithm, errors: Vec<f64>, desired_energy: f64) -> IdentifyReport {
    let (rmse, re_percent, mae) = error_metrics(&errors, desired_energy);
    IdentifyReport {
        label: algorithm.label().to_string(),
        algorithm,
        rmse,
        re_percent,
        mae,
        errors,
    }
}
