//! The declarative run configuration: one tagged document covering every
//! scenario, loadable from TOML and echoed into every result file.

use serde::{Deserialize, Serialize};

use efln::experiments::{Case1Config, Case2Config, IdentifyConfig};

/// Cost/influence curve emission grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostCurvesConfig {
    pub lambdas: Vec<f64>,
    /// Error grid spans [-emax, emax].
    pub emax: f64,
    /// Points per lambda; odd counts place a point exactly at e = 0.
    pub gridpoints: usize,
}

impl Default for CostCurvesConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
            emax: 5.0,
            gridpoints: 201,
        }
    }
}

/// Scenario selection plus that scenario's full parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario")]
pub enum RunConfig {
    #[serde(rename = "case1")]
    Case1(Case1Config),
    #[serde(rename = "case2")]
    Case2(Case2Config),
    #[serde(rename = "identify")]
    Identify(IdentifyConfig),
    #[serde(rename = "costcurves")]
    CostCurves(CostCurvesConfig),
}

impl RunConfig {
    pub fn scenario_name(&self) -> &'static str {
        match self {
            RunConfig::Case1(_) => "case1",
            RunConfig::Case2(_) => "case2",
            RunConfig::Identify(_) => "identify",
            RunConfig::CostCurves(_) => "costcurves",
        }
    }
}
