//! Experiment scenarios: steady-state sweeps against the functional-link
//! plant, algorithm comparisons under impulsive noise, and identification
//! of a hysteretic record, each with seeded multi-trial averaging.
//!
//! Seed discipline: trial `t` of a run with base seed `s` draws its input
//! from substream 0 of seed `s + t`, Gaussian noise from substream 1, and
//! α-stable noise from substream 2. Rerunning any single trial in
//! isolation reproduces it bit for bit, and the trial-level parallelism
//! collects per-trial results in index order before a sequential
//! reduction, so results are byte-identical at any worker count.

mod case1;
mod case2;
mod identify;

pub use case1::{
    case1_signal_power, default_mu_grid, default_snr_grid, run_case1, Case1Config, SweepPoint,
    SweepVariable,
};
pub use case2::{
    crossing_iteration, pilot_crossing_for, run_case2, Case2Config, LearningCurve,
    CROSSING_SMOOTH,
};
pub use identify::{
    error_metrics, run_identify, DataSource, IdentifyConfig, IdentifyOutcome, IdentifyReport,
};

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisError;
use crate::cost::{CostError, CostSpec};
use crate::expansion::{ExpansionError, ExpansionKind};
use crate::filter::FilterError;
use crate::noise::{streams, NoiseModel, SeededStream};
use crate::plants::CsvError;

/// Trial-count, length, and seeding shared by every scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialProtocol {
    pub n_trials: usize,
    pub n_iterations: usize,
    /// Samples at the end of each trial that count as steady state.
    pub tail_window: usize,
    pub base_seed: u64,
    /// Worker threads for trial-level parallelism; 0 means all cores.
    /// Results are identical regardless of this setting.
    pub jobs: usize,
}

/// Reference measurement protocol: 50 trials, final 1000 samples.
pub const REFERENCE_TRIALS: usize = 50;
pub const REFERENCE_TAIL: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("insufficient steady-state data: {n_iterations} iterations with tail window {tail_window}")]
    InsufficientData {
        n_iterations: usize,
        tail_window: usize,
    },
    #[error("scenario needs at least one trial")]
    NoTrials,
    #[error("unknown algorithm {0:?}; valid names: {}", Algorithm::VALID_NAMES)]
    UnknownAlgorithm(String),
    #[error("no algorithms selected")]
    NoAlgorithms,
    #[error("trial {trial} (seed {seed}) diverged: {source}")]
    Divergence {
        trial: usize,
        seed: u64,
        source: FilterError,
    },
    #[error("step-size calibration for {label} failed: {reason}")]
    Calibration { label: String, reason: String },
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("desired signal is identically zero, relative error is undefined")]
    ZeroDesired,
    #[error("data record is empty")]
    EmptyData,
}

/// The six compared adaptation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    EflnIsr,
    EflnLms,
    EflnMcc,
    EflnTanh,
    SovfIsr,
    TflnIsr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::EflnIsr,
        Algorithm::EflnLms,
        Algorithm::EflnMcc,
        Algorithm::EflnTanh,
        Algorithm::SovfIsr,
        Algorithm::TflnIsr,
    ];

    pub const VALID_NAMES: &'static str =
        "efln-isr, efln-lms, efln-mcc, efln-tanh, sovf-isr, tfln-isr";

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::EflnIsr => "efln-isr",
            Algorithm::EflnLms => "efln-lms",
            Algorithm::EflnMcc => "efln-mcc",
            Algorithm::EflnTanh => "efln-tanh",
            Algorithm::SovfIsr => "sovf-isr",
            Algorithm::TflnIsr => "tfln-isr",
        }
    }

    /// Functional expansion this scheme runs on.
    pub fn expansion_kind(&self) -> ExpansionKind {
        match self {
            Algorithm::SovfIsr => ExpansionKind::Sovf,
            Algorithm::TflnIsr => ExpansionKind::Tfln,
            _ => ExpansionKind::Efln,
        }
    }

    /// Cost function this scheme minimizes.
    pub fn cost(&self, lambda: f64, mcc_sigma: f64) -> Result<CostSpec, CostError> {
        match self {
            Algorithm::EflnIsr | Algorithm::SovfIsr | Algorithm::TflnIsr => CostSpec::isr(lambda),
            Algorithm::EflnLms => Ok(CostSpec::Lms),
            Algorithm::EflnMcc => CostSpec::mcc(mcc_sigma),
            Algorithm::EflnTanh => Ok(CostSpec::Tanh),
        }
    }

    /// Whether the exponential factor is adapted alongside the weights.
    pub fn adapts_factor(&self) -> bool {
        matches!(
            self,
            Algorithm::EflnIsr | Algorithm::EflnLms | Algorithm::EflnMcc | Algorithm::EflnTanh
        )
    }

    pub fn parse(name: &str) -> Result<Self, ExperimentError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "efln-isr" => Ok(Algorithm::EflnIsr),
            "efln-lms" => Ok(Algorithm::EflnLms),
            "efln-mcc" => Ok(Algorithm::EflnMcc),
            "efln-tanh" => Ok(Algorithm::EflnTanh),
            "sovf-isr" => Ok(Algorithm::SovfIsr),
            "tfln-isr" => Ok(Algorithm::TflnIsr),
            other => Err(ExperimentError::UnknownAlgorithm(other.to_string())),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Runs `f` once per trial index, in parallel when `jobs != 1`, returning
/// results in trial order either way.
pub(crate) fn map_trials<T: Send>(
    n_trials: usize,
    jobs: usize,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    if jobs == 1 || n_trials <= 1 {
        (0..n_trials).map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool construction");
        pool.install(|| {
            use rayon::prelude::*;
            (0..n_trials).into_par_iter().map(f).collect()
        })
    }
}

/// Noise sampler that keeps the Gaussian and α-stable components on
/// separate substreams, so a composite run's Gaussian part replays
/// identically against a Gaussian-only run with the same seed.
pub(crate) struct NoiseDraw {
    model: NoiseModel,
    gauss: SeededStream,
    stable: SeededStream,
}

impl NoiseDraw {
    pub fn new(model: NoiseModel, trial_seed: u64) -> Self {
        Self {
            model,
            gauss: SeededStream::substream(trial_seed, streams::GAUSSIAN),
            stable: SeededStream::substream(trial_seed, streams::STABLE),
        }
    }

    pub fn sample(&mut self) -> f64 {
        match &self.model {
            NoiseModel::Gaussian(g) => self.gauss.gaussian(g.variance()),
            NoiseModel::AlphaStable(s) => self.stable.alpha_stable(s.alpha, s.gamma),
            NoiseModel::Composite { gaussian, stable } => {
                self.gauss.gaussian(gaussian.variance())
                    + self.stable.alpha_stable(stable.alpha, stable.gamma)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{AlphaStableNoise, GaussianNoise};

    #[test]
    fn algorithm_names_round_trip() {
        for algo in Algorithm::ALL {
            assert_eq!(Algorithm::parse(algo.label()).unwrap(), algo);
        }
        assert!(matches!(
            Algorithm::parse("efln-rls"),
            Err(ExperimentError::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn map_trials_order_is_stable() {
        let seq = map_trials(64, 1, |t| t * t);
        let par = map_trials(64, 4, |t| t * t);
        assert_eq!(seq, par);
    }

    #[test]
    fn composite_gaussian_part_replays() {
        let gaussian = GaussianNoise {
            snr_db: 30.0,
            signal_power: 1.0,
        };
        let stable = AlphaStableNoise {
            alpha: 1.6,
            gamma: 0.05,
        };
        let mut composite = NoiseDraw::new(NoiseModel::Composite { gaussian, stable }, 7);
        let mut gauss_only = NoiseDraw::new(NoiseModel::Gaussian(gaussian), 7);
        let mut stable_only = NoiseDraw::new(NoiseModel::AlphaStable(stable), 7);
        for _ in 0..1000 {
            let c = composite.sample();
            let g = gauss_only.sample();
            let s = stable_only.sample();
            assert!((c - (g + s)).abs() < 1e-15);
        }
    }
}
