//! Steady-state verification sweeps against the functional-link plant with
//! known optimal parameters: theoretical EMSE(∞) next to the simulated
//! value, swept over step sizes at fixed SNR and over SNRs at fixed step
//! size, under Gaussian interference.

use serde::{Deserialize, Serialize};

use super::{map_trials, ExperimentError, NoiseDraw, TrialProtocol};
use crate::analysis::{
    self, estimate_noise_moments, estimate_regressor_powers, theoretical_emse, SteadyStateReport,
};
use crate::cost::CostSpec;
use crate::filter::{AdaptiveFilter, FilterConfig, FilterError, TapDelayLine};
use crate::noise::{streams, GaussianNoise, InputModel, NoiseModel, SeededStream};
use crate::plants::Case1Plant;

/// Which quantity the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    StepSize,
    Snr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Case1Config {
    pub sweep: SweepVariable,
    /// Step sizes for the step-size sweep (μ_w = μ_q at each point).
    pub mu_grid: Vec<f64>,
    /// SNRs for the SNR sweep.
    pub snr_grid_db: Vec<f64>,
    /// Step size held while sweeping SNR.
    pub fixed_mu: f64,
    /// SNR held while sweeping step sizes.
    pub fixed_snr_db: f64,
    pub lambda: f64,
    /// Monte Carlo sample counts for the statistics entering the theory.
    pub moment_samples: usize,
    pub power_samples: usize,
    pub signal_power_samples: usize,
    pub protocol: TrialProtocol,
}

impl Default for Case1Config {
    fn default() -> Self {
        Self {
            sweep: SweepVariable::StepSize,
            mu_grid: default_mu_grid(),
            snr_grid_db: default_snr_grid(),
            fixed_mu: 0.01,
            fixed_snr_db: 30.0,
            lambda: 1.0,
            moment_samples: analysis::DEFAULT_MOMENT_SAMPLES,
            power_samples: analysis::DEFAULT_POWER_SAMPLES,
            signal_power_samples: 200_000,
            protocol: TrialProtocol {
                n_trials: super::REFERENCE_TRIALS,
                n_iterations: 100_000,
                tail_window: super::REFERENCE_TAIL,
                base_seed: 1000,
                jobs: 0,
            },
        }
    }
}

/// μ ∈ {0.004, 0.007, ..., 0.040}.
pub fn default_mu_grid() -> Vec<f64> {
    (0..13).map(|k| (4 + 3 * k) as f64 / 1000.0).collect()
}

/// SNR ∈ {5, 10, ..., 55} dB.
pub fn default_snr_grid() -> Vec<f64> {
    (0..11).map(|k| 5.0 + 5.0 * k as f64).collect()
}

/// One sweep point: the varied value, the theory/simulation pair, and how
/// many trials diverged (their tails are excluded from the average, never
/// silently).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub report: SteadyStateReport,
    pub diverged_trials: usize,
}

impl SweepPoint {
    pub fn theory_db(&self) -> f64 {
        self.report.emse_theory_db()
    }

    pub fn simulated_db(&self) -> Option<f64> {
        self.report.emse_simulated_db()
    }
}

/// Mean plant output power under the unit-variance Gaussian input,
/// the reference for SNR-derived noise variances.
pub fn case1_signal_power(plant: &Case1Plant, n_samples: usize, base_seed: u64) -> f64 {
    let mut stream = SeededStream::substream(base_seed, streams::ANALYSIS);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        let window = [stream.standard_normal(), stream.standard_normal()];
        let y = plant.output(&window);
        acc += y * y;
    }
    acc / n_samples as f64
}

pub fn run_case1(cfg: &Case1Config) -> Result<Vec<SweepPoint>, ExperimentError> {
    let proto = &cfg.protocol;
    if proto.n_iterations < proto.tail_window || proto.n_iterations == 0 {
        return Err(ExperimentError::InsufficientData {
            n_iterations: proto.n_iterations,
            tail_window: proto.tail_window,
        });
    }
    if proto.n_trials == 0 {
        return Err(ExperimentError::NoTrials);
    }

    let plant = Case1Plant::new();
    let signal_power = case1_signal_power(&plant, cfg.signal_power_samples, proto.base_seed);

    let grid: Vec<(f64, f64, f64)> = match cfg.sweep {
        SweepVariable::StepSize => cfg
            .mu_grid
            .iter()
            .map(|&mu| (mu, mu, cfg.fixed_snr_db))
            .collect(),
        SweepVariable::Snr => cfg
            .snr_grid_db
            .iter()
            .map(|&snr| (snr, cfg.fixed_mu, snr))
            .collect(),
    };

    let mut points = Vec::with_capacity(grid.len());
    for (x, mu, snr_db) in grid {
        let model = NoiseModel::Gaussian(GaussianNoise {
            snr_db,
            signal_power,
        });

        let mut moment_stream = SeededStream::substream(proto.base_seed, streams::ANALYSIS);
        let moments =
            estimate_noise_moments(cfg.lambda, &model, cfg.moment_samples, &mut moment_stream)?;
        let mut power_stream = SeededStream::substream(proto.base_seed, streams::POWERS);
        let powers = estimate_regressor_powers(
            plant.expansion_config(),
            &InputModel::StandardGaussian,
            plant.weights_block_major(),
            plant.q_o(),
            cfg.power_samples,
            &mut power_stream,
        );
        let mut report = theoretical_emse(&moments, &powers, mu, mu)?;

        let outcomes = map_trials(proto.n_trials, proto.jobs, |t| {
            let trial_seed = proto.base_seed + t as u64;
            run_trial(
                &plant,
                cfg.lambda,
                mu,
                model,
                trial_seed,
                proto.n_iterations,
                proto.tail_window,
            )
        });

        let mut tails = Vec::with_capacity(proto.n_trials);
        let mut diverged = 0usize;
        for outcome in outcomes {
            match outcome {
                Ok(tail) => tails.push(tail),
                Err(_) => diverged += 1,
            }
        }
        if tails.is_empty() {
            return Err(ExperimentError::InsufficientData {
                n_iterations: proto.n_iterations,
                tail_window: proto.tail_window,
            });
        }
        report.emse_simulated = Some(analysis::simulated_emse(&tails, proto.tail_window)?);

        points.push(SweepPoint {
            x,
            report,
            diverged_trials: diverged,
        });
    }
    Ok(points)
}

/// One adaptation run; returns the a-priori errors of the final
/// `tail_window` iterations.
fn run_trial(
    plant: &Case1Plant,
    lambda: f64,
    mu: f64,
    model: NoiseModel,
    trial_seed: u64,
    n_iterations: usize,
    tail_window: usize,
) -> Result<Vec<f64>, FilterError> {
    let mut input = SeededStream::substream(trial_seed, streams::INPUT);
    let mut noise = NoiseDraw::new(model, trial_seed);
    let cost = CostSpec::isr(lambda)?;
    let cfg = FilterConfig::new(*plant.expansion_config(), cost, mu, mu);
    let mut filter = AdaptiveFilter::new(cfg)?;
    let mut taps = TapDelayLine::new(Case1Plant::TAPS);
    let mut tail = Vec::with_capacity(tail_window);
    for i in 0..n_iterations {
        taps.push(input.standard_normal());
        let y_o = plant.output(taps.window());
        let d = y_o + noise.sample();
        let record = filter.step(taps.window(), d)?;
        if i + tail_window >= n_iterations {
            tail.push(y_o - record.y);
        }
    }
    Ok(tail)
}
