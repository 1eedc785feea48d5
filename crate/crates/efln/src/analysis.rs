//! Steady-state excess mean-square error: Monte Carlo estimation of the
//! noise functionals and regressor powers, and the closed-form EMSE
//! assembly.
//!
//! With influence function r(e) = e(1+λe⁴)^{−3/2} and noise η, the theory
//! needs three expectations:
//!
//! ```text
//! E1 = E{r²(η)}        = E{η²(1+λη⁴)^{−3}}
//! E2 = E{r′(η)}        = E{(1−5λη⁴)(1+λη⁴)^{−5/2}}
//! E3 = E{r′²(η) + r(η)r″(η)}
//!    = E{(1−5λη⁴)²(1+λη⁴)^{−5}} + E{−30λη⁴(1−λη⁴)(1+λη⁴)^{−5}}
//! ```
//!
//! together with the regressor powers Pg = E{‖g‖²} and Phw = E{|hᵀw|²}
//! evaluated at the optimal parameters. The steady-state excess errors of
//! the weight and exponential-factor branches are then
//!
//! ```text
//! EMSE_w(∞) = μ_w·E1·Pg  / (2E2 − μ_w·E3·Pg)
//! EMSE_q(∞) = μ_q·E1·Phw / (2E2 − μ_q·E3·Phw)
//! ```
//!
//! and the total is the sum (the cross term between the branches vanishes
//! in steady state). A non-positive denominator means the step size is
//! outside the small-step validity region and is reported as an error
//! rather than clamped.

use serde::{Deserialize, Serialize};

use crate::expansion::{self, ExpansionConfig};
use crate::noise::{InputModel, NoiseModel, SeededStream};

/// Monte Carlo estimates of the three noise functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseMoments {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub samples_used: usize,
    /// Set when the noise model has infinite variance, where the
    /// small-error expansion behind the theory is not established.
    pub heavy_tailed_warning: bool,
}

/// Monte Carlo estimates of E{‖g‖²} and E{|hᵀw|²} at a fixed operating
/// point (w, q).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorPowers {
    pub pg: f64,
    pub phw: f64,
    pub samples_used: usize,
}

/// Theoretical steady-state decomposition, with room for the matching
/// simulation measurement filled in by the experiment layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub emse_w_theory: f64,
    pub emse_q_theory: f64,
    pub emse_theory: f64,
    pub emse_simulated: Option<f64>,
}

impl SteadyStateReport {
    pub fn emse_theory_db(&self) -> f64 {
        to_db(self.emse_theory)
    }

    pub fn emse_simulated_db(&self) -> Option<f64> {
        self.emse_simulated.map(to_db)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("moment estimation needs at least {min} samples (got {got})")]
    TooFewSamples { min: usize, got: usize },
    #[error(
        "step size outside the small-step validity region \
         (denominator w: {denom_w}, q: {denom_q})"
    )]
    Validity { denom_w: f64, denom_q: f64 },
    #[error("lambda must be non-negative (got {0})")]
    NegativeLambda(f64),
    #[error("trial trace has {len} samples, tail window needs {tail}")]
    TailTooLong { len: usize, tail: usize },
    #[error("no trial traces supplied")]
    NoTrials,
}

/// Linear power to decibels.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// The three integrands at a single noise value.
fn moment_integrands(lambda: f64, eta: f64) -> (f64, f64, f64) {
    let t = lambda * eta.powi(4);
    let s = 1.0 + t;
    let s2 = s * s;
    let s5 = s2 * s2 * s;
    let sqrt_s = s.sqrt();
    let i1 = eta * eta / (s2 * s);
    let i2 = (1.0 - 5.0 * t) / (s2 * sqrt_s);
    let i3 = ((1.0 - 5.0 * t) * (1.0 - 5.0 * t) - 30.0 * t * (1.0 - t)) / s5;
    (i1, i2, i3)
}

/// Sample means of the three integrands over the given noise draws.
pub fn moments_from_samples(lambda: f64, samples: &[f64]) -> Result<NoiseMoments, AnalysisError> {
    if lambda < 0.0 {
        return Err(AnalysisError::NegativeLambda(lambda));
    }
    if samples.is_empty() {
        return Err(AnalysisError::TooFewSamples { min: 1, got: 0 });
    }
    let (mut e1, mut e2, mut e3) = (0.0, 0.0, 0.0);
    for &eta in samples {
        let (i1, i2, i3) = moment_integrands(lambda, eta);
        e1 += i1;
        e2 += i2;
        e3 += i3;
    }
    let n = samples.len() as f64;
    Ok(NoiseMoments {
        e1: e1 / n,
        e2: e2 / n,
        e3: e3 / n,
        samples_used: samples.len(),
        heavy_tailed_warning: false,
    })
}

pub const MIN_MOMENT_SAMPLES: usize = 10_000;
pub const DEFAULT_MOMENT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_POWER_SAMPLES: usize = 100_000;

/// Estimates E1/E2/E3 by drawing `n_samples` noise values. Heavy-tailed
/// models are accepted but flagged: the theory's expansion arguments
/// assume finite noise variance.
pub fn estimate_noise_moments(
    lambda: f64,
    model: &NoiseModel,
    n_samples: usize,
    stream: &mut SeededStream,
) -> Result<NoiseMoments, AnalysisError> {
    if n_samples < MIN_MOMENT_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            min: MIN_MOMENT_SAMPLES,
            got: n_samples,
        });
    }
    if lambda < 0.0 {
        return Err(AnalysisError::NegativeLambda(lambda));
    }
    let (mut e1, mut e2, mut e3) = (0.0, 0.0, 0.0);
    for _ in 0..n_samples {
        let eta = model.sample(stream);
        let (i1, i2, i3) = moment_integrands(lambda, eta);
        e1 += i1;
        e2 += i2;
        e3 += i3;
    }
    let n = n_samples as f64;
    Ok(NoiseMoments {
        e1: e1 / n,
        e2: e2 / n,
        e3: e3 / n,
        samples_used: n_samples,
        heavy_tailed_warning: model.heavy_tailed(),
    })
}

/// Estimates Pg = E{‖g‖²} and Phw = E{|hᵀw|²} over fresh input windows at
/// the operating point (w, q).
pub fn estimate_regressor_powers(
    expansion: &ExpansionConfig,
    input: &InputModel,
    w: &[f64],
    q: f64,
    n_samples: usize,
    stream: &mut SeededStream,
) -> RegressorPowers {
    let dim = expansion.output_dim();
    debug_assert_eq!(w.len(), dim);
    let mut g = vec![0.0; dim];
    let mut h = vec![0.0; dim];
    let mut window = vec![0.0; expansion.taps];
    let (mut pg, mut phw) = (0.0, 0.0);
    for _ in 0..n_samples {
        for u in window.iter_mut() {
            *u = input.sample(stream);
        }
        expansion::expand_into(expansion, &window, q, &mut g, &mut h)
            .expect("window sized to the expansion");
        pg += g.iter().map(|v| v * v).sum::<f64>();
        let hw: f64 = h.iter().zip(w.iter()).map(|(hi, wi)| hi * wi).sum();
        phw += hw * hw;
    }
    let n = n_samples as f64;
    RegressorPowers {
        pg: pg / n,
        phw: phw / n,
        samples_used: n_samples,
    }
}

/// Assembles the closed-form steady-state EMSE from the estimated
/// statistics.
pub fn theoretical_emse(
    moments: &NoiseMoments,
    powers: &RegressorPowers,
    mu_w: f64,
    mu_q: f64,
) -> Result<SteadyStateReport, AnalysisError> {
    let denom_w = 2.0 * moments.e2 - mu_w * moments.e3 * powers.pg;
    let denom_q = 2.0 * moments.e2 - mu_q * moments.e3 * powers.phw;
    if denom_w <= 0.0 || denom_q <= 0.0 {
        return Err(AnalysisError::Validity { denom_w, denom_q });
    }
    let emse_w = mu_w * moments.e1 * powers.pg / denom_w;
    let emse_q = mu_q * moments.e1 * powers.phw / denom_q;
    Ok(SteadyStateReport {
        emse_w_theory: emse_w,
        emse_q_theory: emse_q,
        emse_theory: emse_w + emse_q,
        emse_simulated: None,
    })
}

/// Steady-state EMSE measurement: the mean squared a-priori error over the
/// last `tail_window` samples of each trial trace, averaged across trials.
/// `trials` holds per-iteration a-priori errors ξ(i) = y_o(i) − y(i).
pub fn simulated_emse(trials: &[Vec<f64>], tail_window: usize) -> Result<f64, AnalysisError> {
    if trials.is_empty() {
        return Err(AnalysisError::NoTrials);
    }
    let mut acc = 0.0;
    for trace in trials {
        if trace.len() < tail_window || tail_window == 0 {
            return Err(AnalysisError::TailTooLong {
                len: trace.len(),
                tail: tail_window,
            });
        }
        let tail = &trace[trace.len() - tail_window..];
        acc += tail.iter().map(|xi| xi * xi).sum::<f64>() / tail_window as f64;
    }
    Ok(acc / trials.len() as f64)
}
