//! Robust nonlinear adaptive filtering with exponentially damped
//! functional-link expansions.
//!
//! The centerpiece is an adaptive filter whose regressor is a trigonometric
//! functional-link expansion damped by `exp(-q·|u|)`, with the weight vector
//! and the exponent `q` adapted jointly under an inverse-square-root cost
//! that suppresses impulsive-noise outliers. The crate also carries the
//! fixed-expansion and Volterra baselines, the α-stable noise model used to
//! stress them, a steady-state excess-error theory evaluator, and the
//! experiment scenarios that exercise all of it.

pub mod analysis;
pub mod cost;
pub mod expansion;
pub mod experiments;
pub mod filter;
pub mod noise;
pub mod plants;
pub mod report;

pub use analysis::{AnalysisError, NoiseMoments, RegressorPowers, SteadyStateReport};
pub use experiments::{
    Algorithm, Case1Config, Case2Config, ExperimentError, IdentifyConfig, TrialProtocol,
};
pub use cost::{CostError, CostSpec};
pub use expansion::{ExpandedRegressor, ExpansionConfig, ExpansionError, ExpansionKind};
pub use filter::{AdaptiveFilter, FilterConfig, FilterError, FilterState, StepRecord, TapDelayLine};
pub use noise::{
    gaussian_variance_for_snr, AlphaStableNoise, GaussianNoise, InputModel, NoiseError,
    NoiseModel, SeededStream,
};
pub use plants::{Case1Plant, CsvError, CsvPlant, HysteresisGenerator, LoudspeakerPlant};
