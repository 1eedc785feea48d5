//! Online adaptive filter over a functional-link or Volterra regressor.
//!
//! Per sample, with window u(i) = [u(i), ..., u(i−P+1)] and desired d(i):
//!
//! ```text
//! (g, h) = expand(window, q(i))
//! y(i) = g(i)ᵀw(i)
//! e(i) = d(i) − y(i)
//! w(i+1) = w(i) + μ_w · r(e(i)) · g(i)
//! q(i+1) = q(i) + μ_q · r(e(i)) · h(i)ᵀw(i)
//! ```
//!
//! where r is the cost's influence function. The q update reads the
//! pre-update weights w(i): hᵀw is taken before w moves, and g, h come from
//! a single expansion call per sample. Divergence (any non-finite updated
//! entry) aborts with the failing iteration index instead of propagating
//! NaNs through an experiment.

use crate::cost::{CostError, CostSpec};
use crate::expansion::{self, ExpansionConfig, ExpansionError, ExpansionKind};

/// Full parameterization of one adaptive filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub expansion: ExpansionConfig,
    pub cost: CostSpec,
    /// Weight step size.
    pub mu_w: f64,
    /// Exponential-factor step size; must be 0 for expansions without a
    /// damping factor to adapt.
    pub mu_q: f64,
    pub w0: Vec<f64>,
    pub q0: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("initial weights have length {got}, expansion needs {expected}")]
    WeightLength { expected: usize, got: usize },
    #[error("step size must be finite and non-negative (got {0})")]
    InvalidStepSize(f64),
    #[error("exponential-factor step size {0} set on an expansion with no factor to adapt")]
    NoFactorToAdapt(f64),
    #[error("inputs ({inputs}) and desired ({desired}) streams differ in length")]
    StreamLength { inputs: usize, desired: usize },
    #[error("state became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

impl FilterConfig {
    /// Zero-initialized filter: w0 = 0, q0 = 0.
    pub fn new(expansion: ExpansionConfig, cost: CostSpec, mu_w: f64, mu_q: f64) -> Self {
        let w0 = vec![0.0; expansion.output_dim()];
        Self {
            expansion,
            cost,
            mu_w,
            mu_q,
            w0,
            q0: 0.0,
        }
    }

    pub fn with_init(mut self, w0: Vec<f64>, q0: f64) -> Self {
        self.w0 = w0;
        self.q0 = q0;
        self
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        self.cost.validate()?;
        let dim = self.expansion.output_dim();
        if self.w0.len() != dim {
            return Err(FilterError::WeightLength {
                expected: dim,
                got: self.w0.len(),
            });
        }
        for mu in [self.mu_w, self.mu_q] {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(FilterError::InvalidStepSize(mu));
            }
        }
        if self.mu_q != 0.0 && self.expansion.kind != ExpansionKind::Efln {
            return Err(FilterError::NoFactorToAdapt(self.mu_q));
        }
        Ok(())
    }
}

/// Adapted parameters at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub w: Vec<f64>,
    pub q: f64,
    pub iteration: usize,
}

/// Output of one adaptation step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Filter output before the update, y = gᵀw.
    pub y: f64,
    /// Error e = d − y.
    pub e: f64,
    /// Post-update parameter copies, captured only when snapshots are on.
    pub w_snapshot: Option<Vec<f64>>,
    pub q_snapshot: Option<f64>,
}

/// Tap delay line holding the last P inputs, newest first, zero-filled
/// before the first P samples arrive.
#[derive(Debug, Clone)]
pub struct TapDelayLine {
    window: Vec<f64>,
}

impl TapDelayLine {
    pub fn new(taps: usize) -> Self {
        Self {
            window: vec![0.0; taps],
        }
    }

    pub fn push(&mut self, u: f64) {
        let last = self.window.len() - 1;
        self.window.copy_within(0..last, 1);
        self.window[0] = u;
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn reset(&mut self) {
        self.window.fill(0.0);
    }
}

/// One adaptive filter instance: configuration, live state, and the scratch
/// buffers that keep the per-sample loop allocation-free.
#[derive(Debug, Clone)]
pub struct AdaptiveFilter {
    cfg: FilterConfig,
    state: FilterState,
    g: Vec<f64>,
    h: Vec<f64>,
    snapshots: bool,
}

impl AdaptiveFilter {
    pub fn new(cfg: FilterConfig) -> Result<Self, FilterError> {
        cfg.validate()?;
        let dim = cfg.expansion.output_dim();
        let state = FilterState {
            w: cfg.w0.clone(),
            q: cfg.q0,
            iteration: 0,
        };
        Ok(Self {
            cfg,
            state,
            g: vec![0.0; dim],
            h: vec![0.0; dim],
            snapshots: false,
        })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.cfg
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    /// When on, every step record carries post-update parameter copies.
    pub fn set_snapshots(&mut self, on: bool) {
        self.snapshots = on;
    }

    /// Returns to w0, q0, iteration 0.
    pub fn reset(&mut self) {
        self.state.w.copy_from_slice(&self.cfg.w0);
        self.state.q = self.cfg.q0;
        self.state.iteration = 0;
    }

    /// Advances one sample. `window` is ordered newest first and must have
    /// the expansion's tap count.
    pub fn step(&mut self, window: &[f64], d: f64) -> Result<StepRecord, FilterError> {
        expansion::expand_into(
            &self.cfg.expansion,
            window,
            self.state.q,
            &mut self.g,
            &mut self.h,
        )?;

        let y: f64 = self
            .g
            .iter()
            .zip(self.state.w.iter())
            .map(|(gi, wi)| gi * wi)
            .sum();
        let e = d - y;
        let r = self.cfg.cost.influence(e);

        // hᵀw against the pre-update weights
        let hw: f64 = self
            .h
            .iter()
            .zip(self.state.w.iter())
            .map(|(hi, wi)| hi * wi)
            .sum();

        let gain = self.cfg.mu_w * r;
        for (wi, gi) in self.state.w.iter_mut().zip(self.g.iter()) {
            *wi += gain * gi;
        }
        self.state.q += self.cfg.mu_q * r * hw;

        let finite = self.state.q.is_finite() && self.state.w.iter().all(|v| v.is_finite());
        if !finite {
            return Err(FilterError::NonFinite {
                iteration: self.state.iteration,
            });
        }

        let record = StepRecord {
            y,
            e,
            w_snapshot: self.snapshots.then(|| self.state.w.clone()),
            q_snapshot: self.snapshots.then_some(self.state.q),
        };
        self.state.iteration += 1;
        Ok(record)
    }

    /// Streams `inputs`/`desired` through the filter with a zero-prepadded
    /// tap delay line, one step per sample.
    pub fn run(&mut self, inputs: &[f64], desired: &[f64]) -> Result<Vec<StepRecord>, FilterError> {
        if inputs.len() != desired.len() {
            return Err(FilterError::StreamLength {
                inputs: inputs.len(),
                desired: desired.len(),
            });
        }
        let mut taps = TapDelayLine::new(self.cfg.expansion.taps);
        let mut records = Vec::with_capacity(inputs.len());
        for (&u, &d) in inputs.iter().zip(desired.iter()) {
            taps.push(u);
            records.push(self.step(taps.window(), d)?);
        }
        Ok(records)
    }
}

/// Convenience wrapper: builds the filter and streams the records.
pub fn run(
    cfg: FilterConfig,
    inputs: &[f64],
    desired: &[f64],
) -> Result<Vec<StepRecord>, FilterError> {
    AdaptiveFilter::new(cfg)?.run(inputs, desired)
}
