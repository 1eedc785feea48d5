//! Functional-link input expansions.
//!
//! Expands a tapped-delay-line window of `P` input samples into the
//! regressor vector `g` that feeds the linear combiner, together with its
//! derivative `h = ∂g/∂q` with respect to the exponential factor `q`.
//!
//! Three expansions are supported:
//!
//! ```text
//! EFLN  g = [u(i..i-P+1),
//!            e^{-q|u|}·sin(πu)   for each tap,
//!            e^{-q|u|}·cos(πu)   for each tap,
//!            ...,
//!            e^{-q|u|}·sin(Nπu), e^{-q|u|}·cos(Nπu)]      L = P(2N+1)
//! TFLN  same trigonometric layout with the envelope fixed at 1 (q ≡ 0)
//! SOVF  g = [u(i..i-P+1), all products u(i-j)u(i-k), j ≤ k]  L = P + P(P+1)/2
//! ```
//!
//! Layout is block-major: all `P` linear taps first, then each nonlinear
//! block in full. Flat index of (block `b`, tap `p`) is `b·P + p`.
//! For EFLN, `h` carries `-|u|` times the matching `g` entry in every
//! trigonometric block and zeros in the linear block; for TFLN and SOVF
//! there is no exponential factor and `h` is identically zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Which functional-link expansion to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionKind {
    /// Trigonometric expansion with an adaptable exponential envelope.
    Efln,
    /// Trigonometric expansion, envelope fixed at 1.
    Tfln,
    /// Second-order Volterra: linear taps plus pairwise products.
    Sovf,
}

/// Expansion shape: number of taps `P` and trigonometric order `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub kind: ExpansionKind,
    /// Tap count P of the delay line (≥ 1).
    pub taps: usize,
    /// Trigonometric order N (≥ 1). Ignored by SOVF.
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpansionError {
    #[error("taps and order must both be at least 1 (got P={taps}, N={order})")]
    InvalidShape { taps: usize, order: usize },
    #[error("window length {got} does not match configured tap count {expected}")]
    WindowLength { expected: usize, got: usize },
}

impl ExpansionConfig {
    pub fn new(kind: ExpansionKind, taps: usize, order: usize) -> Result<Self, ExpansionError> {
        if taps < 1 || order < 1 {
            return Err(ExpansionError::InvalidShape { taps, order });
        }
        Ok(Self { kind, taps, order })
    }

    /// Dimension L of the expanded regressor.
    pub fn output_dim(&self) -> usize {
        match self.kind {
            ExpansionKind::Efln | ExpansionKind::Tfln => self.taps * (2 * self.order + 1),
            ExpansionKind::Sovf => self.taps + self.taps * (self.taps + 1) / 2,
        }
    }
}

/// Expanded regressor `g` and its exponential-factor derivative `h`.
///
/// `h` is all-zero for TFLN and SOVF; for EFLN its linear block is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedRegressor {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// Expands `window` (ordered newest first: `[u(i), u(i-1), ...]`) at
/// exponential factor `q`. TFLN and SOVF ignore `q`.
pub fn expand(
    cfg: &ExpansionConfig,
    window: &[f64],
    q: f64,
) -> Result<ExpandedRegressor, ExpansionError> {
    let dim = cfg.output_dim();
    let mut out = ExpandedRegressor {
        g: vec![0.0; dim],
        h: vec![0.0; dim],
    };
    expand_into(cfg, window, q, &mut out.g, &mut out.h)?;
    Ok(out)
}

/// Allocation-free variant of [`expand`] for per-sample loops. `g` and `h`
/// must already have length `cfg.output_dim()`.
pub fn expand_into(
    cfg: &ExpansionConfig,
    window: &[f64],
    q: f64,
    g: &mut [f64],
    h: &mut [f64],
) -> Result<(), ExpansionError> {
    let p = cfg.taps;
    if window.len() != p {
        return Err(ExpansionError::WindowLength {
            expected: p,
            got: window.len(),
        });
    }
    debug_assert_eq!(g.len(), cfg.output_dim());
    debug_assert_eq!(h.len(), cfg.output_dim());

    match cfg.kind {
        ExpansionKind::Efln | ExpansionKind::Tfln => {
            let q_eff = match cfg.kind {
                ExpansionKind::Efln => q,
                _ => 0.0,
            };
            g[..p].copy_from_slice(window);
            h[..p].fill(0.0);
            for (tap, &u) in window.iter().enumerate() {
                let abs_u = u.abs();
                let envelope = (-q_eff * abs_u).exp();
                for n in 1..=cfg.order {
                    let (s, c) = (n as f64 * PI * u).sin_cos();
                    let sin_idx = (2 * n - 1) * p + tap;
                    let cos_idx = 2 * n * p + tap;
                    g[sin_idx] = envelope * s;
                    g[cos_idx] = envelope * c;
                    if cfg.kind == ExpansionKind::Efln {
                        h[sin_idx] = -abs_u * g[sin_idx];
                        h[cos_idx] = -abs_u * g[cos_idx];
                    } else {
                        h[sin_idx] = 0.0;
                        h[cos_idx] = 0.0;
                    }
                }
            }
        }
        ExpansionKind::Sovf => {
            g[..p].copy_from_slice(window);
            let mut idx = p;
            for j in 0..p {
                for k in j..p {
                    g[idx] = window[j] * window[k];
                    idx += 1;
                }
            }
            h.fill(0.0);
        }
    }
    Ok(())
}
