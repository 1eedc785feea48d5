//! Error cost functions and their influence functions.
//!
//! The inverse-square-root (ISR) cost is
//!
//! ```text
//! Q(e) = ½e²·(1 + λe⁴)^(-1/2)
//! ```
//!
//! Its derivative, the influence function
//!
//! ```text
//! r(e) = e·(1 + λe⁴)^(-3/2)
//! ```
//!
//! weights each gradient step. The cost saturates at ½λ^(-1/2) and r(e)
//! vanishes as |e| grows, so single large errors barely move the filter —
//! the property that makes the update robust to impulsive noise. Larger λ
//! pulls the cut-off toward smaller errors.
//!
//! The baselines used for comparison runs: plain LMS (quadratic cost),
//! Gaussian-kernel correntropy (MCC), and the hyperbolic-tangent cost
//! ln cosh(e).

use serde::{Deserialize, Serialize};

/// Cost function selector with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostSpec {
    /// Inverse square root, ½e²(1+λe⁴)^(-1/2) with λ > 0.
    Isr { lambda: f64 },
    /// Quadratic, ½e².
    Lms,
    /// Correntropy with Gaussian kernel width σ > 0.
    Mcc { sigma: f64 },
    /// ln cosh(e); influence saturates at ±1.
    Tanh,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("ISR parameter lambda must be positive (got {0})")]
    NonPositiveLambda(f64),
    #[error("MCC kernel width sigma must be positive (got {0})")]
    NonPositiveSigma(f64),
    #[error("operation is defined for the ISR cost only (got {0:?})")]
    IsrOnly(CostSpec),
}

impl CostSpec {
    pub fn isr(lambda: f64) -> Result<Self, CostError> {
        if lambda > 0.0 {
            Ok(CostSpec::Isr { lambda })
        } else {
            Err(CostError::NonPositiveLambda(lambda))
        }
    }

    pub fn mcc(sigma: f64) -> Result<Self, CostError> {
        if sigma > 0.0 {
            Ok(CostSpec::Mcc { sigma })
        } else {
            Err(CostError::NonPositiveSigma(sigma))
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        match *self {
            CostSpec::Isr { lambda } if lambda <= 0.0 => Err(CostError::NonPositiveLambda(lambda)),
            CostSpec::Mcc { sigma } if sigma <= 0.0 => Err(CostError::NonPositiveSigma(sigma)),
            _ => Ok(()),
        }
    }

    /// Cost Q(e).
    pub fn value(&self, e: f64) -> f64 {
        match *self {
            CostSpec::Isr { lambda } => 0.5 * e * e * (1.0 + lambda * e.powi(4)).powf(-0.5),
            CostSpec::Lms => 0.5 * e * e,
            CostSpec::Mcc { sigma } => {
                let s2 = sigma * sigma;
                s2 * (1.0 - (-e * e / (2.0 * s2)).exp())
            }
            // ln cosh(e) via |e| + ln((1+e^{-2|e|})/2) to avoid cosh overflow
            CostSpec::Tanh => e.abs() + (-2.0 * e.abs()).exp().ln_1p() - std::f64::consts::LN_2,
        }
    }

    /// Influence function r(e) = dQ/de.
    pub fn influence(&self, e: f64) -> f64 {
        match *self {
            CostSpec::Isr { lambda } => e * (1.0 + lambda * e.powi(4)).powf(-1.5),
            CostSpec::Lms => e,
            CostSpec::Mcc { sigma } => e * (-e * e / (2.0 * sigma * sigma)).exp(),
            CostSpec::Tanh => e.tanh(),
        }
    }

    /// First derivative of the ISR influence,
    /// r′(e) = (1−5λe⁴)(1+λe⁴)^(-5/2). ISR only: the steady-state theory
    /// consumes this form and is not derived for the baselines.
    pub fn influence_d1(&self, e: f64) -> Result<f64, CostError> {
        match *self {
            CostSpec::Isr { lambda } => {
                let t = lambda * e.powi(4);
                Ok((1.0 - 5.0 * t) * (1.0 + t).powf(-2.5))
            }
            other => Err(CostError::IsrOnly(other)),
        }
    }

    /// Second derivative of the ISR influence,
    /// r″(e) = −30λe³(1−λe⁴)(1+λe⁴)^(-7/2). ISR only.
    pub fn influence_d2(&self, e: f64) -> Result<f64, CostError> {
        match *self {
            CostSpec::Isr { lambda } => {
                let t = lambda * e.powi(4);
                Ok(-30.0 * lambda * e.powi(3) * (1.0 - t) * (1.0 + t).powf(-3.5))
            }
            other => Err(CostError::IsrOnly(other)),
        }
    }

    /// Supremum of |r(e)| over all e, when it is finite.
    ///
    /// For ISR the maximum sits at e = (5λ)^(-1/4); LMS is unbounded.
    pub fn max_abs_influence(&self) -> Option<f64> {
        match *self {
            CostSpec::Isr { lambda } => {
                let e_star = (5.0 * lambda).powf(-0.25);
                Some(self.influence(e_star))
            }
            CostSpec::Lms => None,
            CostSpec::Mcc { sigma } => Some(sigma * (-0.5f64).exp()),
            CostSpec::Tanh => Some(1.0),
        }
    }
}
