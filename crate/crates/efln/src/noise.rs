//! Seeded random streams, input signals, and additive-noise models.
//!
//! Every stochastic quantity in the crate draws from a [`SeededStream`], a
//! counter-based ChaCha8 generator: the same seed always reproduces the
//! same sample sequence bit for bit, and independent substreams (input,
//! Gaussian noise, impulsive noise, ...) come from distinct stream ids of
//! the same seed rather than from seed arithmetic.
//!
//! Symmetric α-stable samples use the Chambers–Mallows–Stuck transform.
//! With characteristic function ψ(t) = exp(−γ^α·|t|^α):
//!
//! ```text
//! V ~ Uniform(−π/2, π/2),  W ~ Exp(1)
//! α ≠ 1:  X = γ · sin(αV)/cos(V)^{1/α} · (cos(V−αV)/W)^{(1−α)/α}
//! α = 1:  X = γ · tan(V)
//! ```
//!
//! α = 2 reduces to a Gaussian with variance 2γ²; α < 2 has infinite
//! variance and produces the occasional very large outlier.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Substream ids used by the experiment runner, kept distinct so a trial's
/// input, Gaussian noise, and impulsive noise are independent streams.
pub mod streams {
    pub const INPUT: u64 = 0;
    pub const GAUSSIAN: u64 = 1;
    pub const STABLE: u64 = 2;
    pub const ANALYSIS: u64 = 3;
    pub const PILOT: u64 = 4;
    pub const POWERS: u64 = 5;
}

/// Deterministic random-sample stream.
#[derive(Debug, Clone)]
pub struct SeededStream {
    rng: ChaCha8Rng,
    seed: u64,
    drawn: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Stream `stream_id` of `seed`; different ids never overlap.
    pub fn substream(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            rng,
            seed,
            drawn: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of samples drawn so far.
    pub fn drawn(&self) -> u64 {
        self.drawn
    }

    /// Uniform on the open interval (lo, hi).
    pub fn uniform_open(&mut self, lo: f64, hi: f64) -> f64 {
        self.drawn += 1;
        loop {
            let x: f64 = self.rng.gen(); // [0, 1)
            if x > 0.0 {
                return lo + x * (hi - lo);
            }
        }
    }

    /// Standard normal via the ziggurat sampler.
    pub fn standard_normal(&mut self) -> f64 {
        self.drawn += 1;
        self.rng.sample(StandardNormal)
    }

    /// Zero-mean Gaussian with the given variance.
    pub fn gaussian(&mut self, variance: f64) -> f64 {
        variance.sqrt() * self.standard_normal()
    }

    /// Unit-rate exponential, strictly positive.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open(0.0, 1.0).ln()
    }

    /// Symmetric α-stable sample, Chambers–Mallows–Stuck transform.
    pub fn alpha_stable(&mut self, alpha: f64, gamma: f64) -> f64 {
        debug_assert!(alpha > 0.0 && alpha <= 2.0 && gamma > 0.0);
        let v = self.uniform_open(-FRAC_PI_2, FRAC_PI_2);
        if alpha == 1.0 {
            return gamma * v.tan();
        }
        let w = self.exponential();
        let scale = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
        let tail = ((v - alpha * v).cos() / w).powf((1.0 - alpha) / alpha);
        gamma * scale * tail
    }
}

/// Input-signal distribution for synthetic trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputModel {
    /// Zero-mean, unit-variance Gaussian.
    StandardGaussian,
    /// Uniform on [lo, hi].
    Uniform { lo: f64, hi: f64 },
}

impl InputModel {
    pub fn sample(&self, stream: &mut SeededStream) -> f64 {
        match *self {
            InputModel::StandardGaussian => stream.standard_normal(),
            InputModel::Uniform { lo, hi } => stream.uniform_open(lo, hi),
        }
    }
}

/// Gaussian noise pinned to an SNR relative to a known signal power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianNoise {
    pub snr_db: f64,
    pub signal_power: f64,
}

impl GaussianNoise {
    pub fn variance(&self) -> f64 {
        gaussian_variance_for_snr(self.snr_db, self.signal_power)
    }
}

/// Symmetric α-stable noise, characteristic function exp(−γ^α·|t|^α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaStableNoise {
    pub alpha: f64,
    pub gamma: f64,
}

/// Additive-noise process: Gaussian, α-stable, or their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    Gaussian(GaussianNoise),
    AlphaStable(AlphaStableNoise),
    Composite {
        gaussian: GaussianNoise,
        stable: AlphaStableNoise,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("alpha must lie in (0, 2] (got {0})")]
    InvalidAlpha(f64),
    #[error("gamma must be positive (got {0})")]
    InvalidGamma(f64),
    #[error("signal power must be positive (got {0})")]
    InvalidSignalPower(f64),
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), NoiseError> {
        let check_stable = |s: &AlphaStableNoise| {
            if !(s.alpha > 0.0 && s.alpha <= 2.0) {
                Err(NoiseError::InvalidAlpha(s.alpha))
            } else if s.gamma <= 0.0 {
                Err(NoiseError::InvalidGamma(s.gamma))
            } else {
                Ok(())
            }
        };
        let check_gauss = |g: &GaussianNoise| {
            if g.signal_power > 0.0 {
                Ok(())
            } else {
                Err(NoiseError::InvalidSignalPower(g.signal_power))
            }
        };
        match self {
            NoiseModel::Gaussian(g) => check_gauss(g),
            NoiseModel::AlphaStable(s) => check_stable(s),
            NoiseModel::Composite { gaussian, stable } => {
                check_gauss(gaussian)?;
                check_stable(stable)
            }
        }
    }

    /// True when the model contains an α-stable component with α < 2,
    /// i.e. its variance is infinite.
    pub fn heavy_tailed(&self) -> bool {
        match self {
            NoiseModel::Gaussian(_) => false,
            NoiseModel::AlphaStable(s) => s.alpha < 2.0,
            NoiseModel::Composite { stable, .. } => stable.alpha < 2.0,
        }
    }

    /// Draws one noise sample. The composite model draws one Gaussian and
    /// one stable sample from the same stream and sums them.
    pub fn sample(&self, stream: &mut SeededStream) -> f64 {
        match self {
            NoiseModel::Gaussian(g) => stream.gaussian(g.variance()),
            NoiseModel::AlphaStable(s) => stream.alpha_stable(s.alpha, s.gamma),
            NoiseModel::Composite { gaussian, stable } => {
                stream.gaussian(gaussian.variance()) + stream.alpha_stable(stable.alpha, stable.gamma)
            }
        }
    }
}

/// Noise variance that realizes `snr_db` against `signal_power`.
pub fn gaussian_variance_for_snr(snr_db: f64, signal_power: f64) -> f64 {
    signal_power * 10f64.powf(-snr_db / 10.0)
}

/// Empirical characteristic function Re E[e^{itX}] = mean of cos(t·x).
pub fn empirical_cf(samples: &[f64], t: f64) -> f64 {
    samples.iter().map(|&x| (t * x).cos()).sum::<f64>() / samples.len() as f64
}

/// Theoretical symmetric-α-stable characteristic function at t.
pub fn stable_cf(alpha: f64, gamma: f64, t: f64) -> f64 {
    (-(gamma.powf(alpha)) * t.abs().powf(alpha)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_streams() {
        let mut a = SeededStream::substream(42, streams::GAUSSIAN);
        let mut b = SeededStream::substream(42, streams::GAUSSIAN);
        for _ in 0..100_000 {
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        }
    }

    #[test]
    fn substreams_differ() {
        let mut a = SeededStream::substream(42, streams::INPUT);
        let mut b = SeededStream::substream(42, streams::GAUSSIAN);
        let xa: Vec<f64> = (0..8).map(|_| a.standard_normal()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.standard_normal()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn snr_variance() {
        assert!((gaussian_variance_for_snr(30.0, 1.0) - 1e-3).abs() < 1e-18);
        assert!((gaussian_variance_for_snr(0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((gaussian_variance_for_snr(10.0, 2.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gaussian_sample_variance() {
        let mut s = SeededStream::new(7);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = s.gaussian(1.0);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((var - 1.0).abs() < 0.01, "var={var}");
    }

    #[test]
    fn stable_alpha2_is_gaussian_variance() {
        // S(2, γ) has variance 2γ²; with γ = σ/√2 that is σ².
        let sigma = 0.8;
        let gamma = sigma / 2f64.sqrt();
        let mut s = SeededStream::new(11);
        let n = 1_000_000;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = s.alpha_stable(2.0, gamma);
            sum_sq += x * x;
        }
        let var = sum_sq / n as f64;
        assert!(
            (var - sigma * sigma).abs() / (sigma * sigma) < 0.02,
            "var={var}"
        );
    }

    #[test]
    fn stable_median_symmetry() {
        for &alpha in &[0.8, 1.0, 1.6, 2.0] {
            let mut s = SeededStream::new(23);
            let n = 200_000;
            let negatives = (0..n)
                .filter(|_| s.alpha_stable(alpha, 0.05) < 0.0)
                .count();
            let frac = negatives as f64 / n as f64;
            assert!((frac - 0.5).abs() < 0.005, "alpha={alpha}: frac={frac}");
        }
    }

    #[test]
    fn stable_heavy_tails() {
        let gamma = 0.05;
        let mut s = SeededStream::new(31);
        let max = (0..1_000_000)
            .map(|_| s.alpha_stable(1.6, gamma).abs())
            .fold(0.0, f64::max);
        assert!(max > 50.0 * gamma, "max={max}");
    }

    #[test]
    fn composite_degenerates_to_gaussian() {
        let model = NoiseModel::Composite {
            gaussian: GaussianNoise {
                snr_db: 0.0,
                signal_power: 1.0,
            },
            stable: AlphaStableNoise {
                alpha: 1.6,
                gamma: 1e-12,
            },
        };
        let mut s = SeededStream::new(5);
        let n = 500_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = model.sample(&mut s);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean={mean}");
        assert!((var - 1.0).abs() < 0.02, "var={var}");
    }

    #[test]
    fn stable_characteristic_function() {
        // Empirical Re E[e^{itX}] against exp(−γ^α|t|^α); the estimator's
        // standard error is √(Var[cos tX]/n) ≤ √(1/n).
        let (alpha, gamma) = (1.6, 0.05);
        let n = 400_000;
        let mut s = SeededStream::new(97);
        let samples: Vec<f64> = (0..n).map(|_| s.alpha_stable(alpha, gamma)).collect();
        for &t in &[0.5, 1.0, 5.0, 20.0, 60.0] {
            let emp = empirical_cf(&samples, t);
            let theory = stable_cf(alpha, gamma, t);
            let var = samples
                .iter()
                .map(|&x| ((t * x).cos() - emp).powi(2))
                .sum::<f64>()
                / n as f64;
            let se = (var / n as f64).sqrt();
            assert!(
                (emp - theory).abs() < 4.0 * se.max(1e-6),
                "t={t}: emp={emp} theory={theory} se={se}"
            );
        }
    }

    #[test]
    fn model_validation() {
        assert!(NoiseModel::AlphaStable(AlphaStableNoise {
            alpha: 2.5,
            gamma: 1.0
        })
        .validate()
        .is_err());
        assert!(NoiseModel::AlphaStable(AlphaStableNoise {
            alpha: 1.6,
            gamma: 0.0
        })
        .validate()
        .is_err());
        assert!(NoiseModel::Gaussian(GaussianNoise {
            snr_db: 30.0,
            signal_power: 0.0
        })
        .validate()
        .is_err());
    }
}
