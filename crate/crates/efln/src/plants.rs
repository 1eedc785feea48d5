//! Unknown systems the filters identify: a two-tap exponential
//! functional-link plant with known optimal parameters, an asymmetric
//! loudspeaker distortion, a CSV replay source for measured records, and a
//! synthetic hysteresis generator standing in for actuator data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::expansion::{self, ExpansionConfig, ExpansionKind};

/// Two-tap, order-two functional-link plant with fixed optimal weights and
/// exponential factor, so the identification error of an adapted filter can
/// be measured against exact ground truth.
///
/// The weight vector is stored tap-major, listing for each tap
/// `[u, e^{-q|u|}sin(πu), e^{-q|u|}cos(πu), e^{-q|u|}sin(2πu), e^{-q|u|}cos(2πu)]`,
/// while the expansion module lays the regressor out block-major (all linear
/// terms, then all sin(π·) terms, ...). [`Case1Plant::index_map`] converts
/// between the two; the plant output is invariant to the choice since the
/// weights permute together with the basis.
#[derive(Debug, Clone)]
pub struct Case1Plant {
    w_tap_major: [f64; 10],
    w_block_major: [f64; 10],
    q_o: f64,
    cfg: ExpansionConfig,
}

impl Case1Plant {
    pub const TAPS: usize = 2;
    pub const ORDER: usize = 2;
    pub const DIM: usize = 10;

    pub fn new() -> Self {
        let w_tap_major = [
            0.3, 0.6, -0.2, 0.05, -0.27, -0.3, 0.4, -0.1, 0.01, 0.25,
        ];
        let mut w_block_major = [0.0; 10];
        for (m, &w) in w_tap_major.iter().enumerate() {
            w_block_major[Self::index_map(m)] = w;
        }
        Self {
            w_tap_major,
            w_block_major,
            q_o: -0.2,
            cfg: ExpansionConfig::new(ExpansionKind::Efln, Self::TAPS, Self::ORDER)
                .expect("fixed shape is valid"),
        }
    }

    /// Maps a tap-major weight index to the block-major regressor index:
    /// tap-major entry `m` belongs to tap `m / 5` and basis function
    /// `m % 5`, which the block-major layout stores at
    /// `(m % 5) * TAPS + m / 5`.
    pub fn index_map(m: usize) -> usize {
        (m % 5) * Self::TAPS + m / 5
    }

    pub fn q_o(&self) -> f64 {
        self.q_o
    }

    /// Optimal weights in the printed tap-major order.
    pub fn weights_tap_major(&self) -> &[f64; 10] {
        &self.w_tap_major
    }

    /// Optimal weights permuted into the expansion module's block-major
    /// layout, directly comparable to an adapted filter's weight vector.
    pub fn weights_block_major(&self) -> &[f64; 10] {
        &self.w_block_major
    }

    pub fn expansion_config(&self) -> &ExpansionConfig {
        &self.cfg
    }

    /// Noise-free plant output for a window `[u(i), u(i-1)]`.
    pub fn output(&self, window: &[f64]) -> f64 {
        let mut g = [0.0; Self::DIM];
        let mut h = [0.0; Self::DIM];
        expansion::expand_into(&self.cfg, window, self.q_o, &mut g, &mut h)
            .expect("window length checked by caller");
        self.w_block_major
            .iter()
            .zip(g.iter())
            .map(|(w, gi)| w * gi)
            .sum()
    }
}

impl Default for Case1Plant {
    fn default() -> Self {
        Self::new()
    }
}

/// Memoryless asymmetric loudspeaker distortion
/// `y = β[1/(1 + e^{-ρκ}) - 1/2]` with `κ = 1.5u - 0.3u²` and a slope that
/// switches between `ρ_pos` for positive drive and `ρ_neg` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoudspeakerPlant {
    pub beta: f64,
    pub rho_pos: f64,
    pub rho_neg: f64,
}

impl LoudspeakerPlant {
    pub fn new() -> Self {
        Self {
            beta: 2.0,
            rho_pos: 4.0,
            rho_neg: 0.5,
        }
    }

    pub fn output(&self, u: f64) -> f64 {
        let kappa = 1.5 * u - 0.3 * u * u;
        let rho = if kappa > 0.0 {
            self.rho_pos
        } else {
            self.rho_neg
        };
        self.beta * (1.0 / (1.0 + (-rho * kappa).exp()) - 0.5)
    }
}

impl Default for LoudspeakerPlant {
    fn default() -> Self {
        Self::new()
    }
}

/// Two-column CSV replay source: input in the first column, measured
/// response in the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvPlant {
    pub path: PathBuf,
    pub sample_rate_hz: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: cannot parse {field:?} as a number")]
    Parse { line: usize, field: String },
    #[error("line {line}: expected 2 comma-separated columns, found {found}")]
    LengthMismatch { line: usize, found: usize },
    #[error("file contains no data rows")]
    Empty,
}

impl CsvPlant {
    pub fn new(path: impl Into<PathBuf>, sample_rate_hz: f64) -> Self {
        Self {
            path: path.into(),
            sample_rate_hz,
        }
    }

    /// Loads aligned (input, desired) columns. A single non-numeric header
    /// row is skipped; blank lines are ignored.
    pub fn load(&self) -> Result<(Vec<f64>, Vec<f64>), CsvError> {
        load_two_column_csv(&self.path)
    }
}

/// Parses a two-column comma-separated file into (inputs, desired).
pub fn load_two_column_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CsvError> {
    let text = std::fs::read_to_string(path).map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_two_columns(&text)
}

fn parse_two_columns(text: &str) -> Result<(Vec<f64>, Vec<f64>), CsvError> {
    let mut inputs = Vec::new();
    let mut desired = Vec::new();
    let mut first_data_line = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(CsvError::LengthMismatch {
                line: line_no,
                found: fields.len(),
            });
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                inputs.push(values[0]);
                desired.push(values[1]);
                first_data_line = false;
            }
            Err(_) => {
                if first_data_line {
                    // header row
                    first_data_line = false;
                    continue;
                }
                let bad = fields
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .unwrap_or(&"");
                return Err(CsvError::Parse {
                    line: line_no,
                    field: (*bad).to_string(),
                });
            }
        }
    }
    if inputs.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok((inputs, desired))
}

/// Synthetic rate-dependent hysteresis record, a stand-in for measured
/// actuator data so the identification pipeline runs end to end without
/// hardware. The loop follows a Bouc–Wen-style internal state:
///
/// ```text
/// z(i+1) = z(i) + a·Δu - b·|Δu|·z(i) - c·Δu·|z(i)|
/// y(i)   = k_e·u(i) + k_h·z(i)
/// ```
///
/// driven by a two-tone excitation, so the output lags the input with an
/// amplitude- and rate-dependent loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysteresisGenerator {
    pub samples: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub elastic: f64,
    pub hysteretic: f64,
}

impl HysteresisGenerator {
    pub fn new() -> Self {
        Self {
            samples: 8000,
            a: 1.0,
            b: 2.0,
            c: 1.0,
            elastic: 0.6,
            hysteretic: 0.9,
        }
    }

    pub fn with_samples(samples: usize) -> Self {
        Self {
            samples,
            ..Self::new()
        }
    }

    /// Deterministic excitation: two incommensurate tones with a slow
    /// amplitude ramp, covering nested loops of several sizes.
    pub fn excitation(&self, i: usize) -> f64 {
        let t = i as f64;
        let ramp = 0.55 + 0.45 * (2.0 * std::f64::consts::PI * t / self.samples as f64).sin();
        ramp * (0.62 * (2.0 * std::f64::consts::PI * 0.0040 * t).sin()
            + 0.30 * (2.0 * std::f64::consts::PI * 0.0093 * t + 0.7).sin())
    }

    /// Generates the (input, displacement) record.
    pub fn generate(&self) -> (Vec<f64>, Vec<f64>) {
        let mut inputs = Vec::with_capacity(self.samples);
        let mut outputs = Vec::with_capacity(self.samples);
        let mut z = 0.0_f64;
        let mut prev_u = 0.0_f64;
        for i in 0..self.samples {
            let u = self.excitation(i);
            let du = u - prev_u;
            z += self.a * du - self.b * du.abs() * z - self.c * du * z.abs();
            prev_u = u;
            inputs.push(u);
            outputs.push(self.elastic * u + self.hysteretic * z);
        }
        (inputs, outputs)
    }

    /// Renders the record as the two-column CSV format the loader reads.
    pub fn to_csv(&self) -> String {
        let (inputs, outputs) = self.generate();
        let mut s = String::with_capacity(self.samples * 24);
        s.push_str("input,displacement\n");
        for (u, y) in inputs.iter().zip(outputs.iter()) {
            let _ = writeln!(s, "{u},{y}");
        }
        s
    }
}

impl Default for HysteresisGenerator {
    fn default() -> Self {
        Self::new()
    }
}
