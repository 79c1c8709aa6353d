//! Waveform comparison metrics.
//!
//! Generalized-force time series from different dynamics backends are
//! compared with the root mean square error and the coefficient of multiple
//! correlation (CMC). The CMC used here is the inter-protocol form
//!
//! ```text
//! CMC = sqrt(max(0, 1 − [Σ_f Σ_g (y_gf − ȳ_f)² / (F(G−1))]
//!                     / [Σ_f Σ_g (y_gf − ȳ)²  / (GF−1)]))
//! ```
//!
//! over `G` waveforms with `F` frames each, where `ȳ_f` is the per-frame
//! mean over waveforms and `ȳ` the grand mean. Identical waveforms give 1;
//! the value is clamped to `[0, 1]`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("waveform length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("waveform needs at least two finite samples")]
    InvalidWaveform,
    #[error("waveforms have (near-)zero variance and are not identical")]
    DegenerateVariance,
}

/// Uniformly sampled scalar time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    period: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, period: f64) -> Result<Self, MetricsError> {
        if samples.len() < 2 || !period.is_finite() || period <= 0.0 {
            return Err(MetricsError::InvalidWaveform);
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(MetricsError::InvalidWaveform);
        }
        Ok(Self { samples, period })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Root mean square error between two waveforms of equal length.
pub fn rmse(a: &Waveform, b: &Waveform) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    let sum: f64 = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Coefficient of multiple correlation of `G ≥ 2` aligned waveforms.
pub fn cmc(waveforms: &[&Waveform]) -> Result<f64, MetricsError> {
    let g = waveforms.len();
    if g < 2 {
        return Err(MetricsError::InvalidWaveform);
    }
    let f = waveforms[0].len();
    for w in waveforms {
        if w.len() != f {
            return Err(MetricsError::LengthMismatch { a: f, b: w.len() });
        }
    }

    let grand_mean: f64 =
        waveforms.iter().flat_map(|w| w.samples.iter()).sum::<f64>() / (g * f) as f64;

    let mut within = 0.0; // Σ_f Σ_g (y_gf − ȳ_f)²
    let mut total = 0.0; // Σ_f Σ_g (y_gf − ȳ)²
    for frame in 0..f {
        let frame_mean: f64 =
            waveforms.iter().map(|w| w.samples[frame]).sum::<f64>() / g as f64;
        for w in waveforms {
            let y = w.samples[frame];
            within += (y - frame_mean) * (y - frame_mean);
            total += (y - grand_mean) * (y - grand_mean);
        }
    }

    let denominator = total / (g * f - 1) as f64;
    if denominator < 1e-30 {
        let first = waveforms[0].samples();
        let identical = waveforms[1..]
            .iter()
            .all(|w| w.samples() == first);
        return if identical {
            Ok(1.0)
        } else {
            Err(MetricsError::DegenerateVariance)
        };
    }
    let numerator = within / (f * (g - 1)) as f64;
    Ok((1.0 - numerator / denominator).max(0.0).sqrt().min(1.0))
}

/// Min/max/mean/std summary over a set of per-joint metric values
/// (population standard deviation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    assert!(!values.is_empty());
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    Summary {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        std: var.sqrt(),
    }
}
