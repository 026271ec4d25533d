//! Uniformly sampled segment voltages and supply-line low-pass filtering.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Segment voltage sampled every `dt` seconds from `t0`; linear between
/// samples and held constant outside.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VoltageWaveform {
    t0: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl VoltageWaveform {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(invalid("sample spacing must be positive and finite"));
        }
        if samples.is_empty() || samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("waveform samples must be non-empty and finite"));
        }
        Ok(Self { t0, dt, samples })
    }

    /// Constant `volts` over `len` samples.
    pub fn constant(volts: f64, dt: f64, len: usize) -> Result<Self> {
        Self::new(0.0, dt, alloc::vec![volts; len])
    }

    /// Square pulse of `amplitude` switched on at `onset` and off after
    /// `duration`, sampled from 0 to `total`.
    pub fn square(amplitude: f64, onset: f64, duration: f64, dt: f64, total: f64) -> Result<Self> {
        if !(onset >= 0.0 && duration >= 0.0 && total > 0.0) {
            return Err(invalid("pulse timing must be non-negative"));
        }
        let len = libm::round(total / dt) as usize + 1;
        let on = libm::round(onset / dt) as usize;
        let off = libm::round((onset + duration) / dt) as usize;
        let samples = (0..len).map(|i| if (on..off).contains(&i) { amplitude } else { 0.0 }).collect();
        Self::new(0.0, dt, samples)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    /// Voltage at time `t`, linearly interpolated.
    pub fn value_at(&self, t: f64) -> f64 {
        let u = (t - self.t0) / self.dt;
        if u <= 0.0 {
            return self.samples[0];
        }
        let i = libm::floor(u) as usize;
        if i + 1 >= self.samples.len() {
            return *self.samples.last().unwrap();
        }
        let frac = u - i as f64;
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }

    /// Leading samples up to and including the one at `t`.
    pub fn truncated_at(&self, t: f64) -> Result<Self> {
        let n = libm::floor((t - self.t0) / self.dt + 1e-9) as usize + 1;
        Self::new(self.t0, self.dt, self.samples[..n.min(self.samples.len())].to_vec())
    }
}

/// Cascade of identical first-order low-pass stages.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LowPassFilter {
    pub cutoff_hz: f64,
    pub order: u32,
}

impl LowPassFilter {
    pub fn new(cutoff_hz: f64, order: u32) -> Result<Self> {
        if !(cutoff_hz > 0.0 && cutoff_hz.is_finite()) {
            return Err(invalid("filter cutoff must be positive"));
        }
        if order == 0 {
            return Err(invalid("filter order must be at least 1"));
        }
        Ok(Self { cutoff_hz, order })
    }

    pub fn time_constant(&self) -> f64 {
        1.0 / (2.0 * core::f64::consts::PI * self.cutoff_hz)
    }

    /// Magnitude response at `freq_hz`.
    pub fn gain(&self, freq_hz: f64) -> f64 {
        let r = freq_hz / self.cutoff_hz;
        libm::pow(1.0 + r * r, -0.5 * self.order as f64)
    }

    /// Causal filtering, starting from steady state at the first sample.
    ///
    /// Each stage is advanced with the exact solution of `τ y' = x − y` for an
    /// input that is linear between samples, so the DC gain is exactly one.
    pub fn apply(&self, input: &VoltageWaveform) -> Result<VoltageWaveform> {
        let sample_rate = 1.0 / input.dt();
        if sample_rate < 20.0 * self.cutoff_hz {
            return Err(Error::Aliasing { sample_rate_hz: sample_rate, cutoff_hz: self.cutoff_hz });
        }
        let tau = self.time_constant();
        let decay = libm::exp(-input.dt() / tau);
        let leak = 1.0 - decay;
        let ramp = 1.0 - tau * leak / input.dt();
        let mut signal = input.samples().to_vec();
        for _ in 0..self.order {
            let mut y = signal[0];
            let mut out = Vec::with_capacity(signal.len());
            out.push(y);
            for w in signal.windows(2) {
                y += leak * (w[0] - y) + ramp * (w[1] - w[0]);
                out.push(y);
            }
            signal = out;
        }
        VoltageWaveform::new(input.t0(), input.dt(), signal)
    }
}

/// Two cascaded first-order stages at `cutoff_hz`.
pub fn filter_waveform(ideal: &VoltageWaveform, cutoff_hz: f64) -> Result<VoltageWaveform> {
    LowPassFilter::new(cutoff_hz, 2)?.apply(ideal)
}
