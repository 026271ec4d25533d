//! Displacement versus kick voltage.

use alloc::vec::Vec;

use super::eom::{integrate_eom, KickResult};
use super::trap::TrapModel;
use super::waveform::{LowPassFilter, VoltageWaveform};
use crate::error::{invalid, Result};
use crate::linalg::least_squares;

/// Shape of the kick: a square pulse through the supply-line filter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KickTemplate {
    /// Pulse start after the beginning of the record, s.
    pub onset: f64,
    /// Time the set voltage stays switched, s.
    pub duration: f64,
    pub sample_dt: f64,
    /// Record length, long enough for the filtered pulse to settle, s.
    pub total: f64,
    /// Supply-line filter. The default cascades five stages at 300 kHz,
    /// which yields `|α| ≈ 2` at 2 V with the calibrated trap.
    pub filter: LowPassFilter,
    pub steps_per_period: usize,
}

impl Default for KickTemplate {
    fn default() -> Self {
        Self {
            onset: 0.5e-6,
            duration: 400e-9,
            sample_dt: 2e-9,
            total: 20e-6,
            filter: LowPassFilter { cutoff_hz: 300e3, order: 5 },
            steps_per_period: 256,
        }
    }
}

impl KickTemplate {
    /// Filtered segment-B waveform for set voltage `volts`.
    pub fn waveform(&self, volts: f64) -> Result<VoltageWaveform> {
        let ideal = VoltageWaveform::square(volts, self.onset, self.duration, self.sample_dt, self.total)?;
        self.filter.apply(&ideal)
    }
}

/// Runs one kick at `volts` through [`integrate_eom`].
pub fn simulate_kick(trap: &TrapModel, template: &KickTemplate, volts: f64) -> Result<KickResult> {
    let w = template.waveform(volts)?;
    integrate_eom(trap, trap.holding_voltage, &w, w.end_time() - w.t0(), template.steps_per_period)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepPoint {
    pub volts: f64,
    /// `|α|` from the phase-space integral.
    pub alpha_abs: f64,
    /// `|α|` from the final energy.
    pub alpha_abs_energy: f64,
    pub final_energy_quanta: f64,
}

impl SweepPoint {
    pub fn from_result(volts: f64, r: &KickResult) -> Self {
        Self {
            volts,
            alpha_abs: r.alpha_abs(),
            alpha_abs_energy: r.alpha_abs_energy(),
            final_energy_quanta: r.final_energy_quanta,
        }
    }
}

/// `|α|(V) ≈ c₁V + c₂V² + c₃V³ + c₄V⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuarticFit {
    pub coeffs: [f64; 4],
    pub rms_residual: f64,
}

impl QuarticFit {
    pub fn eval(&self, v: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * v)
    }
}

/// Least-squares quartic through the origin. Needs at least four points.
pub fn fit_quartic_through_origin(volts: &[f64], alpha: &[f64]) -> Result<QuarticFit> {
    if volts.len() != alpha.len() || volts.len() < 4 {
        return Err(invalid("quartic fit needs at least four (V, alpha) pairs"));
    }
    // scale V to O(1) for conditioning
    let vmax = volts.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if vmax == 0.0 {
        return Err(invalid("quartic fit needs a nonzero voltage"));
    }
    let cols: Vec<Vec<f64>> = (1..=4)
        .map(|p| volts.iter().map(|v| libm::pow(v / vmax, p as f64)).collect())
        .collect();
    let c = least_squares(&cols, alpha)?;
    let mut coeffs = [0.0; 4];
    for (i, ci) in c.iter().enumerate() {
        coeffs[i] = ci / libm::pow(vmax, (i + 1) as f64);
    }
    let mut fit = QuarticFit { coeffs, rms_residual: 0.0 };
    let sse: f64 = volts.iter().zip(alpha).map(|(v, a)| (fit.eval(*v) - a) * (fit.eval(*v) - a)).sum();
    fit.rms_residual = libm::sqrt(sse / volts.len() as f64);
    Ok(fit)
}

/// Sweep table with its quartic fit (absent for fewer than four points).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    pub fit: Option<QuarticFit>,
}

impl Sweep {
    pub fn from_points(points: Vec<SweepPoint>) -> Result<Self> {
        let fit = if points.len() >= 4 {
            let v: Vec<f64> = points.iter().map(|p| p.volts).collect();
            let a: Vec<f64> = points.iter().map(|p| p.alpha_abs).collect();
            Some(fit_quartic_through_origin(&v, &a)?)
        } else {
            None
        };
        Ok(Self { points, fit })
    }
}

/// Simulates every voltage in order and fits the quartic.
pub fn sweep_alpha_vs_voltage(trap: &TrapModel, template: &KickTemplate, v_list: &[f64]) -> Result<Sweep> {
    if v_list.is_empty() {
        return Err(invalid("voltage list is empty"));
    }
    let points = v_list
        .iter()
        .map(|&v| simulate_kick(trap, template, v).map(|r| SweepPoint::from_result(v, &r)))
        .collect::<Result<Vec<_>>>()?;
    Sweep::from_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quartic_fit_recovers_polynomial() {
        let v: Vec<f64> = (0..=10).map(|i| 0.2 * i as f64).collect();
        let a: Vec<f64> = v.iter().map(|v| 1.1 * v - 0.05 * v * v * v * v).collect();
        let fit = fit_quartic_through_origin(&v, &a).unwrap();
        assert_relative_eq!(fit.coeffs[0], 1.1, epsilon = 1e-10);
        assert_relative_eq!(fit.coeffs[3], -0.05, epsilon = 1e-10);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn quartic_fit_needs_points() {
        assert!(fit_quartic_through_origin(&[0.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
