//! Classical axial motion under the time-dependent segment voltages.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::minimum::{displace_alpha_integral, find_minimum, track_minimum};
use super::trap::TrapModel;
use super::waveform::VoltageWaveform;
use crate::error::{invalid, Error, Result};

/// Relative energy drift allowed over 100 periods with frozen voltages.
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;
const MAX_HALVINGS: u32 = 6;
/// Probe amplitude for the drift check, in ground-state lengths `√(ħ/mω)`.
const PROBE_AMPLITUDE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

/// Outcome of one simulated kick.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KickResult {
    /// Displacement from the phase-space integral over the tracked minimum,
    /// phase referenced to the waveform start.
    pub alpha: Complex64,
    /// `E_f / ħω` about the final minimum.
    pub final_energy_quanta: f64,
    /// Steps per period actually used after the drift guard.
    pub steps_per_period: usize,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl KickResult {
    pub fn alpha_abs(&self) -> f64 {
        self.alpha.norm()
    }

    /// `|α| = √(E_f / ħω)`.
    pub fn alpha_abs_energy(&self) -> f64 {
        libm::sqrt(self.final_energy_quanta.max(0.0))
    }
}

#[derive(Clone, Copy)]
struct State {
    x: f64,
    v: f64,
}

fn rk4_step(trap: &TrapModel, u_a: f64, u_b: &dyn Fn(f64) -> f64, s: State, t: f64, h: f64) -> State {
    let acc = |x: f64, t: f64| trap.force(x, u_a, u_b(t)) / trap.mass;
    let k1x = s.v;
    let k1v = acc(s.x, t);
    let k2x = s.v + 0.5 * h * k1v;
    let k2v = acc(s.x + 0.5 * h * k1x, t + 0.5 * h);
    let k3x = s.v + 0.5 * h * k2v;
    let k3v = acc(s.x + 0.5 * h * k2x, t + 0.5 * h);
    let k4x = s.v + h * k3v;
    let k4v = acc(s.x + h * k3x, t + h);
    State {
        x: s.x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        v: s.v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    }
}

/// Mechanical energy about the minimum `x_min` for fixed voltages, J.
fn energy(trap: &TrapModel, u_a: f64, u_b: f64, x_min: f64, s: State) -> f64 {
    0.5 * trap.mass * s.v * s.v
        + trap.charge * (trap.potential(s.x, u_a, u_b) - trap.potential(x_min, u_a, u_b))
}

/// Relative energy drift over 100 periods with both voltages frozen, starting
/// from a probe displacement out of the well.
pub fn energy_drift(trap: &TrapModel, u_a: f64, u_b: f64, steps_per_period: usize) -> Result<f64> {
    let x_min = find_minimum(trap, u_a, u_b, trap.hold().center).ok_or(Error::WellLost { t: 0.0 })?;
    let probe = PROBE_AMPLITUDE * libm::sqrt(super::constants::HBAR / (trap.mass * trap.omega_ax));
    let mut s = State { x: x_min + probe, v: 0.0 };
    let e0 = energy(trap, u_a, u_b, x_min, s);
    let h = trap.period() / steps_per_period as f64;
    let frozen = |_t: f64| u_b;
    for i in 0..100 * steps_per_period {
        s = rk4_step(trap, u_a, &frozen, s, i as f64 * h, h);
    }
    Ok(((energy(trap, u_a, u_b, x_min, s) - e0) / e0).abs())
}

/// Integrates `m ẍ = −e U_A V_A'(x) − e U_B(t) V_B'(x)` from rest at the
/// initial minimum over `t_span` seconds of the waveform, with fourth-order
/// Runge-Kutta steps and `U_B` interpolated linearly between samples.
///
/// Before integrating, the step is halved until the relative energy drift of
/// a frozen-voltage probe stays below [`ENERGY_DRIFT_TOL`] per 100 periods.
/// The final energy is measured about the minimum for the last voltage; the
/// complex displacement comes from [`displace_alpha_integral`] on the
/// tracked minimum as an independent route.
pub fn integrate_eom(
    trap: &TrapModel,
    u_a: f64,
    u_b: &VoltageWaveform,
    t_span: f64,
    steps_per_period: usize,
) -> Result<KickResult> {
    if steps_per_period < 64 {
        return Err(invalid("steps_per_period must be at least 64"));
    }
    if !(t_span > 0.0) || t_span > u_b.end_time() - u_b.t0() + 0.5 * u_b.dt() {
        return Err(invalid("t_span must be positive and covered by the waveform"));
    }
    let t0 = u_b.t0();
    let t_end = t0 + t_span;
    let u_final = u_b.value_at(t_end);

    let mut steps = steps_per_period;
    let mut halvings = 0;
    loop {
        let drift = energy_drift(trap, u_a, u_final, steps)?;
        if drift < ENERGY_DRIFT_TOL {
            break;
        }
        if halvings == MAX_HALVINGS {
            return Err(Error::EnergyDrift { drift, halvings });
        }
        halvings += 1;
        steps *= 2;
    }

    let x_start = find_minimum(trap, u_a, u_b.value_at(t0), trap.hold().center).ok_or(Error::WellLost { t: t0 })?;
    let n = libm::ceil(t_span / (trap.period() / steps as f64)) as usize;
    let h = t_span / n as f64;
    let drive = |t: f64| u_b.value_at(t);
    let mut s = State { x: x_start, v: 0.0 };
    let mut trajectory = Vec::with_capacity(n + 1);
    trajectory.push(TrajectoryPoint { t: t0, x: s.x, v: s.v });
    for i in 0..n {
        let t = t0 + i as f64 * h;
        s = rk4_step(trap, u_a, &drive, s, t, h);
        trajectory.push(TrajectoryPoint { t: t + h, x: s.x, v: s.v });
    }

    let x_final = find_minimum(trap, u_a, u_final, x_start).ok_or(Error::WellLost { t: t_end })?;
    let final_energy = energy(trap, u_a, u_final, x_final, s);

    let track = track_minimum(trap, &u_b.truncated_at(t_end)?, u_a)?;
    let alpha = displace_alpha_integral(&track, trap, t_end)?;

    Ok(KickResult {
        alpha,
        final_energy_quanta: final_energy / trap.quantum(),
        steps_per_period: steps,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kick::trap::{gaussian_segment_model, TrapSpec};

    #[test]
    fn at_rest_without_kick() {
        let trap = gaussian_segment_model(&TrapSpec::default()).unwrap();
        let w = VoltageWaveform::constant(0.0, 5e-9, 1001).unwrap();
        let r = integrate_eom(&trap, trap.holding_voltage, &w, 5e-6, 64).unwrap();
        assert!(r.alpha_abs() < 1e-6);
        assert!(r.alpha_abs_energy() < 1e-6);
        assert!(r.steps_per_period >= 64);
    }

    #[test]
    fn drift_guard_shrinks_step() {
        let trap = gaussian_segment_model(&TrapSpec::default()).unwrap();
        assert!(energy_drift(&trap, trap.holding_voltage, 0.0, 64).unwrap() > ENERGY_DRIFT_TOL);
        assert!(energy_drift(&trap, trap.holding_voltage, 0.0, 256).unwrap() < ENERGY_DRIFT_TOL);
    }

    #[test]
    fn rejects_coarse_steps() {
        let trap = gaussian_segment_model(&TrapSpec::default()).unwrap();
        let w = VoltageWaveform::constant(0.0, 5e-9, 100).unwrap();
        assert!(integrate_eom(&trap, trap.holding_voltage, &w, 1e-7, 32).is_err());
    }
}
