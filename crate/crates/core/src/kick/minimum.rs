//! Tracking the moving potential minimum and the displacement it imparts.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::trap::TrapModel;
use super::waveform::VoltageWaveform;
use crate::error::{invalid, Error, Result};

/// Settling tolerance on the residual displacement rate, in units of `α`.
const SETTLE_TOL: f64 = 1e-3;

/// Minimum position relative to its location at the first sample, m.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimumTrack {
    pub t0: f64,
    pub dt: f64,
    pub positions: Vec<f64>,
}

impl MinimumTrack {
    pub fn new(t0: f64, dt: f64, positions: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || positions.len() < 3 {
            return Err(invalid("minimum track needs positive spacing and at least three samples"));
        }
        Ok(Self { t0, dt, positions })
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Time derivative by central differences, second-order one-sided at
    /// the ends.
    pub fn velocity(&self) -> Vec<f64> {
        let x = &self.positions;
        let n = x.len();
        let h2 = 2.0 * self.dt;
        (0..n)
            .map(|i| match i {
                0 => (-3.0 * x[0] + 4.0 * x[1] - x[2]) / h2,
                i if i == n - 1 => (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / h2,
                i => (x[i + 1] - x[i - 1]) / h2,
            })
            .collect()
    }
}

/// Axial position of the local potential minimum near `guess`.
///
/// Brackets a sign change of the potential gradient by expanding about the
/// guess, then refines with Newton steps safeguarded by bisection.
pub fn find_minimum(trap: &TrapModel, u_a: f64, u_b: f64, guess: f64) -> Option<f64> {
    let grad = |x| trap.potential_gradient(x, u_a, u_b);
    let width = trap.hold().width;
    let mut h = 1e-4 * width;
    let (mut lo, mut hi);
    loop {
        lo = guess - h;
        hi = guess + h;
        if grad(lo) < 0.0 && grad(hi) > 0.0 {
            break;
        }
        h *= 2.0;
        if h > width {
            return None;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = grad(x);
        if g == 0.0 {
            return Some(x);
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let c = trap.potential_curvature(x, u_a, u_b);
        let newton = x - g / c;
        let next = if c > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == x || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(width * 1e-12) {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

/// Minimum of `u_a V_A(x) + U_B(t) V_B(x)` at every waveform sample, each
/// search seeded at the previous sample's minimum.
pub fn track_minimum(trap: &TrapModel, u_b: &VoltageWaveform, u_a: f64) -> Result<MinimumTrack> {
    let mut positions = Vec::with_capacity(u_b.len());
    let mut prev = trap.hold().center;
    let mut origin = None;
    for (i, &v) in u_b.samples().iter().enumerate() {
        let x = find_minimum(trap, u_a, v, prev).ok_or(Error::WellLost { t: u_b.time(i) })?;
        let x0 = *origin.get_or_insert(x);
        positions.push(x - x0);
        prev = x;
    }
    MinimumTrack::new(u_b.t0(), u_b.dt(), positions)
}

/// Displacement `α(t) = −√(mω/2ħ) e^{−iωt} ∫₀ᵗ ẋ₀(τ) e^{iωτ} dτ` at `t_end`,
/// with times measured from the start of the track.
///
/// `ẋ₀` comes from central differences and the integral from the trapezoid
/// rule. The track must have settled at `t_end`: the displacement still
/// accruing per radian of oscillation phase must stay below `1e−3`.
pub fn displace_alpha_integral(x0: &MinimumTrack, trap: &TrapModel, t_end: f64) -> Result<Complex64> {
    let n_end = libm::round((t_end - x0.t0) / x0.dt);
    if !(n_end >= 2.0) || n_end as usize >= x0.positions.len() {
        return Err(invalid("t_end outside the minimum track"));
    }
    let n_end = n_end as usize;
    let omega = trap.omega_ax;
    let scale = trap.alpha_per_meter();
    let v = x0.velocity();
    let residual = scale * v[n_end].abs() / omega;
    if residual > SETTLE_TOL {
        return Err(Error::Unsettled { residual });
    }
    let phase = |i: usize| Complex64::from_polar(1.0, omega * (i as f64 * x0.dt));
    let mut integral = Complex64::new(0.0, 0.0);
    for i in 0..n_end {
        integral += (phase(i) * v[i] + phase(i + 1) * v[i + 1]) * (0.5 * x0.dt);
    }
    Ok(-scale * phase(n_end).conj() * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kick::trap::{gaussian_segment_model, TrapSpec};

    #[test]
    fn zero_kick_keeps_minimum() {
        let trap = gaussian_segment_model(&TrapSpec::default()).unwrap();
        let w = VoltageWaveform::constant(0.0, 1e-8, 50).unwrap();
        let track = track_minimum(&trap, &w, trap.holding_voltage).unwrap();
        assert!(track.positions.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn oversized_kick_loses_well() {
        let trap = gaussian_segment_model(&TrapSpec::default()).unwrap();
        let w = VoltageWaveform::new(0.0, 1e-8, alloc::vec![0.0, 0.0, -400.0]).unwrap();
        assert!(matches!(track_minimum(&trap, &w, trap.holding_voltage), Err(Error::WellLost { .. })));
    }

    #[test]
    fn unsettled_track_rejected() {
        let trap = gaussian_segment_model(&TrapSpec::default()).unwrap();
        let positions = (0..100).map(|i| i as f64 * 1e-9).collect();
        let track = MinimumTrack::new(0.0, 1e-8, positions).unwrap();
        assert!(matches!(displace_alpha_integral(&track, &trap, 0.99e-6), Err(Error::Unsettled { .. })));
    }
}
