//! Segmented-trap potentials.
//!
//! Each segment driven at 1 V produces a Gaussian bump `s·exp(−(x−c)²/2w²)`
//! along the trap axis. A negative holding voltage on segment A turns its
//! bump into the axial well; segment B sits `segment_offset` away and is used
//! for the kick.

use alloc::vec::Vec;

use super::constants::{ATOMIC_MASS_UNIT, CA40_MASS_AMU, ELEMENTARY_CHARGE, HBAR};
use crate::error::{Error, Result};

/// Potential of one segment at 1 V drive.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianSegment {
    /// Segment center on the trap axis, m.
    pub center: f64,
    /// Peak potential at 1 V drive, V.
    pub depth: f64,
    /// Gaussian width, m.
    pub width: f64,
}

impl GaussianSegment {
    fn envelope(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        libm::exp(-0.5 * u * u)
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.depth * self.envelope(x)
    }

    pub fn gradient(&self, x: f64) -> f64 {
        -self.depth * (x - self.center) / (self.width * self.width) * self.envelope(x)
    }

    pub fn curvature(&self, x: f64) -> f64 {
        let w2 = self.width * self.width;
        let d = x - self.center;
        self.depth * (d * d / w2 - 1.0) / w2 * self.envelope(x)
    }
}

/// Physical anchors the Gaussian model is calibrated against.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrapSpec {
    pub mass: f64,
    pub charge: f64,
    /// Axial secular angular frequency, rad/s.
    pub omega_ax: f64,
    /// Static voltage on the holding segment A, V. Must be negative.
    pub holding_voltage: f64,
    /// Distance from the well to the kick segment B, m.
    pub segment_offset: f64,
    /// Axial field magnitude at the well per volt on segment B, V/m.
    pub field_per_volt: f64,
}

impl Default for TrapSpec {
    fn default() -> Self {
        Self {
            mass: CA40_MASS_AMU * ATOMIC_MASS_UNIT,
            charge: ELEMENTARY_CHARGE,
            omega_ax: 2.0 * core::f64::consts::PI * 1.35e6,
            holding_voltage: -5.0,
            segment_offset: 280e-6,
            field_per_volt: 600.0,
        }
    }
}

/// A calibrated two-segment axial trap.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrapModel {
    pub mass: f64,
    pub charge: f64,
    pub omega_ax: f64,
    pub holding_voltage: f64,
    pub segment_offset: f64,
    /// Holding segment A first, kick segment B second.
    pub segments: Vec<GaussianSegment>,
}

impl TrapModel {
    /// Builds the model for the given depth scale and width, with segment A
    /// at `centers[0]` and segment B at `centers[1]`.
    pub fn from_gaussians(spec: &TrapSpec, depth_scale: f64, width: f64, centers: &[f64]) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(crate::error::invalid("segment width must be positive"));
        }
        if centers.len() != 2 {
            return Err(crate::error::invalid("expected holding and kick segment centers"));
        }
        Ok(Self {
            mass: spec.mass,
            charge: spec.charge,
            omega_ax: spec.omega_ax,
            holding_voltage: spec.holding_voltage,
            segment_offset: centers[1] - centers[0],
            segments: centers
                .iter()
                .map(|&center| GaussianSegment { center, depth: depth_scale, width })
                .collect(),
        })
    }

    pub fn hold(&self) -> &GaussianSegment {
        &self.segments[0]
    }

    pub fn kick(&self) -> &GaussianSegment {
        &self.segments[1]
    }

    /// Electrostatic potential (V) with `u_a` on A and `u_b` on B.
    pub fn potential(&self, x: f64, u_a: f64, u_b: f64) -> f64 {
        u_a * self.hold().potential(x) + u_b * self.kick().potential(x)
    }

    pub fn potential_gradient(&self, x: f64, u_a: f64, u_b: f64) -> f64 {
        u_a * self.hold().gradient(x) + u_b * self.kick().gradient(x)
    }

    pub fn potential_curvature(&self, x: f64, u_a: f64, u_b: f64) -> f64 {
        u_a * self.hold().curvature(x) + u_b * self.kick().curvature(x)
    }

    /// Axial force on the ion, N.
    pub fn force(&self, x: f64, u_a: f64, u_b: f64) -> f64 {
        -self.charge * self.potential_gradient(x, u_a, u_b)
    }

    /// Local secular angular frequency, rad/s.
    pub fn local_omega(&self, x: f64, u_a: f64, u_b: f64) -> f64 {
        libm::sqrt(self.charge * self.potential_curvature(x, u_a, u_b) / self.mass)
    }

    /// Axial field per volt on segment B at `x`, V/m.
    pub fn kick_field_per_volt(&self, x: f64) -> f64 {
        -self.kick().gradient(x)
    }

    /// Position spread scale `√(mω/2ħ)` converting displacement to `α`, 1/m.
    pub fn alpha_per_meter(&self) -> f64 {
        libm::sqrt(self.mass * self.omega_ax / (2.0 * HBAR))
    }

    pub fn quantum(&self) -> f64 {
        HBAR * self.omega_ax
    }

    pub fn period(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.omega_ax
    }
}

/// Calibrates depth scale and width so that the well of segment A has the
/// requested secular frequency and 1 V on segment B produces the requested
/// field at the well. Fails when no pair meets both anchors within 1%.
///
/// With the holding voltage `U_A < 0`, the anchors read
/// `e|U_A|s/w² = mω²` and `s(d/w²)e^{−d²/2w²} = E₁`, whose ratio fixes
/// `e^{−d²/2w²} = E₁ e |U_A| / (mω² d)`.
pub fn gaussian_segment_model(spec: &TrapSpec) -> Result<TrapModel> {
    let fail = |msg: &str| Err(Error::Calibration(msg.into()));
    if !(spec.mass > 0.0 && spec.omega_ax > 0.0 && spec.charge > 0.0) {
        return fail("mass, charge and frequency must be positive");
    }
    if !(spec.holding_voltage < 0.0) {
        return fail("holding voltage must be negative to trap a positive ion");
    }
    if !(spec.segment_offset > 0.0 && spec.field_per_volt > 0.0) {
        return fail("segment offset and field per volt must be positive");
    }
    let stiffness = spec.mass * spec.omega_ax * spec.omega_ax / spec.charge;
    let u_a = -spec.holding_voltage;
    let d = spec.segment_offset;
    let ratio = spec.field_per_volt * u_a / (stiffness * d);
    if !(ratio > 0.0 && ratio < 1.0) {
        return fail("no Gaussian width reproduces both the frequency and the field anchor");
    }
    let width = d / libm::sqrt(2.0 * libm::log(1.0 / ratio));
    let depth = stiffness * width * width / u_a;
    let model = TrapModel::from_gaussians(spec, depth, width, &[0.0, d])?;

    let omega = model.local_omega(0.0, spec.holding_voltage, 0.0);
    let field = model.kick_field_per_volt(0.0).abs();
    if (omega / spec.omega_ax - 1.0).abs() > 0.01 || (field / spec.field_per_volt - 1.0).abs() > 0.01 {
        return fail("calibrated model misses an anchor by more than 1%");
    }
    Ok(model)
}

/// Heating rate `e² S_E(ω) / (4 m ħ ω)` in quanta per second from the
/// single-sided electric-field noise spectral density `S_E` in V²/(Hz·m²).
pub fn heating_rate_from_noise(field_noise_psd: f64, trap: &TrapModel) -> f64 {
    trap.charge * trap.charge * field_noise_psd / (4.0 * trap.mass * HBAR * trap.omega_ax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn calibration_meets_anchors() {
        let spec = TrapSpec::default();
        let trap = gaussian_segment_model(&spec).unwrap();
        assert_relative_eq!(trap.local_omega(0.0, spec.holding_voltage, 0.0), spec.omega_ax, max_relative = 1e-12);
        assert_relative_eq!(trap.kick_field_per_volt(0.0).abs(), 600.0, max_relative = 1e-12);
        // the kick pushes away from segment B
        assert!(trap.force(0.0, spec.holding_voltage, 1.0) < 0.0);
    }

    #[test]
    fn calibration_fails_for_excessive_holding_voltage() {
        let spec = TrapSpec { holding_voltage: -50.0, ..Default::default() };
        assert!(matches!(gaussian_segment_model(&spec), Err(Error::Calibration(_))));
        let spec = TrapSpec { holding_voltage: 1.0, ..Default::default() };
        assert!(gaussian_segment_model(&spec).is_err());
    }

    #[test]
    fn curvature_matches_finite_difference() {
        let seg = GaussianSegment { center: 1e-4, depth: 0.3, width: 2e-4 };
        let h = 1e-8;
        for x in [-2e-4, 0.0, 0.7e-4, 3e-4] {
            let fd = (seg.gradient(x + h) - seg.gradient(x - h)) / (2.0 * h);
            assert_relative_eq!(seg.curvature(x), fd, epsilon = 1e-6 * seg.depth / (seg.width * seg.width));
            let fd = (seg.potential(x + h) - seg.potential(x - h)) / (2.0 * h);
            assert_relative_eq!(seg.gradient(x), fd, epsilon = 1e-8 * seg.depth / seg.width);
        }
    }

    #[test]
    fn heating_rate_is_linear() {
        let trap = gaussian_segment_model(&TrapSpec::default()).unwrap();
        assert_eq!(heating_rate_from_noise(0.0, &trap), 0.0);
        let one = heating_rate_from_noise(3.6e-13, &trap);
        assert_relative_eq!(heating_rate_from_noise(7.2e-13, &trap), 2.0 * one, max_relative = 1e-15);
    }
}
