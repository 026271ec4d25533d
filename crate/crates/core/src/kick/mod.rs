//! Electrical displacement of the ion by a voltage kick on a neighboring
//! trap segment.
//!
//! The chain is: [`trap`] potentials, [`waveform`] shaping and filtering,
//! [`minimum`] tracking of the moving well and the phase-space displacement
//! integral, [`eom`] integration of the classical motion, and [`sweep`] over
//! kick voltages.

pub mod eom;
pub mod minimum;
pub mod sweep;
pub mod trap;
pub mod waveform;

pub use eom::{energy_drift, integrate_eom, KickResult, TrajectoryPoint, ENERGY_DRIFT_TOL};
pub use minimum::{displace_alpha_integral, find_minimum, track_minimum, MinimumTrack};
pub use sweep::{
    fit_quartic_through_origin, simulate_kick, sweep_alpha_vs_voltage, KickTemplate, QuarticFit, Sweep,
    SweepPoint,
};
pub use trap::{gaussian_segment_model, heating_rate_from_noise, GaussianSegment, TrapModel, TrapSpec};
pub use waveform::{filter_waveform, LowPassFilter, VoltageWaveform};

/// CODATA physical constants in SI units.
pub mod constants {
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Mass of ⁴⁰Ca in atomic mass units.
    pub const CA40_MASS_AMU: f64 = 39.962_590_863;
}
