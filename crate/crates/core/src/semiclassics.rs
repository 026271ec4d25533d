//! Phase-space interference picture of the displaced-state overlaps.
//!
//! In dimensionless quadratures the energy shell of `|m⟩` is a circle of
//! radius `r_m = √(2m+1)`. The analysis state `|k⟩` sits on the circle around
//! the origin, the prepared state `|α, n⟩` on the circle around `(√2|α|, 0)`.
//! The overlap is a sum of two contributions from the intersection points,
//! whose relative phase is half the area `B` enclosed between the two
//! trajectories plus a constant offset. Minima of `p_k` appear where
//! `cos φ = 0`. The offset is fixed once on the `n = k = 1` zero at `|α| = 1`
//! and then frozen.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::fock::ppd_zero_locations;
use crate::special::bisect;

/// Grid points per unit `|α|` used to bracket phase crossings.
const GRID_DENSITY: f64 = 4000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BandKind {
    /// Centered on the origin.
    Analysis,
    /// Centered on the displaced point.
    Prepared,
}

/// Classical trajectory of energy `(n + ½)ħω`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseSpaceBand {
    pub n: usize,
    /// `|α|`; zero for analysis bands.
    pub displacement: f64,
    pub kind: BandKind,
}

impl PhaseSpaceBand {
    pub fn analysis(k: usize) -> Self {
        Self { n: k, displacement: 0.0, kind: BandKind::Analysis }
    }

    pub fn prepared(n: usize, alpha_abs: f64) -> Result<Self> {
        if !(alpha_abs >= 0.0 && alpha_abs.is_finite()) {
            return Err(invalid("|alpha| must be finite and non-negative"));
        }
        Ok(Self { n, displacement: alpha_abs, kind: BandKind::Prepared })
    }

    pub fn center_energy_quanta(&self) -> f64 {
        self.n as f64 + 0.5
    }

    pub fn radius(&self) -> f64 {
        radius(self.n)
    }

    /// Center on the position quadrature.
    pub fn center(&self) -> f64 {
        SQRT_2 * self.displacement
    }
}

fn radius(m: usize) -> f64 {
    libm::sqrt((2 * m + 1) as f64)
}

/// Open interval of `|α|` in which the two trajectories cross.
pub fn intersecting_range(n: usize, k: usize) -> (f64, f64) {
    let (rn, rk) = (radius(n), radius(k));
    ((rn - rk).abs() / SQRT_2, (rn + rk) / SQRT_2)
}

/// Intersection area of two circles with radii `r1`, `r2` and center
/// distance `d`.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let kite = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * libm::acos(c1) + r2 * r2 * libm::acos(c2) - 0.5 * libm::sqrt(kite.max(0.0))
}

/// Area `B` enclosed between the trajectory of `|k⟩` and that of `|α, n⟩`:
/// the part of the smaller circle lying outside the larger one.
pub fn enclosed_area(n: usize, k: usize, alpha_abs: f64) -> Result<f64> {
    let (lo, hi) = intersecting_range(n, k);
    if !(alpha_abs > lo && alpha_abs < hi) {
        return Err(Error::ClassicallyForbidden { n, k, alpha_abs });
    }
    Ok(enclosed_area_unchecked(n, k, alpha_abs))
}

fn enclosed_area_unchecked(n: usize, k: usize, alpha_abs: f64) -> f64 {
    let (rn, rk) = (radius(n), radius(k));
    let r = rn.min(rk);
    (PI * r * r - lens_area(rn, rk, SQRT_2 * alpha_abs)).max(0.0)
}

/// Offset that puts the `n = k = 1` crossing at its exact zero `|α| = 1`,
/// reduced to `(−π/2, π/2]`.
pub fn calibrated_phase_offset() -> f64 {
    let c = FRAC_PI_2 - 0.5 * enclosed_area_unchecked(1, 1, 1.0);
    let shifted = c + FRAC_PI_2;
    let reduced = shifted - PI * libm::floor(shifted / PI) - FRAC_PI_2;
    if reduced <= -FRAC_PI_2 {
        reduced + PI
    } else {
        reduced
    }
}

/// Relative phase `φ_nk = B/2 + c` with the calibrated offset `c`.
pub fn enclosed_area_phase(n: usize, k: usize, alpha_abs: f64) -> Result<f64> {
    Ok(0.5 * enclosed_area(n, k, alpha_abs)? + calibrated_phase_offset())
}

/// `|α|` values in `[lo, hi]` where `φ_nk` crosses an odd multiple of `π/2`.
///
/// The interval is clipped to the intersecting regime; outside it the exact
/// distribution is exponentially small and no crossing is reported.
pub fn predict_minima(n: usize, k: usize, alpha_range: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = alpha_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
        return Err(invalid("alpha range must be a finite non-negative interval"));
    }
    let (a, b) = intersecting_range(n, k);
    let eps = 1e-12 * b;
    let lo = lo.max(a + eps);
    let hi = hi.min(b - eps);
    let mut minima = Vec::new();
    if lo >= hi {
        return Ok(minima);
    }
    let offset = calibrated_phase_offset();
    let g = |x: f64| libm::cos(0.5 * enclosed_area_unchecked(n, k, x) + offset);
    let steps = (libm::ceil((hi - lo) * GRID_DENSITY) as usize).max(16);
    let mut x0 = lo;
    let mut g0 = g(x0);
    for i in 1..=steps {
        let x1 = lo + (hi - lo) * i as f64 / steps as f64;
        let g1 = g(x1);
        if g0 == 0.0 {
            minima.push(x0);
        } else if g0 * g1 < 0.0 {
            minima.push(bisect(g, x0, x1, g0));
        }
        x0 = x1;
        g0 = g1;
    }
    Ok(minima)
}

/// One row of the semiclassical versus exact comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimaComparison {
    pub n: usize,
    pub k: usize,
    pub alpha_min_semiclassical: f64,
    pub alpha_min_exact: f64,
    pub relative_error: f64,
}

/// Pairs each exact zero of `p_k^{(n)}` with the nearest predicted minimum.
/// Exact zeros without any prediction are skipped.
pub fn compare_minima(n: usize, k: usize) -> Result<Vec<MinimaComparison>> {
    let exact: Vec<f64> = ppd_zero_locations(n.min(k), n.max(k))?.into_iter().map(libm::sqrt).collect();
    let (_, hi) = intersecting_range(n, k);
    let predicted = predict_minima(n, k, (0.0, hi))?;
    Ok(exact
        .into_iter()
        .filter_map(|e| {
            let sc = predicted.iter().copied().min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()))?;
            Some(MinimaComparison {
                n,
                k,
                alpha_min_semiclassical: sc,
                alpha_min_exact: e,
                relative_error: (sc - e).abs() / e,
            })
        })
        .collect())
}
