//! Phonon distributions of displaced Fock states.
//!
//! For a state `D(α)|n⟩` the probability of `k` phonons is
//!
//! ```text
//! p_k = e^{-x} n! k! [ Σ_{l=0}^{min(n,k)} (-1)^l x^{(n+k)/2 - l} / (l! (n-l)! (k-l)!) ]²,   x = |α|²
//! ```
//!
//! The `x^{(k-n)/2}` prefactor is carried inside the sum so every term stays
//! finite when `k < n`, and `1/(k-l)!` vanishes for `l > k`. The `n! k!`
//! prefactor outside the square agrees with the Laguerre form
//! `e^{-x} (n_<!/n_>!) x^{|k-n|} [L_{n_<}^{|k-n|}(x)]²`, and with the truncated
//! operator exponential in [`crate::oracle`].

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::special::{ln_factorial, Polynomial};

/// Normalization tolerance for distributions declared normalized.
pub const NORM_TOL: f64 = 1e-9;

/// Preparation Fock number and displacement amplitude of `|α, n⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DnsParams {
    pub n: usize,
    pub alpha: Complex64,
}

impl DnsParams {
    pub fn new(n: usize, alpha: Complex64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(invalid("alpha must be finite"));
        }
        Ok(Self { n, alpha })
    }

    /// Real, non-negative displacement.
    pub fn real(n: usize, alpha_abs: f64) -> Result<Self> {
        Self::new(n, Complex64::new(alpha_abs, 0.0))
    }
}

/// Probability vector over Fock states `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhononDistribution {
    probs: Vec<f64>,
    truncated: bool,
}

impl PhononDistribution {
    /// A normalized distribution. Entries must lie in `[0, 1]` and sum to 1
    /// within [`NORM_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_entries(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { probs, truncated: false })
    }

    /// A distribution whose tail beyond `k_max` was cut; entries may sum to
    /// less than one.
    pub fn truncated(probs: Vec<f64>) -> Result<Self> {
        validate_entries(&probs)?;
        let sum: f64 = probs.iter().sum();
        if sum > 1.0 + NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { probs, truncated: true })
    }

    /// Rescales arbitrary non-negative weights to unit sum.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("weights must be finite and non-negative"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(invalid("weights sum to zero"));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / sum).collect(),
            truncated: false,
        })
    }

    /// `|n⟩⟨n|` on `0..=k_max`.
    pub fn pure(n: usize, k_max: usize) -> Result<Self> {
        if n > k_max {
            return Err(invalid("pure state index exceeds k_max"));
        }
        let mut probs = vec![0.0; k_max + 1];
        probs[n] = 1.0;
        Ok(Self { probs, truncated: false })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn k_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability mass beyond `k_max` (zero for normalized distributions).
    pub fn tail_mass(&self) -> f64 {
        if self.truncated {
            (1.0 - self.sum()).max(0.0)
        } else {
            0.0
        }
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.sum() - 1.0).abs() <= tol
    }

    /// Restricts to `0..=k_max` and rescales to unit sum.
    pub fn renormalized_to(&self, k_max: usize) -> Result<Self> {
        let cut: Vec<f64> = (0..=k_max).map(|k| self.get(k)).collect();
        Self::from_weights(&cut)
    }

    /// Total-variation distance `½ Σ |p_k − q_k|` over the union of supports.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let len = self.len().max(other.len());
        0.5 * (0..len).map(|k| (self.get(k) - other.get(k)).abs()).sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

fn validate_entries(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(invalid("distribution must have at least one entry"));
    }
    for (k, &p) in probs.iter().enumerate() {
        if !(p.is_finite() && (-NORM_TOL..=1.0 + NORM_TOL).contains(&p)) {
            return Err(invalid(alloc::format!("p[{k}] = {p} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Diagonal of the motional density matrix after Fock-state preparation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagonalDensity(PhononDistribution);

impl DiagonalDensity {
    pub fn new(diag: PhononDistribution) -> Result<Self> {
        if !diag.is_normalized(NORM_TOL) {
            return Err(Error::NotNormalized { sum: diag.sum() });
        }
        Ok(Self(diag))
    }

    pub fn pure(n: usize) -> Self {
        Self(PhononDistribution::pure(n, n).expect("n <= n"))
    }

    /// Weight `fidelity` on `|n⟩`, the remainder on `|n−1⟩` (on `|1⟩` when
    /// `n = 0`).
    pub fn imperfect_fock(n: usize, fidelity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(invalid("fidelity must lie in [0, 1]"));
        }
        let other = if n == 0 { 1 } else { n - 1 };
        let mut probs = vec![0.0; n.max(other) + 1];
        probs[n] = fidelity;
        probs[other] += 1.0 - fidelity;
        Ok(Self(PhononDistribution::new(probs)?))
    }

    pub fn diag(&self) -> &PhononDistribution {
        &self.0
    }

    pub fn weights(&self) -> &[f64] {
        self.0.probs()
    }
}

/// `p_k = |⟨k|α, n⟩|²` for `k = 0..=k_max`, flagged truncated.
pub fn dns_ppd(params: DnsParams, k_max: usize) -> Result<PhononDistribution> {
    let x = params.alpha.norm_sqr();
    if !x.is_finite() {
        return Err(invalid("|alpha|^2 is not finite"));
    }
    let n = params.n;
    let probs = (0..=k_max).map(|k| dns_probability(n, k, x)).collect();
    PhononDistribution::truncated(probs)
}

/// Single entry `|⟨k|D(α)|n⟩|²` as a function of `x = |α|²`.
pub fn dns_probability(n: usize, k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == k { 1.0 } else { 0.0 };
    }
    let ln_x = libm::log(x);
    let half_norm = 0.5 * (ln_factorial(n) + ln_factorial(k)) - 0.5 * x;
    let power = 0.5 * (n + k) as f64;
    let amplitude: f64 = (0..=n.min(k))
        .map(|l| {
            let ln_mag = half_norm + (power - l as f64) * ln_x
                - ln_factorial(l)
                - ln_factorial(n - l)
                - ln_factorial(k - l);
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            sign * libm::exp(ln_mag)
        })
        .sum();
    amplitude * amplitude
}

/// Mixes pure displaced distributions with preparation weights:
/// `p̃_k = Σ_m ρ_mm p_k^{(m)}`.
pub fn convolve_preparation(
    pure_ppds: &BTreeMap<usize, PhononDistribution>,
    rho0: &DiagonalDensity,
) -> Result<PhononDistribution> {
    let k_max = pure_ppds
        .values()
        .next()
        .map(PhononDistribution::k_max)
        .ok_or_else(|| invalid("no pure distributions supplied"))?;
    if let Some(bad) = pure_ppds.values().find(|p| p.k_max() != k_max) {
        return Err(Error::MismatchedKMax { expected: k_max, found: bad.k_max() });
    }
    let mut out = vec![0.0; k_max + 1];
    let mut truncated = false;
    for (m, &w) in rho0.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let ppd = pure_ppds.get(&m).ok_or(Error::MissingComponent(m))?;
        truncated |= ppd.is_truncated();
        for (o, p) in out.iter_mut().zip(ppd.probs()) {
            *o += w * p;
        }
    }
    if truncated {
        PhononDistribution::truncated(out)
    } else {
        PhononDistribution::new(out)
    }
}

/// Displaced distribution mixed over `rho0` at real displacement `alpha_abs`.
pub fn convolved_dns_ppd(alpha_abs: f64, rho0: &DiagonalDensity, k_max: usize) -> Result<PhononDistribution> {
    let mut pure = BTreeMap::new();
    for (m, &w) in rho0.weights().iter().enumerate() {
        if w != 0.0 {
            pure.insert(m, dns_ppd(DnsParams::real(m, alpha_abs)?, k_max)?);
        }
    }
    convolve_preparation(&pure, rho0)
}

/// Inner polynomial of the overlap in `x = |α|²`, scaled by `n! k!`:
/// `Σ_l (-1)^l C(n, l) k!/(k-l)! x^{n-l}`. Requires `k ≥ n`.
pub fn overlap_polynomial(n: usize, k: usize) -> Result<Polynomial> {
    if k < n {
        return Err(invalid("overlap polynomial requires k >= n"));
    }
    let mut coeffs = vec![0.0; n + 1];
    for l in 0..=n {
        let ln_mag = ln_factorial(n) - ln_factorial(l) - ln_factorial(n - l) + ln_factorial(k)
            - ln_factorial(k - l);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[n - l] = sign * libm::round(libm::exp(ln_mag));
    }
    Ok(Polynomial::new(coeffs))
}

/// Positive roots in `|α|²` at which `p_k^{(n)}` vanishes, ascending.
pub fn ppd_zero_locations(n: usize, k: usize) -> Result<Vec<f64>> {
    let poly = overlap_polynomial(n, k)?;
    let hi = poly.root_bound();
    Ok(poly
        .real_roots(0.0, hi)
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| polish_root(&poly, x))
        .collect())
}

/// Number of interference zeros of `p_k^{(n)}` as a function of `|α|²`.
pub fn count_ppd_zeros(n: usize, k: usize) -> Result<usize> {
    Ok(ppd_zero_locations(n, k)?.len())
}

fn polish_root(poly: &Polynomial, mut x: f64) -> f64 {
    let d = poly.derivative();
    for _ in 0..3 {
        let slope = d.eval(x);
        if slope == 0.0 {
            break;
        }
        let step = poly.eval(x) / slope;
        if !step.is_finite() || step.abs() > 1e-6 * x.abs().max(1.0) {
            break;
        }
        x -= step;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coherent_state_is_poisson() {
        let alpha = 1.7_f64;
        let x = alpha * alpha;
        let ppd = dns_ppd(DnsParams::real(0, alpha).unwrap(), 30).unwrap();
        let mut expected = libm::exp(-x);
        for k in 0..=30 {
            assert_relative_eq!(ppd.get(k), expected, max_relative = 1e-12);
            expected *= x / (k + 1) as f64;
        }
        assert!(ppd.is_truncated());
        assert!(ppd.tail_mass() < 1e-12);
    }

    #[test]
    fn n1_alpha1_has_exact_zero_at_k1() {
        let ppd = dns_ppd(DnsParams::real(1, 1.0).unwrap(), 6).unwrap();
        assert!(ppd.get(1).abs() < 1e-30);
        assert_relative_eq!(ppd.get(0), libm::exp(-1.0), max_relative = 1e-14);
    }

    #[test]
    fn k_below_n_terms_stay_finite() {
        // p_0^{(2)} = e^{-x} x^2 / 2
        let x: f64 = 0.64;
        let p = dns_probability(2, 0, x);
        assert_relative_eq!(p, libm::exp(-x) * x * x / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn zero_alpha_gives_delta() {
        let ppd = dns_ppd(DnsParams::real(2, 0.0).unwrap(), 5).unwrap();
        assert_eq!(ppd.probs(), &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_non_finite_alpha() {
        assert!(DnsParams::new(0, Complex64::new(f64::NAN, 0.0)).is_err());
        assert!(DnsParams::new(0, Complex64::new(0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn normalization_with_large_cutoff() {
        for n in 0..=3 {
            let ppd = dns_ppd(DnsParams::real(n, 3.0).unwrap(), 40).unwrap();
            assert!(ppd.tail_mass() < 1e-8, "n={n} tail {}", ppd.tail_mass());
        }
    }

    #[test]
    fn convolution_with_delta_weights_is_identity() {
        let alpha = 1.3;
        let rho0 = DiagonalDensity::pure(2);
        let direct = dns_ppd(DnsParams::real(2, alpha).unwrap(), 12).unwrap();
        let conv = convolved_dns_ppd(alpha, &rho0, 12).unwrap();
        for k in 0..=12 {
            assert_relative_eq!(conv.get(k), direct.get(k), epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_kick_convolution_returns_preparation() {
        let rho0 = DiagonalDensity::imperfect_fock(0, 0.92).unwrap();
        let conv = convolved_dns_ppd(0.0, &rho0, 4).unwrap();
        assert_relative_eq!(conv.get(0), 0.92, epsilon = 1e-15);
        assert_relative_eq!(conv.get(1), 0.08, epsilon = 1e-15);
        assert_eq!(conv.get(2), 0.0);
    }

    #[test]
    fn convolution_lifts_pure_zero() {
        let rho0 = DiagonalDensity::imperfect_fock(1, 0.77).unwrap();
        let conv = convolved_dns_ppd(1.0, &rho0, 8).unwrap();
        let pure = dns_ppd(DnsParams::real(1, 1.0).unwrap(), 8).unwrap();
        assert!(conv.get(1) > pure.get(1));
        assert_relative_eq!(conv.get(1), 0.23 * libm::exp(-1.0), max_relative = 1e-12);
    }

    #[test]
    fn convolution_rejects_mismatched_kmax() {
        let mut pure = BTreeMap::new();
        pure.insert(0, dns_ppd(DnsParams::real(0, 1.0).unwrap(), 5).unwrap());
        pure.insert(1, dns_ppd(DnsParams::real(1, 1.0).unwrap(), 6).unwrap());
        let rho0 = DiagonalDensity::imperfect_fock(1, 0.5).unwrap();
        assert!(matches!(
            convolve_preparation(&pure, &rho0),
            Err(Error::MismatchedKMax { .. })
        ));
    }

    #[test]
    fn convolution_rejects_missing_component() {
        let mut pure = BTreeMap::new();
        pure.insert(1, dns_ppd(DnsParams::real(1, 1.0).unwrap(), 5).unwrap());
        let rho0 = DiagonalDensity::imperfect_fock(1, 0.5).unwrap();
        assert_eq!(convolve_preparation(&pure, &rho0), Err(Error::MissingComponent(0)));
    }

    #[test]
    fn zero_counts_and_locations() {
        assert_eq!(count_ppd_zeros(0, 0).unwrap(), 0);
        assert_eq!(count_ppd_zeros(0, 7).unwrap(), 0);
        let z11 = ppd_zero_locations(1, 1).unwrap();
        assert_eq!(z11.len(), 1);
        assert_relative_eq!(z11[0], 1.0, epsilon = 1e-12);
        let z22 = ppd_zero_locations(2, 2).unwrap();
        assert_eq!(z22.len(), 2);
        assert_relative_eq!(z22[0], 2.0 - libm::sqrt(2.0), epsilon = 1e-12);
        assert_relative_eq!(z22[1], 2.0 + libm::sqrt(2.0), epsilon = 1e-12);
        assert!(count_ppd_zeros(2, 1).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(PhononDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(PhononDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(PhononDistribution::new(vec![]).is_err());
        assert!(PhononDistribution::truncated(vec![0.5, 0.4]).is_ok());
        let d = PhononDistribution::from_weights(&[1.0, 3.0]).unwrap();
        assert_relative_eq!(d.get(1), 0.75);
    }
}
