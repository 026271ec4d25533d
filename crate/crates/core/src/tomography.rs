//! Maximum-likelihood reconstruction of the phonon distribution from
//! three-branch Rabi flopping data.
//!
//! Every `(branch, θ)` point is an independent binomial trial. The
//! distribution is parameterized by softmax logits so the simplex constraint
//! holds by construction; the readout fidelity maps through
//! `f = ½ + ½·σ(w)` and the pulse-area calibration through `s = e^v`. The
//! objective is maximized by BFGS from several seeded starting points.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::fock::{convolved_dns_ppd, DiagonalDensity, PhononDistribution};
use crate::optim::{minimize_bfgs, BfgsOptions};
use crate::sideband::{apply_readout, raw_signal, Branch, BranchData, CouplingConfig, CouplingTable, RabiDataset, RabiPoint};
use crate::special::{golden_min, ln_factorial};

/// Model probabilities are clamped to `[ε, 1 − ε]`.
pub const PROB_CLAMP: f64 = 1e-9;
/// Minimum points per branch before the identifiability warning fires.
pub const MIN_POINTS_PER_BRANCH: usize = 10;

/// Nuisance parameters of the measurement model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Nuisance {
    pub readout_fidelity: f64,
    /// Multiplicative pulse-area calibration shared by all branches.
    pub rabi_scale: f64,
}

impl Default for Nuisance {
    fn default() -> Self {
        Self { readout_fidelity: 1.0, rabi_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconstructionConfig {
    pub k_max: usize,
    pub fit_readout_fidelity: bool,
    pub fit_bare_rabi: bool,
    pub restarts: usize,
    /// Relative log-likelihood change counted as stalled.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Lamb-Dicke factor and contrast decay of the model; its readout
    /// fidelity is the starting value, or the fixed value when not fitted.
    pub coupling: CouplingConfig,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            k_max: 6,
            fit_readout_fidelity: true,
            fit_bare_rabi: true,
            restarts: 4,
            tolerance: 1e-10,
            max_iterations: 1000,
            seed: 0,
            coupling: CouplingConfig { readout_fidelity: 0.95, ..CouplingConfig::default() },
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 {
            return Err(invalid("k_max must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(invalid("restarts and max_iterations must be positive"));
        }
        self.coupling.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ReconstructionWarning {
    /// A branch is missing or has fewer than [`MIN_POINTS_PER_BRANCH`] points;
    /// without both sidebands, several phonon numbers share nearly the same
    /// carrier frequency.
    Identifiability,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconstructionResult {
    pub ppd: PhononDistribution,
    pub readout_fidelity: f64,
    pub rabi_scale: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Largest log-likelihood gap between restarts.
    pub restart_spread: f64,
    pub iterations: usize,
    /// Log-likelihood after each accepted step of the winning restart.
    pub trace: Vec<f64>,
    pub warnings: Vec<ReconstructionWarning>,
}

impl ReconstructionResult {
    pub fn nuisance(&self) -> Nuisance {
        Nuisance { readout_fidelity: self.readout_fidelity, rabi_scale: self.rabi_scale }
    }
}

struct Obs {
    branch: usize,
    theta: f64,
    shots: f64,
    up: f64,
}

/// Binomial log-likelihood of a dataset as a function of the unconstrained
/// parameter vector `[z_0..z_K, w?, v?]`.
pub struct Objective {
    obs: Vec<Obs>,
    table: CouplingTable,
    ln_binom: f64,
    decay: f64,
    fit_readout: bool,
    fit_scale: bool,
    fixed: Nuisance,
    total_shots: f64,
}

impl core::fmt::Debug for Objective {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Objective")
            .field("points", &self.obs.len())
            .field("k_max", &self.table.k_max())
            .finish()
    }
}

impl Objective {
    pub fn new(data: &RabiDataset, config: &ReconstructionConfig) -> Self {
        let obs: Vec<Obs> = data
            .records()
            .map(|(b, p)| Obs { branch: b.index(), theta: p.theta, shots: p.shots as f64, up: p.up_counts as f64 })
            .collect();
        let ln_binom = data
            .records()
            .map(|(_, p)| {
                ln_factorial(p.shots as usize)
                    - ln_factorial(p.up_counts as usize)
                    - ln_factorial((p.shots - p.up_counts) as usize)
            })
            .sum();
        let total_shots = obs.iter().map(|o| o.shots).sum::<f64>().max(1.0);
        Self {
            obs,
            table: CouplingTable::new(config.coupling.eta, config.k_max),
            ln_binom,
            decay: config.coupling.contrast_decay,
            fit_readout: config.fit_readout_fidelity,
            fit_scale: config.fit_bare_rabi,
            fixed: Nuisance { readout_fidelity: config.coupling.readout_fidelity, rabi_scale: 1.0 },
            total_shots,
        }
    }

    pub fn dim(&self) -> usize {
        self.levels() + self.fit_readout as usize + self.fit_scale as usize
    }

    fn levels(&self) -> usize {
        self.table.k_max() + 1
    }

    /// Maps unconstrained parameters to `(p, nuisance)`.
    pub fn unpack(&self, params: &[f64]) -> (Vec<f64>, Nuisance) {
        let k = self.levels();
        let probs = softmax(&params[..k]);
        let mut idx = k;
        let mut nuis = self.fixed;
        if self.fit_readout {
            nuis.readout_fidelity = 0.5 + 0.5 * sigmoid(params[idx]);
            idx += 1;
        }
        if self.fit_scale {
            nuis.rabi_scale = libm::exp(params[idx]);
        }
        (probs, nuis)
    }

    /// Inverse of [`Objective::unpack`] for strictly positive `probs`.
    pub fn pack(&self, probs: &[f64], nuis: Nuisance) -> Vec<f64> {
        let mut params: Vec<f64> = probs.iter().map(|p| libm::log(p.max(1e-300))).collect();
        let mean = params.iter().sum::<f64>() / params.len() as f64;
        params.iter_mut().for_each(|z| *z -= mean);
        if self.fit_readout {
            let s = (2.0 * nuis.readout_fidelity - 1.0).clamp(1e-12, 1.0 - 1e-12);
            params.push(libm::log(s / (1.0 - s)));
        }
        if self.fit_scale {
            params.push(libm::log(nuis.rabi_scale));
        }
        params
    }

    /// Log-likelihood for explicit probabilities and nuisances.
    pub fn value_at(&self, probs: &[f64], nuis: Nuisance) -> f64 {
        let mut ll = self.ln_binom;
        for o in &self.obs {
            let raw = raw_signal(probs, self.table.row(branch_of(o.branch)), o.theta, nuis.rabi_scale, self.decay);
            let p = apply_readout(raw, nuis.readout_fidelity).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            ll += o.up * libm::log(p) + (o.shots - o.up) * libm::log(1.0 - p);
        }
        ll
    }

    /// Log-likelihood and its gradient with respect to the unconstrained
    /// parameters.
    pub fn value_and_gradient(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let k_levels = self.levels();
        let (probs, nuis) = self.unpack(params);
        let f = nuis.readout_fidelity;
        let s = nuis.rabi_scale;
        let contrast = 2.0 * f - 1.0;
        let mut d_prob = vec![0.0; k_levels];
        let mut d_f = 0.0;
        let mut d_s = 0.0;
        let mut ll = self.ln_binom;
        let mut terms = vec![0.0; k_levels];
        for o in &self.obs {
            let row = self.table.row(branch_of(o.branch));
            let env = if self.decay > 0.0 { libm::exp(-self.decay * o.theta) } else { 1.0 };
            let mut raw = 0.0;
            let mut d_raw_s = 0.0;
            for k in 0..k_levels {
                let phase = row[k] * s * o.theta;
                let c = 0.5 * (1.0 + env * libm::cos(phase));
                raw += probs[k] * c;
                terms[k] = c;
                if self.fit_scale {
                    d_raw_s -= 0.5 * probs[k] * env * row[k] * o.theta * libm::sin(phase);
                }
            }
            let p_unclamped = (1.0 - f) + contrast * raw;
            let p = p_unclamped.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            ll += o.up * libm::log(p) + (o.shots - o.up) * libm::log(1.0 - p);
            if p != p_unclamped {
                continue;
            }
            let g = o.up / p - (o.shots - o.up) / (1.0 - p);
            for (d, c) in d_prob.iter_mut().zip(&terms) {
                *d += g * contrast * c;
            }
            d_f += g * (2.0 * raw - 1.0);
            d_s += g * contrast * d_raw_s;
        }
        let mean: f64 = probs.iter().zip(&d_prob).map(|(p, d)| p * d).sum();
        for k in 0..k_levels {
            grad[k] = probs[k] * (d_prob[k] - mean);
        }
        let mut idx = k_levels;
        if self.fit_readout {
            let sig = 2.0 * f - 1.0;
            grad[idx] = d_f * 0.5 * sig * (1.0 - sig);
            idx += 1;
        }
        if self.fit_scale {
            grad[idx] = d_s * s;
        }
        ll
    }
}

fn branch_of(index: usize) -> Branch {
    Branch::ALL[index]
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let e: Vec<f64> = z.iter().map(|v| libm::exp(v - max)).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

/// Binomial log-likelihood of `data` under `ppd` and the nuisances.
pub fn log_likelihood(data: &RabiDataset, ppd: &PhononDistribution, nuisance: &Nuisance, coupling: &CouplingConfig) -> f64 {
    let config = ReconstructionConfig { k_max: ppd.k_max().max(1), coupling: *coupling, ..Default::default() };
    let probs: Vec<f64> = (0..=config.k_max).map(|k| ppd.get(k)).collect();
    Objective::new(data, &config).value_at(&probs, *nuisance)
}

fn identifiability(data: &RabiDataset) -> Vec<ReconstructionWarning> {
    let ok = Branch::ALL
        .iter()
        .all(|b| data.branch(*b).is_some_and(|d| d.points.len() >= MIN_POINTS_PER_BRANCH));
    if ok {
        Vec::new()
    } else {
        log::warn!("dataset lacks a branch or has fewer than {MIN_POINTS_PER_BRANCH} points on one; phonon numbers may be unidentifiable");
        vec![ReconstructionWarning::Identifiability]
    }
}

/// Multi-start maximum-likelihood fit over the probability simplex of
/// dimension `k_max + 1` and the enabled nuisances.
///
/// Restart 0 starts from the uniform distribution with the configured
/// readout fidelity and unit pulse-area scale; later restarts perturb the
/// logits and nuisances with a generator seeded from `config.seed` and the
/// restart index. The best restart wins; non-convergence is reported through
/// the `converged` flag.
pub fn reconstruct(data: &RabiDataset, config: &ReconstructionConfig) -> Result<ReconstructionResult> {
    config.validate()?;
    if data.num_points() == 0 {
        return Err(invalid("dataset is empty"));
    }
    let warnings = identifiability(data);
    let objective = Objective::new(data, config);
    let opts = BfgsOptions {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        gradient_tolerance: 1e-9,
    };
    let levels = config.k_max + 1;
    let uniform = vec![1.0 / levels as f64; levels];
    let start = objective.pack(&uniform, Nuisance { readout_fidelity: config.coupling.readout_fidelity, rabi_scale: 1.0 });
    let scale = objective.total_shots;

    let mut best: Option<(crate::optim::Minimum, f64)> = None;
    let mut worst_ll = f64::INFINITY;
    for restart in 0..config.restarts {
        let mut x0 = start.clone();
        if restart > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(restart as u64));
            let last = x0.len() - 1;
            for (i, z) in x0.iter_mut().enumerate() {
                let width = if i < levels { 1.5 } else if config.fit_bare_rabi && i == last { 0.01 } else { 0.5 };
                *z += width * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        let m = minimize_bfgs(
            |x, g| {
                let ll = objective.value_and_gradient(x, g);
                g.iter_mut().for_each(|v| *v = -*v / scale);
                -ll / scale
            },
            &x0,
            &opts,
        );
        let ll = -m.value * scale;
        worst_ll = worst_ll.min(ll);
        if best.as_ref().is_none_or(|(_, b)| ll > *b) {
            best = Some((m, ll));
        }
    }
    let (m, ll) = best.expect("at least one restart");
    let (probs, nuis) = objective.unpack(&m.x);
    Ok(ReconstructionResult {
        ppd: PhononDistribution::from_weights(&probs)?,
        readout_fidelity: nuis.readout_fidelity,
        rabi_scale: nuis.rabi_scale,
        log_likelihood: ll,
        converged: m.converged,
        restart_spread: ll - worst_ll,
        iterations: m.iterations,
        trace: m.history.iter().map(|v| -v * scale).collect(),
        warnings,
    })
}

/// Per-level standard errors from a parametric bootstrap.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapErrors {
    pub std_errors: Vec<f64>,
    pub resamples: usize,
    /// Resamples whose reconstruction did not converge.
    pub nonconverged: usize,
}

/// Refits binomial resamples drawn at the fitted model and reports the
/// per-level standard deviation of the refitted distributions. Resample `r`
/// uses seed `config.seed + r + 1`.
pub fn bootstrap_errors(data: &RabiDataset, config: &ReconstructionConfig, resamples: usize) -> Result<BootstrapErrors> {
    if resamples < 50 {
        return Err(invalid("bootstrap needs at least 50 resamples"));
    }
    let fit = reconstruct(data, config)?;
    bootstrap_from_fit(data, config, &fit, resamples)
}

/// Bootstrap around an existing fit of `data`.
pub fn bootstrap_from_fit(
    data: &RabiDataset,
    config: &ReconstructionConfig,
    fit: &ReconstructionResult,
    resamples: usize,
) -> Result<BootstrapErrors> {
    if resamples < 50 {
        return Err(invalid("bootstrap needs at least 50 resamples"));
    }
    let table = CouplingTable::new(config.coupling.eta, config.k_max);
    let probs: Vec<f64> = (0..=config.k_max).map(|k| fit.ppd.get(k)).collect();
    let model = |b: Branch, theta: f64| {
        let raw = raw_signal(&probs, table.row(b), theta, fit.rabi_scale, config.coupling.contrast_decay);
        apply_readout(raw, fit.readout_fidelity)
    };
    let levels = config.k_max + 1;
    let mut sum = vec![0.0; levels];
    let mut sum_sq = vec![0.0; levels];
    let mut nonconverged = 0;
    for r in 0..resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(r as u64 + 1));
        let mut branches = Vec::with_capacity(3);
        for bd in data.branches() {
            let mut points = Vec::with_capacity(bd.points.len());
            for p in &bd.points {
                let prob = model(bd.branch, p.theta);
                let dist = Binomial::new(p.shots as u64, prob).map_err(|_| invalid("invalid model probability"))?;
                points.push(RabiPoint { theta: p.theta, shots: p.shots, up_counts: dist.sample(&mut rng) as u32 });
            }
            branches.push(BranchData { branch: bd.branch, points });
        }
        let refit = reconstruct(&RabiDataset::new(branches)?, config)?;
        if !refit.converged {
            nonconverged += 1;
        }
        for k in 0..levels {
            let v = refit.ppd.get(k);
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    let n = resamples as f64;
    let std_errors = (0..levels)
        .map(|k| {
            let mean = sum[k] / n;
            libm::sqrt(((sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0))
        })
        .collect();
    Ok(BootstrapErrors { std_errors, resamples, nonconverged })
}

/// Best-fit displacement for a reconstructed distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaFit {
    pub alpha_abs: f64,
    /// Sum of squared differences at the optimum.
    pub residual: f64,
    /// Another local minimum lies within `1e−3` in residual.
    pub ambiguous: bool,
}

/// Upper end of the `|α|` scan.
pub const ALPHA_SCAN_MAX: f64 = 5.0;
const ALPHA_SCAN_STEP: f64 = 0.005;

/// Fits `|α|` so that the preparation-mixed displaced distribution,
/// restricted to the levels of `ppd` and renormalized there, matches `ppd`
/// in least squares. Scans `[0, 5]` and refines the best bracket by golden
/// section. Without `rho0` the pure Fock state `|n⟩` is used.
pub fn extract_alpha(ppd: &PhononDistribution, n: usize, rho0: Option<&DiagonalDensity>) -> Result<AlphaFit> {
    let pure;
    let rho0 = match rho0 {
        Some(r) => r,
        None => {
            pure = DiagonalDensity::pure(n);
            &pure
        }
    };
    let k_max = ppd.k_max();
    let residual = |alpha: f64| -> f64 {
        let model = convolved_dns_ppd(alpha, rho0, k_max).expect("finite alpha");
        let total = model.sum();
        if total <= 0.0 {
            return f64::INFINITY;
        }
        (0..=k_max)
            .map(|k| {
                let d = ppd.get(k) - model.get(k) / total;
                d * d
            })
            .sum()
    };
    let steps = libm::round(ALPHA_SCAN_MAX / ALPHA_SCAN_STEP) as usize;
    let grid: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let a = i as f64 * ALPHA_SCAN_STEP;
            (a, residual(a))
        })
        .collect();
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid.len() {
        let left = if i == 0 { f64::INFINITY } else { grid[i - 1].1 };
        let right = grid.get(i + 1).map_or(f64::INFINITY, |g| g.1);
        if grid[i].1 <= left && grid[i].1 < right {
            let lo = (grid[i].0 - ALPHA_SCAN_STEP).max(0.0);
            let hi = (grid[i].0 + ALPHA_SCAN_STEP).min(ALPHA_SCAN_MAX);
            let (a, r) = golden_min(residual, lo, hi, 1e-9);
            let (a, r) = if grid[i].1 < r { grid[i] } else { (a, r) };
            minima.push((a, r));
        }
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (alpha_abs, best) = *minima.first().ok_or(Error::InvalidArgument("no residual minimum found".into()))?;
    let ambiguous = minima.get(1).is_some_and(|m| m.1 - best < 1e-3 && (m.0 - alpha_abs).abs() > 2.0 * ALPHA_SCAN_STEP);
    if ambiguous {
        log::warn!("alpha fit has near-degenerate minima; reporting the best at {alpha_abs}");
    }
    Ok(AlphaFit { alpha_abs, residual: best, ambiguous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sideband::{expected_dataset, synthesize_dataset, ThetaGrid};
    use approx::assert_relative_eq;

    fn truth() -> PhononDistribution {
        PhononDistribution::from_weights(&[0.3, 0.25, 0.2, 0.1, 0.08, 0.05, 0.02]).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let coupling = CouplingConfig { readout_fidelity: 0.97, ..Default::default() };
        let data = synthesize_dataset(&truth(), &coupling, &ThetaGrid::default_for(0.21), 200, 11).unwrap();
        let config = ReconstructionConfig::default();
        let obj = Objective::new(&data, &config);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x: Vec<f64> = (0..obj.dim()).map(|i| if i == obj.dim() - 1 { 0.02 * rng.random::<f64>() } else { rng.random::<f64>() * 2.0 - 1.0 }).collect();
            let mut g = vec![0.0; obj.dim()];
            obj.value_and_gradient(&x, &mut g);
            for i in 0..obj.dim() {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let mut tmp = vec![0.0; obj.dim()];
                let fd = (obj.value_and_gradient(&xp, &mut tmp) - obj.value_and_gradient(&xm, &mut tmp)) / (2.0 * h);
                assert!((g[i] - fd).abs() <= 1e-5 * fd.abs().max(1.0), "i={i} analytic {} fd {fd}", g[i]);
            }
        }
    }

    #[test]
    fn likelihood_is_non_positive_and_zero_for_certain_outcomes() {
        let coupling = CouplingConfig::default();
        let ground = PhononDistribution::pure(0, 6).unwrap();
        let data = expected_dataset(&ground, &coupling, &ThetaGrid::uniform(12, 40.0), 200).unwrap();
        let red_only = RabiDataset::new(vec![data.branch(Branch::Red).unwrap().clone()]).unwrap();
        let ll = log_likelihood(&red_only, &ground, &Nuisance::default(), &coupling);
        assert!(ll <= 0.0 && ll > -1e-5, "{ll}");
        assert!(log_likelihood(&data, &truth(), &Nuisance::default(), &coupling) < 0.0);
    }

    #[test]
    fn noiseless_ground_state() {
        let coupling = CouplingConfig::default();
        let ground = PhononDistribution::pure(0, 6).unwrap();
        let data = expected_dataset(&ground, &coupling, &ThetaGrid::default_for(0.21), 200).unwrap();
        let r = reconstruct(&data, &ReconstructionConfig::default()).unwrap();
        assert!(r.ppd.get(0) >= 0.99, "{:?}", r.ppd);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn accepted_steps_never_decrease_likelihood() {
        let coupling = CouplingConfig { readout_fidelity: 0.97, ..Default::default() };
        let data = synthesize_dataset(&truth(), &coupling, &ThetaGrid::default_for(0.21), 200, 2).unwrap();
        let r = reconstruct(&data, &ReconstructionConfig::default()).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()));
        assert!(r.ppd.probs().iter().all(|&p| p >= 0.0));
        assert_relative_eq!(r.ppd.sum(), 1.0, epsilon = 1e-12);
        assert!(r.log_likelihood <= 0.0);
    }

    #[test]
    fn carrier_only_warns() {
        let coupling = CouplingConfig::default();
        let grid = ThetaGrid { red: vec![], carrier: ThetaGrid::default_for(0.21).carrier, blue: vec![] };
        let data = synthesize_dataset(&truth(), &coupling, &grid, 200, 1).unwrap();
        let r = reconstruct(&data, &ReconstructionConfig::default()).unwrap();
        assert_eq!(r.warnings, vec![ReconstructionWarning::Identifiability]);
    }

    #[test]
    fn alpha_fit_of_model_itself() {
        let rho0 = DiagonalDensity::imperfect_fock(1, 0.77).unwrap();
        let model = convolved_dns_ppd(1.5, &rho0, 6).unwrap().renormalized_to(6).unwrap();
        let fit = extract_alpha(&model, 1, Some(&rho0)).unwrap();
        assert!((fit.alpha_abs - 1.5).abs() < 1e-3, "{fit:?}");
        let zero = extract_alpha(rho0.diag(), 1, Some(&rho0)).unwrap();
        assert!(zero.alpha_abs < 1e-3, "{zero:?}");
    }

    #[test]
    fn bootstrap_needs_resamples() {
        let coupling = CouplingConfig::default();
        let data = expected_dataset(&truth(), &coupling, &ThetaGrid::uniform(12, 40.0), 200).unwrap();
        assert!(bootstrap_errors(&data, &ReconstructionConfig::default(), 10).is_err());
    }
}
