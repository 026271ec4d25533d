//! Carrier and first-sideband Rabi flopping of a phonon mixture.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::fock::PhononDistribution;
use crate::special::{laguerre, ln_factorial};

/// Tolerance on the normalization of distributions fed to the signal model.
pub const SIGNAL_NORM_TOL: f64 = 1e-6;

/// Default number of repetitions per analysis setting.
pub const DEFAULT_SHOTS: u32 = 200;

/// Motional change of the analysis transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "i32", into = "i32"))]
pub enum Branch {
    Red,
    Carrier,
    Blue,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Red, Branch::Carrier, Branch::Blue];

    pub fn delta_n(self) -> i32 {
        match self {
            Branch::Red => -1,
            Branch::Carrier => 0,
            Branch::Blue => 1,
        }
    }

    pub fn index(self) -> usize {
        (self.delta_n() + 1) as usize
    }
}

impl TryFrom<i32> for Branch {
    type Error = Error;
    fn try_from(delta_n: i32) -> Result<Self> {
        match delta_n {
            -1 => Ok(Branch::Red),
            0 => Ok(Branch::Carrier),
            1 => Ok(Branch::Blue),
            other => Err(invalid(alloc::format!("delta_n = {other} outside {{-1, 0, 1}}"))),
        }
    }
}

impl From<Branch> for i32 {
    fn from(b: Branch) -> i32 {
        b.delta_n()
    }
}

/// Coupling strength of `|k⟩ → |k + Δn⟩` relative to the bare Rabi frequency:
/// `e^{−η²/2} η^{|Δn|} √(n_<!/n_>!) L_{n_<}^{|Δn|}(η²)`.
pub fn matrix_element(k: usize, delta_n: i32, eta: f64) -> Result<f64> {
    let branch = Branch::try_from(delta_n)?;
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(invalid("eta must be finite and non-negative"));
    }
    Ok(coupling(k, branch, eta))
}

fn coupling(k: usize, branch: Branch, eta: f64) -> f64 {
    let target = k as i64 + branch.delta_n() as i64;
    if target < 0 {
        return 0.0;
    }
    let (lo, hi) = (k.min(target as usize), k.max(target as usize));
    let dn = (hi - lo) as i32;
    let eta2 = eta * eta;
    let ratio = libm::exp(0.5 * (ln_factorial(lo) - ln_factorial(hi)));
    libm::exp(-0.5 * eta2) * libm::pow(eta, dn as f64) * ratio * laguerre(lo, dn as f64, eta2)
}

/// Precomputed coupling strengths `M_{k,Δn}` for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    rows: [Vec<f64>; 3],
}

impl CouplingTable {
    pub fn new(eta: f64, k_max: usize) -> Self {
        let row = |b| (0..=k_max).map(|k| coupling(k, b, eta)).collect();
        Self { rows: [row(Branch::Red), row(Branch::Carrier), row(Branch::Blue)] }
    }

    pub fn row(&self, branch: Branch) -> &[f64] {
        &self.rows[branch.index()]
    }

    pub fn k_max(&self) -> usize {
        self.rows[0].len() - 1
    }
}

/// Measurement-model parameters shared by synthesis and reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingConfig {
    /// Lamb-Dicke factor.
    pub eta: f64,
    /// Probability that readout reports the true spin state.
    pub readout_fidelity: f64,
    /// Pulse area per unit drive time; only used to convert time-stamped data.
    pub bare_rabi: f64,
    /// Exponential contrast decay per radian of pulse area. Zero disables it.
    #[cfg_attr(feature = "serde", serde(default))]
    pub contrast_decay: f64,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self { eta: 0.21, readout_fidelity: 1.0, bare_rabi: 1.0, contrast_decay: 0.0 }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid("eta must lie in (0, 1)"));
        }
        if !(self.readout_fidelity > 0.5 && self.readout_fidelity <= 1.0) {
            return Err(invalid("readout fidelity must lie in (0.5, 1]"));
        }
        if !(self.bare_rabi > 0.0 && self.bare_rabi.is_finite()) {
            return Err(invalid("bare Rabi frequency must be positive"));
        }
        if !(self.contrast_decay >= 0.0 && self.contrast_decay.is_finite()) {
            return Err(invalid("contrast decay must be non-negative"));
        }
        Ok(())
    }

    /// Pulse area reached after driving for `duration` at the bare Rabi rate.
    pub fn pulse_area(&self, duration: f64) -> f64 {
        self.bare_rabi * duration
    }
}

/// Ideal spin-up probability before readout error, `½ Σ p_k (1 + e^{−γθ} cos(M_k s θ))`.
pub(crate) fn raw_signal(probs: &[f64], couplings: &[f64], theta: f64, scale: f64, decay: f64) -> f64 {
    let envelope = if decay > 0.0 { libm::exp(-decay * theta) } else { 1.0 };
    0.5 * probs
        .iter()
        .zip(couplings)
        .map(|(p, m)| p * (1.0 + envelope * libm::cos(m * scale * theta)))
        .sum::<f64>()
}

/// Readout remap `f·P + (1 − f)(1 − P)`.
pub(crate) fn apply_readout(p: f64, fidelity: f64) -> f64 {
    (fidelity * p + (1.0 - fidelity) * (1.0 - p)).clamp(0.0, 1.0)
}

/// Observed spin-up probability after an analysis pulse of area `theta` on
/// branch `delta_n`.
pub fn rabi_signal(ppd: &PhononDistribution, delta_n: i32, theta: f64, config: &CouplingConfig) -> Result<f64> {
    let branch = Branch::try_from(delta_n)?;
    config.validate()?;
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(invalid("pulse area must be finite and non-negative"));
    }
    if !ppd.is_normalized(SIGNAL_NORM_TOL) {
        return Err(Error::NotNormalized { sum: ppd.sum() });
    }
    let couplings: Vec<f64> = (0..=ppd.k_max()).map(|k| coupling(k, branch, config.eta)).collect();
    let p = raw_signal(ppd.probs(), &couplings, theta, 1.0, config.contrast_decay);
    Ok(apply_readout(p, config.readout_fidelity))
}

/// One analysis setting: pulse area, repetitions and spin-up outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RabiPoint {
    pub theta: f64,
    pub shots: u32,
    pub up_counts: u32,
}

/// All points measured on one branch, ordered by increasing pulse area.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchData {
    pub branch: Branch,
    pub points: Vec<RabiPoint>,
}

/// Three-branch Rabi flopping record. Branches appear at most once, sorted
/// red, carrier, blue.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<BranchData>", into = "Vec<BranchData>"))]
pub struct RabiDataset {
    branches: Vec<BranchData>,
}

impl RabiDataset {
    pub fn new(mut branches: Vec<BranchData>) -> Result<Self> {
        branches.sort_by_key(|b| b.branch);
        for w in branches.windows(2) {
            if w[0].branch == w[1].branch {
                return Err(invalid("duplicate branch in dataset"));
            }
        }
        for b in &branches {
            validate_points(&b.points)?;
        }
        Ok(Self { branches })
    }

    /// Groups flat `(branch, point)` records in any order, sorting each
    /// branch by pulse area.
    pub fn from_records(records: impl IntoIterator<Item = (Branch, RabiPoint)>) -> Result<Self> {
        let mut branches: Vec<BranchData> = Vec::new();
        for (branch, point) in records {
            match branches.iter_mut().find(|b| b.branch == branch) {
                Some(b) => b.points.push(point),
                None => branches.push(BranchData { branch, points: alloc::vec![point] }),
            }
        }
        for b in &mut branches {
            b.points.sort_by(|x, y| x.theta.total_cmp(&y.theta));
        }
        Self::new(branches)
    }

    pub fn branches(&self) -> &[BranchData] {
        &self.branches
    }

    pub fn branch(&self, branch: Branch) -> Option<&BranchData> {
        self.branches.iter().find(|b| b.branch == branch)
    }

    /// Flat `(branch, point)` view in storage order.
    pub fn records(&self) -> impl Iterator<Item = (Branch, &RabiPoint)> {
        self.branches.iter().flat_map(|b| b.points.iter().map(move |p| (b.branch, p)))
    }

    pub fn num_points(&self) -> usize {
        self.branches.iter().map(|b| b.points.len()).sum()
    }
}

impl TryFrom<Vec<BranchData>> for RabiDataset {
    type Error = Error;
    fn try_from(branches: Vec<BranchData>) -> Result<Self> {
        Self::new(branches)
    }
}

impl From<RabiDataset> for Vec<BranchData> {
    fn from(d: RabiDataset) -> Self {
        d.branches
    }
}

fn validate_points(points: &[RabiPoint]) -> Result<()> {
    for p in points {
        if !(p.theta.is_finite() && p.theta >= 0.0) {
            return Err(invalid("pulse areas must be finite and non-negative"));
        }
        if p.shots == 0 {
            return Err(invalid("shots must be positive"));
        }
        if p.up_counts > p.shots {
            return Err(invalid("up_counts exceeds shots"));
        }
    }
    if points.windows(2).any(|w| !(w[1].theta > w[0].theta)) {
        return Err(invalid("pulse-area grid must be strictly increasing"));
    }
    Ok(())
}

/// Pulse-area grids for each branch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThetaGrid {
    pub red: Vec<f64>,
    pub carrier: Vec<f64>,
    pub blue: Vec<f64>,
}

impl ThetaGrid {
    /// The same grid on all three branches.
    pub fn shared(theta: Vec<f64>) -> Self {
        Self { red: theta.clone(), carrier: theta.clone(), blue: theta }
    }

    /// `points` equally spaced areas in `(0, span]` on every branch.
    pub fn uniform(points: usize, span: f64) -> Self {
        Self::shared(linspace_open(points, span))
    }

    /// Uniform grids with separate carrier and sideband spans.
    pub fn split(points: usize, carrier_span: f64, sideband_span: f64) -> Self {
        let sb = linspace_open(points, sideband_span);
        Self { red: sb.clone(), carrier: linspace_open(points, carrier_span), blue: sb }
    }

    /// Default analysis grid: 40 points per branch, carrier over 20 periods
    /// and sidebands over four ground-state blue-sideband periods.
    pub fn default_for(eta: f64) -> Self {
        let tau = 2.0 * core::f64::consts::PI;
        Self::split(40, 20.0 * tau, 4.0 * tau / eta)
    }

    pub fn get(&self, branch: Branch) -> &[f64] {
        match branch {
            Branch::Red => &self.red,
            Branch::Carrier => &self.carrier,
            Branch::Blue => &self.blue,
        }
    }
}

fn linspace_open(points: usize, span: f64) -> Vec<f64> {
    (1..=points).map(|i| span * i as f64 / points as f64).collect()
}

/// Draws spin-up counts `~ Binomial(shots, P)` at every grid point with a
/// ChaCha8 generator seeded from `seed`. Branches are drawn red, carrier,
/// blue, each in grid order.
pub fn synthesize_dataset(
    ppd: &PhononDistribution,
    config: &CouplingConfig,
    theta_grid: &ThetaGrid,
    shots: u32,
    seed: u64,
) -> Result<RabiDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_dataset(ppd, config, theta_grid, shots, |p| {
        let dist = Binomial::new(shots as u64, p).map_err(|_| invalid("invalid binomial probability"))?;
        Ok(dist.sample(&mut rng) as u32)
    })
}

/// Noise-free dataset with `up_counts = round(shots · P)`.
pub fn expected_dataset(
    ppd: &PhononDistribution,
    config: &CouplingConfig,
    theta_grid: &ThetaGrid,
    shots: u32,
) -> Result<RabiDataset> {
    build_dataset(ppd, config, theta_grid, shots, |p| Ok(libm::round(p * shots as f64) as u32))
}

fn build_dataset(
    ppd: &PhononDistribution,
    config: &CouplingConfig,
    theta_grid: &ThetaGrid,
    shots: u32,
    mut draw: impl FnMut(f64) -> Result<u32>,
) -> Result<RabiDataset> {
    config.validate()?;
    if shots == 0 {
        return Err(invalid("shots must be positive"));
    }
    if Branch::ALL.iter().all(|b| theta_grid.get(*b).is_empty()) {
        return Err(invalid("pulse-area grid is empty"));
    }
    if !ppd.is_normalized(SIGNAL_NORM_TOL) {
        return Err(Error::NotNormalized { sum: ppd.sum() });
    }
    let mut branches = Vec::with_capacity(3);
    for branch in Branch::ALL {
        let grid = theta_grid.get(branch);
        if grid.is_empty() {
            continue;
        }
        let couplings: Vec<f64> = (0..=ppd.k_max()).map(|k| coupling(k, branch, config.eta)).collect();
        let mut points = Vec::with_capacity(grid.len());
        for &theta in grid {
            let p = apply_readout(
                raw_signal(ppd.probs(), &couplings, theta, 1.0, config.contrast_decay),
                config.readout_fidelity,
            );
            points.push(RabiPoint { theta, shots, up_counts: draw(p)? });
        }
        branches.push(BranchData { branch, points });
    }
    RabiDataset::new(branches)
}
