use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("distribution is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("mismatched truncation: expected k_max = {expected}, got {found}")]
    MismatchedKMax { expected: usize, found: usize },
    #[error("missing pure distribution for m = {0}")]
    MissingComponent(usize),
    #[error("trap calibration failed: {0}")]
    Calibration(String),
    #[error("waveform is under-sampled: sample rate {sample_rate_hz:.3e} Hz < 20 x cutoff {cutoff_hz:.3e} Hz")]
    Aliasing { sample_rate_hz: f64, cutoff_hz: f64 },
    #[error("lost the bracketed potential minimum at t = {t:.3e} s")]
    WellLost { t: f64 },
    #[error("minimum track not settled at t_end (residual |alpha| rate {residual:.3e})")]
    Unsettled { residual: f64 },
    #[error("integrator energy drift {drift:.3e} per 100 periods exceeds 1e-6 after {halvings} step halvings")]
    EnergyDrift { drift: f64, halvings: u32 },
    #[error("trajectories n = {n} and k = {k} do not intersect at |alpha| = {alpha_abs}")]
    ClassicallyForbidden { n: usize, k: usize, alpha_abs: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
