//! Command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use displaced_core::fock::{convolved_dns_ppd, dns_ppd, DiagonalDensity, DnsParams};
use displaced_core::kick::{gaussian_segment_model, integrate_eom, simulate_kick, sweep_alpha_vs_voltage, KickResult};
use displaced_core::semiclassics::compare_minima;
use displaced_core::sideband::synthesize_dataset;
use displaced_core::tomography::{bootstrap_from_fit, extract_alpha, reconstruct};

use crate::config::{Config, CONFIG_ENV};
use crate::error::{LabError, Result};
use crate::io::{
    ppd_records, read_dataset, read_ppd, read_waveform, render_dataset, render_json, render_table, render_waveform,
    DatasetMetadata, Format, QuarticRecord, ReconstructionOutput, Sink, SweepRecord,
};
use crate::pipeline::{run_and_write, ExperimentPlan};

#[derive(Debug, Parser)]
#[command(name = "displaced", version, about = "Displaced number states: kick simulation, Rabi data, reconstruction")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Configuration file (TOML, or JSON by extension).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; results go to standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phonon distribution of a displaced number state.
    Ppd(PpdArgs),
    /// Simulate one voltage kick.
    Kick(KickArgs),
    /// Displacement versus kick voltage with a quartic fit.
    Sweep(SweepArgs),
    /// Synthesize a three-branch Rabi dataset.
    Synth(SynthArgs),
    /// Maximum-likelihood reconstruction from a dataset file.
    Fit(FitArgs),
    /// Fit the displacement of a reconstructed distribution.
    Alpha(AlphaArgs),
    /// Semiclassical versus exact interference minima.
    Semiclassics(SemiclassicsArgs),
    /// Full experiment: kicks, synthesis, reconstruction, displacement fits.
    Pipeline,
}

#[derive(Debug, Args)]
pub struct PpdArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 6)]
    pub kmax: usize,
    /// Preparation fidelity; adds the mixed column when given.
    #[arg(long)]
    pub fidelity: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KickArgs {
    /// Set voltage; defaults to `kick_voltage_v` from the configuration.
    #[arg(long)]
    pub volts: Option<f64>,
    /// Segment-B waveform (`t_s, volts`) used as is instead of the filtered square pulse.
    #[arg(long)]
    pub waveform: Option<PathBuf>,
    /// Also write the trajectory and the applied waveform.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2.0)]
    pub v_max: f64,
    #[arg(long, default_value_t = 0.2)]
    pub v_step: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    /// Preparation fidelity on `|n⟩`.
    #[arg(long, default_value_t = 1.0)]
    pub fidelity: f64,
    /// Shots per point; defaults to the configuration.
    #[arg(long)]
    pub shots: Option<u32>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Parametric bootstrap resamples (at least 50).
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    /// Distribution file: `k, p_k` CSV or a reconstruction JSON.
    #[arg(long)]
    pub ppd: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Zero-kick distribution used as the preparation.
    #[arg(long, conflicts_with = "fidelity")]
    pub rho0: Option<PathBuf>,
    /// Model preparation with this fidelity instead of a file.
    #[arg(long)]
    pub fidelity: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SemiclassicsArgs {
    /// Pairs `n:k`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1:1,2:2,1:2,2:3,3:3")]
    pub pairs: Vec<String>,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Results were written but an optimizer did not converge.
    NotConverged,
}

pub fn run(cli: Cli) -> Result<Status> {
    let config = Config::resolve(cli.common.config.as_deref())?;
    let mut sink = Sink::new(cli.common.out.clone())?;
    let c = &cli.common;
    match cli.command {
        Command::Ppd(a) => ppd(&a, c, &mut sink),
        Command::Kick(a) => kick(&a, &config, c, &mut sink),
        Command::Sweep(a) => sweep(&a, &config, c, &mut sink),
        Command::Synth(a) => synth(&a, &config, c, &mut sink),
        Command::Fit(a) => fit(&a, &config, c, &mut sink),
        Command::Alpha(a) => alpha(&a, c, &mut sink),
        Command::Semiclassics(a) => semiclassics(&a, c, &mut sink),
        Command::Pipeline => pipeline(config, c, &mut sink),
    }
}

fn name(stem: &str, format: Format) -> String {
    format!("{stem}.{}", format.extension())
}

#[derive(Debug, Serialize, Deserialize)]
struct PpdRow {
    k: usize,
    p_k: f64,
    p_k_mixed: Option<f64>,
}

fn ppd(a: &PpdArgs, c: &Common, sink: &mut Sink) -> Result<Status> {
    let pure = dns_ppd(DnsParams::real(a.n, a.alpha)?, a.kmax)?;
    let mixed = match a.fidelity {
        Some(f) => Some(convolved_dns_ppd(a.alpha, &DiagonalDensity::imperfect_fock(a.n, f)?, a.kmax)?),
        None => None,
    };
    let rows: Vec<PpdRow> = (0..=a.kmax)
        .map(|k| PpdRow { k, p_k: pure.get(k), p_k_mixed: mixed.as_ref().map(|m| m.get(k)) })
        .collect();
    sink.emit(&name("ppd", c.format), &render_table(&rows, c.format)?)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize)]
struct KickRow {
    #[serde(rename = "V_k")]
    v_k: Option<f64>,
    alpha_abs: f64,
    alpha_abs_energy: f64,
    alpha_re: f64,
    alpha_im: f64,
    #[serde(rename = "E_f_quanta")]
    e_f_quanta: f64,
    steps_per_period: usize,
}

fn kick(a: &KickArgs, config: &Config, c: &Common, sink: &mut Sink) -> Result<Status> {
    let trap = gaussian_segment_model(&config.trap_spec())?;
    let template = config.kick_template();
    let (volts, waveform, result): (Option<f64>, _, KickResult) = match &a.waveform {
        Some(path) => {
            let w = read_waveform(path)?;
            let r = integrate_eom(&trap, trap.holding_voltage, &w, w.end_time() - w.t0(), template.steps_per_period)?;
            (None, w, r)
        }
        None => {
            let v = a.volts.unwrap_or(config.kick_voltage_v);
            (Some(v), template.waveform(v)?, simulate_kick(&trap, &template, v)?)
        }
    };
    let row = KickRow {
        v_k: volts,
        alpha_abs: result.alpha_abs(),
        alpha_abs_energy: result.alpha_abs_energy(),
        alpha_re: result.alpha.re,
        alpha_im: result.alpha.im,
        e_f_quanta: result.final_energy_quanta,
        steps_per_period: result.steps_per_period,
    };
    sink.emit(&name("kick", c.format), &render_table(&[row], c.format)?)?;
    if a.trajectory {
        sink.emit(&name("trajectory", c.format), &render_table(&result.trajectory, c.format)?)?;
        sink.emit(&name("waveform", c.format), &render_waveform(&waveform, c.format)?)?;
    }
    Ok(Status::Ok)
}

fn sweep(a: &SweepArgs, config: &Config, c: &Common, sink: &mut Sink) -> Result<Status> {
    if !(a.v_step > 0.0 && a.v_max >= 0.0) {
        return Err(LabError::Validation("v_step must be positive and v_max non-negative".into()));
    }
    let steps = (a.v_max / a.v_step + 1e-9).floor() as usize;
    let volts: Vec<f64> = (0..=steps).map(|i| i as f64 * a.v_step).collect();
    let trap = gaussian_segment_model(&config.trap_spec())?;
    let sweep = sweep_alpha_vs_voltage(&trap, &config.kick_template(), &volts)?;
    let rows: Vec<SweepRecord> = sweep
        .points
        .iter()
        .map(|p| SweepRecord { v_k: p.volts, alpha_abs: p.alpha_abs, e_f_quanta: p.final_energy_quanta })
        .collect();
    sink.emit(&name("sweep", c.format), &render_table(&rows, c.format)?)?;
    if let Some(fit) = sweep.fit {
        sink.emit("sweep_fit.json", &render_json(&QuarticRecord::from(fit))?)?;
    }
    Ok(Status::Ok)
}

fn synth(a: &SynthArgs, config: &Config, c: &Common, sink: &mut Sink) -> Result<Status> {
    let rho = DiagonalDensity::imperfect_fock(a.n, a.fidelity)?;
    let truth = convolved_dns_ppd(a.alpha, &rho, config.pipeline.truth_k_max)?;
    let shots = a.shots.unwrap_or(config.synthesis.shots);
    let data = synthesize_dataset(&truth, &config.coupling(), &config.theta_grid(), shots, c.seed)?;
    let meta = DatasetMetadata { eta: config.eta, shots, seed: Some(c.seed) };
    sink.emit(&name("dataset", c.format), &render_dataset(&data, Some(meta), c.format)?)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize)]
struct FitRow {
    k: usize,
    p_k: f64,
    std_error: Option<f64>,
}

fn fit(a: &FitArgs, config: &Config, c: &Common, sink: &mut Sink) -> Result<Status> {
    let (data, meta) = read_dataset(&a.data)?;
    let mut rc = config.reconstruction_config(c.seed);
    if let Some(m) = meta {
        rc.coupling.eta = m.eta;
    }
    let result = reconstruct(&data, &rc)?;
    let boot = match a.bootstrap {
        Some(r) => Some(bootstrap_from_fit(&data, &rc, &result, r)?),
        None => None,
    };
    let status = if result.converged { Status::Ok } else { Status::NotConverged };
    match c.format {
        Format::Json => {
            let out = ReconstructionOutput {
                std_errors: boot.as_ref().map(|b| b.std_errors.clone()),
                bootstrap_nonconverged: boot.as_ref().map(|b| b.nonconverged),
                reconstruction: result,
            };
            sink.emit("reconstruction.json", &render_json(&out)?)?;
        }
        Format::Csv => {
            let rows: Vec<FitRow> = ppd_records(&result.ppd)
                .into_iter()
                .map(|r| FitRow { k: r.k, p_k: r.p_k, std_error: boot.as_ref().map(|b| b.std_errors[r.k]) })
                .collect();
            sink.emit("reconstruction.csv", &render_table(&rows, Format::Csv)?)?;
        }
    }
    Ok(status)
}

#[derive(Debug, Serialize, Deserialize)]
struct AlphaRow {
    n: usize,
    alpha_abs: f64,
    residual: f64,
    ambiguous: bool,
}

fn alpha(a: &AlphaArgs, c: &Common, sink: &mut Sink) -> Result<Status> {
    let ppd = read_ppd(&a.ppd)?;
    let rho0 = match (&a.rho0, a.fidelity) {
        (Some(path), _) => Some(DiagonalDensity::new(read_ppd(path)?)?),
        (None, Some(f)) => Some(DiagonalDensity::imperfect_fock(a.n, f)?),
        (None, None) => None,
    };
    let fit = extract_alpha(&ppd, a.n, rho0.as_ref())?;
    let row = AlphaRow { n: a.n, alpha_abs: fit.alpha_abs, residual: fit.residual, ambiguous: fit.ambiguous };
    sink.emit(&name("alpha", c.format), &render_table(&[row], c.format)?)?;
    Ok(Status::Ok)
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let bad = || LabError::Validation(format!("pair `{s}` is not of the form n:k"));
    let (n, k) = s.trim().split_once(':').ok_or_else(bad)?;
    Ok((n.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?))
}

fn semiclassics(a: &SemiclassicsArgs, c: &Common, sink: &mut Sink) -> Result<Status> {
    let mut rows = Vec::new();
    for p in &a.pairs {
        let (n, k) = parse_pair(p)?;
        rows.extend(compare_minima(n, k)?);
    }
    sink.emit(&name("semiclassics", c.format), &render_table(&rows, c.format)?)?;
    Ok(Status::Ok)
}

fn pipeline(config: Config, c: &Common, sink: &mut Sink) -> Result<Status> {
    if sink.dir().is_none() {
        return Err(LabError::Validation("pipeline needs --out".into()));
    }
    let plan = ExperimentPlan::new(config, c.seed)?;
    let report = run_and_write(&plan, sink, c.format)?;
    Ok(if report.all_converged() { Status::Ok } else { Status::NotConverged })
}
