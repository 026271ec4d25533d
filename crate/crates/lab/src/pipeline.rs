//! End-to-end experiment: kick simulation, data synthesis, reconstruction
//! and displacement extraction for several preparations and kick voltages.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use displaced_core::fock::{convolved_dns_ppd, DiagonalDensity, PhononDistribution};
use displaced_core::kick::{fit_quartic_through_origin, gaussian_segment_model, simulate_kick, QuarticFit, SweepPoint};
use displaced_core::sideband::{synthesize_dataset, RabiDataset};
use displaced_core::tomography::{extract_alpha, reconstruct, AlphaFit, ReconstructionResult};

use crate::config::{Config, Preparation};
use crate::error::{LabError, Result};
use crate::io::{render_dataset, render_json, render_table, DatasetMetadata, Format, QuarticRecord, Sink, SweepRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub config: Config,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn new(config: Config, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, seed })
    }

    pub fn preparations(&self) -> &[Preparation] {
        &self.config.pipeline.preparations
    }

    pub fn v_k_list(&self) -> &[f64] {
        &self.config.pipeline.v_k_list
    }

    /// Seed of the job for preparation `j` at voltage index `i`.
    pub fn job_seed(&self, j: usize, i: usize) -> u64 {
        self.seed.wrapping_add(((j as u64) << 20) | i as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub v_k: f64,
    pub alpha_sim: f64,
    pub alpha_fit: AlphaFit,
    pub seed: u64,
    /// Truth restricted to the reconstruction levels, not renormalized.
    pub truth: PhononDistribution,
    /// Truth mass above the reconstruction cutoff.
    pub truncation_mass: f64,
    pub dataset: RabiDataset,
    pub reconstruction: ReconstructionResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparationReport {
    pub preparation: Preparation,
    /// Zero-kick reconstruction used as the preparation estimate.
    pub rho0: DiagonalDensity,
    pub points: Vec<PointReport>,
    pub quartic: Option<QuarticFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub seed: u64,
    pub kicks: Vec<SweepPoint>,
    pub preparations: Vec<PreparationReport>,
}

impl PipelineReport {
    pub fn max_alpha_error(&self) -> f64 {
        self.preparations
            .iter()
            .flat_map(|p| &p.points)
            .map(|pt| (pt.alpha_fit.alpha_abs - pt.alpha_sim).abs())
            .fold(0.0, f64::max)
    }

    pub fn all_converged(&self) -> bool {
        self.preparations.iter().flat_map(|p| &p.points).all(|pt| pt.reconstruction.converged)
    }
}

struct Job {
    truth: PhononDistribution,
    truncation_mass: f64,
    dataset: RabiDataset,
    reconstruction: ReconstructionResult,
}

fn stage<T>(name: String, r: std::result::Result<T, impl Into<LabError>>) -> Result<T> {
    r.map_err(|e| LabError::stage(name, e.into()))
}

/// Runs every stage in memory. Jobs run in parallel; results are assembled
/// in plan order, so the report depends only on the plan.
pub fn run_pipeline(plan: &ExperimentPlan) -> Result<PipelineReport> {
    let config = &plan.config;
    let trap = stage("trap".into(), gaussian_segment_model(&config.trap_spec()))?;
    let template = config.kick_template();
    let voltages = plan.v_k_list();

    let kicks: Vec<SweepPoint> = voltages
        .par_iter()
        .map(|&v| {
            let r = stage(format!("kick at {v} V"), simulate_kick(&trap, &template, v))?;
            Ok(SweepPoint::from_result(v, &r))
        })
        .collect::<Result<_>>()?;
    log::info!("simulated {} kicks", kicks.len());

    let k_max = config.reconstruction.k_max;
    let truth_k_max = config.pipeline.truth_k_max;
    let coupling = config.coupling();
    let grid = config.theta_grid();
    let shots = config.synthesis.shots;
    let zero = voltages.iter().position(|&v| v == 0.0).expect("validated plan contains 0 V");

    let mut preparations = Vec::with_capacity(plan.preparations().len());
    for (j, prep) in plan.preparations().iter().enumerate() {
        let tag = |what: &str, v: f64| format!("{what} for n = {} at {v} V", prep.n);
        let rho_true = stage(tag("preparation model", 0.0), DiagonalDensity::imperfect_fock(prep.n, prep.fidelity))?;
        let jobs: Vec<Job> = kicks
            .par_iter()
            .enumerate()
            .map(|(i, kick)| {
                let seed = plan.job_seed(j, i);
                let full = stage(tag("truth", kick.volts), convolved_dns_ppd(kick.alpha_abs, &rho_true, truth_k_max))?;
                let dataset = stage(tag("synthesis", kick.volts), synthesize_dataset(&full, &coupling, &grid, shots, seed))?;
                let reconstruction =
                    stage(tag("reconstruction", kick.volts), reconstruct(&dataset, &config.reconstruction_config(seed)))?;
                let head: Vec<f64> = full.probs()[..=k_max].to_vec();
                let truncation_mass = (1.0 - head.iter().sum::<f64>()).max(0.0);
                let truth = stage(tag("truth", kick.volts), PhononDistribution::truncated(head))?;
                Ok(Job { truth, truncation_mass, dataset, reconstruction })
            })
            .collect::<Result<_>>()?;

        let rho0 = stage(tag("preparation estimate", 0.0), DiagonalDensity::new(jobs[zero].reconstruction.ppd.clone()))?;
        let fits: Vec<AlphaFit> = jobs
            .par_iter()
            .zip(kicks.par_iter())
            .map(|(job, kick)| stage(tag("alpha fit", kick.volts), extract_alpha(&job.reconstruction.ppd, prep.n, Some(&rho0))))
            .collect::<Result<_>>()?;

        let points: Vec<PointReport> = jobs
            .into_iter()
            .zip(fits)
            .zip(&kicks)
            .enumerate()
            .map(|(i, ((job, alpha_fit), kick))| PointReport {
                v_k: kick.volts,
                alpha_sim: kick.alpha_abs,
                alpha_fit,
                seed: plan.job_seed(j, i),
                truth: job.truth,
                truncation_mass: job.truncation_mass,
                dataset: job.dataset,
                reconstruction: job.reconstruction,
            })
            .collect();
        let vs: Vec<f64> = points.iter().map(|p| p.v_k).collect();
        let alphas: Vec<f64> = points.iter().map(|p| p.alpha_fit.alpha_abs).collect();
        let quartic = fit_quartic_through_origin(&vs, &alphas).ok();
        log::info!("n = {}: max |alpha_fit - alpha_sim| = {:.3}", prep.n, max_error(&points));
        preparations.push(PreparationReport { preparation: *prep, rho0, points, quartic });
    }
    Ok(PipelineReport { seed: plan.seed, kicks, preparations })
}

fn max_error(points: &[PointReport]) -> f64 {
    points.iter().map(|p| (p.alpha_fit.alpha_abs - p.alpha_sim).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub n: usize,
    #[serde(rename = "V_k")]
    pub v_k: f64,
    pub k: usize,
    pub p_k: f64,
    pub p_k_truth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub n: usize,
    #[serde(rename = "V_k")]
    pub v_k: f64,
    pub alpha_fit: f64,
    pub alpha_sim: f64,
    pub alpha_quartic: Option<f64>,
    pub fit_residual: f64,
    pub ambiguous: bool,
    pub converged: bool,
    pub truncation_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig4Row {
    pub n: usize,
    #[serde(rename = "V_k")]
    pub v_k: f64,
    pub alpha_fit: f64,
    pub k: usize,
    pub p_k: f64,
    /// Mixed displaced model at `alpha_fit` over the zero-kick estimate,
    /// renormalized on the reconstruction levels.
    pub p_k_model: f64,
    /// Mixed displaced model at the simulated displacement over the true
    /// preparation.
    pub p_k_theory: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticEntry {
    pub n: usize,
    #[serde(flatten)]
    pub fit: QuarticRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Fig2,
    Fig3,
    Fig4,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// `complete`, or `failed` when a stage aborted the run.
    pub status: String,
    pub seed: u64,
    pub error: Option<String>,
    pub max_truncation_mass: Option<f64>,
    pub max_alpha_error: Option<f64>,
    pub files: Vec<ManifestEntry>,
    pub config: Config,
}

pub fn fig2_rows(report: &PipelineReport) -> Vec<Fig2Row> {
    let mut rows = Vec::new();
    for prep in &report.preparations {
        for pt in &prep.points {
            for (k, &p_k) in pt.reconstruction.ppd.probs().iter().enumerate() {
                rows.push(Fig2Row { n: prep.preparation.n, v_k: pt.v_k, k, p_k, p_k_truth: pt.truth.get(k) });
            }
        }
    }
    rows
}

pub fn fig3_rows(report: &PipelineReport) -> Vec<Fig3Row> {
    let mut rows = Vec::new();
    for prep in &report.preparations {
        for pt in &prep.points {
            rows.push(Fig3Row {
                n: prep.preparation.n,
                v_k: pt.v_k,
                alpha_fit: pt.alpha_fit.alpha_abs,
                alpha_sim: pt.alpha_sim,
                alpha_quartic: prep.quartic.map(|q| q.eval(pt.v_k)),
                fit_residual: pt.alpha_fit.residual,
                ambiguous: pt.alpha_fit.ambiguous,
                converged: pt.reconstruction.converged,
                truncation_mass: pt.truncation_mass,
            });
        }
    }
    rows
}

pub fn fig4_rows(report: &PipelineReport, config: &Config) -> Result<Vec<Fig4Row>> {
    let k_max = config.reconstruction.k_max;
    let mut rows = Vec::new();
    for prep in &report.preparations {
        let rho_true = DiagonalDensity::imperfect_fock(prep.preparation.n, prep.preparation.fidelity)?;
        for pt in &prep.points {
            let model = convolved_dns_ppd(pt.alpha_fit.alpha_abs, &prep.rho0, k_max)?;
            let norm = model.sum();
            let theory = convolved_dns_ppd(pt.alpha_sim, &rho_true, k_max)?;
            for (k, &p_k) in pt.reconstruction.ppd.probs().iter().enumerate() {
                rows.push(Fig4Row {
                    n: prep.preparation.n,
                    v_k: pt.v_k,
                    alpha_fit: pt.alpha_fit.alpha_abs,
                    k,
                    p_k,
                    p_k_model: model.get(k) / norm,
                    p_k_theory: theory.get(k),
                });
            }
        }
    }
    Ok(rows)
}

/// Writes the figure tables, raw datasets and the manifest.
pub fn write_report(report: &PipelineReport, config: &Config, sink: &mut Sink, format: Format) -> Result<Manifest> {
    let ext = format.extension();
    let mut files = Vec::new();
    let mut put = |sink: &mut Sink, name: String, role: Role, bytes: Vec<u8>| -> Result<()> {
        let path = sink.emit(&name, &bytes)?;
        files.push(ManifestEntry { path: path.to_string_lossy().into_owned(), role });
        Ok(())
    };
    put(sink, format!("fig2.{ext}"), Role::Fig2, render_table(&fig2_rows(report), format)?)?;
    put(sink, format!("fig3.{ext}"), Role::Fig3, render_table(&fig3_rows(report), format)?)?;
    let quartics: Vec<QuarticEntry> = report
        .preparations
        .iter()
        .filter_map(|p| p.quartic.map(|q| QuarticEntry { n: p.preparation.n, fit: q.into() }))
        .collect();
    put(sink, "fig3_quartic.json".into(), Role::Fig3, render_json(&quartics)?)?;
    put(sink, format!("fig4.{ext}"), Role::Fig4, render_table(&fig4_rows(report, config)?, format)?)?;
    let sweep: Vec<SweepRecord> = report
        .kicks
        .iter()
        .map(|k| SweepRecord { v_k: k.volts, alpha_abs: k.alpha_abs, e_f_quanta: k.final_energy_quanta })
        .collect();
    put(sink, format!("raw/kick_sweep.{ext}"), Role::Raw, render_table(&sweep, format)?)?;
    for prep in &report.preparations {
        for (i, pt) in prep.points.iter().enumerate() {
            let meta = DatasetMetadata { eta: config.eta, shots: config.synthesis.shots, seed: Some(pt.seed) };
            let name = format!("raw/dataset_n{}_v{:02}.{ext}", prep.preparation.n, i);
            put(sink, name, Role::Raw, render_dataset(&pt.dataset, Some(meta), format)?)?;
        }
    }
    let max_truncation_mass =
        report.preparations.iter().flat_map(|p| &p.points).map(|p| p.truncation_mass).fold(0.0, f64::max);
    let manifest = Manifest {
        status: "complete".into(),
        seed: report.seed,
        error: None,
        max_truncation_mass: Some(max_truncation_mass),
        max_alpha_error: Some(report.max_alpha_error()),
        files,
        config: config.clone(),
    };
    sink.emit("manifest.json", &render_json(&manifest)?)?;
    Ok(manifest)
}

/// Runs the plan and writes its outputs. On failure a manifest with status
/// `failed` and the stage error is written before the error is returned.
pub fn run_and_write(plan: &ExperimentPlan, sink: &mut Sink, format: Format) -> Result<PipelineReport> {
    match run_pipeline(plan) {
        Ok(report) => {
            write_report(&report, &plan.config, sink, format)?;
            Ok(report)
        }
        Err(e) => {
            let manifest = Manifest {
                status: "failed".into(),
                seed: plan.seed,
                error: Some(e.to_string()),
                max_truncation_mass: None,
                max_alpha_error: None,
                files: Vec::new(),
                config: plan.config.clone(),
            };
            sink.emit("manifest.json", &render_json(&manifest)?)?;
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preparation;

    fn small_config() -> Config {
        let mut c = Config::default();
        c.pipeline.preparations = vec![Preparation { n: 1, fidelity: 0.77 }];
        c.pipeline.v_k_list = vec![0.0, 1.0, 2.0];
        c
    }

    #[test]
    fn perfect_preparation_without_kick() {
        let mut c = small_config();
        c.pipeline.preparations = vec![Preparation { n: 1, fidelity: 1.0 }];
        c.pipeline.v_k_list = vec![0.0];
        let report = run_pipeline(&ExperimentPlan::new(c, 3).unwrap()).unwrap();
        let ppd = &report.preparations[0].points[0].reconstruction.ppd;
        assert!(ppd.get(1) > 0.95, "{ppd:?}");
    }

    #[test]
    fn report_is_deterministic_and_consistent() {
        let plan = ExperimentPlan::new(small_config(), 11).unwrap();
        let a = run_pipeline(&plan).unwrap();
        let b = run_pipeline(&plan).unwrap();
        assert_eq!(a, b);
        assert!(a.max_alpha_error() <= 0.2, "{}", a.max_alpha_error());
        assert!(a.preparations[0].points[0].alpha_fit.alpha_abs < 1e-6);
    }

    #[test]
    fn failed_stage_marks_manifest() {
        let mut c = small_config();
        c.sample_dt_s = 1e-6;
        c.record_length_s = 40e-6;
        let plan = ExperimentPlan::new(c, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut sink = Sink::new(Some(dir.path().to_path_buf())).unwrap();
        let err = run_and_write(&plan, &mut sink, Format::Csv).unwrap_err();
        assert!(matches!(err, LabError::Stage { .. }));
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.status, "failed");
        assert!(!dir.path().join("fig2.csv").exists());
    }
}
