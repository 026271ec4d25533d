//! File formats: datasets, waveforms, distributions and generic tables.
//!
//! Floats are written in Rust's shortest round-trip form, so every file
//! reads back bit-exactly.

use std::fs;
use std::path::{Path, PathBuf};

use displaced_core::kick::{QuarticFit, VoltageWaveform};
use displaced_core::sideband::{Branch, RabiDataset, RabiPoint};
use displaced_core::tomography::ReconstructionResult;
use displaced_core::PhononDistribution;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }

    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::Json
        } else {
            Self::Csv
        }
    }
}

/// Destination for rendered files: a directory, or standard output.
#[derive(Debug, Clone)]
pub struct Sink {
    dir: Option<PathBuf>,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| LabError::io(d, e))?;
        }
        Ok(Self { dir, written: Vec::new() })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Writes `bytes` to `name` under the directory, or prints them.
    /// Returns the path relative to the directory.
    pub fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
                }
                fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))?;
            }
            None => {
                use std::io::Write;
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).map_err(|e| LabError::io("<stdout>", e))?;
            }
        }
        self.written.push(PathBuf::from(name));
        Ok(PathBuf::from(name))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Rows as CSV with a header, or as a pretty JSON array.
pub fn render_table<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| LabError::format("<table>", e))?;
            }
            w.into_inner().map_err(|e| LabError::format("<table>", e.error()))
        }
        Format::Json => render_json(&rows),
    }
}

pub fn render_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| LabError::format("<json>", e))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| LabError::io(path, e))
}

fn read_csv_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read_text(path)?;
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| LabError::format(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| LabError::format(path, e))
}

/// One `(branch, θ)` point of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    /// −1, 0 or +1.
    pub branch: i32,
    pub theta_rad: f64,
    pub shots: u32,
    pub up_counts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub eta: f64,
    pub shots: u32,
    pub seed: Option<u64>,
}

/// JSON form of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub metadata: Option<DatasetMetadata>,
    pub records: Vec<DatasetRecord>,
}

pub fn dataset_records(data: &RabiDataset) -> Vec<DatasetRecord> {
    data.records()
        .map(|(b, p)| DatasetRecord { branch: b.delta_n(), theta_rad: p.theta, shots: p.shots, up_counts: p.up_counts })
        .collect()
}

pub fn dataset_from_records(records: &[DatasetRecord]) -> Result<RabiDataset> {
    let records: Vec<(Branch, RabiPoint)> = records
        .iter()
        .map(|r| {
            let branch = Branch::try_from(r.branch)?;
            Ok((branch, RabiPoint { theta: r.theta_rad, shots: r.shots, up_counts: r.up_counts }))
        })
        .collect::<Result<_>>()?;
    Ok(RabiDataset::from_records(records)?)
}

pub fn render_dataset(data: &RabiDataset, metadata: Option<DatasetMetadata>, format: Format) -> Result<Vec<u8>> {
    let records = dataset_records(data);
    match format {
        Format::Csv => render_table(&records, Format::Csv),
        Format::Json => render_json(&DatasetFile { metadata, records }),
    }
}

/// Reads a dataset in either encoding, chosen by extension.
pub fn read_dataset(path: &Path) -> Result<(RabiDataset, Option<DatasetMetadata>)> {
    let (records, metadata) = match Format::from_path(path) {
        Format::Csv => (read_csv_rows::<DatasetRecord>(path)?, None),
        Format::Json => {
            let file: DatasetFile = read_json(path)?;
            (file.records, file.metadata)
        }
    };
    let data = dataset_from_records(&records).map_err(|e| LabError::format(path, e))?;
    Ok((data, metadata))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformRecord {
    pub t_s: f64,
    pub volts: f64,
}

pub fn render_waveform(w: &VoltageWaveform, format: Format) -> Result<Vec<u8>> {
    let rows: Vec<WaveformRecord> =
        w.samples().iter().enumerate().map(|(i, &v)| WaveformRecord { t_s: w.time(i), volts: v }).collect();
    render_table(&rows, format)
}

/// Relative tolerance on sample spacing when loading waveforms.
pub const SPACING_TOL: f64 = 1e-6;

/// Reads a `t_s, volts` waveform and checks that samples are uniformly spaced.
pub fn read_waveform(path: &Path) -> Result<VoltageWaveform> {
    let rows: Vec<WaveformRecord> = match Format::from_path(path) {
        Format::Csv => read_csv_rows(path)?,
        Format::Json => read_json(path)?,
    };
    if rows.len() < 2 {
        return Err(LabError::format(path, "waveform needs at least two samples"));
    }
    let t0 = rows[0].t_s;
    let dt = (rows[rows.len() - 1].t_s - t0) / (rows.len() - 1) as f64;
    if dt.is_nan() || dt <= 0.0 {
        return Err(LabError::format(path, "waveform times must increase"));
    }
    for (i, r) in rows.iter().enumerate() {
        let expected = t0 + i as f64 * dt;
        if (r.t_s - expected).abs() > SPACING_TOL * dt {
            return Err(LabError::format(path, format!("sample {i} at t = {} breaks uniform spacing", r.t_s)));
        }
    }
    let samples = rows.iter().map(|r| r.volts).collect();
    VoltageWaveform::new(t0, dt, samples).map_err(|e| LabError::format(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "V_k")]
    pub v_k: f64,
    pub alpha_abs: f64,
    #[serde(rename = "E_f_quanta")]
    pub e_f_quanta: f64,
}

/// Quartic `|α|(V) = c₁V + c₂V² + c₃V³ + c₄V⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticRecord {
    /// `[c₁, c₂, c₃, c₄]`.
    pub coefficients: [f64; 4],
    pub rms_residual: f64,
}

impl From<QuarticFit> for QuarticRecord {
    fn from(f: QuarticFit) -> Self {
        Self { coefficients: f.coeffs, rms_residual: f.rms_residual }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpdRecord {
    pub k: usize,
    pub p_k: f64,
}

pub fn ppd_records(ppd: &PhononDistribution) -> Vec<PpdRecord> {
    ppd.probs().iter().enumerate().map(|(k, &p_k)| PpdRecord { k, p_k }).collect()
}

/// Reads a distribution from a `k, p_k` CSV, a JSON array of such rows, or a
/// reconstruction result, and renormalizes it.
pub fn read_ppd(path: &Path) -> Result<PhononDistribution> {
    let rows: Vec<PpdRecord> = match Format::from_path(path) {
        Format::Csv => read_csv_rows(path)?,
        Format::Json => {
            let value: serde_json::Value = read_json(path)?;
            if value.get("ppd").is_some() {
                let result: ReconstructionOutput =
                    serde_json::from_value(value).map_err(|e| LabError::format(path, e))?;
                return Ok(result.reconstruction.ppd);
            }
            serde_json::from_value(value).map_err(|e| LabError::format(path, e))?
        }
    };
    let k_max = rows.iter().map(|r| r.k).max().ok_or_else(|| LabError::format(path, "empty distribution"))?;
    let mut weights = vec![0.0; k_max + 1];
    for r in rows {
        weights[r.k] += r.p_k;
    }
    PhononDistribution::from_weights(&weights).map_err(|e| LabError::format(path, e))
}

/// JSON output of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOutput {
    #[serde(flatten)]
    pub reconstruction: ReconstructionResult,
    pub std_errors: Option<Vec<f64>>,
    pub bootstrap_nonconverged: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use displaced_core::sideband::{synthesize_dataset, CouplingConfig, ThetaGrid};

    fn dataset() -> RabiDataset {
        let ppd = PhononDistribution::from_weights(&[0.6, 0.3, 0.1]).unwrap();
        let grid = ThetaGrid::split(7, 0.1 + 0.2, 1.0 / 3.0);
        synthesize_dataset(&ppd, &CouplingConfig::default(), &grid, 200, 4).unwrap()
    }

    #[test]
    fn dataset_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let data = dataset();
        for format in [Format::Csv, Format::Json] {
            let path = dir.path().join(format!("d.{}", format.extension()));
            let meta = DatasetMetadata { eta: 0.21, shots: 200, seed: Some(4) };
            fs::write(&path, render_dataset(&data, Some(meta), format).unwrap()).unwrap();
            let (back, m) = read_dataset(&path).unwrap();
            assert_eq!(back, data);
            for (a, b) in back.records().zip(data.records()) {
                assert_eq!(a.1.theta.to_bits(), b.1.theta.to_bits());
            }
            if format == Format::Json {
                assert_eq!(m, Some(meta));
            }
        }
    }

    #[test]
    fn csv_header() {
        let text = String::from_utf8(render_dataset(&dataset(), None, Format::Csv).unwrap()).unwrap();
        assert!(text.starts_with("branch,theta_rad,shots,up_counts\n-1,"));
    }

    #[test]
    fn waveform_spacing_checked() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("w.csv");
        fs::write(&good, "t_s,volts\n0,0\n1e-9,0.5\n2e-9,1\n").unwrap();
        let w = read_waveform(&good).unwrap();
        assert_eq!(w.samples(), &[0.0, 0.5, 1.0]);
        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "t_s,volts\n0,0\n1e-9,0.5\n3e-9,1\n").unwrap();
        assert!(matches!(read_waveform(&bad), Err(LabError::Format { .. })));
    }

    #[test]
    fn malformed_dataset_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "branch,theta_rad,shots,up_counts\n2,0.1,200,3\n").unwrap();
        assert!(read_dataset(&path).is_err());
        fs::write(&path, "branch,theta_rad,shots,up_counts\n0,0.1,200,300\n").unwrap();
        assert!(read_dataset(&path).is_err());
    }

    #[test]
    fn ppd_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let ppd = PhononDistribution::from_weights(&[0.1, 0.2, 0.7]).unwrap();
        fs::write(&path, render_table(&ppd_records(&ppd), Format::Csv).unwrap()).unwrap();
        assert!(read_ppd(&path).unwrap().total_variation(&ppd) < 1e-15);
    }
}
