//! Dataset and report files.
//!
//! A dataset is a comma-separated UTF-8 file with header
//! `sample_id,repetition,label,i0,...,i1023` and one row per spectrum, plus a
//! sidecar `<path>.meta.json` holding the wavelength grid description.
//! Intensities are written with 17 significant digits so a save/load round
//! trip is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::spectrum::{LabeledSpectrum, QualityClass, SpectraSet, Spectrum, WavelengthGrid, CHANNELS};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFileHeader {
    pub format_version: u32,
    pub channel_count: usize,
    pub grid_start_nm: f64,
    pub grid_end_nm: f64,
    /// Full grid, for grids that are not linear between the endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_nm: Option<Vec<f64>>,
}

impl DatasetFileHeader {
    pub fn for_grid(grid: &WavelengthGrid) -> Self {
        let linear = WavelengthGrid::linear(grid.start(), grid.end())
            .map(|g| g == *grid)
            .unwrap_or(false);
        Self {
            format_version: FORMAT_VERSION,
            channel_count: grid.len(),
            grid_start_nm: grid.start(),
            grid_end_nm: grid.end(),
            grid_nm: (!linear).then(|| grid.values().to_vec()),
        }
    }

    pub fn grid(&self) -> Result<WavelengthGrid> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported dataset format version {}",
                self.format_version
            )));
        }
        if self.channel_count != CHANNELS {
            return Err(Error::invalid(format!(
                "dataset declares {} channels, expected {CHANNELS}",
                self.channel_count
            )));
        }
        match &self.grid_nm {
            Some(values) => WavelengthGrid::new(values.clone()),
            None => WavelengthGrid::linear(self.grid_start_nm, self.grid_end_nm),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn dataset_header_line(channels: usize) -> String {
    let mut h = String::from("sample_id,repetition,label");
    for i in 0..channels {
        let _ = write!(h, ",i{i}");
    }
    h
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn save_dataset(d: &SpectraSet, path: &Path) -> Result<()> {
    let mut out = dataset_header_line(d.grid().len());
    out.push('\n');
    for r in d.records() {
        if r.sample_id.contains([',', '\n', '\r']) {
            return Err(Error::invalid(format!(
                "sample id {:?} contains a delimiter",
                r.sample_id
            )));
        }
        let _ = write!(out, "{},{},{}", r.sample_id, r.repetition, r.label);
        for &v in r.spectrum.intensities() {
            out.push(',');
            out.push_str(&format_f64(v));
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())?;
    let meta = serde_json::to_string_pretty(&DatasetFileHeader::for_grid(d.grid()))
        .expect("header serializes");
    write_file(&sidecar_path(path), meta.as_bytes())
}

pub fn load_dataset(path: &Path) -> Result<SpectraSet> {
    let meta_path = sidecar_path(path);
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let header: DatasetFileHeader = serde_json::from_str(&meta_text).map_err(|e| Error::Parse {
        path: meta_path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let grid = Arc::new(header.grid().map_err(|e| Error::Parse {
        path: meta_path.clone(),
        line: 1,
        message: e.to_string(),
    })?);

    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.split('\n').enumerate();
    let expected_header = dataset_header_line(grid.len());
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == expected_header => {}
        Some(_) => return Err(parse_err(1, "header does not match the dataset format".into())),
        None => return Err(parse_err(1, "missing header".into())),
    }

    let mut records = Vec::new();
    let mut seen = std::collections::HashMap::<(String, u32), usize>::new();
    let mut sample_labels = std::collections::HashMap::<String, QualityClass>::new();
    let expected_cols = 3 + grid.len();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != expected_cols {
            return Err(parse_err(
                line_no,
                format!("expected {expected_cols} columns, found {}", cells.len()),
            ));
        }
        let sample_id = cells[0].to_string();
        if sample_id.is_empty() {
            return Err(parse_err(line_no, "empty sample id".into()));
        }
        let repetition: u32 = cells[1]
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid repetition {:?}", cells[1])))?;
        let label: QualityClass = cells[2]
            .parse()
            .map_err(|_| parse_err(line_no, format!("unknown label {:?}", cells[2])))?;
        let mut values = Vec::with_capacity(grid.len());
        for (c, cell) in cells[3..].iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric intensity {cell:?} in i{c}")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite intensity in i{c}")));
            }
            values.push(v);
        }
        if let Some(prev) = seen.insert((sample_id.clone(), repetition), line_no) {
            return Err(parse_err(
                line_no,
                format!("duplicate sample {sample_id:?} repetition {repetition} (first on line {prev})"),
            ));
        }
        if let Some(&l) = sample_labels.get(&sample_id) {
            if l != label {
                return Err(parse_err(
                    line_no,
                    format!("sample {sample_id:?} previously labelled {l}, here {label}"),
                ));
            }
        } else {
            sample_labels.insert(sample_id.clone(), label);
        }
        let spectrum = Spectrum::new(values, Arc::clone(&grid)).map_err(|e| parse_err(line_no, e.to_string()))?;
        records.push(LabeledSpectrum {
            spectrum,
            sample_id,
            repetition,
            label,
        });
    }
    SpectraSet::new(grid, records)
}

/// One benchmark row as written to the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub algorithm: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub n_splits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

pub fn report_records(r: &EvalReport) -> Vec<ReportRecord> {
    r.rows
        .iter()
        .map(|row| ReportRecord {
            algorithm: row.algorithm.clone(),
            params: row.params.clone(),
            mean_accuracy: row.mean_accuracy,
            std_accuracy: row.std_accuracy,
            n_splits: row.n_repetitions,
        })
        .collect()
}

pub fn render_json(records: &[ReportRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

/// Aligned text table: algorithm, mean accuracy, standard deviation.
pub fn render_table(records: &[ReportRecord]) -> String {
    let head = ("Algorithm", "mean", "std");
    let name_w = records
        .iter()
        .map(|r| r.algorithm.chars().count())
        .chain([head.0.len()])
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:<name_w$}  {:>4}  {:>4}", head.0, head.1, head.2);
    for r in records {
        let _ = writeln!(
            out,
            "{:<name_w$}  {:.2}  {:.2}",
            r.algorithm, r.mean_accuracy, r.std_accuracy
        );
    }
    out
}

pub fn parse_report_json(text: &str) -> Result<Vec<ReportRecord>> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: PathBuf::from("<report>"),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn save_report(r: &EvalReport, path: &Path, format: ReportFormat) -> Result<()> {
    if r.rows.is_empty() {
        return Err(Error::invalid("report has no rows"));
    }
    let records = report_records(r);
    let text = match format {
        ReportFormat::Json => render_json(&records),
        ReportFormat::Table => render_table(&records),
    };
    write_file(path, text.as_bytes())
}

pub fn load_report(path: &Path) -> Result<Vec<ReportRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}
