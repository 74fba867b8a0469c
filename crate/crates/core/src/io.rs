//! File formats: CSV for sequences, series, tabulated weights and oracle
//! tables; JSON for matrices and witness bundles; TOML or JSON configs.

use crate::error::{invalid, Error, Result};
use crate::formal_series::{ScaledCoefficient, WeightedPowerSeries};
use crate::matrices::WeightMatrix;
use crate::sequences::WeightSequence;
use crate::weight_functions::TabulatedWeight;
use crate::witness::{AlgebraElement, ExponentBasis, GapSequence, SummationWeightOracle};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse { format: "csv", message: e.to_string() }
}

/// Numeric CSV rows with exactly `width` columns; a non-numeric first row is
/// taken as a header.
fn read_numeric_csv(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_numeric_csv(&text, width)
}

fn parse_numeric_csv(text: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != width {
            return Err(Error::Parse {
                format: "csv",
                message: format!("line {}: expected {width} columns, found {}", line + 1, rec.len()),
            });
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parse { format: "csv", message: format!("line {}: {e}", line + 1) });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse { format: "csv", message: "no data rows".into() });
    }
    Ok(rows)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn check_index(rows: &[Vec<f64>]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if r[0] != i as f64 {
            return Err(Error::Parse {
                format: "csv",
                message: format!("row {i}: index column must run 0, 1, 2, ... (found {})", r[0]),
            });
        }
    }
    Ok(())
}

/// Columns `(j, logM)` with `j = 0..=J`.
pub fn read_sequence_csv(path: &Path) -> Result<WeightSequence> {
    let rows = read_numeric_csv(path, 2)?;
    check_index(&rows)?;
    WeightSequence::custom(rows.iter().map(|r| r[1]).collect())
}

pub fn sequence_csv(w: &WeightSequence) -> String {
    let mut out = String::from("j,logM\n");
    for (j, v) in w.log_m().iter().enumerate() {
        out.push_str(&format!("{j},{v}\n"));
    }
    out
}

pub fn write_sequence_csv(path: &Path, w: &WeightSequence) -> Result<()> {
    write_text(path, &sequence_csv(w))
}

/// Columns `(j, phase_re, phase_im, logmag)`; `logmag = -inf` encodes zero.
pub fn parse_series_csv(text: &str) -> Result<WeightedPowerSeries> {
    let rows = parse_numeric_csv(text, 4)?;
    check_index(&rows)?;
    WeightedPowerSeries::new(
        rows.iter()
            .map(|r| {
                if r[3] == f64::NEG_INFINITY {
                    ScaledCoefficient::ZERO
                } else {
                    ScaledCoefficient::new(Complex64::new(r[1], r[2]), r[3])
                }
            })
            .collect(),
    )
}

pub fn read_series_csv(path: &Path) -> Result<WeightedPowerSeries> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_series_csv(&text)
}

pub fn series_csv(f: &WeightedPowerSeries) -> String {
    let mut out = String::from("j,phase_re,phase_im,logmag\n");
    for (j, c) in f.coeffs().iter().enumerate() {
        out.push_str(&format!("{j},{},{},{}\n", c.phase.re, c.phase.im, c.log_mag));
    }
    out
}

pub fn write_series_csv(path: &Path, f: &WeightedPowerSeries) -> Result<()> {
    write_text(path, &series_csv(f))
}

/// Columns `(t, omega)`.
pub fn read_tabulated_csv(path: &Path) -> Result<TabulatedWeight> {
    let rows = read_numeric_csv(path, 2)?;
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let w: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    TabulatedWeight::new(&t, &w)
}

/// Columns `(j, k, omega)`; absent pairs default to 1.
pub fn read_oracle_csv(path: &Path) -> Result<SummationWeightOracle> {
    let rows = read_numeric_csv(path, 3)?;
    let mut entries = BTreeMap::new();
    for r in rows {
        if r[0] < 0.0 || r[1] < 0.0 || r[0].fract() != 0.0 || r[1].fract() != 0.0 {
            return Err(Error::Parse { format: "csv", message: format!("oracle indices must be nonnegative integers: {r:?}") });
        }
        entries.insert((r[0] as usize, r[1] as usize), r[2]);
    }
    Ok(SummationWeightOracle::table(entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub lambdas: Vec<f64>,
    #[serde(rename = "J")]
    pub j: usize,
    pub rows: Vec<Vec<f64>>,
}

pub fn matrix_to_json(mx: &WeightMatrix) -> String {
    let file = MatrixFile {
        lambdas: mx.lambdas().to_vec(),
        j: mx.truncation(),
        rows: mx.rows().iter().map(|r| r.log_m().to_vec()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("matrix serializes")
}

pub fn matrix_from_json(text: &str) -> Result<WeightMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::Parse { format: "json", message: e.to_string() })?;
    if file.rows.iter().any(|r| r.len() != file.j + 1) {
        return Err(invalid(format!("every matrix row must hold J + 1 = {} values", file.j + 1)));
    }
    let rows = file.rows.into_iter().map(WeightSequence::custom).collect::<Result<Vec<_>>>()?;
    WeightMatrix::new(file.lambdas, rows)
}

pub fn read_matrix_json(path: &Path) -> Result<WeightMatrix> {
    matrix_from_json(&fs::read_to_string(path).map_err(|e| io_err(path, e))?)
}

pub fn write_matrix_json(path: &Path, mx: &WeightMatrix) -> Result<()> {
    write_text(path, &matrix_to_json(mx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBundle {
    pub basis: ExponentBasis,
    pub gap: GapSequence,
    pub element: Option<AlgebraElement>,
    /// Path of the CSV coefficient dump.
    pub coefficients_ref: String,
    pub diagnostics: serde_json::Value,
}

pub fn write_witness_bundle(path: &Path, bundle: &WitnessBundle) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(bundle).expect("bundle serializes"))
}

pub fn read_witness_bundle(path: &Path) -> Result<WitnessBundle> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { format: "json", message: e.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub tmin: f64,
    pub tmax: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub variant: Option<String>,
    pub steps: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub generators: Option<usize>,
    pub interval: Option<[f64; 2]>,
    pub degree: Option<u32>,
    pub b: Option<f64>,
    pub a: Option<Vec<f64>>,
    pub element: Option<AlgebraElement>,
}

/// Analysis inputs; every field is optional and command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// `kind:param`, or `custom:<path.csv>`.
    pub family: Option<String>,
    /// Second family for comparisons.
    pub other: Option<String>,
    #[serde(rename = "J", alias = "j")]
    pub j: Option<usize>,
    #[serde(default)]
    pub conditions: Vec<String>,
    pub lambdas: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    /// `power:<alpha>`, `associated:<family>`, `tabulated:<path.csv>`.
    pub function: Option<String>,
    /// `example`, `associated` or `file:<path.json>`.
    pub matrix: Option<String>,
    pub series: Option<String>,
    pub oracle: Option<String>,
    pub witness: Option<WitnessConfig>,
    pub output: Option<String>,
}

/// TOML unless the extension is `.json`.
pub fn load_config(path: &Path) -> Result<AnalysisConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| Error::Parse { format: "json", message: e.to_string() })
    } else {
        toml::from_str(&text).map_err(|e| Error::Parse { format: "toml", message: e.to_string() })
    }
}
