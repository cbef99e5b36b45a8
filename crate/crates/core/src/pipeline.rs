//! Pipeline stages and the artifacts they write.
//!
//! Each stage is a pure function returning a serializable report, plus a
//! writer that puts the report on disk. Every artifact carries the config
//! hash and root seed: JSON files in `config_hash`/`seed` fields, CSV files
//! in a leading `# config_hash=... seed=...` comment.

use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::classify::{self, FoldResult, MethodStability, Model};
use crate::config::{Config, Provenance};
use crate::descriptors::{
    class_centroids_and_distances, descriptor_vector, minmax_normalize, overlap_omega, DescriptorVector, Overlap,
    NAMES as DESCRIPTOR_NAMES,
};
use crate::dsp::{derive_seed, mean};
use crate::error::{Error, Result};
use crate::fusion::{self, Kind, Representation};
use crate::io::{atomic_write, read_json, write_json};
use crate::signal::{resample, trim, TimeSeries};
use crate::spectral::{stft, FEATURE_NAMES, N_FEATURES};
use crate::synth::CLASS_NAMES;
use crate::tau::{common_tau, sweep_all_classes, TauScoreCurve};

/// Frequency bins kept in spectrogram exports.
pub const SPECTROGRAM_BINS: usize = 100;

/// Output encoding for tabular artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidConfig(format!("unknown format {s:?}"))),
        }
    }
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Num(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Str(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::from(s.as_str()),
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) => Value::from(*v),
        }
    }
}

/// A header plus rows, rendered as CSV or as a JSON array of objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, provenance: &Provenance) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut out = format!("# {}\n{}\n", provenance.comment(), self.header.join(","));
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                Ok(out.into_bytes())
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> =
                            self.header.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let doc = json!({
                    "config_hash": provenance.config_hash,
                    "seed": provenance.seed,
                    "rows": rows,
                });
                let mut bytes = serde_json::to_vec_pretty(&doc)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }

    /// Writes `<dir>/<stem>.<ext>` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: Format, provenance: &Provenance) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        atomic_write(&path, &self.render(format, provenance)?)?;
        Ok(path)
    }
}

/// Wraps a serializable body with provenance fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    #[serde(flatten)]
    pub provenance: Provenance,
    #[serde(flatten)]
    pub body: T,
}

pub fn class_name(label: u8) -> String {
    CLASS_NAMES
        .get(label as usize)
        .map_or_else(|| format!("class_{label}"), |s| s.to_string())
}

fn labels_of(signals: &[TimeSeries]) -> Result<Vec<u8>> {
    signals
        .iter()
        .map(|s| {
            s.label
                .ok_or_else(|| Error::InvalidConfig(format!("record {} has no label", s.source_id)))
        })
        .collect()
}

// ---------------------------------------------------------------- descriptors

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRow {
    pub source_id: String,
    pub label: u8,
    pub descriptors: DescriptorVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarClass {
    pub label: u8,
    pub name: String,
    pub count: usize,
    /// Min-max normalized centroid, in `feature_names` order.
    pub centroid: Vec<f64>,
}

/// Plot data for the class radar chart, plus separability indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Radar {
    pub feature_names: Vec<String>,
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    pub classes: Vec<RadarClass>,
    pub centroid_distances: Vec<Vec<f64>>,
    pub closest_pair: Option<(u8, u8)>,
    pub overlap: Overlap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorReport {
    pub rows: Vec<DescriptorRow>,
    pub radar: Radar,
}

/// Descriptors of every record at its native (median) sampling step,
/// normalized across the dataset, with class centroids and overlap.
pub fn descriptor_report(signals: &[TimeSeries], cfg: &Config) -> Result<DescriptorReport> {
    let labels = labels_of(signals)?;
    let vectors = signals
        .par_iter()
        .map(|s| descriptor_vector(&resample(s, s.median_dt())?, &cfg.descriptors))
        .collect::<Result<Vec<_>>>()?;
    let (normalized, range) = minmax_normalize(&vectors)?;
    let n_classes = classify::n_classes(&labels);
    let sep = class_centroids_and_distances(&normalized, &labels, n_classes)?;
    let points: Vec<Vec<f64>> = normalized.iter().map(|v| v.to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x0e6a));
    let overlap = overlap_omega(&points, &labels, n_classes, cfg.n_mc, &mut rng)?;
    let rows = signals
        .iter()
        .zip(&labels)
        .zip(vectors)
        .map(|((s, &label), descriptors)| DescriptorRow {
            source_id: s.source_id.clone(),
            label,
            descriptors,
        })
        .collect();
    Ok(DescriptorReport {
        rows,
        radar: Radar {
            feature_names: DESCRIPTOR_NAMES.iter().map(|s| s.to_string()).collect(),
            feature_min: range.min.to_vec(),
            feature_max: range.max.to_vec(),
            closest_pair: sep.closest_pair(),
            classes: sep
                .classes
                .iter()
                .map(|c| RadarClass {
                    label: c.label,
                    name: class_name(c.label),
                    count: c.count,
                    centroid: c.centroid.to_vec(),
                })
                .collect(),
            centroid_distances: sep.distances,
            overlap,
        },
    })
}

/// Writes `descriptors.{csv,json}` and `radar.json`.
pub fn write_descriptors(dir: &Path, report: &DescriptorReport, format: Format, prov: &Provenance) -> Result<()> {
    let mut header = vec!["source_id".to_string(), "label".to_string()];
    header.extend(DESCRIPTOR_NAMES.iter().map(|s| s.to_string()));
    let mut table = Table::new(header);
    for r in &report.rows {
        let mut row: Vec<Cell> = vec![r.source_id.clone().into(), r.label.into()];
        row.extend(r.descriptors.to_array().into_iter().map(Cell::from));
        table.push(row);
    }
    table.write(dir, "descriptors", format, prov)?;
    write_json(
        dir.join("radar.json"),
        &Artifact {
            provenance: prov.clone(),
            body: &report.radar,
        },
    )
}

// ------------------------------------------------------------------------ tau

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub mean_f: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauClassEntry {
    pub label: u8,
    pub name: String,
    pub critical_freq_hz: f64,
    pub nyquist_dt_s: f64,
    pub best_tau_s: f64,
    pub knee_tau_s: f64,
    pub s_star: f64,
    pub curve: Vec<CurvePoint>,
}

/// Per-class interval selection and the common intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub classes: Vec<TauClassEntry>,
    pub tau_common_best: f64,
    pub tau_common_knee: f64,
    /// Largest per-class Nyquist step; common intervals never go below it.
    pub nyquist_floor_s: f64,
}

impl TauReport {
    pub fn resolve(&self, choice: TauChoice) -> f64 {
        match choice {
            TauChoice::CommonBest => self.tau_common_best,
            TauChoice::CommonKnee => self.tau_common_knee,
            TauChoice::Seconds(t) => t,
        }
    }
}

impl From<&[TauScoreCurve]> for TauReport {
    fn from(curves: &[TauScoreCurve]) -> Self {
        let classes = curves
            .iter()
            .map(|c| TauClassEntry {
                label: c.summary.class_label,
                name: class_name(c.summary.class_label),
                critical_freq_hz: c.summary.critical_freq,
                nyquist_dt_s: c.summary.nyquist_dt,
                best_tau_s: c.summary.best_tau,
                knee_tau_s: c.summary.knee_tau,
                s_star: c.summary.s_star,
                curve: c
                    .candidates
                    .iter()
                    .map(|k| CurvePoint {
                        tau: k.tau,
                        s: k.s,
                        mean_f: k.mean_f,
                        r: k.r,
                        m: k.m,
                    })
                    .collect(),
            })
            .collect();
        let summaries: Vec<_> = curves.iter().map(|c| c.summary).collect();
        let common = common_tau(&summaries).expect("sweep yields at least one class");
        TauReport {
            classes,
            tau_common_best: common.tau_best_common,
            tau_common_knee: common.tau_knee_common,
            nyquist_floor_s: common.constraint_floor,
        }
    }
}

/// Which interval a representation is built at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TauChoice {
    CommonBest,
    CommonKnee,
    Seconds(f64),
}

impl TauChoice {
    pub fn needs_report(&self) -> bool {
        !matches!(self, TauChoice::Seconds(_))
    }
}

impl FromStr for TauChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common_best" | "best" => Ok(TauChoice::CommonBest),
            "common_knee" | "knee" => Ok(TauChoice::CommonKnee),
            _ => match s.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => Ok(TauChoice::Seconds(t)),
                _ => Err(Error::InvalidConfig(format!(
                    "tau must be common_best, common_knee or a positive number of seconds, got {s:?}"
                ))),
            },
        }
    }
}

pub fn tau_report(signals: &[TimeSeries], cfg: &Config) -> Result<TauReport> {
    let curves = sweep_all_classes(signals, &cfg.tau)?;
    Ok(TauReport::from(curves.as_slice()))
}

/// Writes the report to `path` (conventionally `tau.json`) and the score
/// curves to `tau_curves.{csv,json}` in the same directory.
pub fn write_tau(path: &Path, report: &TauReport, format: Format, prov: &Provenance) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    write_json(
        path,
        &Artifact {
            provenance: prov.clone(),
            body: report,
        },
    )?;
    let mut table = Table::new(["label", "name", "tau", "S", "mean_f", "R", "M"]);
    for c in &report.classes {
        for p in &c.curve {
            table.push(vec![
                c.label.into(),
                c.name.clone().into(),
                p.tau.into(),
                p.s.into(),
                p.mean_f.into(),
                p.r.into(),
                p.m.into(),
            ]);
        }
    }
    table.write(dir, "tau_curves", format, prov)?;
    Ok(())
}

pub fn read_tau(path: impl AsRef<Path>) -> Result<TauReport> {
    let a: Artifact<TauReport> = read_json(path)?;
    Ok(a.body)
}

// ------------------------------------------------------------------- features

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub source_id: String,
    pub label: u8,
    pub window_index: usize,
    pub z: [f64; N_FEATURES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureClassMean {
    pub label: u8,
    pub name: String,
    pub n_windows: usize,
    pub mean: [f64; N_FEATURES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub tau: f64,
    pub window_len: usize,
    pub feature_names: Vec<String>,
    pub classes: Vec<FeatureClassMean>,
    pub z6_fallbacks: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramRows {
    pub window_len: usize,
    pub freqs: Vec<f64>,
    /// `(source_id, frame index, frame start time, magnitudes)`.
    pub frames: Vec<(String, usize, f64, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureReport {
    pub windows: Vec<WindowRow>,
    pub summary: FeatureSummary,
    pub spectrogram: SpectrogramRows,
}

/// Per-window `z1..z6` exactly as they enter the HSTF representation, their
/// class means, and a spectrogram of every record with at least
/// [`SPECTROGRAM_BINS`] bins.
pub fn feature_report(
    signals: &[TimeSeries],
    tau: f64,
    cfg: &Config,
    nyquist_floor: Option<f64>,
) -> Result<FeatureReport> {
    let rep = fusion::build_hstf(signals, tau, &cfg.window, &cfg.features, cfg.seed, nyquist_floor)?;
    let l = rep.window_len;
    let mut windows = Vec::new();
    for s in &rep.samples {
        for (m, row) in s.rows.iter().enumerate() {
            let mut z = [0.0; N_FEATURES];
            z.copy_from_slice(&row[l..l + N_FEATURES]);
            windows.push(WindowRow {
                source_id: s.source_id.clone(),
                label: s.label,
                window_index: m,
                z,
            });
        }
    }
    let mut labels: Vec<u8> = windows.iter().map(|w| w.label).collect();
    labels.sort_unstable();
    labels.dedup();
    let classes = labels
        .into_iter()
        .map(|label| {
            let rows: Vec<&WindowRow> = windows.iter().filter(|w| w.label == label).collect();
            let mut mu = [0.0; N_FEATURES];
            for (k, slot) in mu.iter_mut().enumerate() {
                *slot = mean(&rows.iter().map(|w| w.z[k]).collect::<Vec<_>>());
            }
            FeatureClassMean {
                label,
                name: class_name(label),
                n_windows: rows.len(),
                mean: mu,
            }
        })
        .collect();

    let spec_len = 2 * (SPECTROGRAM_BINS - 1);
    let per_record = signals
        .par_iter()
        .map(|s| {
            let u = trim(&resample(s, tau)?, cfg.window.alpha)?;
            stft(&u, spec_len, spec_len).map(|g| (s.source_id.clone(), g))
        })
        .collect::<Result<Vec<_>>>()?;
    let freqs = per_record
        .first()
        .map(|(_, g)| g.freqs[..SPECTROGRAM_BINS].to_vec())
        .unwrap_or_default();
    let mut frames = Vec::new();
    for (id, g) in per_record {
        for (m, (f, t)) in g
            .truncated(SPECTROGRAM_BINS)
            .into_iter()
            .zip(&g.frame_times)
            .enumerate()
        {
            frames.push((id.clone(), m, *t, f));
        }
    }

    Ok(FeatureReport {
        windows,
        summary: FeatureSummary {
            tau,
            window_len: l,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            classes,
            z6_fallbacks: rep.z6_fallbacks,
            warnings: rep.warnings,
        },
        spectrogram: SpectrogramRows {
            window_len: spec_len,
            freqs,
            frames,
        },
    })
}

/// Writes `features.{csv,json}`, `feature_means.json` and
/// `spectrogram.{csv,json}`.
pub fn write_features(dir: &Path, report: &FeatureReport, format: Format, prov: &Provenance) -> Result<()> {
    let mut header = vec!["source_id", "window_index"];
    header.extend(FEATURE_NAMES);
    let mut table = Table::new(header);
    for w in &report.windows {
        let mut row: Vec<Cell> = vec![w.source_id.clone().into(), w.window_index.into()];
        row.extend(w.z.iter().map(|&v| Cell::from(v)));
        table.push(row);
    }
    table.write(dir, "features", format, prov)?;
    write_json(
        dir.join("feature_means.json"),
        &Artifact {
            provenance: prov.clone(),
            body: &report.summary,
        },
    )?;
    let mut header: Vec<String> = vec!["source_id".into(), "frame".into(), "time".into()];
    header.extend((0..SPECTROGRAM_BINS).map(|k| format!("b{k}")));
    let mut spec = Table::new(header);
    for (id, m, t, mags) in &report.spectrogram.frames {
        let mut row: Vec<Cell> = vec![id.clone().into(), (*m).into(), (*t).into()];
        row.extend(mags.iter().map(|&v| Cell::from(v)));
        spec.push(row);
    }
    spec.write(dir, "spectrogram", format, prov)?;
    Ok(())
}

// ---------------------------------------------------------------------- build

/// Builds one representation. `tau` is required for STA and HSTF.
pub fn build_representation(
    signals: &[TimeSeries],
    kind: Kind,
    tau: Option<f64>,
    cfg: &Config,
    nyquist_floor: Option<f64>,
) -> Result<Representation> {
    let need_tau = || tau.ok_or_else(|| Error::InvalidConfig(format!("{} needs a tau", kind.name())));
    match kind {
        Kind::Base => fusion::build_base(signals, &cfg.base),
        Kind::Sta => fusion::build_sta(signals, need_tau()?, &cfg.window, nyquist_floor),
        Kind::Hstf => fusion::build_hstf(
            signals,
            need_tau()?,
            &cfg.window,
            &cfg.features,
            cfg.seed,
            nyquist_floor,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleInfo {
    pub method: String,
    pub kind: Kind,
    pub tau: Option<f64>,
    pub window_len: usize,
    pub n_samples: usize,
    /// `[M, D]` of every sample.
    pub sample_shape: (usize, usize),
    pub z6_fallbacks: usize,
    pub warnings: Vec<String>,
    pub config: Config,
}

/// Writes `dataset.json` and `samples.{csv,json}` with one row per
/// `(sample, window)`: `sample_id,row_index,c0..c{D-1},label`.
pub fn write_bundle(dir: &Path, rep: &Representation, cfg: &Config, format: Format) -> Result<()> {
    let prov = cfg.provenance();
    let (_, d) = rep.shape();
    let mut header = vec!["sample_id".to_string(), "row_index".to_string()];
    header.extend((0..d).map(|c| format!("c{c}")));
    header.push("label".into());
    let mut table = Table::new(header);
    for (i, s) in rep.samples.iter().enumerate() {
        for (r, row) in s.rows.iter().enumerate() {
            let mut cells: Vec<Cell> = vec![i.into(), r.into()];
            cells.extend(row.iter().map(|&v| Cell::from(v)));
            cells.push(s.label.into());
            table.push(cells);
        }
    }
    table.write(dir, "samples", format, &prov)?;
    write_json(
        dir.join("dataset.json"),
        &Artifact {
            provenance: prov,
            body: BundleInfo {
                method: rep.method_label(),
                kind: rep.kind,
                tau: rep.tau,
                window_len: rep.window_len,
                n_samples: rep.samples.len(),
                sample_shape: rep.shape(),
                z6_fallbacks: rep.z6_fallbacks,
                warnings: rep.warnings.clone(),
                config: cfg.clone(),
            },
        },
    )
}

// ------------------------------------------------------------------------ run

/// Per-fold results of every model on every representation, in input order.
pub fn evaluate(reps: &[Representation], models: &[Model], cfg: &Config) -> Result<Vec<FoldResult>> {
    let mut out = Vec::new();
    for rep in reps {
        out.extend(classify::cross_validate(rep, models, &cfg.classify, cfg.seed)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityDoc {
    pub methods: Vec<MethodStability>,
    /// Method labels, most stable first.
    pub ranking: Vec<String>,
}

pub fn stability_doc(results: &[FoldResult]) -> Result<StabilityDoc> {
    let methods = classify::stability_from_results(results)?;
    let ranking = classify::stability::ranking(&methods)
        .into_iter()
        .map(|m| m.method.clone())
        .collect();
    Ok(StabilityDoc { methods, ranking })
}

/// `rank: A > B > C` with each method's overall balanced score.
pub fn ranking_line(doc: &StabilityDoc) -> String {
    let parts: Vec<String> = doc
        .ranking
        .iter()
        .map(|name| {
            let m = doc.methods.iter().find(|m| &m.method == name);
            match m.and_then(|m| m.overall()) {
                Some(bs) => format!("{name} ({bs:.3})"),
                None => format!("{name} (n/a)"),
            }
        })
        .collect();
    format!("ranking: {}", parts.join(" > "))
}

pub fn results_table(results: &[FoldResult]) -> Table {
    let mut t = Table::new(["model", "method", "fold", "acc", "f1", "auc"]);
    for r in results {
        t.push(vec![
            r.model.clone().into(),
            r.method.clone().into(),
            r.fold.into(),
            r.accuracy.into(),
            r.macro_f1.into(),
            r.macro_auc.into(),
        ]);
    }
    t
}

pub fn summary_table(results: &[FoldResult]) -> Table {
    let mut t = Table::new([
        "model", "method", "acc_mean", "acc_std", "f1_mean", "f1_std", "auc_mean", "auc_std",
    ]);
    for (model, method, mean, std) in classify::fold_means(results) {
        t.push(vec![
            model.into(),
            method.into(),
            mean[0].into(),
            std[0].into(),
            mean[1].into(),
            std[1].into(),
            mean[2].into(),
            std[2].into(),
        ]);
    }
    t
}

/// Writes `results.csv`, `summary.{csv,json}` and `stability.json`.
/// `results.csv` is always CSV so `report` can read it back.
pub fn write_run(dir: &Path, results: &[FoldResult], format: Format, prov: &Provenance) -> Result<StabilityDoc> {
    results_table(results).write(dir, "results", Format::Csv, prov)?;
    summary_table(results).write(dir, "summary", format, prov)?;
    let doc = stability_doc(results)?;
    write_json(
        dir.join("stability.json"),
        &Artifact {
            provenance: prov.clone(),
            body: &doc,
        },
    )?;
    Ok(doc)
}

/// Reads a `results.csv` written by [`write_run`].
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<FoldResult>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<(String, String, usize, f64, f64, f64)>() {
        let (model, method, fold, accuracy, macro_f1, macro_auc) = rec?;
        out.push(FoldResult {
            model,
            method,
            fold,
            accuracy,
            macro_f1,
            macro_auc,
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig(format!("{} holds no results", path.display())));
    }
    Ok(out)
}
