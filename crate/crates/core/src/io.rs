//! Signal files, manifests and atomic artifact writes.
//!
//! A signal is a UTF-8 CSV with header `t,u`, one sample per row. Lines
//! starting with `#` are comments. A dataset is a directory holding
//! `manifest.json`:
//!
//! ```json
//! {"signals": [{"path": "signals/no_mass_000.csv", "label": 0, "source_id": "no_mass_000"}]}
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Provenance;
use crate::error::{Error, Result};
use crate::signal::TimeSeries;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none", flatten)]
    pub provenance: Option<Provenance>,
    pub signals: Vec<ManifestEntry>,
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into
/// place, so readers never observe a partial file.
pub fn atomic_write(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// CSV text builder: an optional `# comment` line, a header, then rows.
#[derive(Debug, Default)]
pub struct CsvText {
    buf: String,
}

impl CsvText {
    pub fn new(comment: Option<&str>, header: &[&str]) -> Self {
        let mut buf = String::new();
        if let Some(c) = comment {
            let _ = writeln!(buf, "# {c}");
        }
        buf.push_str(&header.join(","));
        buf.push('\n');
        Self { buf }
    }

    /// Appends one row. Fields must not contain commas, quotes or newlines.
    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: std::fmt::Display,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            let _ = write!(self.buf, "{f}");
        }
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        atomic_write(path, self.buf.as_bytes())
    }
}

/// Reads a `t,u` CSV file.
pub fn read_series_csv(path: impl AsRef<Path>, label: Option<u8>, source_id: &str) -> Result<TimeSeries> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "u" {
        return Err(Error::InvalidSignal(format!(
            "{}: expected header t,u, found {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut t = Vec::new();
    let mut u = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| {
                let line = rec.position().map_or(0, |p| p.line());
                Error::InvalidSignal(format!("{}:{line}: bad number {:?}", path.display(), &rec[i]))
            })
        };
        t.push(parse(0)?);
        u.push(parse(1)?);
    }
    TimeSeries::new(t, u, label, source_id)
}

pub fn series_csv(s: &TimeSeries, comment: Option<&str>) -> CsvText {
    let mut out = CsvText::new(comment, &["t", "u"]);
    for (t, u) in s.t().iter().zip(s.u()) {
        out.row([t, u]);
    }
    out
}

/// Resolves `path` to a manifest file: a directory means its `manifest.json`.
pub fn manifest_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    if path.is_dir() {
        path.join(MANIFEST)
    } else {
        path.to_path_buf()
    }
}

/// Loads every signal listed in a manifest (or a directory containing one).
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<TimeSeries>> {
    let manifest_file = manifest_path(path);
    let manifest: Manifest = read_json(&manifest_file)?;
    let root = manifest_file.parent().unwrap_or(Path::new("."));
    if manifest.signals.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} lists no signals",
            manifest_file.display()
        )));
    }
    manifest
        .signals
        .iter()
        .map(|e| {
            let p = if e.path.is_absolute() {
                e.path.clone()
            } else {
                root.join(&e.path)
            };
            read_series_csv(p, e.label, &e.source_id)
        })
        .collect()
}

/// Writes `signals/<source_id>.csv` for every record plus the manifest.
pub fn write_dataset(dir: impl AsRef<Path>, signals: &[TimeSeries], provenance: Option<&Provenance>) -> Result<()> {
    let dir = dir.as_ref();
    let comment = provenance.map(|p| p.comment());
    let mut entries = Vec::with_capacity(signals.len());
    for s in signals {
        if s.source_id.is_empty() || s.source_id.contains(['/', '\\']) || s.source_id.starts_with('.') {
            return Err(Error::InvalidConfig(format!(
                "source_id {:?} is not a file name",
                s.source_id
            )));
        }
        let rel = PathBuf::from("signals").join(format!("{}.csv", s.source_id));
        series_csv(s, comment.as_deref()).write(dir.join(&rel))?;
        entries.push(ManifestEntry {
            path: rel,
            label: s.label,
            source_id: s.source_id.clone(),
        });
    }
    write_json(
        dir.join(MANIFEST),
        &Manifest {
            provenance: provenance.cloned(),
            signals: entries,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = TimeSeries::new(vec![0.0, 0.25, 0.5], vec![1.5, -2.0, 1e-7], Some(3), "a").unwrap();
        let b = TimeSeries::new(vec![0.0, 1.0], vec![0.1, 0.2], None, "b").unwrap();
        let prov = Provenance {
            config_hash: "abc".into(),
            seed: 9,
        };
        write_dataset(dir.path(), &[a.clone(), b.clone()], Some(&prov)).unwrap();
        let text = fs::read_to_string(dir.path().join("signals/a.csv")).unwrap();
        assert!(text.starts_with("# config_hash=abc seed=9\nt,u\n"));
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back, vec![a, b]);
        let m: Manifest = read_json(dir.path().join(MANIFEST)).unwrap();
        assert_eq!(m.provenance, Some(prov));
    }

    #[test]
    fn plain_manifest_without_provenance() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x.csv"), "t,u\n0,1\n0.5,2\n").unwrap();
        fs::write(
            dir.path().join("m.json"),
            r#"{"signals":[{"path":"x.csv","label":1,"source_id":"x"}]}"#,
        )
        .unwrap();
        let s = load_dataset(dir.path().join("m.json")).unwrap();
        assert_eq!(s[0].u(), &[1.0, 2.0]);
        assert_eq!(s[0].label, Some(1));
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "time,u\n0,1\n1,2\n").unwrap();
        assert!(matches!(read_series_csv(&p, None, "x"), Err(Error::InvalidSignal(_))));
        fs::write(&p, "t,u\n0,1\n1,abc\n").unwrap();
        assert!(matches!(read_series_csv(&p, None, "x"), Err(Error::InvalidSignal(_))));
        fs::write(&p, "t,u\n0,1\n0,2\n").unwrap();
        assert!(read_series_csv(&p, None, "x").is_err());
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }
}
