//! Deterministic artifact emission: CSV tables with stable formatting,
//! JSON documents, atomic writes, and a manifest that hashes every file
//! so a rerun can be compared byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adc::CalibState;
use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("string write");
    }
    out
}

/// Write via a temporary file in the same directory plus rename, so a
/// crash never leaves a half-written artifact and a rerun that produces
/// identical bytes replaces the file atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Shortest representation that round-trips the exact f64, so rerunning
/// a command reproduces the file byte for byte on any platform.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // keep integral values readable and unambiguous as floats
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

/// Minimal CSV: comma separation, no quoting (cell content is numeric or
/// a bare identifier), trailing newline.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cells: Vec<String> = cells.into_iter().map(Into::into).collect();
        assert_eq!(
            cells.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// One artifact in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Run description written next to the artifacts. Deliberately contains
/// no timestamps or host details: identical inputs must hash identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub version: String,
    /// Hash of the resolved configuration the run used.
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

/// Collects artifacts for one output directory and finishes with a
/// manifest covering all of them.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Artifacts> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, table: &CsvTable) -> Result<()> {
        self.write_bytes(name, &table.to_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Write `manifest.json` and return its path.
    pub fn finish(mut self, command: &str, seed: u64, config_sha256: &str) -> Result<PathBuf> {
        self.files.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = Manifest {
            command: command.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config_sha256.to_string(),
            files: self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Calibration result for one converter column, keyed by the chip seed
/// so a stored state is only replayed against the die it was measured on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibRecord {
    pub column: usize,
    pub correction_units: i32,
    pub state: CalibState,
}

/// Persisted calibration for a sampled chip.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibFile {
    pub chip_seed: u64,
    pub sigma_iu: f64,
    pub sa_sigma: f64,
    pub columns: Vec<CalibRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_the_reference_vector() {
        // NIST FIPS 180-2 test vector for "abc"
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_bytes_are_stable() {
        let mut t = CsvTable::new(["a", "b"]);
        t.row([fmt_f64(1.0), fmt_f64(0.125163142954006)]);
        t.row([fmt_f64(-3.5), fmt_f64(2e-9)]);
        assert_eq!(
            String::from_utf8(t.to_bytes()).unwrap(),
            "a,b\n1.0,0.125163142954006\n-3.5,0.000000002\n"
        );
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn ragged_rows_are_rejected() {
        let mut t = CsvTable::new(["a", "b"]);
        t.row(["1"]);
    }

    #[test]
    fn fmt_f64_round_trips() {
        for &v in &[0.0, -0.0, 1.5, 0.1, 1.0 / 3.0, 56.0, -28.0, 1e-12, f64::MAX] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, b"hello\n").unwrap();
        write_atomic(&path, b"world\n").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"world\n");
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(names, vec!["x.csv"]);
    }

    #[test]
    fn manifest_lists_every_artifact_with_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut art = Artifacts::create(dir.path()).unwrap();
        let mut t = CsvTable::new(["k"]);
        t.row(["1"]);
        art.write_csv("t.csv", &t).unwrap();
        art.write_json("v.json", &serde_json::json!({"k": 1})).unwrap();
        let path = art.finish("demo", 7, &sha256_hex(b"")).unwrap();
        let manifest: Manifest =
            serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(manifest.command, "demo");
        assert_eq!(manifest.seed, 7);
        assert_eq!(manifest.files.len(), 2);
        for f in &manifest.files {
            let bytes = std::fs::read(dir.path().join(&f.name)).unwrap();
            assert_eq!(bytes.len() as u64, f.bytes);
            assert_eq!(sha256_hex(&bytes), f.sha256);
        }
        // no timestamp-like fields: rerunning must hash identically
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains("time"), "{text}");
    }
}
