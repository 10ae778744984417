//! CSV and manifest output. Payload files are deterministic (17-significant-
//! digit floats, LF endings, fixed row order); wall-clock time appears only
//! in the manifest.

use crate::error::Result;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// 17 significant digits, scientific; round-trips f64 exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Records one command run: the inputs that produced the outputs and a
/// content hash per written file.
pub struct Manifest {
    command: String,
    inputs: Vec<(String, String)>,
    entries: Vec<(String, u64, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            inputs: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.push((key.to_string(), value.to_string()));
    }

    /// Write a payload file and record its hash.
    pub fn write_file(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        self.entries
            .push((sha256_hex(bytes), bytes.len() as u64, name.to_string()));
        Ok(path)
    }

    /// Record a file written elsewhere (e.g. the kernel cache).
    pub fn record_existing(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.entries
            .push((sha256_hex(&bytes), bytes.len() as u64, name));
        Ok(())
    }

    /// Write manifest.txt into the output directory (overwrites; the
    /// manifest describes the latest run).
    pub fn finish(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut text = String::new();
        let _ = writeln!(text, "command: {}", self.command);
        let _ = writeln!(text, "written_at_unix: {ts}");
        for (k, v) in &self.inputs {
            let _ = writeln!(text, "input: {k} = {v}");
        }
        for (hash, size, name) in &self.entries {
            let _ = writeln!(text, "sha256: {hash}  bytes: {size}  file: {name}");
        }
        let path = dir.join("manifest.txt");
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Assemble a CSV payload: header row plus preformatted cells, LF endings.
pub fn csv_bytes(header: &str, rows: &[Vec<String>]) -> Vec<u8> {
    let mut text = String::with_capacity(rows.len() * 80 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text.into_bytes()
}
