//! Artifacts, their text forms, atomic writes and the result cache.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TOOL: &str = "shiftlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable naming the cache directory; no caching when unset.
pub const CACHE_ENV: &str = "SHIFTLAB_CACHE_DIR";

/// C's `%.12e`: 13 significant digits, signed two-digit-minimum exponent.
pub fn fmt_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_e12(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// What an experiment produced.
#[derive(Debug, Clone)]
pub enum Artifact {
    Csv {
        columns: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
        /// Extra `# key=value` lines above the header.
        notes: Vec<(String, String)>,
    },
    Json(serde_json::Value),
}

/// Artifact plus the certificate inequalities it violated.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifact: Artifact,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            1
        }
    }
}

pub fn render(artifact: &Artifact, experiment: &str, hash: &str, violations: &[String]) -> String {
    match artifact {
        Artifact::Csv { columns, rows, notes } => {
            let mut s = format!("# {TOOL} {VERSION} config_hash={hash}\n");
            for (k, v) in notes {
                s.push_str(&format!("# {k}={v}\n"));
            }
            s.push_str(&columns.join(","));
            s.push('\n');
            for r in rows {
                let cells: Vec<String> = r.iter().map(Cell::render).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Artifact::Json(v) => {
            let doc = serde_json::json!({
                "tool": format!("{TOOL} {VERSION}"),
                "config_hash": hash,
                "experiment": experiment,
                "violations": violations,
                "result": v,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json");
            s.push('\n');
            s
        }
    }
}

/// Write via a sibling temporary file and rename, so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Provenance written next to each output file (`<path>.run.json`) and into the cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub exit_code: i32,
    pub violations: Vec<String>,
}

pub fn record_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".run.json");
    PathBuf::from(s)
}

pub fn cache_root() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// A previously stored result: rendered artifact and its run record.
pub struct CacheEntry {
    pub text: String,
    pub record: RunRecord,
}

pub fn cache_load(root: &Path, hash: &str) -> Option<CacheEntry> {
    let dir = root.join(hash);
    let text = std::fs::read_to_string(dir.join("artifact")).ok()?;
    let record: RunRecord = serde_json::from_str(&std::fs::read_to_string(dir.join("record.json")).ok()?).ok()?;
    (record.config_hash == hash).then_some(CacheEntry { text, record })
}

pub fn cache_store(root: &Path, hash: &str, text: &str, record: &RunRecord) -> Result<()> {
    let dir = root.join(hash);
    atomic_write(&dir.join("artifact"), text.as_bytes())?;
    atomic_write(&dir.join("record.json"), record_json(record).as_bytes())
}

pub fn record_json(record: &RunRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("json");
    s.push('\n');
    s
}
