//! Line-delimited JSON plumbing shared by every stage.
//!
//! Every artifact starts with a provenance line `{"meta": {...}}` carrying
//! the tool version, stage name, seed and flags. Readers accept files with
//! or without that line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "nounclass";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block written at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub flags: BTreeMap<String, Value>,
    /// Stage results worth keeping next to the payload (counts, inertia).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, Value>,
}

impl Meta {
    pub fn new(stage: &str) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            stage: stage.to_string(),
            seed: None,
            flags: BTreeMap::new(),
            info: BTreeMap::new(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn flag(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.flags.insert(key.to_string(), value);
        self
    }

    pub fn info(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.info.insert(key.to_string(), value);
        self
    }
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    meta: Meta,
}

/// Formats a real with nine significant digits in exponent notation, which
/// is valid JSON and round-trips single-precision values exactly.
pub fn format_real(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn open_reader(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub struct JsonlWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            out: BufWriter::new(file),
        })
    }

    pub fn meta(&mut self, meta: &Meta) -> Result<()> {
        self.record(&MetaLine { meta: meta.clone() })
    }

    pub fn record<T: Serialize + ?Sized>(&mut self, record: &T) -> Result<()> {
        let line = serde_json::to_string(record).map_err(|e| Error::Parse {
            path: self.path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        self.raw_line(&line)
    }

    pub fn raw_line(&mut self, line: &str) -> Result<()> {
        self.out
            .write_all(line.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes a full JSONL artifact: provenance line followed by `records`.
pub fn write_jsonl<'a, T, I>(path: impl AsRef<Path>, meta: &Meta, records: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut w = JsonlWriter::create(path)?;
    w.meta(meta)?;
    for r in records {
        w.record(r)?;
    }
    w.finish()
}

/// Reads a JSONL artifact, returning the provenance block (if present) and
/// all records. Blank lines are ignored.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<(Option<Meta>, Vec<T>)> {
    let path = path.as_ref();
    let reader = open_reader(path)?;
    let mut meta = None;
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if records.is_empty() && meta.is_none() && trimmed.starts_with("{\"meta\"") {
            if let Ok(m) = serde_json::from_str::<MetaLine>(trimmed) {
                meta = Some(m.meta);
                continue;
            }
        }
        let record = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok((meta, records))
}

/// Writes a pretty-printed JSON document with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Reads a plain word list: one entry per line, `#` lines are comments.
pub fn read_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let reader = open_reader(path)?;
    let mut words = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let w = line.trim();
        if w.is_empty() || w.starts_with('#') {
            continue;
        }
        words.push(w.to_string());
    }
    Ok(words)
}

pub fn write_word_list(path: impl AsRef<Path>, meta: &Meta, words: &[String]) -> Result<()> {
    let mut w = JsonlWriter::create(path)?;
    let header = serde_json::to_string(meta).unwrap_or_default();
    w.raw_line(&format!("# {header}"))?;
    for word in words {
        w.raw_line(word)?;
    }
    w.finish()
}
