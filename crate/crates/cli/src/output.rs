//! Output formatting and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qthresh::atlas::round_sig;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

pub const SIG_DIGITS: usize = 9;
pub const OUT_DIR_ENV: &str = "QTHRESH_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

/// Round every float in a JSON tree to nine significant digits.
pub fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            Number::from_f64(round_sig(x, SIG_DIGITS))
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        round_sig(x, SIG_DIGITS).to_string()
    } else {
        String::new()
    }
}

pub fn to_json_string(v: &impl Serialize) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&rounded(serde_json::to_value(v)?))?;
    s.push('\n');
    Ok(s)
}

/// Relative paths are placed under `$QTHRESH_OUT_DIR` when it is set.
pub fn resolve_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// CSV with a leading `#` provenance line and a header row.
pub fn csv_bytes(provenance: &str, header: &[&str], rows: &[Vec<String>]) -> csv::Result<Vec<u8>> {
    let mut buf = format!("# {provenance}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// `<stem>_<suffix>.<ext>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("svg");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounds_nested_floats() {
        let v = rounded(json!({"a": 0.10366402807491626, "b": [1.0000000001234, 3], "c": "x"}));
        assert_eq!(v, json!({"a": 0.103664028, "b": [1.0, 3], "c": "x"}));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("a/b.CSV")), Some(Format::Csv));
        assert_eq!(Format::from_path(Path::new("a/b")), None);
    }

    #[test]
    fn sibling_names() {
        assert_eq!(
            sibling(Path::new("out/sweep.svg"), "erasure"),
            PathBuf::from("out/sweep_erasure.svg")
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
