//! Writing results: the JSON document, flat CSV projections and extra files.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QCSPECTRA_OUT_DIR";

/// A file written next to the JSON output as `<name>.<suffix>`.
pub struct Artifact {
    pub suffix: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(suffix: &str, contents: String) -> Self {
        Artifact {
            suffix: suffix.to_string(),
            contents,
        }
    }
}

/// `--out-dir`, else `$QCSPECTRA_OUT_DIR`, else the working directory.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Two-column `key,value` table of every scalar leaf of `v`, with
/// dot-separated paths and array indices.
pub fn flatten_csv(v: &Value) -> Result<String, CliError> {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).map_err(CliError::io)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(CliError::io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&join(k), x, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, rows)),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
