use std::fs;
use std::path::{Path, PathBuf};

use rmg_core::manifold::Point;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Reads a JSON config. A top-level `"schema"` key, if present, must be 1
/// and is removed before the command-specific keys are checked.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: invalid JSON: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(schema) = obj.remove("schema") {
            if schema != serde_json::json!(1) {
                return Err(CliError::input(format!("{}: unsupported schema {schema}, expected 1", path.display())));
            }
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Resolves `p` against the directory of the config file it came from.
pub fn resolve(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// One JSON coordinate array per line; blank lines are skipped.
pub fn read_points(path: &Path) -> CliResult<Vec<Point>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<Vec<f64>>(l)
                .map(Point)
                .map_err(|e| CliError::input(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn points_jsonl<'a>(points: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for p in points {
        out.push_str(&serde_json::to_string(p).expect("finite coordinates serialize"));
        out.push('\n');
    }
    out
}
