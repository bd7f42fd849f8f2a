//! Report files: one JSON envelope per command plus optional CSV plot data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Field holding everything that legitimately differs between replays.
pub const TIMESTAMP_FIELD: &str = "timestamp";

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    /// Writes `<name>.json` as `{command, timestamp, config, <result_key>: result}` and returns its path.
    ///
    /// `wall_clock_seconds` is moved out of the result into the timestamp field, so that a
    /// replay differs from the original only there.
    pub fn write_report(&self, name: &str, config: &impl Serialize, result_key: &str, result: &impl Serialize) -> CliResult<PathBuf> {
        let mut result = serde_json::to_value(result).map_err(marton::Error::from)?;
        let wall_clock = result.as_object_mut().and_then(|o| o.remove("wall_clock_seconds"));
        let envelope = json!({
            "command": name,
            TIMESTAMP_FIELD: {
                "utc": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                "wall_clock_seconds": wall_clock.unwrap_or(Value::Null),
            },
            "config": config,
            result_key: result,
        });
        let path = self.dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(&envelope).map_err(marton::Error::from)?;
        fs::write(&path, text + "\n").map_err(|source| CliError::Write { path: path.clone(), source })?;
        Ok(path)
    }

    pub fn write_csv<R: Serialize>(&self, name: &str, rows: &[R]) -> CliResult<PathBuf> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|source| CliError::Write { path: path.clone(), source })?;
        Ok(path)
    }
}
