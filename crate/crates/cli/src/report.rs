use std::path::{Path, PathBuf};

use serde::Serialize;

/// Self-describing run report. The volatile `duration_ms` field goes to the
/// console only; result files carry just the stable parts so seeded runs
/// are byte-identical.
#[derive(Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub results: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
}

impl<T: Serialize> RunReport<T> {
    pub fn new(command: &str, config: serde_json::Value, results: T) -> Self {
        RunReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            results,
            duration_ms: None,
        }
    }

    /// Stable JSON: everything except the wall-clock duration.
    pub fn stable_json(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("report serializes");
        value.as_object_mut().map(|o| o.remove("duration_ms"));
        value
    }

    pub fn print(&self, json: bool) {
        if json {
            println!("{}", serde_json::to_string_pretty(self).unwrap());
        }
    }
}

/// Writes pretty JSON under the output directory, creating it as needed.
pub fn write_json(out: &Path, name: &str, value: &serde_json::Value) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    std::fs::write(&path, format!("{:#}\n", value))?;
    Ok(path)
}

/// Writes CSV rows with a header line.
pub fn write_csv(
    out: &Path,
    name: &str,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    let mut text = String::with_capacity(4096);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    std::fs::write(&path, text)?;
    Ok(path)
}
