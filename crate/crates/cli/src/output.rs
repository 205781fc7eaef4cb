use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use serde_json::{json, Map, Value};
use wqed::ModelParams;

use crate::CliError;

/// Fixed float formatting so repeated runs produce identical bytes.
pub fn fmt(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// `stem` with an optional suffix and the given extension.
pub fn path_for(stem: &Path, suffix: &str, ext: &str) -> PathBuf {
    let name = stem
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    stem.with_file_name(format!("{name}{suffix}.{ext}"))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    ensure_parent(path)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

static STARTED: OnceLock<Instant> = OnceLock::new();

/// Marks the start of the run for the wall-clock entry in sidecars.
pub fn start_clock() {
    STARTED.get_or_init(Instant::now);
}

/// Metadata written next to every data file.
pub struct Sidecar {
    command: &'static str,
    fields: Map<String, Value>,
    outputs: Vec<String>,
}

impl Sidecar {
    pub fn new(command: &'static str, params: Option<&ModelParams>) -> Self {
        let mut fields = Map::new();
        if let Some(p) = params {
            fields.insert("params".into(), json!(p));
        }
        Self {
            command,
            fields,
            outputs: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.into(), value);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(mut self, path: &Path) -> Result<Value, CliError> {
        self.fields.insert("command".into(), json!(self.command));
        self.fields.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        self.fields.insert("threads".into(), json!(rayon::current_num_threads()));
        self.fields.insert("outputs".into(), json!(self.outputs));
        self.fields.insert(
            "wall_time_s".into(),
            json!(STARTED.get_or_init(Instant::now).elapsed().as_secs_f64()),
        );
        let value = Value::Object(self.fields);
        ensure_parent(path)?;
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(value)
    }
}

/// The lattice momentum grid as recorded in sidecars.
pub fn momentum_grid(l: usize) -> Value {
    json!({
        "L": l,
        "p_n": "-pi + 2 pi n / L, n = 0..L-1",
        "spacing": 2.0 * std::f64::consts::PI / l as f64,
    })
}

pub fn closed_axis(n: usize) -> Value {
    json!({ "points": n, "range": "[-pi, pi] inclusive" })
}
