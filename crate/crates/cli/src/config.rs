use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{family, params, window, nx, ny}`; `window` is `[x_min, x_max, y_min, y_max]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub window: Option<[f64; 4]>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

/// `{epsilon, r, n, levels, dims}`; every field optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorFile {
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub dims: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a, C: Serialize> {
    pub seed: Option<u64>,
    pub config: &'a C,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub family: String,
    pub parameter: String,
    pub provenance: String,
    pub params: Vec<f64>,
    pub levels: Vec<f64>,
    pub dims: Vec<usize>,
    pub rule: String,
    /// Detected transition parameter values, keyed by homology dimension.
    pub transitions: BTreeMap<String, Vec<f64>>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(file).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Compute(e.to_string()))?;
    std::io::Write::write_all(&mut w, b"\n").map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// `<out>.meta.json` next to an output file.
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn write_metadata<C: Serialize>(
    out: &Path,
    seed: Option<u64>,
    config: &C,
) -> Result<(), CliError> {
    let meta = Metadata {
        seed,
        config,
        version: env!("CARGO_PKG_VERSION"),
    };
    write_json(&metadata_path(out), &meta)
}
