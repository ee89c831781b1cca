//! Scenario documents: a versioned JSON container with the elevation and fuel
//! arrays inline, or moved to a binary sidecar for large grids.
//!
//! Sidecar layout: `width·height` little-endian f64 elevations followed by
//! `width·height` little-endian u16 fuel codes. The document names the file
//! relative to itself and pins it with the first 16 bytes of its SHA-256.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use wildfire_core::fuel::FuelCatalog;
use wildfire_core::terrain::{Forecast, Ignition, Scenario, ScenarioError, Wind};

pub const SCENARIO_VERSION: &str = "1.0";
const SUPPORTED_MAJOR: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("reading {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("scenario document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported scenario version {0:?}")]
    Version(String),
    #[error("scenario document: {0}")]
    Layout(&'static str),
    #[error("sidecar {path}: hash mismatch (expected {expected}, got {actual})")]
    SidecarHash { path: String, expected: String, actual: String },
    #[error("sidecar {path}: {size} bytes, expected {expected}")]
    SidecarSize { path: String, size: usize, expected: usize },
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ScenarioError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub path: String,
    /// Hex of the first 16 bytes of the blob's SHA-256.
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub version: String,
    pub width: u32,
    pub height: u32,
    pub cell_size_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel_code: Option<Vec<u16>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<Sidecar>,
    pub wind: Wind,
    pub moisture: f64,
    pub ignitions: Vec<Ignition>,
    pub seed: u64,
    pub max_steps: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast: Option<Forecast>,
}

impl ScenarioDocument {
    pub fn inline(s: &Scenario) -> Self {
        ScenarioDocument {
            version: SCENARIO_VERSION.into(),
            width: s.width,
            height: s.height,
            cell_size_m: s.cell_size_m,
            elevation: Some(s.elevation.clone()),
            fuel_code: Some(s.fuel_code.clone()),
            sidecar: None,
            wind: s.wind,
            moisture: s.moisture,
            ignitions: s.ignitions.clone(),
            seed: s.seed,
            max_steps: s.max_steps,
            forecast: s.forecast.clone(),
        }
    }
}

fn check_version(v: &str) -> Result<(), ScenarioFileError> {
    let major = v.split('.').next().and_then(|m| m.parse::<u32>().ok());
    match major {
        Some(SUPPORTED_MAJOR) => Ok(()),
        _ => Err(ScenarioFileError::Version(v.to_string())),
    }
}

pub fn blob_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)[..16].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode_blob(s: &Scenario) -> Vec<u8> {
    let mut out = Vec::with_capacity(s.cells() * 10);
    for e in &s.elevation {
        out.extend_from_slice(&e.to_le_bytes());
    }
    for f in &s.fuel_code {
        out.extend_from_slice(&f.to_le_bytes());
    }
    out
}

fn decode_blob(bytes: &[u8], cells: usize, path: &str) -> Result<(Vec<f64>, Vec<u16>), ScenarioFileError> {
    let expected = cells * 10;
    if bytes.len() != expected {
        return Err(ScenarioFileError::SidecarSize {
            path: path.into(),
            size: bytes.len(),
            expected,
        });
    }
    let (elev, fuel) = bytes.split_at(cells * 8);
    let elevation = elev
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let fuel_code = fuel
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes(c.try_into().expect("2 bytes")))
        .collect();
    Ok((elevation, fuel_code))
}

/// Parses a document; `base` resolves a sidecar path. Validation against a
/// catalog is a separate step.
pub fn parse_scenario(text: &str, base: Option<&Path>) -> Result<Scenario, ScenarioFileError> {
    let doc: ScenarioDocument = serde_json::from_str(text)?;
    from_document(doc, base)
}

pub fn from_document(doc: ScenarioDocument, base: Option<&Path>) -> Result<Scenario, ScenarioFileError> {
    check_version(&doc.version)?;
    let cells = doc.width as usize * doc.height as usize;
    let (elevation, fuel_code) = match (doc.elevation, doc.fuel_code, doc.sidecar) {
        (Some(e), Some(f), None) => (e, f),
        (None, None, Some(sc)) => {
            let path = base.map_or_else(|| PathBuf::from(&sc.path), |b| b.join(&sc.path));
            let bytes = fs::read(&path).map_err(|err| ScenarioFileError::Io {
                path: path.display().to_string(),
                err,
            })?;
            let actual = blob_hash(&bytes);
            if !actual.eq_ignore_ascii_case(&sc.hash) {
                return Err(ScenarioFileError::SidecarHash {
                    path: sc.path,
                    expected: sc.hash,
                    actual,
                });
            }
            decode_blob(&bytes, cells, &sc.path)?
        }
        (_, _, Some(_)) => return Err(ScenarioFileError::Layout("sidecar excludes inline elevation/fuel_code")),
        _ => return Err(ScenarioFileError::Layout("elevation and fuel_code are both required")),
    };
    Ok(Scenario {
        width: doc.width,
        height: doc.height,
        cell_size_m: doc.cell_size_m,
        elevation,
        fuel_code,
        wind: doc.wind,
        moisture: doc.moisture,
        ignitions: doc.ignitions,
        seed: doc.seed,
        max_steps: doc.max_steps,
        forecast: doc.forecast,
    })
}

pub fn load_scenario(path: &Path, catalog: &FuelCatalog) -> Result<Scenario, ScenarioFileError> {
    let text = fs::read_to_string(path).map_err(|err| ScenarioFileError::Io {
        path: path.display().to_string(),
        err,
    })?;
    let s = parse_scenario(&text, path.parent())?;
    s.validate(catalog)?;
    Ok(s)
}

pub fn scenario_to_json(s: &Scenario) -> String {
    serde_json::to_string(&ScenarioDocument::inline(s)).expect("scenario serializes")
}

/// Writes `<path>` plus a sidecar `<path stem>.bin` beside it.
pub fn save_with_sidecar(s: &Scenario, path: &Path) -> Result<(), ScenarioFileError> {
    let blob = encode_blob(s);
    let name = format!(
        "{}.bin",
        path.file_stem().and_then(|n| n.to_str()).unwrap_or("scenario")
    );
    let blob_path = path.with_file_name(&name);
    let io = |p: &Path| {
        let p = p.display().to_string();
        move |err| ScenarioFileError::Io { path: p, err }
    };
    fs::write(&blob_path, &blob).map_err(io(&blob_path))?;
    let mut doc = ScenarioDocument::inline(s);
    doc.elevation = None;
    doc.fuel_code = None;
    doc.sidecar = Some(Sidecar {
        path: name,
        hash: blob_hash(&blob),
    });
    fs::write(path, serde_json::to_string(&doc)?).map_err(io(path))?;
    Ok(())
}
