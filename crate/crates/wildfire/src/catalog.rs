//! Fuel catalog documents (JSON).

use std::fs;
use std::path::Path;

use thiserror::Error;
use wildfire_core::fuel::{CatalogDocument, FuelCatalog, FuelError};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("reading {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("catalog document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("catalog: {0}")]
    Invalid(#[from] FuelError),
}

pub fn parse_catalog(text: &str) -> Result<FuelCatalog, CatalogError> {
    let doc: CatalogDocument = serde_json::from_str(text)?;
    Ok(FuelCatalog::from_document(doc)?)
}

pub fn load_catalog(path: &Path) -> Result<FuelCatalog, CatalogError> {
    let text = fs::read_to_string(path).map_err(|err| CatalogError::Io {
        path: path.display().to_string(),
        err,
    })?;
    parse_catalog(&text)
}

pub fn catalog_to_json(catalog: &FuelCatalog) -> String {
    serde_json::to_string_pretty(&catalog.to_document()).expect("catalog serializes")
}
