//! Incident deduplication, negative sampling and weather window extraction.
//!
//! Everything here works on in-memory tables; reading and writing the
//! delimited-text forms is the companion crate's job.

use alloc::string::String;

use serde::{Deserialize, Serialize};

pub mod dedup;
pub mod geo;
pub mod negatives;
pub mod windows;

pub use dedup::{dedup_incidents, DedupConfig, DedupOutput, IncidentRecord};
pub use geo::{destination, haversine_km, GeoIndex, Region, EARTH_RADIUS_KM};
pub use negatives::{
    audit_negatives, positive_samples, sample_negatives, AuditViolation, Label, LabeledSample, NegativeConfig,
    NegativeCounts, NegativeError, Tier,
};
pub use windows::{extract_windows, FeatureWindow, GridCell, Values, WeatherDay, WeatherTable, WindowOutput, VARIABLES};

/// A skipped input row and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub row: usize,
    pub reason: String,
}

impl Diagnostic {
    pub fn new(row: usize, reason: impl Into<String>) -> Self {
        Diagnostic {
            row,
            reason: reason.into(),
        }
    }
}
