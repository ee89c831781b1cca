//! Scenario data model: grid geometry, elevation, fuel codes, wind, ignitions.
//!
//! Orientation: row 0 is the north edge, storage is row-major, and cells are
//! addressed `(row, col)` everywhere. Elevation and cell size are metric;
//! [`Scenario::cell_size_ft`] and [`Wind::speed_ft_min`] convert for the
//! spread kernel.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fuel::{FuelCatalog, FuelError};

pub const DEFAULT_WIDTH: u32 = 240;
pub const DEFAULT_HEIGHT: u32 = 160;
pub const DEFAULT_CELL_SIZE_M: f64 = 30.0;
pub const DEFAULT_MAX_STEPS: u32 = 1000;

pub const FT_PER_M: f64 = 1.0 / 0.3048;
/// m/s to ft/min.
pub const FT_MIN_PER_M_S: f64 = 60.0 * FT_PER_M;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("`{field}` has {actual} entries, expected {expected}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("`{field}` invalid: {reason}")]
    Invalid {
        field: &'static str,
        reason: &'static str,
    },
    #[error("fuel_code[{index}]: {source}")]
    FuelCode { index: usize, source: FuelError },
    #[error("ignitions[{index}] at ({row}, {col}) is out of bounds")]
    IgnitionOutOfBounds { index: usize, row: u32, col: u32 },
    #[error("elevation[{index}] is not finite")]
    Elevation { index: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TerrainError {
    #[error("cells ({0}, {1}) and ({2}, {3}) are not 8-neighbors")]
    NotAdjacent(u32, u32, u32, u32),
    #[error("cell ({0}, {1}) out of bounds")]
    OutOfBounds(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub const fn new(row: u32, col: u32) -> Self {
        Cell { row, col }
    }

    pub fn chebyshev(self, other: Cell) -> u32 {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoRef {
    pub lat: f64,
    pub lon: f64,
}

impl GeoRef {
    pub fn new(lat: f64, lon: f64) -> Option<Self> {
        let g = GeoRef { lat, lon };
        g.is_valid().then_some(g)
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wind {
    pub speed_ms: f64,
    /// Meteorological degrees the wind blows toward (0 = north, clockwise).
    pub dir_deg: f64,
}

impl Wind {
    pub const CALM: Wind = Wind {
        speed_ms: 0.0,
        dir_deg: 0.0,
    };

    pub fn speed_ft_min(&self) -> f64 {
        self.speed_ms * FT_MIN_PER_M_S
    }

    /// Direction in kernel convention: radians, 0 = east, counterclockwise.
    pub fn dir_rad(&self) -> f64 {
        (90.0 - self.dir_deg).to_radians()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ignition {
    pub row: u32,
    pub col: u32,
    pub step: u32,
}

/// Ignition forecast attached to a scenario. Also anchors the grid center
/// on the map for report geocoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub lat: f64,
    pub lon: f64,
    pub datetime: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub width: u32,
    pub height: u32,
    pub cell_size_m: f64,
    /// Row-major, meters.
    pub elevation: Vec<f64>,
    /// Row-major land-cover / fuel codes.
    pub fuel_code: Vec<u16>,
    pub wind: Wind,
    /// Dead fine fuel moisture, fraction.
    pub moisture: f64,
    pub ignitions: Vec<Ignition>,
    pub seed: u64,
    pub max_steps: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast: Option<Forecast>,
}

impl Scenario {
    pub fn cells(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row as usize * self.width as usize + cell.col as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index / w) as u32, (index % w) as u32)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn center(&self) -> Cell {
        Cell::new(self.height / 2, self.width / 2)
    }

    pub fn cell_size_ft(&self) -> f64 {
        self.cell_size_m * FT_PER_M
    }

    pub fn elevation_at(&self, cell: Cell) -> f64 {
        self.elevation[self.index(cell)]
    }

    /// Checks every structural invariant and that each fuel code resolves
    /// in `catalog`.
    pub fn validate(&self, catalog: &FuelCatalog) -> Result<(), ScenarioError> {
        if self.width == 0 {
            return Err(ScenarioError::Invalid {
                field: "width",
                reason: "must be positive",
            });
        }
        if self.height == 0 {
            return Err(ScenarioError::Invalid {
                field: "height",
                reason: "must be positive",
            });
        }
        if !(self.cell_size_m.is_finite() && self.cell_size_m > 0.0) {
            return Err(ScenarioError::Invalid {
                field: "cell_size_m",
                reason: "must be finite and positive",
            });
        }
        let n = self.cells();
        if self.elevation.len() != n {
            return Err(ScenarioError::DimensionMismatch {
                field: "elevation",
                expected: n,
                actual: self.elevation.len(),
            });
        }
        if self.fuel_code.len() != n {
            return Err(ScenarioError::DimensionMismatch {
                field: "fuel_code",
                expected: n,
                actual: self.fuel_code.len(),
            });
        }
        if let Some(index) = self.elevation.iter().position(|e| !e.is_finite()) {
            return Err(ScenarioError::Elevation { index });
        }
        for (index, &code) in self.fuel_code.iter().enumerate() {
            catalog
                .resolve(code)
                .map_err(|source| ScenarioError::FuelCode { index, source })?;
        }
        if !(self.wind.speed_ms.is_finite() && self.wind.speed_ms >= 0.0) {
            return Err(ScenarioError::Invalid {
                field: "wind.speed_ms",
                reason: "must be finite and >= 0",
            });
        }
        if !self.wind.dir_deg.is_finite() {
            return Err(ScenarioError::Invalid {
                field: "wind.dir_deg",
                reason: "must be finite",
            });
        }
        if !(0.0..=1.0).contains(&self.moisture) {
            return Err(ScenarioError::Invalid {
                field: "moisture",
                reason: "must lie in [0, 1]",
            });
        }
        if self.max_steps == 0 {
            return Err(ScenarioError::Invalid {
                field: "max_steps",
                reason: "must be positive",
            });
        }
        for (index, ig) in self.ignitions.iter().enumerate() {
            if !self.contains(Cell::new(ig.row, ig.col)) {
                return Err(ScenarioError::IgnitionOutOfBounds {
                    index,
                    row: ig.row,
                    col: ig.col,
                });
            }
        }
        if let Some(f) = &self.forecast {
            if GeoRef::new(f.lat, f.lon).is_none() {
                return Err(ScenarioError::Invalid {
                    field: "forecast",
                    reason: "lat/lon out of range",
                });
            }
            if !(0.0..=1.0).contains(&f.confidence) {
                return Err(ScenarioError::Invalid {
                    field: "forecast.confidence",
                    reason: "must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }
}

/// Signed slope tangent from `from` to an 8-neighbor `to`.
pub fn slope_between(s: &Scenario, from: Cell, to: Cell) -> Result<f64, TerrainError> {
    for c in [from, to] {
        if !s.contains(c) {
            return Err(TerrainError::OutOfBounds(c.row, c.col));
        }
    }
    let dr = from.row.abs_diff(to.row);
    let dc = from.col.abs_diff(to.col);
    if dr > 1 || dc > 1 || (dr == 0 && dc == 0) {
        return Err(TerrainError::NotAdjacent(from.row, from.col, to.row, to.col));
    }
    let run = if dr == 1 && dc == 1 {
        s.cell_size_m * core::f64::consts::SQRT_2
    } else {
        s.cell_size_m
    };
    Ok((s.elevation_at(to) - s.elevation_at(from)) / run)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    FlatUniform,
    SingleSlope,
    Ridge,
    TwoFuel,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 4] = [
        SyntheticKind::FlatUniform,
        SyntheticKind::SingleSlope,
        SyntheticKind::Ridge,
        SyntheticKind::TwoFuel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::FlatUniform => "flat_uniform",
            SyntheticKind::SingleSlope => "single_slope",
            SyntheticKind::Ridge => "ridge",
            SyntheticKind::TwoFuel => "two_fuel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Fuel used by the synthetic fixtures (Anderson tall grass).
pub const SYNTHETIC_FUEL: u16 = 3;
/// Second fuel of the `two_fuel` fixture (Anderson short grass).
pub const SYNTHETIC_SECOND_FUEL: u16 = 1;
pub const SYNTHETIC_MOISTURE: f64 = 0.06;
/// Slope tangent of `single_slope` and the ridge flanks.
pub const SYNTHETIC_GRADE: f64 = 0.3;
pub const SYNTHETIC_BASE_ELEVATION_M: f64 = 500.0;

/// Deterministic test terrain with a single step-0 ignition at the grid
/// center and calm wind.
///
/// - `flat_uniform`: constant elevation, one fuel.
/// - `single_slope`: elevation rises eastward at [`SYNTHETIC_GRADE`].
/// - `ridge`: north-south ridge at a seeded column.
/// - `two_fuel`: west/east fuel split at a seeded column.
pub fn synthetic_scenario(
    kind: SyntheticKind,
    width: u32,
    height: u32,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    if width < 8 {
        return Err(ScenarioError::Invalid {
            field: "width",
            reason: "synthetic scenarios need at least 8 columns",
        });
    }
    if height < 8 {
        return Err(ScenarioError::Invalid {
            field: "height",
            reason: "synthetic scenarios need at least 8 rows",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = width as usize * height as usize;
    let cs = DEFAULT_CELL_SIZE_M;
    let mut elevation = vec![SYNTHETIC_BASE_ELEVATION_M; n];
    let mut fuel_code = vec![SYNTHETIC_FUEL; n];
    let col_of = |i: usize| (i % width as usize) as f64;

    match kind {
        SyntheticKind::FlatUniform => {}
        SyntheticKind::SingleSlope => {
            for (i, e) in elevation.iter_mut().enumerate() {
                *e += col_of(i) * cs * SYNTHETIC_GRADE;
            }
        }
        SyntheticKind::Ridge => {
            let ridge = rng.random_range(width / 4..=3 * width / 4) as f64;
            let peak = ridge.max(width as f64 - ridge) * cs * SYNTHETIC_GRADE;
            for (i, e) in elevation.iter_mut().enumerate() {
                *e += peak - (col_of(i) - ridge).abs() * cs * SYNTHETIC_GRADE;
            }
        }
        SyntheticKind::TwoFuel => {
            let split = rng.random_range(width / 3..=2 * width / 3) as f64;
            for (i, f) in fuel_code.iter_mut().enumerate() {
                if col_of(i) >= split {
                    *f = SYNTHETIC_SECOND_FUEL;
                }
            }
        }
    }

    Ok(Scenario {
        width,
        height,
        cell_size_m: cs,
        elevation,
        fuel_code,
        wind: Wind::CALM,
        moisture: SYNTHETIC_MOISTURE,
        ignitions: vec![Ignition {
            row: height / 2,
            col: width / 2,
            step: 0,
        }],
        seed,
        max_steps: DEFAULT_MAX_STEPS,
        forecast: None,
    })
}
