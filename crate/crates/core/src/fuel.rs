//! Fuel models and the catalog that maps land-cover codes onto them.
//!
//! All quantities are imperial (ft, lb, BTU), matching the published fuel
//! tables and the constants of the spread kernel. Metric conversion happens
//! at the scenario boundary.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Tons per acre to pounds per square foot.
pub const TONS_PER_ACRE: f64 = 2000.0 / 43_560.0;

/// Heat of combustion shared by every Anderson model, BTU/lb.
pub const ANDERSON_HEAT_CONTENT: f64 = 8000.0;
/// Oven-dry particle density shared by every Anderson model, lb/ft³.
pub const ANDERSON_PARTICLE_DENSITY: f64 = 32.0;

/// Fine dead fuel load of Anderson model 1, lb/ft². Reference load for
/// burn duration.
pub const REFERENCE_LOAD: f64 = 0.74 * TONS_PER_ACRE;

/// Land-cover code for urban / developed cover.
pub const NB_URBAN: u16 = 91;
/// Land-cover code for open water.
pub const NB_WATER: u16 = 98;
/// Land-cover code for bare ground.
pub const NB_BARREN: u16 = 99;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuelError {
    #[error("duplicate fuel id {0}")]
    DuplicateId(u16),
    #[error("fuel {id}: field `{field}` out of range ({value})")]
    OutOfRange {
        id: u16,
        field: &'static str,
        value: f64,
    },
    #[error("fuel id {0} is listed both as a fuel model and as nonburnable")]
    Ambiguous(u16),
    #[error("unknown fuel code {0}")]
    UnknownCode(u16),
    #[error("fuel code {0} is nonburnable")]
    NonBurnable(u16),
}

/// Single size-class fuel bed description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelModel {
    pub id: u16,
    pub name: String,
    /// Surface-area-to-volume ratio, 1/ft.
    pub sigma: f64,
    /// Oven-dry fuel load, lb/ft².
    pub w0: f64,
    /// Fuel bed depth, ft.
    pub delta: f64,
    /// Particle density, lb/ft³.
    pub rho_p: f64,
    /// Moisture of extinction, fraction.
    pub mx: f64,
    /// Heat of combustion, BTU/lb.
    pub heat_content: f64,
}

impl FuelModel {
    pub fn validate(&self) -> Result<(), FuelError> {
        let positive = [
            ("sigma", self.sigma),
            ("w0", self.w0),
            ("delta", self.delta),
            ("rho_p", self.rho_p),
            ("heat_content", self.heat_content),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(FuelError::OutOfRange {
                    id: self.id,
                    field,
                    value,
                });
            }
        }
        if !(self.mx > 0.0 && self.mx < 1.0) {
            return Err(FuelError::OutOfRange {
                id: self.id,
                field: "mx",
                value: self.mx,
            });
        }
        Ok(())
    }
}

/// Result of resolving a land-cover code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved<'a> {
    Burnable(&'a FuelModel),
    NonBurnable,
}

/// Serialized shape of a catalog: fuel rows plus the nonburnable id list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDocument {
    pub fuels: Vec<FuelModel>,
    #[serde(default)]
    pub nonburnable: Vec<u16>,
}

/// Validated, immutable fuel catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct FuelCatalog {
    entries: BTreeMap<u16, FuelModel>,
    nonburnable: BTreeSet<u16>,
}

impl FuelCatalog {
    /// Builds a catalog, validating every model and id uniqueness.
    pub fn new(
        fuels: impl IntoIterator<Item = FuelModel>,
        nonburnable: impl IntoIterator<Item = u16>,
    ) -> Result<Self, FuelError> {
        let mut entries = BTreeMap::new();
        for model in fuels {
            model.validate()?;
            let id = model.id;
            if entries.insert(id, model).is_some() {
                return Err(FuelError::DuplicateId(id));
            }
        }
        let mut nb = BTreeSet::new();
        for id in nonburnable {
            if entries.contains_key(&id) {
                return Err(FuelError::Ambiguous(id));
            }
            if !nb.insert(id) {
                return Err(FuelError::DuplicateId(id));
            }
        }
        Ok(FuelCatalog {
            entries,
            nonburnable: nb,
        })
    }

    pub fn from_document(doc: CatalogDocument) -> Result<Self, FuelError> {
        Self::new(doc.fuels, doc.nonburnable)
    }

    pub fn to_document(&self) -> CatalogDocument {
        CatalogDocument {
            fuels: self.entries.values().cloned().collect(),
            nonburnable: self.nonburnable.iter().copied().collect(),
        }
    }

    pub fn get(&self, id: u16) -> Option<&FuelModel> {
        self.entries.get(&id)
    }

    pub fn resolve(&self, code: u16) -> Result<Resolved<'_>, FuelError> {
        if let Some(m) = self.entries.get(&code) {
            Ok(Resolved::Burnable(m))
        } else if self.nonburnable.contains(&code) {
            Ok(Resolved::NonBurnable)
        } else {
            Err(FuelError::UnknownCode(code))
        }
    }

    /// `false` for nonburnable and unknown codes.
    pub fn is_burnable(&self, code: u16) -> bool {
        self.entries.contains_key(&code)
    }

    pub fn models(&self) -> impl Iterator<Item = &FuelModel> {
        self.entries.values()
    }

    pub fn nonburnable_ids(&self) -> impl Iterator<Item = u16> + '_ {
        self.nonburnable.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn anderson(id: u16, name: &str, load_tpa: f64, sigma: f64, delta: f64, mx_pct: f64) -> FuelModel {
    FuelModel {
        id,
        name: name.to_string(),
        sigma,
        w0: load_tpa * TONS_PER_ACRE,
        delta,
        rho_p: ANDERSON_PARTICLE_DENSITY,
        mx: mx_pct / 100.0,
        heat_content: ANDERSON_HEAT_CONTENT,
    }
}

/// Anderson's 13 fuel models plus nonburnable urban (91), water (98) and
/// barren (99) codes.
///
/// Each model is reduced to one size class: `w0` is the 1-h dead fuel load
/// and `sigma` the 1-h surface-area-to-volume ratio.
pub fn builtin_catalog() -> FuelCatalog {
    let fuels = [
        anderson(1, "short grass", 0.74, 3500.0, 1.0, 12.0),
        anderson(2, "timber (grass and understory)", 2.00, 3000.0, 1.0, 15.0),
        anderson(3, "tall grass", 3.01, 1500.0, 2.5, 25.0),
        anderson(4, "chaparral", 5.01, 2000.0, 6.0, 20.0),
        anderson(5, "brush", 1.00, 2000.0, 2.0, 20.0),
        anderson(6, "dormant brush", 1.50, 1750.0, 2.5, 25.0),
        anderson(7, "southern rough", 1.13, 1750.0, 2.5, 40.0),
        anderson(8, "closed timber litter", 1.50, 2000.0, 0.2, 30.0),
        anderson(9, "hardwood litter", 2.92, 2500.0, 0.2, 25.0),
        anderson(10, "timber (litter and understory)", 3.01, 2000.0, 1.0, 25.0),
        anderson(11, "light logging slash", 1.50, 1500.0, 1.0, 15.0),
        anderson(12, "medium logging slash", 4.01, 1500.0, 2.3, 20.0),
        anderson(13, "heavy logging slash", 7.01, 1500.0, 3.0, 25.0),
    ];
    FuelCatalog::new(fuels, [NB_URBAN, NB_WATER, NB_BARREN])
        .expect("built-in catalog is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_anderson_13() {
        let cat = builtin_catalog();
        assert_eq!(cat.len(), 13);
        for id in 1..=13 {
            assert!(cat.is_burnable(id), "model {id}");
        }
        let short_grass = cat.get(1).unwrap();
        assert_eq!(short_grass.name, "short grass");
        assert_eq!(short_grass.delta, 1.0);
        assert_eq!(short_grass.mx, 0.12);
        assert_eq!(short_grass.sigma, 3500.0);
        // 0.74 t/ac
        assert!((short_grass.w0 - 0.033976).abs() < 1e-6);
    }

    #[test]
    fn nonburnable_codes() {
        let cat = builtin_catalog();
        for id in [NB_URBAN, NB_WATER, NB_BARREN] {
            assert!(!cat.is_burnable(id));
            assert_eq!(cat.resolve(id), Ok(Resolved::NonBurnable));
        }
        assert_eq!(cat.resolve(42), Err(FuelError::UnknownCode(42)));
    }

    #[test]
    fn builtin_satisfies_invariants() {
        for m in builtin_catalog().models() {
            m.validate().unwrap();
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        let m = builtin_catalog().get(3).unwrap().clone();
        let err = FuelCatalog::new([m.clone(), m], []).unwrap_err();
        assert_eq!(err, FuelError::DuplicateId(3));
    }

    #[test]
    fn extinction_moisture_range() {
        let mut m = builtin_catalog().get(1).unwrap().clone();
        m.mx = 1.5;
        let err = FuelCatalog::new([m], []).unwrap_err();
        assert!(matches!(err, FuelError::OutOfRange { field: "mx", .. }));
    }

    #[test]
    fn nonpositive_field_names_field() {
        let mut m = builtin_catalog().get(1).unwrap().clone();
        m.delta = 0.0;
        let err = FuelCatalog::new([m], []).unwrap_err();
        assert!(matches!(err, FuelError::OutOfRange { field: "delta", .. }));
    }

    #[test]
    fn id_in_both_lists_rejected() {
        let m = builtin_catalog().get(1).unwrap().clone();
        assert_eq!(FuelCatalog::new([m], [1]), Err(FuelError::Ambiguous(1)));
    }

    #[test]
    fn document_round_trip() {
        let cat = builtin_catalog();
        let back = FuelCatalog::from_document(cat.to_document()).unwrap();
        assert_eq!(cat, back);
    }
}
