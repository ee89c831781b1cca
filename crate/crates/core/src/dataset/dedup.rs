use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use chrono::{NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use super::geo::{haversine_km, CONUS_LAT, CONUS_LON};
use super::Diagnostic;
use crate::terrain::GeoRef;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub lat: f64,
    pub lon: f64,
    /// UTC.
    pub discovered_at: NaiveDateTime,
}

impl IncidentRecord {
    pub fn geo(&self) -> GeoRef {
        GeoRef {
            lat: self.lat,
            lon: self.lon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupConfig {
    pub min_km: f64,
    pub min_hours: f64,
    pub lat: (f64, f64),
    pub lon: (f64, f64),
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            min_km: 5.0,
            min_hours: 2.0,
            lat: CONUS_LAT,
            lon: CONUS_LON,
        }
    }
}

impl DedupConfig {
    pub fn in_bbox(&self, r: &IncidentRecord) -> bool {
        (self.lat.0..=self.lat.1).contains(&r.lat) && (self.lon.0..=self.lon.1).contains(&r.lon)
    }

    fn min_gap(&self) -> TimeDelta {
        TimeDelta::milliseconds(libm::round(self.min_hours * 3_600_000.0) as i64)
    }

    /// Whether `later` must be rejected because of the retained `earlier`.
    /// Assumes `earlier.discovered_at <= later.discovered_at`.
    pub fn conflicts(&self, earlier: &IncidentRecord, later: &IncidentRecord) -> bool {
        let d = haversine_km(earlier.geo(), later.geo());
        if d >= self.min_km {
            return false;
        }
        earlier.discovered_at.date() == later.discovered_at.date() || later.discovered_at - earlier.discovered_at < self.min_gap()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DedupOutput {
    pub retained: Vec<IncidentRecord>,
    /// Input indices of the retained records.
    pub retained_rows: Vec<usize>,
    pub outside_bbox: usize,
    pub duplicates: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Time-ordered acceptance scan. Records are visited by `discovered_at`
/// (stable, so equal timestamps keep input order); a record survives when it
/// lies in the bounding box and conflicts with no already-retained record.
///
/// Retained records are bucketed on a grid at least `min_km` wide, and each
/// bucket is scanned newest-first until records are too old to matter.
pub fn dedup_incidents(records: &[IncidentRecord], cfg: &DedupConfig) -> DedupOutput {
    let mut out = DedupOutput::default();
    let mut order: Vec<usize> = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if !r.geo().is_valid() || !r.lat.is_finite() || !r.lon.is_finite() {
            out.diagnostics.push(Diagnostic::new(i, "invalid coordinates"));
        } else {
            order.push(i);
        }
    }
    order.sort_by_key(|&i| records[i].discovered_at);

    let max_lat = cfg.lat.0.abs().max(cfg.lat.1.abs()).min(89.9);
    let lat_step = (cfg.min_km / super::geo::EARTH_RADIUS_KM).to_degrees() * 1.000_001;
    let lon_step = {
        let s = libm::sin(cfg.min_km / (2.0 * super::geo::EARTH_RADIUS_KM)) / libm::cos(max_lat.to_radians());
        if s >= 1.0 {
            360.0
        } else {
            2.0 * libm::asin(s).to_degrees() * 1.000_001
        }
    };
    let key = |r: &IncidentRecord| {
        (
            libm::floor(r.lat / lat_step.max(1e-9)) as i64,
            libm::floor((r.lon + 180.0) / lon_step.max(1e-9)) as i64,
        )
    };
    let mut buckets: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    let gap = cfg.min_gap();

    for i in order {
        let r = &records[i];
        if !cfg.in_bbox(r) {
            out.outside_bbox += 1;
            continue;
        }
        let day_start = r.discovered_at.date().and_hms_opt(0, 0, 0).expect("midnight exists");
        let horizon = day_start.min(r.discovered_at - gap);
        let (ki, kj) = key(r);
        let mut clash = false;
        'scan: for di in -1..=1 {
            for dj in -1..=1 {
                let Some(ids) = buckets.get(&(ki + di, kj + dj)) else {
                    continue;
                };
                for &k in ids.iter().rev() {
                    let prev = &out.retained[k];
                    if prev.discovered_at < horizon {
                        break;
                    }
                    if cfg.conflicts(prev, r) {
                        clash = true;
                        break 'scan;
                    }
                }
            }
        }
        if clash {
            out.duplicates += 1;
            continue;
        }
        buckets.entry((ki, kj)).or_default().push(out.retained.len());
        out.retained.push(*r);
        out.retained_rows.push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rec(lat: f64, lon: f64, y: i32, m: u32, d: u32, h: u32, min: u32) -> IncidentRecord {
        IncidentRecord {
            lat,
            lon,
            discovered_at: NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(h, min, 0).unwrap(),
        }
    }

    /// Quadratic restatement of the retention rules.
    fn brute(records: &[IncidentRecord], cfg: &DedupConfig) -> Vec<IncidentRecord> {
        let mut idx: Vec<usize> = (0..records.len()).collect();
        idx.sort_by_key(|&i| records[i].discovered_at);
        let mut kept: Vec<IncidentRecord> = Vec::new();
        for i in idx {
            let r = records[i];
            let inside = r.lat >= cfg.lat.0 && r.lat <= cfg.lat.1 && r.lon >= cfg.lon.0 && r.lon <= cfg.lon.1;
            if !inside {
                continue;
            }
            let ok = kept.iter().all(|k| {
                let d = haversine_km(k.geo(), r.geo());
                let same_day = k.discovered_at.date() == r.discovered_at.date();
                let hours = (r.discovered_at - k.discovered_at).num_seconds() as f64 / 3600.0;
                !(same_day && d < cfg.min_km) && !(d < cfg.min_km && hours < cfg.min_hours)
            });
            if ok {
                kept.push(r);
            }
        }
        kept
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<IncidentRecord> {
        let base = NaiveDate::from_ymd_opt(2018, 7, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let centers: Vec<(f64, f64)> = (0..8)
            .map(|_| (rng.random_range(23.0..50.5), rng.random_range(-126.0..-66.0)))
            .collect();
        (0..n)
            .map(|_| {
                let (clat, clon) = centers[rng.random_range(0..centers.len())];
                IncidentRecord {
                    lat: clat + rng.random_range(-0.12..0.12),
                    lon: clon + rng.random_range(-0.12..0.12),
                    discovered_at: base + TimeDelta::minutes(rng.random_range(0..60 * 24 * 6)),
                }
            })
            .collect()
    }

    #[test]
    fn same_day_neighbor_dropped() {
        let a = rec(40.0, -100.0, 2018, 8, 1, 10, 0);
        let b = rec(40.0 + 3.0 / 111.19, -100.0, 2018, 8, 1, 20, 0);
        let out = dedup_incidents(&[b, a], &DedupConfig::default());
        assert_eq!(out.retained, alloc::vec![a]);
        assert_eq!(out.retained_rows, alloc::vec![1]);
    }

    #[test]
    fn outside_conus_dropped() {
        let out = dedup_incidents(&[rec(20.0, -100.0, 2018, 8, 1, 0, 0)], &DedupConfig::default());
        assert!(out.retained.is_empty());
        assert_eq!(out.outside_bbox, 1);
    }

    #[test]
    fn cross_midnight_gap_rule() {
        let a = rec(40.0, -100.0, 2018, 8, 1, 23, 30);
        let near_soon = rec(40.01, -100.0, 2018, 8, 2, 0, 30);
        let near_late = rec(40.01, -100.0, 2018, 8, 2, 3, 0);
        let out = dedup_incidents(&[a, near_soon], &DedupConfig::default());
        assert_eq!(out.retained.len(), 1);
        let out = dedup_incidents(&[a, near_late], &DedupConfig::default());
        assert_eq!(out.retained.len(), 2);
    }

    #[test]
    fn invalid_rows_reported() {
        let mut bad = rec(40.0, -100.0, 2018, 8, 1, 0, 0);
        bad.lat = f64::NAN;
        let out = dedup_incidents(&[bad, rec(41.0, -100.0, 2018, 8, 1, 0, 0)], &DedupConfig::default());
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].row, 0);
        assert_eq!(out.retained.len(), 1);
    }

    #[test]
    fn matches_brute_force_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = DedupConfig::default();
        for _ in 0..30 {
            let n = rng.random_range(1..500);
            let recs = random_set(&mut rng, n);
            let out = dedup_incidents(&recs, &cfg);
            assert_eq!(out.retained, brute(&recs, &cfg));
            let again = dedup_incidents(&out.retained, &cfg);
            assert_eq!(again.retained, out.retained);
            assert!(out.retained.windows(2).all(|w| w[0].discovered_at <= w[1].discovered_at));
        }
    }
}
