//! Great-circle distance, a bucketed radius index and region polygons.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::terrain::GeoRef;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

pub fn haversine_km(a: GeoRef, b: GeoRef) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let s1 = libm::sin(dp / 2.0);
    let s2 = libm::sin(dl / 2.0);
    let h = s1 * s1 + libm::cos(p1) * libm::cos(p2) * s2 * s2;
    2.0 * EARTH_RADIUS_KM * libm::asin(libm::sqrt(h.clamp(0.0, 1.0)))
}

/// Point reached by travelling `dist_km` from `from` on initial bearing
/// `bearing` (radians clockwise from north). Longitude is wrapped to ±180.
pub fn destination(from: GeoRef, bearing: f64, dist_km: f64) -> GeoRef {
    let d = dist_km / EARTH_RADIUS_KM;
    let p1 = from.lat.to_radians();
    let l1 = from.lon.to_radians();
    let sp2 = libm::sin(p1) * libm::cos(d) + libm::cos(p1) * libm::sin(d) * libm::cos(bearing);
    let p2 = libm::asin(sp2.clamp(-1.0, 1.0));
    let l2 = l1
        + libm::atan2(
            libm::sin(bearing) * libm::sin(d) * libm::cos(p1),
            libm::cos(d) - libm::sin(p1) * sp2,
        );
    let mut lon = l2.to_degrees();
    while lon > 180.0 {
        lon -= 360.0;
    }
    while lon < -180.0 {
        lon += 360.0;
    }
    GeoRef {
        lat: p2.to_degrees().clamp(-90.0, 90.0),
        lon,
    }
}

/// Largest longitude difference (degrees) two points can have while lying
/// within `radius_km` of each other when both sit at or below `max_abs_lat`.
///
/// From the haversine identity, sin²(d/2R) ≥ cos φ1 cos φ2 sin²(Δλ/2).
fn lon_span_deg(radius_km: f64, max_abs_lat: f64) -> Option<f64> {
    let c = libm::cos(max_abs_lat.min(90.0).to_radians());
    let s = libm::sin(radius_km / (2.0 * EARTH_RADIUS_KM)) / c;
    if !(s.is_finite()) || s >= 1.0 {
        return None;
    }
    Some(2.0 * libm::asin(s).to_degrees())
}

const SLACK: f64 = 1.000_001;

/// Bucketed point index answering "which points lie within `radius_km`".
///
/// Bucket sizes are derived from the radius so that the scan never misses a
/// point; the final test is always an exact haversine comparison.
#[derive(Debug, Clone)]
pub struct GeoIndex {
    radius_km: f64,
    lat_step: f64,
    lon_step: f64,
    max_abs_lat: f64,
    points: Vec<GeoRef>,
    buckets: BTreeMap<(i32, i32), Vec<usize>>,
}

impl GeoIndex {
    /// `max_abs_lat` bounds the latitudes that will be inserted; the bucket
    /// width in longitude is sized for it.
    pub fn new(radius_km: f64, max_abs_lat: f64) -> Self {
        let lat_step = (radius_km / EARTH_RADIUS_KM).to_degrees() * SLACK;
        let lon_step = lon_span_deg(radius_km, max_abs_lat).map_or(360.0, |s| (s * SLACK).min(360.0));
        GeoIndex {
            radius_km,
            lat_step: lat_step.max(1e-9),
            lon_step: lon_step.max(1e-9),
            max_abs_lat: max_abs_lat.abs().min(90.0),
            points: Vec::new(),
            buckets: BTreeMap::new(),
        }
    }

    pub fn from_points(radius_km: f64, points: &[GeoRef]) -> Self {
        let max_abs_lat = points.iter().fold(0.0f64, |m, p| m.max(p.lat.abs()));
        let mut idx = GeoIndex::new(radius_km, max_abs_lat);
        for &p in points {
            idx.insert(p);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> GeoRef {
        self.points[id]
    }

    fn key(&self, p: GeoRef) -> (i32, i32) {
        (
            libm::floor(p.lat / self.lat_step) as i32,
            libm::floor((p.lon + 180.0) / self.lon_step) as i32,
        )
    }

    /// Inserts a point and returns its id (ids count up from 0).
    ///
    /// # Panics
    /// If `p.lat` exceeds the latitude bound given at construction.
    pub fn insert(&mut self, p: GeoRef) -> usize {
        assert!(p.lat.abs() <= self.max_abs_lat + 1e-12, "latitude outside index bound");
        let id = self.points.len();
        self.points.push(p);
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
        id
    }

    /// Calls `f(id, distance)` for every indexed point strictly closer than
    /// the index radius, in bucket order. Stops early when `f` returns false.
    pub fn for_each_within(&self, q: GeoRef, mut f: impl FnMut(usize, f64) -> bool) {
        let (lat_i, _) = self.key(q);
        let bound = self.max_abs_lat.max(q.lat.abs());
        let n_lon = libm::ceil(360.0 / self.lon_step) as i32;
        let lon_ranges: Vec<(i32, i32)> = match lon_span_deg(self.radius_km, bound) {
            Some(span) if span * SLACK < 180.0 => {
                let lo = libm::floor((q.lon - span * SLACK + 180.0) / self.lon_step) as i32;
                let hi = libm::floor((q.lon + span * SLACK + 180.0) / self.lon_step) as i32;
                let mut v = alloc::vec![(lo.max(0), hi.min(n_lon - 1))];
                if lo < 0 {
                    v.push((lo + n_lon, n_lon - 1));
                }
                if hi >= n_lon {
                    v.push((0, hi - n_lon));
                }
                v
            }
            _ => alloc::vec![(0, n_lon - 1)],
        };
        for li in lat_i - 1..=lat_i + 1 {
            for &(lo, hi) in &lon_ranges {
                if lo > hi {
                    continue;
                }
                for (_, ids) in self.buckets.range((li, lo)..=(li, hi)) {
                    for &id in ids {
                        let d = haversine_km(q, self.points[id]);
                        if d < self.radius_km && !f(id, d) {
                            return;
                        }
                    }
                }
            }
        }
    }

    pub fn any_within(&self, q: GeoRef) -> bool {
        let mut hit = false;
        self.for_each_within(q, |_, _| {
            hit = true;
            false
        });
        hit
    }
}

/// Simple polygon in (lon, lat) degrees. Edges join consecutive vertices and
/// close back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub vertices: Vec<GeoRef>,
}

/// Latitude band of the contiguous United States.
pub const CONUS_LAT: (f64, f64) = (24.4, 49.4);
/// Longitude band of the contiguous United States.
pub const CONUS_LON: (f64, f64) = (-125.0, -66.9);

impl Region {
    pub fn rectangle(lat: (f64, f64), lon: (f64, f64)) -> Self {
        Region {
            vertices: alloc::vec![
                GeoRef { lat: lat.0, lon: lon.0 },
                GeoRef { lat: lat.0, lon: lon.1 },
                GeoRef { lat: lat.1, lon: lon.1 },
                GeoRef { lat: lat.1, lon: lon.0 },
            ],
        }
    }

    pub fn conus() -> Self {
        Region::rectangle(CONUS_LAT, CONUS_LON)
    }

    pub fn is_valid(&self) -> bool {
        self.vertices.len() >= 3 && self.vertices.iter().all(GeoRef::is_valid)
    }

    /// (min_lat, max_lat, min_lon, max_lon).
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), v| (a.min(v.lat), b.max(v.lat), c.min(v.lon), d.max(v.lon)),
        )
    }

    /// Even-odd rule; points on the boundary count as inside.
    pub fn contains(&self, p: GeoRef) -> bool {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return false;
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (v[i], v[j]);
            if on_segment(p, a, b) {
                return true;
            }
            if (a.lat > p.lat) != (b.lat > p.lat) {
                let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                if p.lon < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

fn on_segment(p: GeoRef, a: GeoRef, b: GeoRef) -> bool {
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if cross.abs() > 1e-12 {
        return false;
    }
    p.lon >= a.lon.min(b.lon) && p.lon <= a.lon.max(b.lon) && p.lat >= a.lat.min(b.lat) && p.lat <= a.lat.max(b.lat)
}
