use alloc::vec::Vec;

use chrono::{NaiveDate, TimeDelta};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dedup::IncidentRecord;
use super::geo::{destination, haversine_km, GeoIndex, Region};
use crate::terrain::GeoRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "Yes")]
    Wildfire,
    #[serde(rename = "No")]
    NoWildfire,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Wildfire => "Yes",
            Label::NoWildfire => "No",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "Yes" => Some(Label::Wildfire),
            "No" => Some(Label::NoWildfire),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Positive,
    FarNeg,
    NearNeg,
    YearlyNeg,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Positive => "positive",
            Tier::FarNeg => "far_neg",
            Tier::NearNeg => "near_neg",
            Tier::YearlyNeg => "yearly_neg",
        }
    }

    pub fn parse(s: &str) -> Option<Tier> {
        [Tier::Positive, Tier::FarNeg, Tier::NearNeg, Tier::YearlyNeg]
            .into_iter()
            .find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub lat: f64,
    pub lon: f64,
    pub date: NaiveDate,
    pub label: Label,
    pub tier: Tier,
    /// Index of the positive a near or yearly negative was derived from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
}

impl LabeledSample {
    pub fn geo(&self) -> GeoRef {
        GeoRef {
            lat: self.lat,
            lon: self.lon,
        }
    }
}

pub fn positive_samples(positives: &[IncidentRecord]) -> Vec<LabeledSample> {
    positives
        .iter()
        .map(|p| LabeledSample {
            lat: p.lat,
            lon: p.lon,
            date: p.discovered_at.date(),
            label: Label::Wildfire,
            tier: Tier::Positive,
            source: None,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeCounts {
    pub far: usize,
    pub near: usize,
    pub yearly: usize,
}

impl Default for NegativeCounts {
    fn default() -> Self {
        NegativeCounts {
            far: 5000,
            near: 35000,
            yearly: 36000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NegativeConfig {
    pub counts: NegativeCounts,
    pub far_km: f64,
    pub near_jitter_km: f64,
    pub near_days: (i64, i64),
    pub yearly_days: i64,
    pub conflict_km: f64,
    pub conflict_days: i64,
    /// Draws allowed per requested sample before a tier gives up.
    pub attempts_per_sample: usize,
    pub seed: u64,
}

impl Default for NegativeConfig {
    fn default() -> Self {
        NegativeConfig {
            counts: NegativeCounts::default(),
            far_km: 100.0,
            near_jitter_km: 100.0,
            near_days: (90, 150),
            yearly_days: 365,
            conflict_km: 5.0,
            conflict_days: 1,
            attempts_per_sample: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NegativeError {
    #[error("no positives to sample against")]
    NoPositives,
    #[error("region polygon needs at least three valid vertices")]
    InvalidRegion,
    #[error("{tier:?} saturated: produced {achieved} of {requested}")]
    Saturated { tier: Tier, achieved: usize, requested: usize },
}

struct Conflicts<'a> {
    index: GeoIndex,
    dates: &'a [NaiveDate],
    days: i64,
}

impl Conflicts<'_> {
    fn hit(&self, p: GeoRef, date: NaiveDate) -> bool {
        let mut hit = false;
        self.index.for_each_within(p, |id, _| {
            hit = (self.dates[id] - date).num_days().abs() <= self.days;
            !hit
        });
        hit
    }
}

fn max_abs_lat(points: &[GeoRef], region: &Region) -> f64 {
    let (lo, hi, _, _) = region.bounds();
    points.iter().fold(lo.abs().max(hi.abs()), |m, p| m.max(p.lat.abs())).min(90.0)
}

/// Draws the three negative tiers, in the order far, near, yearly.
pub fn sample_negatives(
    positives: &[IncidentRecord],
    region: &Region,
    cfg: &NegativeConfig,
) -> Result<Vec<LabeledSample>, NegativeError> {
    if positives.is_empty() {
        return Err(NegativeError::NoPositives);
    }
    if !region.is_valid() {
        return Err(NegativeError::InvalidRegion);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<GeoRef> = positives.iter().map(IncidentRecord::geo).collect();
    let dates: Vec<NaiveDate> = positives.iter().map(|p| p.discovered_at.date()).collect();
    // Jittered near negatives may land a little beyond the region and the positives.
    let lat_bound = (max_abs_lat(&points, region) + cfg.near_jitter_km / 111.0).min(90.0);
    let mut conflict_index = GeoIndex::new(cfg.conflict_km, lat_bound);
    let mut far_index = GeoIndex::new(cfg.far_km, lat_bound);
    for &p in &points {
        conflict_index.insert(p);
        far_index.insert(p);
    }
    let conflicts = Conflicts {
        index: conflict_index,
        dates: &dates,
        days: cfg.conflict_days,
    };
    let counts = cfg.counts;
    let mut out = Vec::with_capacity(counts.far + counts.near + counts.yearly);
    let budget = |n: usize| n.saturating_mul(cfg.attempts_per_sample).max(cfg.attempts_per_sample);

    // Far: area-uniform draws over the region's bounding box.
    let first = *dates.iter().min().expect("nonempty");
    let span = (*dates.iter().max().expect("nonempty") - first).num_days();
    let (lat_lo, lat_hi, lon_lo, lon_hi) = region.bounds();
    let (s_lo, s_hi) = (libm::sin(lat_lo.to_radians()), libm::sin(lat_hi.to_radians()));
    let mut made = 0;
    let mut attempts = 0;
    while made < counts.far {
        if attempts == budget(counts.far) {
            return Err(NegativeError::Saturated {
                tier: Tier::FarNeg,
                achieved: made,
                requested: counts.far,
            });
        }
        attempts += 1;
        let lat = libm::asin(rng.random_range(s_lo..=s_hi)).to_degrees();
        let lon = rng.random_range(lon_lo..=lon_hi);
        let p = GeoRef { lat, lon };
        if !region.contains(p) || far_index.any_within(p) {
            continue;
        }
        let date = first + TimeDelta::days(rng.random_range(0..=span));
        out.push(LabeledSample {
            lat,
            lon,
            date,
            label: Label::NoWildfire,
            tier: Tier::FarNeg,
            source: None,
        });
        made += 1;
    }

    // Near: jitter inside a disc around a random positive, shift the date.
    made = 0;
    attempts = 0;
    while made < counts.near {
        if attempts == budget(counts.near) {
            return Err(NegativeError::Saturated {
                tier: Tier::NearNeg,
                achieved: made,
                requested: counts.near,
            });
        }
        attempts += 1;
        let src = rng.random_range(0..positives.len());
        let bearing = rng.random_range(0.0..core::f64::consts::TAU);
        let dist = cfg.near_jitter_km * libm::sqrt(rng.random_range(0.0..1.0));
        let p = destination(points[src], bearing, dist);
        let mut shift = rng.random_range(cfg.near_days.0..=cfg.near_days.1);
        if rng.random::<bool>() {
            shift = -shift;
        }
        let Some(date) = dates[src].checked_add_signed(TimeDelta::days(shift)) else {
            continue;
        };
        if conflicts.hit(p, date) {
            continue;
        }
        out.push(LabeledSample {
            lat: p.lat,
            lon: p.lon,
            date,
            label: Label::NoWildfire,
            tier: Tier::NearNeg,
            source: Some(src),
        });
        made += 1;
    }

    // Yearly: each positive at most once, visited in a seeded order.
    let mut order: Vec<usize> = (0..positives.len()).collect();
    order.shuffle(&mut rng);
    made = 0;
    for src in order {
        if made == counts.yearly {
            break;
        }
        let Some(date) = dates[src].checked_sub_signed(TimeDelta::days(cfg.yearly_days)) else {
            continue;
        };
        if conflicts.hit(points[src], date) {
            continue;
        }
        out.push(LabeledSample {
            lat: points[src].lat,
            lon: points[src].lon,
            date,
            label: Label::NoWildfire,
            tier: Tier::YearlyNeg,
            source: Some(src),
        });
        made += 1;
    }
    if made < counts.yearly {
        return Err(NegativeError::Saturated {
            tier: Tier::YearlyNeg,
            achieved: made,
            requested: counts.yearly,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub sample: usize,
    pub tier: Tier,
    pub reason: &'static str,
}

/// Exhaustive re-check of every negative against all positives, without the
/// spatial index.
pub fn audit_negatives(
    samples: &[LabeledSample],
    positives: &[IncidentRecord],
    region: &Region,
    cfg: &NegativeConfig,
) -> Vec<AuditViolation> {
    let mut bad = Vec::new();
    let mut flag = |sample: usize, tier: Tier, reason: &'static str| bad.push(AuditViolation { sample, tier, reason });
    let conflict = |s: &LabeledSample| {
        positives.iter().any(|p| {
            haversine_km(p.geo(), s.geo()) < cfg.conflict_km
                && (p.discovered_at.date() - s.date).num_days().abs() <= cfg.conflict_days
        })
    };
    for (i, s) in samples.iter().enumerate() {
        if s.label != Label::NoWildfire {
            flag(i, s.tier, "negative labelled as wildfire");
        }
        match s.tier {
            Tier::Positive => flag(i, s.tier, "positive in negative set"),
            Tier::FarNeg => {
                if !region.contains(s.geo()) {
                    flag(i, s.tier, "outside region");
                }
                if positives.iter().any(|p| haversine_km(p.geo(), s.geo()) < cfg.far_km) {
                    flag(i, s.tier, "too close to a positive");
                }
            }
            Tier::NearNeg | Tier::YearlyNeg => {
                let Some(src) = s.source.and_then(|k| positives.get(k)) else {
                    flag(i, s.tier, "missing source positive");
                    continue;
                };
                let days = (s.date - src.discovered_at.date()).num_days();
                if s.tier == Tier::NearNeg {
                    if !(cfg.near_days.0..=cfg.near_days.1).contains(&days.abs()) {
                        flag(i, s.tier, "date offset outside range");
                    }
                    if haversine_km(src.geo(), s.geo()) >= cfg.near_jitter_km + 1e-9 {
                        flag(i, s.tier, "jitter beyond radius");
                    }
                } else {
                    if days != -cfg.yearly_days {
                        flag(i, s.tier, "not one year earlier");
                    }
                    if s.lat != src.lat || s.lon != src.lon {
                        flag(i, s.tier, "moved from source");
                    }
                }
                if conflict(s) {
                    flag(i, s.tier, "coincides with a recorded fire");
                }
            }
        }
    }
    bad
}
