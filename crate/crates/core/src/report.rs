//! Threat assessment report built from a finished episode.
//!
//! Every number in a [`ThreatReport`] is a function of the [`EpisodeLog`]
//! (plus an optional forecast for geographic anchoring), so a
//! verifier can rebuild the report and compare field by field.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::geo::EARTH_RADIUS_KM;
use crate::engine::DT_MINUTES;
use crate::env::{EpisodeLog, Outcome};
use crate::terrain::{Forecast, GeoRef};

pub const REPORT_VERSION: &str = "1.0";
pub const GALLONS_PER_DROP: u64 = 800;
pub const ZONE_GRID: u32 = 4;
pub const ADVISORY_COUNT: usize = 3;
pub const ALIGNMENT_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("episode has not finished")]
    Incomplete,
    #[error("episode log is inconsistent: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub gallons_per_drop: u64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            gallons_per_drop: GALLONS_PER_DROP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSection {
    pub lat: f64,
    pub lon: f64,
    pub ignition_datetime: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropEntry {
    pub step: u32,
    /// Minutes since ignition.
    pub sim_time: f64,
    pub row: u32,
    pub col: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo: Option<GeoRef>,
    pub extinguished: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionSection {
    pub drops: Vec<DropEntry>,
    pub helitack_count: u32,
    pub water_gal: u64,
    pub containment_step: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurnSection {
    pub trajectory: Vec<u32>,
    pub peak_burning: u32,
    pub final_burnt: u32,
    pub final_burnt_area_m2: f64,
}

/// Cell rectangle: rows `row..row + rows`, columns `col..col + cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub row: u32,
    pub col: u32,
    pub rows: u32,
    pub cols: u32,
}

impl Zone {
    pub fn contains(&self, row: u32, col: u32) -> bool {
        (self.row..self.row + self.rows).contains(&row) && (self.col..self.col + self.cols).contains(&col)
    }

    pub fn overlaps(&self, o: &Zone) -> bool {
        self.row < o.row + o.rows && o.row < self.row + self.rows && self.col < o.col + o.cols && o.col < self.col + self.cols
    }

    pub fn area(&self) -> u32 {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub zone: Zone,
    pub priority: f64,
    pub rationale: String,
}

/// Convention for the contingency threshold: the episode step budget and the
/// burnt fraction of the grid reached by the end of the episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contingency {
    pub max_steps: u32,
    pub max_sim_minutes: f64,
    pub final_burnt_fraction: f64,
    pub max_steps_reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatReport {
    pub version: String,
    pub forecast: Option<ForecastSection>,
    pub suppression: SuppressionSection,
    pub burn: BurnSection,
    pub advisories: Vec<Advisory>,
    pub contingency: Contingency,
}

/// Geographic position of a cell when the forecast point is taken as the
/// grid center (local equirectangular approximation).
pub fn cell_geo(f: &Forecast, width: u32, height: u32, cell_size_m: f64, row: u32, col: u32) -> GeoRef {
    let r_m = EARTH_RADIUS_KM * 1000.0;
    let dn = -((row as f64) - (height / 2) as f64) * cell_size_m;
    let de = ((col as f64) - (width / 2) as f64) * cell_size_m;
    let lat = f.lat + (dn / r_m).to_degrees();
    let lon = f.lon + (de / (r_m * libm::cos(f.lat.to_radians()))).to_degrees();
    GeoRef {
        lat: lat.clamp(-90.0, 90.0),
        lon,
    }
}

/// The 4×4 partition of the grid in row-major order. Leftover rows and
/// columns go to the last band.
pub fn zones(width: u32, height: u32) -> Vec<Zone> {
    let cut = |n: u32, i: u32| i * n / ZONE_GRID;
    let mut v = Vec::new();
    for i in 0..ZONE_GRID {
        for j in 0..ZONE_GRID {
            let (r0, r1) = (cut(height, i), cut(height, i + 1));
            let (c0, c1) = (cut(width, j), cut(width, j + 1));
            if r1 > r0 && c1 > c0 {
                v.push(Zone {
                    row: r0,
                    col: c0,
                    rows: r1 - r0,
                    cols: c1 - c0,
                });
            }
        }
    }
    v
}

fn centroid(cells: &[u32], width: u32) -> Option<(f64, f64)> {
    if cells.is_empty() {
        return None;
    }
    let n = cells.len() as f64;
    let (sr, sc) = cells
        .iter()
        .fold((0.0, 0.0), |(r, c), &i| (r + (i / width) as f64, c + (i % width) as f64));
    Some((sr / n, sc / n))
}

/// Ranks zones by burnt density plus weighted spread alignment.
///
/// Alignment for a zone is the mean, over burned cells, of the clamped
/// cosine between the cell's offset from the ignition centroid and the
/// zone center's offset from it.
pub fn advisories(log: &EpisodeLog) -> Vec<Advisory> {
    let w = log.width;
    let origin = centroid(&log.ignition_cells, w)
        .or_else(|| centroid(&log.burned_cells, w))
        .unwrap_or(((log.height / 2) as f64, (w / 2) as f64));
    let spread: Vec<(f64, f64)> = log
        .burned_cells
        .iter()
        .filter_map(|&i| {
            let (dr, dc) = ((i / w) as f64 - origin.0, (i % w) as f64 - origin.1);
            let n = libm::hypot(dr, dc);
            (n > 0.0).then_some((dr / n, dc / n))
        })
        .collect();
    let mut scored: Vec<(f64, usize, Advisory)> = zones(w, log.height)
        .into_iter()
        .enumerate()
        .map(|(k, z)| {
            let burnt = log
                .burned_cells
                .iter()
                .filter(|&&i| z.contains(i / w, i % w))
                .count();
            let density = burnt as f64 / z.area() as f64;
            let zr = z.row as f64 + (z.rows as f64 - 1.0) / 2.0 - origin.0;
            let zc = z.col as f64 + (z.cols as f64 - 1.0) / 2.0 - origin.1;
            let zn = libm::hypot(zr, zc);
            let alignment = if spread.is_empty() || zn == 0.0 {
                0.0
            } else {
                spread
                    .iter()
                    .map(|&(r, c)| ((r * zr + c * zc) / zn).max(0.0))
                    .sum::<f64>()
                    / log.burned_cells.len() as f64
            };
            let priority = density + ALIGNMENT_WEIGHT * alignment;
            let rationale = format!(
                "burnt density {:.3} ({} of {} cells), spread alignment {:.3}",
                density,
                burnt,
                z.area(),
                alignment
            );
            (
                priority,
                k,
                Advisory {
                    zone: z,
                    priority,
                    rationale,
                },
            )
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(ADVISORY_COUNT).map(|(_, _, a)| a).collect()
}

/// `forecast`, when given, anchors the grid center for drop coordinates.
pub fn build_report(log: &EpisodeLog, forecast: Option<&Forecast>, cfg: &ReportConfig) -> Result<ThreatReport, ReportError> {
    let outcome = log.outcome.ok_or(ReportError::Incomplete)?;
    if log.burnt_trajectory.len() != log.actions.len() || log.burning_trajectory.len() != log.actions.len() {
        return Err(ReportError::Inconsistent("trajectory length differs from action count"));
    }
    if log.burnt_trajectory.windows(2).any(|w| w[1] < w[0]) {
        return Err(ReportError::Inconsistent("burnt trajectory decreases"));
    }
    let drops = log
        .drops
        .iter()
        .map(|d| DropEntry {
            step: d.step,
            sim_time: d.step as f64 * DT_MINUTES,
            row: d.row,
            col: d.col,
            geo: forecast.map(|f| cell_geo(f, log.width, log.height, log.cell_size_m, d.row, d.col)),
            extinguished: d.extinguished,
        })
        .collect();
    let helitack_count = log.helitacks();
    let final_burnt = log.burnt_trajectory.last().copied().unwrap_or(0);
    let total = (log.width as u64 * log.height as u64).max(1) as f64;
    Ok(ThreatReport {
        version: REPORT_VERSION.into(),
        forecast: forecast.map(|f| ForecastSection {
            lat: f.lat,
            lon: f.lon,
            ignition_datetime: f.datetime.clone(),
            confidence: f.confidence,
        }),
        suppression: SuppressionSection {
            drops,
            helitack_count,
            water_gal: helitack_count as u64 * cfg.gallons_per_drop,
            containment_step: match outcome {
                Outcome::ContainedAt(s) => Some(s),
                Outcome::MaxStepsReached => None,
            },
        },
        burn: BurnSection {
            trajectory: log.burnt_trajectory.clone(),
            peak_burning: log.burning_trajectory.iter().copied().max().unwrap_or(0),
            final_burnt,
            final_burnt_area_m2: final_burnt as f64 * log.cell_size_m * log.cell_size_m,
        },
        advisories: advisories(log),
        contingency: Contingency {
            max_steps: log.max_steps,
            max_sim_minutes: log.max_steps as f64 * DT_MINUTES,
            final_burnt_fraction: final_burnt as f64 / total,
            max_steps_reached: outcome == Outcome::MaxStepsReached,
        },
    })
}

/// Plain-text rendering with a fixed section order.
pub fn render_text(r: &ThreatReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "FIRE THREAT ASSESSMENT (report v{})", r.version);
    let _ = writeln!(s);
    let _ = writeln!(s, "== Forecast ==");
    match &r.forecast {
        Some(f) => {
            let _ = writeln!(s, "ignition point: {:.6}, {:.6}", f.lat, f.lon);
            let _ = writeln!(s, "ignition time:  {}", f.ignition_datetime);
            let _ = writeln!(s, "confidence:     {:.3}", f.confidence);
        }
        None => {
            let _ = writeln!(s, "no forecast attached; grid coordinates only");
        }
    }
    let _ = writeln!(s);
    let sup = &r.suppression;
    let _ = writeln!(s, "== Suppression Timeline ==");
    for d in &sup.drops {
        let _ = write!(s, "t+{:>5.0} min  step {:>4}  drop at ({}, {})", d.sim_time, d.step, d.row, d.col);
        if let Some(g) = d.geo {
            let _ = write!(s, " [{:.5}, {:.5}]", g.lat, g.lon);
        }
        let _ = writeln!(s, "  extinguished {}", d.extinguished);
    }
    let _ = writeln!(s, "helitack deployments: {}", sup.helitack_count);
    let _ = writeln!(s, "water used: {} gal", sup.water_gal);
    match sup.containment_step {
        Some(c) => {
            let _ = writeln!(s, "contained at step {} (t+{:.0} min)", c, c as f64 * DT_MINUTES);
        }
        None => {
            let _ = writeln!(s, "not contained within {} steps", r.contingency.max_steps);
        }
    }
    let _ = writeln!(s);
    let b = &r.burn;
    let _ = writeln!(s, "== Burn Trajectory ==");
    let n = b.trajectory.len();
    let marks: Vec<usize> = if n == 0 {
        Vec::new()
    } else {
        let mut m: Vec<usize> = (0..=4).map(|k| k * (n - 1) / 4).collect();
        m.dedup();
        m
    };
    for i in marks {
        let _ = writeln!(s, "step {:>4}: {} cells burnt", i + 1, b.trajectory[i]);
    }
    let _ = writeln!(s, "peak burning cells: {}", b.peak_burning);
    let _ = writeln!(s, "final burnt cells: {} ({:.0} m2)", b.final_burnt, b.final_burnt_area_m2);
    let _ = writeln!(
        s,
        "contingency: burnt fraction {:.4} against a {}-step ({:.0} min) budget{}",
        r.contingency.final_burnt_fraction,
        r.contingency.max_steps,
        r.contingency.max_sim_minutes,
        if r.contingency.max_steps_reached { ", budget exhausted" } else { "" }
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "== Advisories ==");
    for (i, a) in r.advisories.iter().enumerate() {
        let _ = writeln!(
            s,
            "{}. rows {}-{}, cols {}-{}  priority {:.3}: {}",
            i + 1,
            a.zone.row,
            a.zone.row + a.zone.rows - 1,
            a.zone.col,
            a.zone.col + a.zone.cols - 1,
            a.priority,
            a.rationale
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{comparison_fixture, rollout, PolicyConfig, PolicyKind};
    use crate::env::{DropRecord, EnvConfig};
    use crate::fuel::builtin_catalog;
    use crate::terrain::Cell;
    use alloc::vec;

    fn log_with_drops(n: u32) -> EpisodeLog {
        EpisodeLog {
            width: 16,
            height: 12,
            cell_size_m: 30.0,
            max_steps: 100,
            agent_start: Cell::new(0, 0),
            drops: (0..n)
                .map(|i| DropRecord {
                    step: i,
                    row: 1,
                    col: 1,
                    extinguished: 0,
                })
                .collect(),
            burnt_trajectory: vec![0; n.max(1) as usize],
            burning_trajectory: vec![0; n.max(1) as usize],
            actions: vec![crate::env::Action::Drop; n.max(1) as usize],
            outcome: Some(Outcome::ContainedAt(n.max(1))),
            reward_total: 0.0,
            burned_cells: vec![],
            ignition_cells: vec![6 * 16 + 8],
        }
    }

    #[test]
    fn water_is_800_per_drop() {
        for (n, gal) in [(18, 14_400), (47, 37_600), (0, 0)] {
            let r = build_report(&log_with_drops(n), None, &ReportConfig::default()).unwrap();
            assert_eq!(r.suppression.helitack_count, n);
            assert_eq!(r.suppression.water_gal, gal);
            assert_eq!(r.advisories.len(), ADVISORY_COUNT);
        }
    }

    #[test]
    fn incomplete_episode_rejected() {
        let mut l = log_with_drops(2);
        l.outcome = None;
        assert_eq!(build_report(&l, None, &ReportConfig::default()), Err(ReportError::Incomplete));
    }

    #[test]
    fn zones_partition_the_grid() {
        for (w, h) in [(16, 12), (17, 9), (240, 160), (8, 8)] {
            let z = zones(w, h);
            assert_eq!(z.len(), 16);
            assert_eq!(z.iter().map(Zone::area).sum::<u32>(), w * h);
            for (i, a) in z.iter().enumerate() {
                assert!(a.row + a.rows <= h && a.col + a.cols <= w);
                for b in &z[i + 1..] {
                    assert!(!a.overlaps(b));
                }
            }
        }
    }

    #[test]
    fn report_from_real_episode() {
        let cat = builtin_catalog();
        let (mut s, start) = comparison_fixture(1);
        s.forecast = Some(Forecast {
            lat: 38.5,
            lon: -121.0,
            datetime: "2021-08-14T13:00:00Z".into(),
            confidence: 0.8,
        });
        let log = rollout(&s, &cat, Some(start), EnvConfig::default(), PolicyConfig::new(PolicyKind::PerimeterCircler, 1)).unwrap();
        let r = build_report(&log, s.forecast.as_ref(), &ReportConfig::default()).unwrap();
        assert_eq!(r.burn.final_burnt, *log.burnt_trajectory.last().unwrap());
        assert!(r.suppression.drops.iter().all(|d| d.geo.is_some()));
        assert_eq!(r.suppression.containment_step.is_some(), matches!(log.outcome, Some(Outcome::ContainedAt(_))));
        let text = render_text(&r);
        let pos: Vec<usize> = ["== Forecast ==", "== Suppression Timeline ==", "== Burn Trajectory ==", "== Advisories =="]
            .iter()
            .map(|h| text.find(h).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains(&format!("helitack deployments: {}", log.helitacks())));
        if let Some(c) = r.suppression.containment_step {
            assert!(text.contains(&format!("contained at step {c}")));
        }
        assert_eq!(text, render_text(&r));
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ThreatReport>(&json).unwrap(), r);
    }

    #[test]
    fn center_cell_maps_to_forecast_point() {
        let f = Forecast {
            lat: 40.0,
            lon: -105.0,
            datetime: String::new(),
            confidence: 0.5,
        };
        let g = cell_geo(&f, 240, 160, 30.0, 80, 120);
        assert_eq!((g.lat, g.lon), (40.0, -105.0));
        let north = cell_geo(&f, 240, 160, 30.0, 79, 120);
        assert!(north.lat > 40.0);
    }
}
