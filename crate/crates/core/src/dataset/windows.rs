use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use chrono::{NaiveDate, TimeDelta};
use serde::{Deserialize, Serialize};

use super::geo::haversine_km;
use super::negatives::LabeledSample;
use super::Diagnostic;
use crate::terrain::GeoRef;

/// Daily weather variables, in table column order.
pub const VARIABLES: [&str; 15] = [
    "pr", "rmax", "rmin", "sph", "srad", "tmmn", "tmmx", "vs", "bi", "fm100", "fm1000", "erc", "etr", "pet", "vpd",
];

pub type Values = [f64; VARIABLES.len()];

/// Grid cells per degree; 1/24° is about 4 km.
pub const CELLS_PER_DEGREE: f64 = 24.0;
pub const PRE_DAYS: i64 = 60;
pub const POST_DAYS: i64 = 15;
pub const MAX_GAP_DAYS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub lat: i32,
    pub lon: i32,
}

impl GridCell {
    pub fn snap(p: GeoRef, per_degree: f64) -> GridCell {
        GridCell {
            lat: libm::round(p.lat * per_degree) as i32,
            lon: libm::round(p.lon * per_degree) as i32,
        }
    }

    pub fn center(self, per_degree: f64) -> GeoRef {
        GeoRef {
            lat: self.lat as f64 / per_degree,
            lon: self.lon as f64 / per_degree,
        }
    }
}

/// Daily rows keyed by snapped grid cell and date.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherTable {
    per_degree: f64,
    cells: BTreeMap<GridCell, BTreeMap<NaiveDate, Values>>,
}

impl Default for WeatherTable {
    fn default() -> Self {
        WeatherTable::new(CELLS_PER_DEGREE)
    }
}

impl WeatherTable {
    pub fn new(per_degree: f64) -> Self {
        WeatherTable {
            per_degree,
            cells: BTreeMap::new(),
        }
    }

    /// Later inserts for the same cell and date overwrite earlier ones.
    pub fn insert(&mut self, at: GeoRef, date: NaiveDate, values: Values) {
        let cell = GridCell::snap(at, self.per_degree);
        self.cells.entry(cell).or_default().insert(date, values);
    }

    pub fn len(&self) -> usize {
        self.cells.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// The snapped cell when it has data, otherwise the data-bearing cell
    /// whose center is nearest.
    pub fn nearest_cell(&self, at: GeoRef) -> Option<GridCell> {
        let snapped = GridCell::snap(at, self.per_degree);
        if self.cells.contains_key(&snapped) {
            return Some(snapped);
        }
        self.cells
            .keys()
            .copied()
            .map(|c| (haversine_km(at, c.center(self.per_degree)), c))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, c)| c)
    }

    pub fn rows(&self, cell: GridCell) -> Option<&BTreeMap<NaiveDate, Values>> {
        self.cells.get(&cell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherDay {
    pub date: NaiveDate,
    pub values: Values,
    /// True when the row was carried forward over a gap.
    pub filled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub sample: LabeledSample,
    pub days: Vec<WeatherDay>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowOutput {
    pub windows: Vec<FeatureWindow>,
    pub diagnostics: Vec<Diagnostic>,
}

/// First and last day of the window around `date`.
pub fn window_bounds(date: NaiveDate, pre: i64, post: i64) -> Option<(NaiveDate, NaiveDate)> {
    Some((
        date.checked_sub_signed(TimeDelta::days(pre))?,
        date.checked_add_signed(TimeDelta::days(post - 1))?,
    ))
}

/// Builds one window per sample: `pre` days before the sample date through
/// `post - 1` days after it. Samples outside the nearest cell's coverage, or
/// with more than [`MAX_GAP_DAYS`] missing days, are skipped with a diagnostic.
pub fn extract_windows(samples: &[LabeledSample], table: &WeatherTable, pre: i64, post: i64) -> WindowOutput {
    let mut out = WindowOutput::default();
    for (i, s) in samples.iter().enumerate() {
        match build_window(s, table, pre, post) {
            Ok(w) => out.windows.push(w),
            Err(reason) => out.diagnostics.push(Diagnostic::new(i, reason)),
        }
    }
    out
}

fn build_window(s: &LabeledSample, table: &WeatherTable, pre: i64, post: i64) -> Result<FeatureWindow, &'static str> {
    let cell = table.nearest_cell(s.geo()).ok_or("weather table is empty")?;
    let rows = table.rows(cell).ok_or("weather table is empty")?;
    let (start, end) = window_bounds(s.date, pre, post).ok_or("window date overflow")?;
    let (first, last) = match (rows.keys().next(), rows.keys().next_back()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err("weather table is empty"),
    };
    if start < first || end > last {
        return Err("window outside weather coverage");
    }
    let mut days = Vec::with_capacity((pre + post) as usize);
    let mut missing = 0;
    let mut prev = rows.range(..=start).next_back().map(|(_, v)| *v);
    let mut d = start;
    while d <= end {
        match rows.get(&d) {
            Some(v) => {
                days.push(WeatherDay {
                    date: d,
                    values: *v,
                    filled: false,
                });
                prev = Some(*v);
            }
            None => {
                missing += 1;
                if missing > MAX_GAP_DAYS {
                    return Err("too many missing days");
                }
                let v = prev.ok_or("window outside weather coverage")?;
                days.push(WeatherDay {
                    date: d,
                    values: v,
                    filled: true,
                });
            }
        }
        d = d.succ_opt().ok_or("window date overflow")?;
    }
    Ok(FeatureWindow { sample: *s, days })
}

#[cfg(test)]
mod tests {
    use super::super::negatives::{Label, Tier};
    use super::*;

    fn sample(lat: f64, lon: f64, y: i32, m: u32, d: u32) -> LabeledSample {
        LabeledSample {
            lat,
            lon,
            date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
            label: Label::NoWildfire,
            tier: Tier::Positive,
            source: None,
        }
    }

    fn filled_table(at: GeoRef, from: NaiveDate, days: i64, skip: &[i64]) -> WeatherTable {
        let mut t = WeatherTable::default();
        for k in 0..days {
            if skip.contains(&k) {
                continue;
            }
            let mut v = [0.0; 15];
            v[0] = k as f64;
            t.insert(at, from + TimeDelta::days(k), v);
        }
        t
    }

    #[test]
    fn window_span() {
        let (a, b) = window_bounds(NaiveDate::from_ymd_opt(2018, 8, 15).unwrap(), PRE_DAYS, POST_DAYS).unwrap();
        assert_eq!(a, NaiveDate::from_ymd_opt(2018, 6, 16).unwrap());
        assert_eq!(b, NaiveDate::from_ymd_opt(2018, 8, 29).unwrap());
        assert_eq!((b - a).num_days() + 1, 75);
    }

    #[test]
    fn complete_window_has_75_rows() {
        let at = GeoRef { lat: 40.0, lon: -100.0 };
        let t = filled_table(at, NaiveDate::from_ymd_opt(2018, 6, 1).unwrap(), 120, &[]);
        let out = extract_windows(&[sample(40.01, -100.01, 2018, 8, 15)], &t, PRE_DAYS, POST_DAYS);
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.windows[0].days.len(), 75);
        assert_eq!(out.windows[0].days[60].date, NaiveDate::from_ymd_opt(2018, 8, 15).unwrap());
    }

    #[test]
    fn short_gaps_carry_forward() {
        let at = GeoRef { lat: 40.0, lon: -100.0 };
        let t = filled_table(at, NaiveDate::from_ymd_opt(2018, 6, 1).unwrap(), 120, &[30, 31, 32]);
        let out = extract_windows(&[sample(40.0, -100.0, 2018, 8, 15)], &t, PRE_DAYS, POST_DAYS);
        let w = &out.windows[0];
        let filled: Vec<_> = w.days.iter().filter(|d| d.filled).collect();
        assert_eq!(filled.len(), 3);
        assert!(filled.iter().all(|d| d.values[0] == 29.0));

        let t = filled_table(at, NaiveDate::from_ymd_opt(2018, 6, 1).unwrap(), 120, &[30, 31, 32, 40]);
        let out = extract_windows(&[sample(40.0, -100.0, 2018, 8, 15)], &t, PRE_DAYS, POST_DAYS);
        assert!(out.windows.is_empty());
        assert_eq!(out.diagnostics[0].reason, "too many missing days");
    }

    #[test]
    fn outside_coverage_is_skipped() {
        let at = GeoRef { lat: 40.0, lon: -100.0 };
        let t = filled_table(at, NaiveDate::from_ymd_opt(2018, 7, 1).unwrap(), 120, &[]);
        let samples = [sample(40.0, -100.0, 2018, 8, 15), sample(40.0, -100.0, 2018, 9, 15)];
        let out = extract_windows(&samples, &t, PRE_DAYS, POST_DAYS);
        assert_eq!(out.windows.len() + out.diagnostics.len(), samples.len());
        assert_eq!(out.diagnostics[0].row, 0);
        assert_eq!(out.diagnostics[0].reason, "window outside weather coverage");
    }

    #[test]
    fn nearest_cell_falls_back_to_closest() {
        let mut t = WeatherTable::default();
        t.insert(GeoRef { lat: 40.0, lon: -100.0 }, NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), [0.0; 15]);
        t.insert(GeoRef { lat: 41.0, lon: -100.0 }, NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), [0.0; 15]);
        let c = t.nearest_cell(GeoRef { lat: 40.3, lon: -100.0 }).unwrap();
        assert_eq!(c, GridCell { lat: 960, lon: -2400 });
    }
}
