//! Delimited-text tables for the dataset pipeline.
//!
//! Columns are located by header name. Rows that fail to parse are reported
//! as [`Diagnostic`]s (with 0-based data row numbers) and skipped.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use thiserror::Error;
use wildfire_core::dataset::{
    Diagnostic, FeatureWindow, IncidentRecord, Label, LabeledSample, Tier, Values, WeatherTable, VARIABLES,
};
use wildfire_core::terrain::GeoRef;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Shortest round-trip decimal, always with a fractional part (`40` → `40.0`).
pub fn format_float(v: f64) -> String {
    let s = format!("{v}");
    if s.contains(['.', 'e', 'E']) || !v.is_finite() {
        s
    } else {
        s + ".0"
    }
}

pub fn format_timestamp(t: NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Accepts RFC 3339 (converted to UTC), `YYYY-MM-DD[T ]HH:MM[:SS]` read as
/// UTC, or a bare date (midnight).
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    let s = s.strip_suffix('Z').unwrap_or(s);
    for f in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, f) {
            return Some(t);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists"))
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .or_else(|| parse_timestamp(s).map(|t| t.date()))
}

struct Columns(csv::StringRecord);

impl Columns {
    fn find(&self, names: &[&'static str]) -> Result<usize, TableError> {
        names
            .iter()
            .find_map(|n| self.0.iter().position(|h| h.trim().eq_ignore_ascii_case(n)))
            .ok_or(TableError::MissingColumn(names[0]))
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
    }
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize) -> &'a str {
    rec.get(i).unwrap_or("").trim()
}

fn coord(rec: &csv::StringRecord, lat: usize, lon: usize) -> Result<GeoRef, &'static str> {
    let la: f64 = field(rec, lat).parse().map_err(|_| "unparseable latitude")?;
    let lo: f64 = field(rec, lon).parse().map_err(|_| "unparseable longitude")?;
    GeoRef::new(la, lo).ok_or("coordinates out of range")
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(r)
}

#[derive(Debug, Default)]
pub struct Parsed<T> {
    pub rows: Vec<T>,
    /// Data row number of each entry in `rows`.
    pub row_numbers: Vec<usize>,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Parsed<T> {
    fn new() -> Self {
        Parsed {
            rows: Vec::new(),
            row_numbers: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    fn push(&mut self, row: usize, v: T) {
        self.rows.push(v);
        self.row_numbers.push(row);
    }
}

pub const INCIDENT_HEADER: [&str; 3] = ["latitude", "longitude", "discovered_at"];

pub fn read_incidents<R: Read>(r: R) -> Result<Parsed<IncidentRecord>, TableError> {
    let mut rdr = reader(r);
    let cols = Columns(rdr.headers()?.clone());
    let (lat, lon) = (cols.find(&["latitude", "lat"])?, cols.find(&["longitude", "lon"])?);
    let at = cols.find(&["discovered_at", "datetime"])?;
    let mut out = Parsed::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                out.diagnostics.push(Diagnostic::new(row, e.to_string()));
                continue;
            }
        };
        let g = match coord(&rec, lat, lon) {
            Ok(g) => g,
            Err(why) => {
                out.diagnostics.push(Diagnostic::new(row, why));
                continue;
            }
        };
        let Some(t) = parse_timestamp(field(&rec, at)) else {
            out.diagnostics.push(Diagnostic::new(row, "unparseable timestamp"));
            continue;
        };
        out.push(
            row,
            IncidentRecord {
                lat: g.lat,
                lon: g.lon,
                discovered_at: t,
            },
        );
    }
    Ok(out)
}

pub fn write_incidents<W: Write>(w: W, records: &[IncidentRecord]) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(INCIDENT_HEADER)?;
    for r in records {
        wtr.write_record([format_float(r.lat), format_float(r.lon), format_timestamp(r.discovered_at)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub const SAMPLE_HEADER: [&str; 6] = ["latitude", "longitude", "datetime", "Wildfire", "tier", "source"];

pub fn read_samples<R: Read>(r: R) -> Result<Parsed<LabeledSample>, TableError> {
    let mut rdr = reader(r);
    let cols = Columns(rdr.headers()?.clone());
    let (lat, lon) = (cols.find(&["latitude", "lat"])?, cols.find(&["longitude", "lon"])?);
    let date = cols.find(&["datetime", "date"])?;
    let label = cols.find(&["Wildfire", "label"])?;
    let (tier, source) = (cols.optional("tier"), cols.optional("source"));
    let mut out = Parsed::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                out.diagnostics.push(Diagnostic::new(row, e.to_string()));
                continue;
            }
        };
        let parsed = (|| {
            let g = coord(&rec, lat, lon)?;
            let d = parse_date(field(&rec, date)).ok_or("unparseable date")?;
            let l = Label::parse(field(&rec, label)).ok_or("Wildfire must be Yes or No")?;
            let t = match tier.map(|i| field(&rec, i)).filter(|s| !s.is_empty()) {
                Some(s) => Tier::parse(s).ok_or("unknown tier")?,
                None if l == Label::Wildfire => Tier::Positive,
                None => Tier::FarNeg,
            };
            let src = match source.map(|i| field(&rec, i)).filter(|s| !s.is_empty()) {
                Some(s) => Some(s.parse::<usize>().map_err(|_| "unparseable source")?),
                None => None,
            };
            Ok::<_, &'static str>(LabeledSample {
                lat: g.lat,
                lon: g.lon,
                date: d,
                label: l,
                tier: t,
                source: src,
            })
        })();
        match parsed {
            Ok(s) => out.push(row, s),
            Err(why) => out.diagnostics.push(Diagnostic::new(row, why)),
        }
    }
    Ok(out)
}

pub fn write_samples<W: Write>(w: W, samples: &[LabeledSample]) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SAMPLE_HEADER)?;
    for s in samples {
        wtr.write_record([
            format_float(s.lat),
            format_float(s.lon),
            s.date.to_string(),
            s.label.as_str().to_string(),
            s.tier.as_str().to_string(),
            s.source.map(|k| k.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `latitude, longitude, datetime` plus the 15 weather variables.
pub fn read_weather<R: Read>(r: R, per_degree: f64) -> Result<(WeatherTable, Vec<Diagnostic>), TableError> {
    let mut rdr = reader(r);
    let cols = Columns(rdr.headers()?.clone());
    let (lat, lon) = (cols.find(&["latitude", "lat"])?, cols.find(&["longitude", "lon"])?);
    let date = cols.find(&["datetime", "date"])?;
    let mut vars = [0usize; VARIABLES.len()];
    for (k, name) in VARIABLES.iter().enumerate() {
        vars[k] = cols.0.iter().position(|h| h.trim() == *name).ok_or(TableError::MissingColumn(name))?;
    }
    let mut table = WeatherTable::new(per_degree);
    let mut diags = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                diags.push(Diagnostic::new(row, e.to_string()));
                continue;
            }
        };
        let parsed = (|| {
            let g = coord(&rec, lat, lon)?;
            let d = parse_date(field(&rec, date)).ok_or("unparseable date")?;
            let mut v: Values = [0.0; VARIABLES.len()];
            for (k, &i) in vars.iter().enumerate() {
                v[k] = field(&rec, i).parse().map_err(|_| "unparseable weather value")?;
            }
            Ok::<_, &'static str>((g, d, v))
        })();
        match parsed {
            Ok((g, d, v)) => table.insert(g, d, v),
            Err(why) => diags.push(Diagnostic::new(row, why)),
        }
    }
    Ok((table, diags))
}

/// Table column order: location, day, label, then the weather variables.
pub fn window_header() -> Vec<&'static str> {
    let mut h = vec!["latitude", "longitude", "datetime", "Wildfire"];
    h.extend(VARIABLES);
    h
}

pub fn window_rows(w: &FeatureWindow) -> impl Iterator<Item = Vec<String>> + '_ {
    w.days.iter().map(move |d| {
        let mut row = vec![
            format_float(w.sample.lat),
            format_float(w.sample.lon),
            d.date.to_string(),
            w.sample.label.as_str().to_string(),
        ];
        row.extend(d.values.iter().map(|&v| format_float(v)));
        row
    })
}

pub fn write_windows<W: Write>(w: W, windows: &[FeatureWindow]) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(window_header())?;
    for win in windows {
        for row in window_rows(win) {
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// One structured diagnostic line per entry, for standard error.
pub fn diagnostic_lines(stage: &str, diags: &[Diagnostic]) -> Vec<String> {
    diags
        .iter()
        .map(|d| serde_json::json!({"stage": stage, "row": d.row, "reason": d.reason}).to_string())
        .collect()
}
