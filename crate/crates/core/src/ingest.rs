//! Loading cumulative vaccination counts from OWID-style CSV files.
//!
//! The expected layout is one row per location and date with a header row,
//! comma separators, ISO `YYYY-MM-DD` dates and an empty cell for a missing
//! value. Column names default to `location`, `date` and
//! `total_vaccinations`.

use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvColumns {
    pub location: String,
    pub date: String,
    pub value: String,
}

impl Default for CsvColumns {
    fn default() -> Self {
        Self {
            location: "location".into(),
            date: "date".into(),
            value: "total_vaccinations".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub date: NaiveDate,
    /// `None` for an empty cell.
    pub cumulative: Option<f64>,
}

/// Dated cumulative counts of a single location, in increasing date order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub location: String,
    pub records: Vec<Record>,
}

impl RawSeries {
    pub fn new(location: impl Into<String>, mut records: Vec<Record>) -> Result<Self> {
        records.sort_by_key(|r| r.date);
        if let Some(w) = records.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::invalid(format!("duplicate date {}", w[0].date)));
        }
        if records.iter().all(|r| r.cumulative.is_none()) {
            return Err(Error::DegenerateSeries("no reported values".into()));
        }
        Ok(Self {
            location: location.into(),
            records,
        })
    }

    pub fn first_reported(&self) -> Option<NaiveDate> {
        self.records
            .iter()
            .find(|r| r.cumulative.is_some())
            .map(|r| r.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.records.last().map(|r| r.date)
    }
}

/// Reads the rows of `location` from a CSV file.
pub fn load_csv(path: &Path, location: &str, columns: &CsvColumns) -> Result<RawSeries> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);

    let headers = reader.headers()?.clone();
    let index_of = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let loc_idx = index_of(&columns.location)?;
    let date_idx = index_of(&columns.date)?;
    let value_idx = index_of(&columns.value)?;

    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let row = row?;
        let label = row.get(loc_idx).unwrap_or("").trim();
        if label != location {
            seen.insert(label.to_string());
            continue;
        }
        let date_text = row.get(date_idx).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|e| Error::Parse {
            row: line,
            message: format!("bad date `{date_text}`: {e}"),
        })?;
        let value_text = row.get(value_idx).unwrap_or("").trim();
        let cumulative = if value_text.is_empty() {
            None
        } else {
            let v: f64 = value_text.parse().map_err(|e| Error::Parse {
                row: line,
                message: format!("bad number `{value_text}`: {e}"),
            })?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parse {
                    row: line,
                    message: format!("count must be non-negative, got {v}"),
                });
            }
            Some(v)
        };
        records.push(Record { date, cumulative });
    }

    if records.is_empty() {
        return Err(Error::UnknownLocation {
            requested: location.to_string(),
            available: seen.into_iter().collect(),
        });
    }
    RawSeries::new(location, records)
}

/// Daily series `(day, count)` for days `1..=T`.
///
/// Day 1 is the first date with a reported value and day `T` the last date in
/// the file. Missing values and calendar gaps carry the last reported count
/// forward.
pub fn regularize(raw: &RawSeries) -> Result<Vec<(u32, f64)>> {
    let start = raw
        .first_reported()
        .ok_or_else(|| Error::DegenerateSeries("no reported values".into()))?;
    let end = raw.last_date().expect("a reported value implies a record");
    let horizon = (end - start).num_days() as usize + 1;

    let mut out = Vec::with_capacity(horizon);
    let mut last = 0.0;
    let mut records = raw.records.iter().skip_while(|r| r.date < start).peekable();
    for offset in 0..horizon {
        let date = start + chrono::Days::new(offset as u64);
        while let Some(r) = records.next_if(|r| r.date <= date) {
            if let Some(v) = r.cumulative {
                last = v;
            }
        }
        out.push((offset as u32 + 1, last));
    }
    Ok(out)
}
