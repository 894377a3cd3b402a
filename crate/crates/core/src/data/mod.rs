//! Well observations: CSV ingestion, per-time slicing onto a grid,
//! flat-file persistence and raster export.

mod raster;
mod store;

pub use raster::{export_raster, read_raster_csv, surface_from_raster, RasterFormat};
pub use store::{load, store, STORE_VERSION};
pub(crate) use store::write_atomic;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::domain::{GridDomain, LatLong, NodeId};
use crate::error::{Error, Result};
use crate::gvcore::{LevelScale, SampleSet};

pub const CSV_HEADER: [&str; 5] = ["station_id", "lat", "long", "value", "time_index"];

#[derive(Debug, Clone, PartialEq)]
pub struct WellRecord {
    pub station_id: String,
    pub lat: f64,
    pub long: f64,
    pub value: f64,
    pub time_index: u32,
}

impl WellRecord {
    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.station_id.is_empty() {
            return Err(("station_id", "station id is empty".into()));
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(("lat", format!("latitude {} outside [-90, 90]", self.lat)));
        }
        if !(-180.0..=180.0).contains(&self.long) {
            return Err(("long", format!("longitude {} outside [-180, 180]", self.long)));
        }
        if !self.value.is_finite() {
            return Err(("value", format!("value {} is not finite", self.value)));
        }
        Ok(())
    }
}

/// Validated records sorted by `(station_id, time_index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WellDataset {
    records: Vec<WellRecord>,
    south_west: LatLong,
    north_east: LatLong,
    time_range: (u32, u32),
}

impl WellDataset {
    pub fn new(mut records: Vec<WellRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, r) in records.iter().enumerate() {
            r.validate().map_err(|(column, message)| Error::Parse {
                line: i as u64 + 2,
                column: column.into(),
                message,
            })?;
        }
        records.sort_by(|a, b| {
            (a.station_id.as_str(), a.time_index).cmp(&(b.station_id.as_str(), b.time_index))
        });
        if let Some(w) = records
            .windows(2)
            .find(|w| w[0].station_id == w[1].station_id && w[0].time_index == w[1].time_index)
        {
            return Err(Error::Duplicate {
                station: w[0].station_id.clone(),
                time: w[0].time_index,
            });
        }
        let fold = |init: f64, f: fn(f64, f64) -> f64, get: fn(&WellRecord) -> f64| {
            records.iter().map(get).fold(init, f)
        };
        let south_west = LatLong::new(
            fold(f64::INFINITY, f64::min, |r| r.lat),
            fold(f64::INFINITY, f64::min, |r| r.long),
        );
        let north_east = LatLong::new(
            fold(f64::NEG_INFINITY, f64::max, |r| r.lat),
            fold(f64::NEG_INFINITY, f64::max, |r| r.long),
        );
        let t_min = records.iter().map(|r| r.time_index).min().unwrap();
        let t_max = records.iter().map(|r| r.time_index).max().unwrap();
        Ok(WellDataset {
            records,
            south_west,
            north_east,
            time_range: (t_min, t_max),
        })
    }

    pub fn records(&self) -> &[WellRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Component-wise minimum and maximum of the record coordinates.
    pub fn bbox(&self) -> (LatLong, LatLong) {
        (self.south_west, self.north_east)
    }

    pub fn time_range(&self) -> (u32, u32) {
        self.time_range
    }

    /// Distinct time indices present, ascending.
    pub fn times(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.records.iter().map(|r| r.time_index).collect();
        set.into_iter().collect()
    }

    pub fn records_at(&self, t: u32) -> impl Iterator<Item = &WellRecord> {
        self.records.iter().filter(move |r| r.time_index == t)
    }
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    line: u64,
    index: usize,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let column = CSV_HEADER[index];
    let raw = record.get(index).ok_or_else(|| Error::Parse {
        line,
        column: column.into(),
        message: "missing field".into(),
    })?;
    raw.trim().parse().map_err(|e: T::Err| Error::Parse {
        line,
        column: column.into(),
        message: format!("cannot parse {raw:?}: {e}"),
    })
}

/// Reads `station_id,lat,long,value,time_index` rows. The header is
/// required; rows are validated and `(station_id, time_index)` must be
/// unique.
pub fn ingest_csv<R: Read>(input: R) -> Result<WellDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.is_empty() {
        return Err(Error::EmptyInput);
    }
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            column: "header".into(),
            message: format!("expected {:?}, found {:?}", CSV_HEADER.join(","), names.join(",")),
        });
    }

    let mut records = Vec::new();
    let mut seen = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                line,
                column: CSV_HEADER.get(row.len()).unwrap_or(&"time_index").to_string(),
                message: format!("expected {} fields, found {}", CSV_HEADER.len(), row.len()),
            });
        }
        let record = WellRecord {
            station_id: row[0].trim().to_string(),
            lat: parse_field(&row, line, 1)?,
            long: parse_field(&row, line, 2)?,
            value: parse_field(&row, line, 3)?,
            time_index: parse_field(&row, line, 4)?,
        };
        record.validate().map_err(|(column, message)| Error::Parse {
            line,
            column: column.into(),
            message,
        })?;
        if seen
            .insert((record.station_id.clone(), record.time_index), line)
            .is_some()
        {
            return Err(Error::Duplicate {
                station: record.station_id,
                time: record.time_index,
            });
        }
        records.push(record);
    }
    WellDataset::new(records)
}

pub fn ingest_csv_path(path: &Path) -> Result<WellDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_csv(file).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: "<csv input>".into(),
            source,
        },
        kind => Error::Parse {
            line,
            column: "row".into(),
            message: format!("{kind:?}"),
        },
    }
}

/// Samples of one time index on a grid, with how many records were merged
/// into an already occupied cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlice {
    pub samples: SampleSet,
    pub collisions: usize,
}

/// Maps the records at `t` onto grid cells. Records sharing a cell are
/// averaged.
pub fn samples_at(
    ds: &WellDataset,
    t: u32,
    grid: &GridDomain,
    scale: LevelScale,
) -> Result<TimeSlice> {
    let mut cells: BTreeMap<NodeId, (f64, usize)> = BTreeMap::new();
    let mut count = 0;
    for r in ds.records_at(t) {
        let node = grid.latlong_to_node(r.lat, r.long)?;
        let entry = cells.entry(node).or_insert((0.0, 0));
        entry.0 += r.value;
        entry.1 += 1;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySlice(t));
    }
    let collisions = count - cells.len();
    let entries = cells
        .into_iter()
        .map(|(node, (sum, n))| (node, sum / n as f64))
        .collect();
    Ok(TimeSlice {
        samples: SampleSet::new(entries, scale)?,
        collisions,
    })
}
