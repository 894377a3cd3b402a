//! Run configuration: a flat `key = value` file, one setting per line,
//! `#` starting a comment. Unknown keys are rejected.
//!
//! | key                 | values                                  | default      |
//! |---------------------|-----------------------------------------|--------------|
//! | `grid.rows`         | integer >= 2                            | `60`         |
//! | `grid.cols`         | integer >= 2                            | `60`         |
//! | `grid.bbox`         | `auto` or `sw_lat,sw_long,ne_lat,ne_long` | `auto`     |
//! | `grid.adjacency`    | `4` or `8`                              | `4`          |
//! | `scale.ratio`       | real > 0                                | `1`          |
//! | `scale.n_levels`    | `auto` or integer >= 1                  | `auto`       |
//! | `fit.init_value`    | `auto` (sample mean) or real            | `auto`       |
//! | `fit.max_sweeps`    | integer >= 1                            | `100`        |
//! | `fit.metric`        | `euclidean` or `hops`                   | `euclidean`  |
//! | `flow.alpha`        | real > 0                                | `0.25`       |
//! | `flow.source`       | real, added at every cell               | `0`          |
//! | `flow.source_cells` | `row:col:g` entries separated by `;`    | empty        |
//! | `flow.max_iters`    | integer >= 1                            | `10000`      |
//! | `flow.tolerance`    | real > 0                                | `1e-8`       |
//! | `flow.gv_every`     | integer, `0` disables projection        | `10`         |
//! | `flow.boundary`     | `frozen` or `mirror`                    | `frozen`     |
//! | `io.input`          | path of the CSV last ingested (informational) | empty  |
//! | `io.output`         | default output directory                | empty        |
//! | `io.raster_format`  | `pgm`, `csv` or `both`                  | `both`       |

use std::path::{Path, PathBuf};

use crate::domain::{Adjacency, DistanceMetric, LatLong};
use crate::flow::Boundary;

#[derive(Debug, Clone, PartialEq)]
pub enum Bbox {
    Auto,
    Explicit { sw: LatLong, ne: LatLong },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormats {
    Pgm,
    Csv,
    Both,
}

impl RasterFormats {
    pub fn pgm(self) -> bool {
        matches!(self, RasterFormats::Pgm | RasterFormats::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, RasterFormats::Csv | RasterFormats::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rows: usize,
    pub cols: usize,
    pub bbox: Bbox,
    pub adjacency: Adjacency,
    pub ratio: f64,
    pub n_levels: Option<i64>,
    pub init_value: Option<f64>,
    pub max_sweeps: usize,
    pub metric: DistanceMetric,
    pub alpha: f64,
    pub source: f64,
    pub source_cells: Vec<(usize, usize, f64)>,
    pub max_iters: usize,
    pub tolerance: f64,
    pub gv_every: usize,
    pub boundary: Boundary,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub raster_format: RasterFormats,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rows: 60,
            cols: 60,
            bbox: Bbox::Auto,
            adjacency: Adjacency::Four,
            ratio: 1.0,
            n_levels: None,
            init_value: None,
            max_sweeps: 100,
            metric: DistanceMetric::EuclideanCells,
            alpha: 0.25,
            source: 0.0,
            source_cells: Vec::new(),
            max_iters: 10_000,
            tolerance: 1e-8,
            gv_every: 10,
            boundary: Boundary::Frozen,
            input: None,
            output: None,
            raster_format: RasterFormats::Both,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config key {key}: {message}")]
    Value { key: String, message: String },
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.into(),
        message: format!("cannot parse {value:?}: {e}"),
    })
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.into(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_assignment(line).map_err(|e| match e {
                ConfigError::Syntax { message, .. } => ConfigError::Syntax {
                    line: i + 1,
                    message,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Applies one `key=value` assignment, as given to `--set`.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            message: format!("expected key = value, found {assignment:?}"),
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "grid.rows" => self.rows = num(key, value)?,
            "grid.cols" => self.cols = num(key, value)?,
            "grid.bbox" => {
                self.bbox = if value == "auto" {
                    Bbox::Auto
                } else {
                    let parts = value
                        .split(',')
                        .map(|p| num::<f64>(key, p.trim()))
                        .collect::<Result<Vec<_>, _>>()?;
                    let [sw_lat, sw_long, ne_lat, ne_long] = parts[..] else {
                        return Err(bad(key, "expected auto or four comma-separated numbers"));
                    };
                    Bbox::Explicit {
                        sw: LatLong::new(sw_lat, sw_long),
                        ne: LatLong::new(ne_lat, ne_long),
                    }
                }
            }
            "grid.adjacency" => {
                self.adjacency = match value {
                    "4" => Adjacency::Four,
                    "8" => Adjacency::Eight,
                    _ => return Err(bad(key, "expected 4 or 8")),
                }
            }
            "scale.ratio" => self.ratio = num(key, value)?,
            "scale.n_levels" => {
                self.n_levels = if value == "auto" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "fit.init_value" => {
                self.init_value = if value == "auto" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "fit.max_sweeps" => self.max_sweeps = num(key, value)?,
            "fit.metric" => {
                self.metric = match value {
                    "euclidean" => DistanceMetric::EuclideanCells,
                    "hops" => DistanceMetric::GraphHops,
                    _ => return Err(bad(key, "expected euclidean or hops")),
                }
            }
            "flow.alpha" => self.alpha = num(key, value)?,
            "flow.source" => self.source = num(key, value)?,
            "flow.source_cells" => {
                self.source_cells = value
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|entry| {
                        let parts: Vec<&str> = entry.split(':').map(str::trim).collect();
                        let [row, col, g] = parts[..] else {
                            return Err(bad(key, format!("expected row:col:g, found {entry:?}")));
                        };
                        Ok((num(key, row)?, num(key, col)?, num(key, g)?))
                    })
                    .collect::<Result<_, _>>()?
            }
            "flow.max_iters" => self.max_iters = num(key, value)?,
            "flow.tolerance" => self.tolerance = num(key, value)?,
            "flow.gv_every" => self.gv_every = num(key, value)?,
            "flow.boundary" => {
                self.boundary = match value {
                    "frozen" => Boundary::Frozen,
                    "mirror" => Boundary::Mirror,
                    _ => return Err(bad(key, "expected frozen or mirror")),
                }
            }
            "io.input" => self.input = (!value.is_empty()).then(|| PathBuf::from(value)),
            "io.output" => self.output = (!value.is_empty()).then(|| PathBuf::from(value)),
            "io.raster_format" => {
                self.raster_format = match value {
                    "pgm" => RasterFormats::Pgm,
                    "csv" => RasterFormats::Csv,
                    "both" => RasterFormats::Both,
                    _ => return Err(bad(key, "expected pgm, csv or both")),
                }
            }
            _ => return Err(bad(key, "unknown key")),
        }
        Ok(())
    }
}
