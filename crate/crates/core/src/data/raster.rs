//! Raster output. Row 0 of every raster is the northernmost grid row.

use std::fs;
use std::path::Path;

use super::store::write_atomic;
use crate::domain::GridDomain;
use crate::error::{Error, Result};
use crate::gvcore::{HeadSurface, LevelScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    /// Binary 8-bit graymap; larger values are brighter.
    Pgm,
    /// Full-precision values, comma separated.
    Csv,
}

/// Node ids in raster order: north to south, west to east.
fn raster_order(grid: &GridDomain) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..grid.rows())
        .rev()
        .map(move |row| (0..grid.cols()).map(|col| grid.node(row, col)).collect())
}

pub(crate) fn pgm_bytes(surface: &HeadSurface, grid: &GridDomain) -> Vec<u8> {
    let values = surface.values();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let mut out = format!("P5\n{} {}\n255\n", grid.cols(), grid.rows()).into_bytes();
    for row in raster_order(grid) {
        out.extend(row.into_iter().map(|n| {
            if range > 0.0 {
                (255.0 * (values[n] - min) / range).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        }));
    }
    out
}

pub(crate) fn csv_bytes(surface: &HeadSurface, grid: &GridDomain) -> Vec<u8> {
    let mut out = String::new();
    for row in raster_order(grid) {
        let line: Vec<String> = row.into_iter().map(|n| surface.value(n).to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn export_raster(
    surface: &HeadSurface,
    grid: &GridDomain,
    path: &Path,
    format: RasterFormat,
) -> Result<()> {
    surface.check_domain(grid.domain())?;
    let bytes = match format {
        RasterFormat::Pgm => pgm_bytes(surface, grid),
        RasterFormat::Csv => csv_bytes(surface, grid),
    };
    write_atomic(path, &bytes)
}

/// Reads a CSV raster into rows, north first.
pub fn read_raster_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .enumerate()
                .map(|(j, field)| {
                    field.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: i as u64 + 1,
                        column: (j + 1).to_string(),
                        message: format!("cannot parse {field:?}: {e}"),
                    })
                })
                .collect()
        })
        .collect()
}

pub fn surface_from_raster(
    grid: &GridDomain,
    rows: &[Vec<f64>],
    scale: LevelScale,
) -> Result<HeadSurface> {
    if rows.len() != grid.rows() || rows.iter().any(|r| r.len() != grid.cols()) {
        return Err(Error::contract(format!(
            "raster shape does not match a {}x{} grid",
            grid.rows(),
            grid.cols()
        )));
    }
    let mut values = vec![0.0; grid.len()];
    for (r, row) in rows.iter().enumerate() {
        let grid_row = grid.rows() - 1 - r;
        for (col, &v) in row.iter().enumerate() {
            values[grid.node(grid_row, col)] = v;
        }
    }
    HeadSurface::new(grid.domain(), values, scale)
}
