//! Individual-time surface fitting by sample-contribution relaxation.
//!
//! Each grid cell is visited in row-major order. For every sample, if the
//! cell's value differs from the sample by more than `ratio * distance`,
//! the cell is pulled toward the sample until the gap equals that bound.
//! Sweeps repeat until no cell violates the bound for any sample.

use crate::domain::{DistanceMetric, GridDomain, NodeId};
use crate::error::{Error, Result};
use crate::gvcore::{HeadSurface, SampleSet};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Initial fill; `None` uses the mean of the sample values.
    pub init_value: Option<f64>,
    pub max_sweeps: usize,
    pub metric: DistanceMetric,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            init_value: None,
            max_sweeps: 100,
            metric: DistanceMetric::EuclideanCells,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub sweeps_run: usize,
    /// Largest remaining positive excess; zero when converged.
    pub max_violation: f64,
    pub converged: bool,
    /// Signed residual after each sweep.
    pub history: Vec<f64>,
}

/// Per-sample distance rows, `table[k][cell]`.
struct DistanceTable(Vec<Vec<f64>>);

impl DistanceTable {
    fn build(samples: &SampleSet, grid: &GridDomain, metric: DistanceMetric) -> Result<Self> {
        samples
            .nodes()
            .map(|node| grid.domain().distances_from(node, metric))
            .collect::<Result<Vec<_>>>()
            .map(DistanceTable)
    }
}

fn excess(value: f64, target: f64, ratio: f64, distance: f64) -> f64 {
    (value - target).abs() / ratio - distance
}

/// Applies every sample's contribution to one cell value, in entry order.
fn relax(mut value: f64, samples: &SampleSet, distance: impl Fn(usize) -> f64) -> f64 {
    let ratio = samples.scale().ratio();
    for (k, &(_, target)) in samples.entries().iter().enumerate() {
        let d = distance(k);
        let violation = excess(value, target, ratio, d);
        if violation <= 0.0 {
            continue;
        }
        let step = violation * ratio;
        let mut next = if value > target {
            value - step
        } else {
            value + step
        };
        // Floating-point residue from the step: walk toward the sample.
        while excess(next, target, ratio, d) > 0.0 {
            next = if next > target {
                next.next_down()
            } else {
                next.next_up()
            };
        }
        value = next;
    }
    value
}

/// New value of `cell` after one pass over all samples.
pub fn algorithm_a_step(
    surface: &HeadSurface,
    cell: NodeId,
    samples: &SampleSet,
    grid: &GridDomain,
    cfg: &FitConfig,
) -> Result<f64> {
    let dom = grid.domain();
    surface.check_domain(dom)?;
    dom.check_node(cell)?;
    samples.check_nodes(dom)?;
    let distances = samples
        .nodes()
        .map(|node| dom.distance(cell, node, cfg.metric))
        .collect::<Result<Vec<_>>>()?;
    Ok(relax(surface.value(cell), samples, |k| distances[k]))
}

/// Largest signed excess `|surface(cell) - value| / ratio - d` over all
/// cell-sample pairs. Non-positive means every pair satisfies the bound.
pub fn residual_violation(
    surface: &HeadSurface,
    samples: &SampleSet,
    grid: &GridDomain,
    metric: DistanceMetric,
) -> Result<f64> {
    surface.check_domain(grid.domain())?;
    samples.check_nodes(grid.domain())?;
    let table = DistanceTable::build(samples, grid, metric)?;
    Ok(residual_with(surface.values(), samples, &table))
}

fn residual_with(values: &[f64], samples: &SampleSet, table: &DistanceTable) -> f64 {
    let ratio = samples.scale().ratio();
    let mut worst = f64::NEG_INFINITY;
    for (k, &(_, target)) in samples.entries().iter().enumerate() {
        for (cell, &v) in values.iter().enumerate() {
            worst = worst.max(excess(v, target, ratio, table.0[k][cell]));
        }
    }
    worst
}

/// Fits a surface on `grid` through the samples. The surface carries the
/// sample set's level scale.
pub fn fit_individual(
    samples: &SampleSet,
    grid: &GridDomain,
    cfg: &FitConfig,
) -> Result<(HeadSurface, FitReport)> {
    if samples.is_empty() {
        return Err(Error::contract("fitting needs at least one sample"));
    }
    if cfg.max_sweeps == 0 {
        return Err(Error::contract("max_sweeps must be >= 1"));
    }
    let dom = grid.domain();
    samples.check_nodes(dom)?;
    let table = DistanceTable::build(samples, grid, cfg.metric)?;

    let init = cfg.init_value.unwrap_or_else(|| samples.mean_value());
    let mut surface = HeadSurface::constant(dom, init, samples.scale())?;
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_sweeps {
        for (cell, v) in surface.values_mut().iter_mut().enumerate() {
            *v = relax(*v, samples, |k| table.0[k][cell]);
        }
        residual = residual_with(surface.values(), samples, &table);
        history.push(residual);
        if residual <= 0.0 {
            break;
        }
    }

    let report = FitReport {
        sweeps_run: history.len(),
        max_violation: residual.max(0.0),
        converged: residual <= 0.0,
        history,
    };
    Ok((surface, report))
}
