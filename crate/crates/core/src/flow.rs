//! Sequential head surfaces under the discretized diffusion equation.
//!
//! Between consecutive times the head obeys, at every free cell,
//!
//! ```text
//! h2 - h1 = alpha * (h2[N] + h2[S] + h2[W] + h2[E] - 4 * h2) - G
//! ```
//!
//! Solving for the center gives `h2 = (h1 + alpha * sum - G) / (1 + 4 alpha)`,
//! which is iterated as a Jacobi sweep with well cells pinned and, by
//! default, grid-edge cells frozen at their fitted values.

use crate::domain::{Adjacency, GridDomain, NodeId};
use crate::error::{Error, Result};
use crate::gvcore::{check_feasibility, gv_project, FeasibilityReport, HeadSurface, SampleSet};
use crate::domain::DistanceMetric;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl Source {
    pub fn at(&self, node: NodeId) -> f64 {
        match self {
            Source::Uniform(g) => *g,
            Source::PerNode(g) => g[node],
        }
    }
}

/// Treatment of cells missing stencil neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Edge cells keep their current values.
    #[default]
    Frozen,
    /// Missing neighbors mirror the opposite neighbor (zero flux).
    Mirror,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    alpha: f64,
    source: Source,
    max_iters: usize,
    tolerance: f64,
    boundary: Boundary,
}

impl FlowParams {
    pub fn new(alpha: f64, source: Source, max_iters: usize, tolerance: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::contract(format!("alpha must be positive, got {alpha}")));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::contract(format!("tolerance must be positive, got {tolerance}")));
        }
        if max_iters == 0 {
            return Err(Error::contract("max_iters must be >= 1"));
        }
        let finite = match &source {
            Source::Uniform(g) => g.is_finite(),
            Source::PerNode(g) => g.iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::contract("source term must be finite"));
        }
        Ok(FlowParams {
            alpha,
            source,
            max_iters,
            tolerance,
            boundary: Boundary::Frozen,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    fn check_grid(&self, grid: &GridDomain) -> Result<()> {
        if grid.adjacency() != Adjacency::Four {
            return Err(Error::contract("flow updates need a 4-neighbor grid"));
        }
        if let Source::PerNode(g) = &self.source {
            if g.len() != grid.len() {
                return Err(Error::contract(format!(
                    "source has {} entries for a grid of {} cells",
                    g.len(),
                    grid.len()
                )));
            }
        }
        Ok(())
    }
}

/// Surfaces at successive time indices on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSurfaces {
    times: Vec<u32>,
    surfaces: Vec<HeadSurface>,
}

impl TimeSeriesSurfaces {
    pub fn new(times: Vec<u32>, surfaces: Vec<HeadSurface>) -> Result<Self> {
        if times.len() != surfaces.len() {
            return Err(Error::contract("one surface per time index is required"));
        }
        if times.is_empty() {
            return Err(Error::contract("time series is empty"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("time indices must be strictly increasing"));
        }
        let id = surfaces[0].domain_id();
        if surfaces.iter().any(|s| s.domain_id() != id) {
            return Err(Error::DomainMismatch);
        }
        Ok(TimeSeriesSurfaces { times, surfaces })
    }

    pub fn times(&self) -> &[u32] {
        &self.times
    }

    pub fn surfaces(&self) -> &[HeadSurface] {
        &self.surfaces
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &HeadSurface)> {
        self.times.iter().copied().zip(&self.surfaces)
    }
}

/// Sum of the four stencil neighbors of `cell`, or `None` when a neighbor
/// is missing under frozen boundaries.
fn neighbor_sum(h: &[f64], grid: &GridDomain, cell: NodeId, boundary: Boundary) -> Option<f64> {
    let [north, south, west, east] = grid.stencil(cell);
    let pair = |a: Option<NodeId>, b: Option<NodeId>| -> Option<f64> {
        match (a, b, boundary) {
            (Some(a), Some(b), _) => Some(h[a] + h[b]),
            (Some(a), None, Boundary::Mirror) | (None, Some(a), Boundary::Mirror) => Some(2.0 * h[a]),
            _ => None,
        }
    };
    Some(pair(north, south)? + pair(west, east)?)
}

/// Signed residual of the discretized flow equation at `cell`:
/// `(h2 - h1) - alpha * (sum - 4 h2) + G`.
pub fn stencil_residual(
    h1: &HeadSurface,
    h2: &HeadSurface,
    grid: &GridDomain,
    cell: NodeId,
    p: &FlowParams,
) -> Result<f64> {
    p.check_grid(grid)?;
    h1.check_domain(grid.domain())?;
    h2.check_domain(grid.domain())?;
    grid.domain().check_node(cell)?;
    let sum = neighbor_sum(h2.values(), grid, cell, p.boundary).ok_or(Error::Stencil(cell))?;
    let center = h2.value(cell);
    Ok((center - h1.value(cell)) - p.alpha * (sum - 4.0 * center) + p.source.at(cell))
}

/// Center value that zeroes the stencil residual for fixed neighbors.
pub fn center_update(h1_value: f64, neighbor_sum: f64, alpha: f64, source: f64) -> f64 {
    (h1_value + alpha * neighbor_sum - source) / (1.0 + 4.0 * alpha)
}

fn free_mask(grid: &GridDomain, p: &FlowParams, pinned: Option<&SampleSet>) -> Result<Vec<bool>> {
    let mut free: Vec<bool> = grid
        .domain()
        .nodes()
        .map(|n| p.boundary == Boundary::Mirror || grid.is_interior(n))
        .collect();
    if let Some(pins) = pinned {
        pins.check_nodes(grid.domain())?;
        for node in pins.nodes() {
            free[node] = false;
        }
    }
    Ok(free)
}

fn sweep_values(h1: &[f64], h2: &[f64], grid: &GridDomain, p: &FlowParams, free: &[bool]) -> (Vec<f64>, f64) {
    let mut next = h2.to_vec();
    let mut max_change = 0.0f64;
    for cell in 0..h2.len() {
        if !free[cell] {
            continue;
        }
        let sum = neighbor_sum(h2, grid, cell, p.boundary).expect("free cells have a stencil");
        let value = center_update(h1[cell], sum, p.alpha, p.source.at(cell));
        max_change = max_change.max((value - h2[cell]).abs());
        next[cell] = value;
    }
    (next, max_change)
}

/// One Jacobi pass over every free cell: all reads come from the incoming
/// `h2`. Pinned cells and, under frozen boundaries, edge cells are left as
/// they are. Returns the new surface and the largest absolute change.
pub fn update_sweep(
    h1: &HeadSurface,
    h2: &HeadSurface,
    grid: &GridDomain,
    p: &FlowParams,
    pinned: Option<&SampleSet>,
) -> Result<(HeadSurface, f64)> {
    p.check_grid(grid)?;
    h1.check_domain(grid.domain())?;
    h2.check_domain(grid.domain())?;
    let free = free_mask(grid, p, pinned)?;
    let (values, change) = sweep_values(h1.values(), h2.values(), grid, p, &free);
    Ok((HeadSurface::new(grid.domain(), values, h2.scale())?, change))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub iterations: usize,
    pub max_change: f64,
    pub converged: bool,
}

/// Iterates the sweep with `h1` tied to the current iterate, so the time
/// derivative vanishes and the fixpoint solves the steady-state (Laplace,
/// for `G = 0`) problem.
pub fn solve_steady_state(
    initial: &HeadSurface,
    grid: &GridDomain,
    p: &FlowParams,
    pinned: Option<&SampleSet>,
) -> Result<(HeadSurface, SweepOutcome)> {
    p.check_grid(grid)?;
    initial.check_domain(grid.domain())?;
    let free = free_mask(grid, p, pinned)?;
    let mut h = initial.values().to_vec();
    let mut outcome = SweepOutcome {
        iterations: 0,
        max_change: f64::INFINITY,
        converged: false,
    };
    while outcome.iterations < p.max_iters {
        let (next, change) = sweep_values(&h, &h, grid, p, &free);
        h = next;
        outcome.iterations += 1;
        outcome.max_change = change;
        if change <= p.tolerance {
            outcome.converged = true;
            break;
        }
    }
    Ok((HeadSurface::new(grid.domain(), h, initial.scale())?, outcome))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Disabled,
    /// Number of projections that changed the surface.
    Applied { changes: usize },
    /// The wells violate the gradual variation bound, so no projection.
    Skipped(FeasibilityReport),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub time: u32,
    pub iterations: usize,
    pub max_change: f64,
    pub converged: bool,
    pub projection: Projection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialFit {
    pub series: TimeSeriesSurfaces,
    /// One report per time after the first.
    pub reports: Vec<StepReport>,
}

impl SequentialFit {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }
}

fn pin_values(surface: &mut HeadSurface, wells: &SampleSet) {
    let values = surface.values_mut();
    for &(node, value) in wells.entries() {
        values[node] = value;
    }
}

/// Evolves each surface from its predecessor. The first surface is kept
/// as given; every later one starts from its input (normally an individual
/// fit) and is swept until the largest update is within tolerance.
///
/// With `gv_every > 0`, every `gv_every`-th sweep whose update is within
/// tolerance projects the surface into the gradually varied class with its
/// wells pinned. Cells the projection moves are held at their projected
/// values for the rest of the step and the sweeps continue around them. A
/// step converges once such a projection changes nothing. `gv_every = 0`
/// disables projection.
pub fn fit_sequential(
    series: &TimeSeriesSurfaces,
    wells_by_time: &[SampleSet],
    grid: &GridDomain,
    p: &FlowParams,
    gv_every: usize,
) -> Result<SequentialFit> {
    if series.len() < 2 {
        return Err(Error::contract(format!(
            "sequential fitting needs at least 2 time steps, got {}",
            series.len()
        )));
    }
    if wells_by_time.len() != series.len() {
        return Err(Error::contract("one well set per time index is required"));
    }
    p.check_grid(grid)?;
    let dom = grid.domain();
    for s in series.surfaces() {
        s.check_domain(dom)?;
    }

    let mut out = vec![series.surfaces[0].clone()];
    let mut reports = Vec::with_capacity(series.len() - 1);
    for k in 1..series.len() {
        let wells = &wells_by_time[k];
        let mut projection = if gv_every == 0 {
            Projection::Disabled
        } else {
            let report = check_feasibility(wells, dom, DistanceMetric::GraphHops)?;
            if report.feasible {
                Projection::Applied { changes: 0 }
            } else {
                Projection::Skipped(report)
            }
        };
        let h1 = &out[k - 1];
        let mut h2 = series.surfaces[k].clone();
        pin_values(&mut h2, wells);
        let mut free = free_mask(grid, p, Some(wells))?;
        let mut iterations = 0;
        let mut max_change = f64::INFINITY;
        let mut converged = false;
        while iterations < p.max_iters {
            let (next, change) = sweep_values(h1.values(), h2.values(), grid, p, &free);
            h2 = HeadSurface::new(dom, next, h2.scale())?;
            iterations += 1;
            max_change = change;
            if change > p.tolerance {
                continue;
            }
            let Projection::Applied { changes } = &mut projection else {
                converged = true;
                break;
            };
            if iterations % gv_every != 0 {
                continue;
            }
            let projected = gv_project(&h2, dom, Some(wells))?;
            if projected == h2 {
                converged = true;
                break;
            }
            *changes += 1;
            for (cell, (a, b)) in projected.values().iter().zip(h2.values()).enumerate() {
                if a != b {
                    free[cell] = false;
                }
            }
            h2 = projected;
        }
        reports.push(StepReport {
            time: series.times[k],
            iterations,
            max_change,
            converged,
            projection,
        });
        out.push(h2);
    }

    Ok(SequentialFit {
        series: TimeSeriesSurfaces::new(series.times.clone(), out)?,
        reports,
    })
}
