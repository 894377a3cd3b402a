//! Discrete domains: general graphs and regular latitude/longitude grids.
//!
//! Every domain is a finite, connected, undirected graph with dense node ids
//! `0..len`. A grid is a graph whose node `i * cols + j` is cell `(i, j)`,
//! where row 0 is the southernmost row and column 0 the westernmost.

use std::collections::VecDeque;
use std::hash::{DefaultHasher, Hash, Hasher};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Structural fingerprint of a domain. Surfaces carry it to detect being
/// paired with the wrong domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DomainId(u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    General,
    Grid { rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjacency {
    #[default]
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    /// Breadth-first shortest path length.
    #[default]
    GraphHops,
    /// Straight-line distance between cell indices; grids only.
    EuclideanCells,
}

impl DistanceMetric {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMetric::GraphHops => "graph-hops",
            DistanceMetric::EuclideanCells => "euclidean-cells",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    adjacency: Vec<Vec<NodeId>>,
    kind: DomainKind,
    id: DomainId,
}

impl DiscreteDomain {
    /// Builds an undirected graph from an edge list. Duplicate edges are
    /// merged; self-loops, out-of-range ids and disconnected graphs are
    /// rejected.
    pub fn from_edges(len: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); len];
        for &(a, b) in edges {
            if a >= len || b >= len {
                return Err(Error::Construction(format!(
                    "edge ({a}, {b}) references a node outside 0..{len}"
                )));
            }
            if a == b {
                return Err(Error::Construction(format!("self-loop at node {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self::from_adjacency(adjacency, DomainKind::General)
    }

    /// Path graph `0 - 1 - ... - (len-1)`.
    pub fn path(len: usize) -> Result<Self> {
        let edges: Vec<_> = (1..len).map(|i| (i - 1, i)).collect();
        Self::from_edges(len, &edges)
    }

    fn from_adjacency(adjacency: Vec<Vec<NodeId>>, kind: DomainKind) -> Result<Self> {
        if adjacency.is_empty() {
            return Err(Error::Construction("domain has no nodes".into()));
        }
        let mut hasher = DefaultHasher::new();
        adjacency.hash(&mut hasher);
        match kind {
            DomainKind::General => 0usize.hash(&mut hasher),
            DomainKind::Grid { rows, cols } => (1usize, rows, cols).hash(&mut hasher),
        }
        let domain = DiscreteDomain {
            adjacency,
            kind,
            id: DomainId(hasher.finish()),
        };
        let reached = domain.bfs(0).iter().filter(|d| d.is_some()).count();
        if reached != domain.len() {
            return Err(Error::Construction(format!(
                "graph is disconnected: {reached} of {} nodes reachable from node 0",
                domain.len()
            )));
        }
        Ok(domain)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn id(&self) -> DomainId {
        self.id
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Neighbors of `node` in ascending id order.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.len()
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node < self.len() {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "node {node} is not in a domain of {} nodes",
                self.len()
            )))
        }
    }

    /// Hop counts from `source` to every node; `None` marks unreachable
    /// nodes, which only occurs during construction.
    fn bfs(&self, source: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u].map(|d| d + 1);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop counts from `source` to every node.
    pub fn hops_from(&self, source: NodeId) -> Vec<u32> {
        self.bfs(source)
            .into_iter()
            .map(|d| d.expect("domains are connected"))
            .collect()
    }

    fn grid_coords(&self, node: NodeId) -> Option<(usize, usize)> {
        match self.kind {
            DomainKind::Grid { cols, .. } => Some((node / cols, node % cols)),
            DomainKind::General => None,
        }
    }

    /// Distances from `source` to every node under `metric`.
    pub fn distances_from(&self, source: NodeId, metric: DistanceMetric) -> Result<Vec<f64>> {
        self.check_node(source)?;
        match metric {
            DistanceMetric::GraphHops => Ok(self
                .hops_from(source)
                .into_iter()
                .map(f64::from)
                .collect()),
            DistanceMetric::EuclideanCells => {
                let (si, sj) = self
                    .grid_coords(source)
                    .ok_or(Error::UnsupportedMetric(metric.name()))?;
                Ok(self
                    .nodes()
                    .map(|n| {
                        let (i, j) = self.grid_coords(n).unwrap();
                        cell_distance((si, sj), (i, j))
                    })
                    .collect())
            }
        }
    }

    pub fn distance(&self, a: NodeId, b: NodeId, metric: DistanceMetric) -> Result<f64> {
        self.check_node(a)?;
        self.check_node(b)?;
        match metric {
            DistanceMetric::GraphHops => Ok(f64::from(self.hops_from(a)[b])),
            DistanceMetric::EuclideanCells => {
                let pa = self
                    .grid_coords(a)
                    .ok_or(Error::UnsupportedMetric(metric.name()))?;
                let pb = self.grid_coords(b).unwrap();
                Ok(cell_distance(pa, pb))
            }
        }
    }
}

fn cell_distance((i, j): (usize, usize), (ii, jj): (usize, usize)) -> f64 {
    let di = ii as f64 - i as f64;
    let dj = jj as f64 - j as f64;
    (di * di + dj * dj).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLong {
    pub lat: f64,
    pub long: f64,
}

impl LatLong {
    pub fn new(lat: f64, long: f64) -> Self {
        LatLong { lat, long }
    }
}

/// Regular grid over a latitude/longitude bounding box.
#[derive(Debug, Clone)]
pub struct GridDomain {
    domain: DiscreteDomain,
    rows: usize,
    cols: usize,
    lat_min: f64,
    lat_max: f64,
    long_min: f64,
    long_max: f64,
    lat_det: f64,
    long_det: f64,
    adjacency: Adjacency,
}

impl GridDomain {
    /// Grid with `rows` cells south to north and `cols` cells west to east
    /// between the south-west corner `sw` and the north-east corner `ne`.
    pub fn build(
        sw: LatLong,
        ne: LatLong,
        rows: usize,
        cols: usize,
        adjacency: Adjacency,
    ) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Construction(format!(
                "grid must be at least 2x2, got {rows}x{cols}"
            )));
        }
        let finite = [sw.lat, sw.long, ne.lat, ne.long].iter().all(|v| v.is_finite());
        if !finite || ne.lat <= sw.lat || ne.long <= sw.long {
            return Err(Error::Construction(format!(
                "degenerate bounding box SW=({}, {}) NE=({}, {})",
                sw.lat, sw.long, ne.lat, ne.long
            )));
        }

        let offsets: &[(isize, isize)] = match adjacency {
            Adjacency::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Adjacency::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        };
        let mut lists = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let list: Vec<NodeId> = offsets
                    .iter()
                    .filter_map(|&(di, dj)| {
                        let ni = i.checked_add_signed(di).filter(|&v| v < rows)?;
                        let nj = j.checked_add_signed(dj).filter(|&v| v < cols)?;
                        Some(ni * cols + nj)
                    })
                    .collect();
                lists.push(list);
            }
        }
        let domain = DiscreteDomain::from_adjacency(lists, DomainKind::Grid { rows, cols })?;

        Ok(GridDomain {
            domain,
            rows,
            cols,
            lat_min: sw.lat,
            lat_max: ne.lat,
            long_min: sw.long,
            long_max: ne.long,
            lat_det: (ne.lat - sw.lat) / rows as f64,
            long_det: (ne.long - sw.long) / cols as f64,
            adjacency,
        })
    }

    pub fn domain(&self) -> &DiscreteDomain {
        &self.domain
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn adjacency(&self) -> Adjacency {
        self.adjacency
    }

    pub fn lat_det(&self) -> f64 {
        self.lat_det
    }

    pub fn long_det(&self) -> f64 {
        self.long_det
    }

    pub fn south_west(&self) -> LatLong {
        LatLong::new(self.lat_min, self.long_min)
    }

    pub fn north_east(&self) -> LatLong {
        LatLong::new(self.lat_max, self.long_max)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, row: usize, col: usize) -> NodeId {
        debug_assert!(row < self.rows && col < self.cols);
        row * self.cols + col
    }

    pub fn cell(&self, node: NodeId) -> (usize, usize) {
        (node / self.cols, node % self.cols)
    }

    /// Cell containing a point. The north and east edges of the box belong
    /// to the last row and column.
    pub fn latlong_to_cell(&self, lat: f64, long: f64) -> Result<(usize, usize)> {
        let row = axis_index("lat", lat, self.lat_min, self.lat_max, self.lat_det, self.rows)?;
        let col = axis_index(
            "long",
            long,
            self.long_min,
            self.long_max,
            self.long_det,
            self.cols,
        )?;
        Ok((row, col))
    }

    pub fn latlong_to_node(&self, lat: f64, long: f64) -> Result<NodeId> {
        let (row, col) = self.latlong_to_cell(lat, long)?;
        Ok(self.node(row, col))
    }

    pub fn cell_center(&self, row: usize, col: usize) -> LatLong {
        LatLong::new(
            self.lat_min + (row as f64 + 0.5) * self.lat_det,
            self.long_min + (col as f64 + 0.5) * self.long_det,
        )
    }

    /// Four-point stencil of a cell as `[north, south, west, east]`
    /// (`row+1`, `row-1`, `col-1`, `col+1`); `None` past the grid edge.
    pub fn stencil(&self, node: NodeId) -> [Option<NodeId>; 4] {
        let (i, j) = self.cell(node);
        [
            (i + 1 < self.rows).then(|| node + self.cols),
            (i > 0).then(|| node - self.cols),
            (j > 0).then(|| node - 1),
            (j + 1 < self.cols).then(|| node + 1),
        ]
    }

    pub fn is_interior(&self, node: NodeId) -> bool {
        self.stencil(node).iter().all(Option::is_some)
    }
}

impl AsRef<DiscreteDomain> for GridDomain {
    fn as_ref(&self) -> &DiscreteDomain {
        &self.domain
    }
}

fn axis_index(
    axis: &'static str,
    value: f64,
    min: f64,
    max: f64,
    det: f64,
    count: usize,
) -> Result<usize> {
    if !(value >= min && value <= max) {
        return Err(Error::OutOfDomain {
            axis,
            value,
            min,
            max,
        });
    }
    let index = ((value - min) / det).floor() as usize;
    Ok(index.min(count - 1))
}
