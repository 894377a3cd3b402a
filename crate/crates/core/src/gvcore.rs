//! Gradually varied functions on a discrete domain.
//!
//! A surface is gradually varied when the quantized levels of every pair of
//! adjacent nodes differ by at most one. A set of samples extends to such a
//! surface exactly when no two samples differ by more levels than their
//! graph distance; the extensions are then bracketed by the lower envelope
//! `L(x) = max_s(level(s) - d(x, s))` and the upper envelope
//! `U(x) = min_s(level(s) + d(x, s))`.

use std::collections::BTreeSet;
use std::fmt;

use crate::domain::{DiscreteDomain, DistanceMetric, DomainId, NodeId};
use crate::error::{Error, Result};

pub type Level = i64;

/// Quantization between real head values and integer levels `1..=n_levels`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScale {
    n_levels: Level,
    ratio: f64,
}

impl LevelScale {
    pub fn new(n_levels: Level, ratio: f64) -> Result<Self> {
        if n_levels < 1 {
            return Err(Error::contract(format!("n_levels must be >= 1, got {n_levels}")));
        }
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::contract(format!("ratio must be positive, got {ratio}")));
        }
        Ok(LevelScale { n_levels, ratio })
    }

    pub fn n_levels(&self) -> Level {
        self.n_levels
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// `round(v / ratio)` with halves away from zero, clamped to `1..=n`.
    pub fn quantize(&self, value: f64) -> Level {
        let scaled = (value / self.ratio).round();
        if scaled <= 1.0 {
            1
        } else if scaled >= self.n_levels as f64 {
            self.n_levels
        } else {
            scaled as Level
        }
    }

    pub fn dequantize(&self, level: Level) -> f64 {
        level as f64 * self.ratio
    }

    pub fn clamp(&self, level: Level) -> Level {
        level.clamp(1, self.n_levels)
    }
}

/// Observed values at a set of distinct nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    entries: Vec<(NodeId, f64)>,
    scale: LevelScale,
}

impl SampleSet {
    pub fn new(entries: Vec<(NodeId, f64)>, scale: LevelScale) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::contract("sample set is empty"));
        }
        let mut seen = BTreeSet::new();
        for &(node, value) in &entries {
            if !seen.insert(node) {
                return Err(Error::contract(format!("node {node} sampled twice")));
            }
            if !value.is_finite() {
                return Err(Error::contract(format!("sample at node {node} is not finite")));
            }
        }
        Ok(SampleSet { entries, scale })
    }

    /// Samples given directly as levels, with a unit ratio.
    pub fn from_levels(entries: &[(NodeId, Level)], n_levels: Level) -> Result<Self> {
        let scale = LevelScale::new(n_levels, 1.0)?;
        Self::new(
            entries.iter().map(|&(n, l)| (n, l as f64)).collect(),
            scale,
        )
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn scale(&self) -> LevelScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|&(n, _)| n)
    }

    pub fn value_at(&self, node: NodeId) -> Option<f64> {
        self.entries.iter().find(|&&(n, _)| n == node).map(|&(_, v)| v)
    }

    pub fn level(&self, index: usize) -> Level {
        self.scale.quantize(self.entries[index].1)
    }

    pub fn mean_value(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum::<f64>() / self.entries.len() as f64
    }

    pub(crate) fn check_nodes(&self, dom: &DiscreteDomain) -> Result<()> {
        self.nodes().try_for_each(|n| dom.check_node(n))
    }

    /// Entry indices sorted by node id.
    fn order_by_node(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by_key(|&i| self.entries[i].0);
        order
    }
}

/// A complete real-valued assignment over a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadSurface {
    values: Vec<f64>,
    scale: LevelScale,
    domain: DomainId,
}

impl HeadSurface {
    pub fn new(dom: &DiscreteDomain, values: Vec<f64>, scale: LevelScale) -> Result<Self> {
        if values.len() != dom.len() {
            return Err(Error::contract(format!(
                "surface has {} values for a domain of {} nodes",
                values.len(),
                dom.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!("surface value at node {i} is not finite")));
        }
        Ok(HeadSurface {
            values,
            scale,
            domain: dom.id(),
        })
    }

    pub fn constant(dom: &DiscreteDomain, value: f64, scale: LevelScale) -> Result<Self> {
        Self::new(dom, vec![value; dom.len()], scale)
    }

    pub fn from_levels(dom: &DiscreteDomain, levels: &[Level], scale: LevelScale) -> Result<Self> {
        Self::new(dom, levels.iter().map(|&l| scale.dequantize(l)).collect(), scale)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, node: NodeId) -> f64 {
        self.values[node]
    }

    pub fn scale(&self) -> LevelScale {
        self.scale
    }

    pub fn domain_id(&self) -> DomainId {
        self.domain
    }

    pub fn levels(&self) -> Vec<Level> {
        self.values.iter().map(|&v| self.scale.quantize(v)).collect()
    }

    pub fn check_domain(&self, dom: &DiscreteDomain) -> Result<()> {
        if self.domain == dom.id() && self.values.len() == dom.len() {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs_diff(&self, other: &HeadSurface) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub node_x: NodeId,
    pub node_y: NodeId,
    pub level_gap: Level,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub witness: Option<Violation>,
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "feasible"),
            Some(w) => write!(
                f,
                "infeasible: nodes {} and {} differ by {} levels at distance {}",
                w.node_x, w.node_y, w.level_gap, w.distance
            ),
        }
    }
}

/// True iff every edge joins quantized levels at most one apart.
pub fn is_gradually_varied(surface: &HeadSurface, dom: &DiscreteDomain) -> Result<bool> {
    surface.check_domain(dom)?;
    let levels = surface.levels();
    Ok(dom.edges().all(|(a, b)| (levels[a] - levels[b]).abs() <= 1))
}

/// Decides whether the samples admit a gradually varied extension, by
/// checking every pair against `distance >= level gap`. The witness is the
/// first violating pair in node-id order.
pub fn check_feasibility(
    samples: &SampleSet,
    dom: &DiscreteDomain,
    metric: DistanceMetric,
) -> Result<FeasibilityReport> {
    samples.check_nodes(dom)?;
    let order = samples.order_by_node();
    for (pos, &i) in order.iter().enumerate() {
        let x = samples.entries[i].0;
        let dist = dom.distances_from(x, metric)?;
        let level_x = samples.level(i);
        for &j in &order[pos + 1..] {
            let y = samples.entries[j].0;
            let gap = (level_x - samples.level(j)).abs();
            if gap as f64 > dist[y] {
                return Ok(FeasibilityReport {
                    feasible: false,
                    witness: Some(Violation {
                        node_x: x,
                        node_y: y,
                        level_gap: gap,
                        distance: dist[y],
                    }),
                });
            }
        }
    }
    Ok(FeasibilityReport {
        feasible: true,
        witness: None,
    })
}

/// Unclamped lower and upper envelopes of the samples under graph hops.
pub fn envelopes(samples: &SampleSet, dom: &DiscreteDomain) -> Result<(Vec<Level>, Vec<Level>)> {
    samples.check_nodes(dom)?;
    let mut lower = vec![Level::MIN; dom.len()];
    let mut upper = vec![Level::MAX; dom.len()];
    for (k, &(node, _)) in samples.entries.iter().enumerate() {
        let level = samples.level(k);
        for (x, d) in dom.hops_from(node).into_iter().enumerate() {
            let d = Level::from(d);
            lower[x] = lower[x].max(level - d);
            upper[x] = upper[x].min(level + d);
        }
    }
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtensionPolicy {
    Lower,
    Upper,
    #[default]
    Midpoint,
}

/// Builds a gradually varied surface through the samples from their
/// envelopes. Fails with the feasibility witness when no extension exists.
pub fn gv_extend(
    samples: &SampleSet,
    dom: &DiscreteDomain,
    policy: ExtensionPolicy,
) -> Result<HeadSurface> {
    let report = check_feasibility(samples, dom, DistanceMetric::GraphHops)?;
    if !report.feasible {
        return Err(Error::Infeasible(report));
    }
    let scale = samples.scale;
    let (lower, upper) = envelopes(samples, dom)?;
    let levels: Vec<Level> = lower
        .iter()
        .zip(&upper)
        .map(|(&l, &u)| {
            let pick = match policy {
                ExtensionPolicy::Lower => l,
                ExtensionPolicy::Upper => u,
                ExtensionPolicy::Midpoint => (l + u).div_euclid(2),
            };
            scale.clamp(pick)
        })
        .collect();
    HeadSurface::from_levels(dom, &levels, scale)
}

/// Moves a surface into the gradually varied class.
///
/// Pinned nodes take their sample values. Every other node is first
/// clamped into the envelope interval of the pins, then nodes are swept in
/// ascending id order, each clamped into
/// `[max_neighbor_level - 1, min_neighbor_level + 1]`, until a pass changes
/// nothing. Nodes whose level never changes keep their original value;
/// nodes that move are set to their new level's head value.
pub fn gv_project(
    surface: &HeadSurface,
    dom: &DiscreteDomain,
    pinned: Option<&SampleSet>,
) -> Result<HeadSurface> {
    surface.check_domain(dom)?;
    let scale = surface.scale;
    let original = surface.levels();
    let mut levels = original.clone();
    let mut is_pinned = vec![false; dom.len()];
    let mut values = surface.values.clone();

    if let Some(pins) = pinned {
        let report = check_feasibility(pins, dom, DistanceMetric::GraphHops)?;
        if !report.feasible {
            return Err(Error::Infeasible(report));
        }
        let (lower, upper) = envelopes(pins, dom)?;
        for x in dom.nodes() {
            let lo = scale.clamp(lower[x]);
            let hi = scale.clamp(upper[x]);
            levels[x] = levels[x].clamp(lo, hi);
        }
        for &(node, value) in pins.entries() {
            is_pinned[node] = true;
            levels[node] = scale.quantize(value);
            values[node] = value;
        }
    }

    let max_passes = 4 * dom.len();
    let mut converged = false;
    for _ in 0..max_passes {
        let mut changed = false;
        for x in dom.nodes() {
            if is_pinned[x] || dom.neighbors(x).is_empty() {
                continue;
            }
            let (mut lo, mut hi) = (Level::MIN, Level::MAX);
            for &y in dom.neighbors(x) {
                lo = lo.max(levels[y] - 1);
                hi = hi.min(levels[y] + 1);
            }
            let next = levels[x].max(lo).min(hi);
            if next != levels[x] {
                levels[x] = next;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "gradual variation projection",
            iterations: max_passes,
        });
    }

    for x in dom.nodes() {
        if !is_pinned[x] && levels[x] != original[x] {
            values[x] = scale.dequantize(levels[x]);
        }
    }
    HeadSurface::new(dom, values, scale)
}
