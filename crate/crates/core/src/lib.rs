//! Groundwater head reconstruction with gradually varied functions.
//!
//! Scattered well observations are fitted onto a lat/long grid, kept inside
//! the gradually varied class, and evolved across time steps with the
//! discretized diffusion equation.

pub mod cli;
pub mod data;
pub mod domain;
pub mod error;
pub mod fitting;
pub mod flow;
pub mod gvcore;

pub use domain::{Adjacency, DiscreteDomain, DistanceMetric, GridDomain, LatLong, NodeId};
pub use error::{Error, Result};
pub use gvcore::{ExtensionPolicy, FeasibilityReport, HeadSurface, Level, LevelScale, SampleSet};
