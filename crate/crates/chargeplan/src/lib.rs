//! Facility siting, sizing, and staging for EV charging networks.
//!
//! The crate is organised as a set of composable analysis modules over a
//! desk-scale study area:
//!
//! - [`hexgrid`]: multi-resolution hexagonal tessellation on a local planar
//!   projection.
//! - [`roadgraph`]: per-zone road graphs clipped to zone polygons, with exact
//!   betweenness centrality.
//! - [`centrality`]: a small graph neural network that learns betweenness
//!   from cheap node features, plus the percentile filter that turns scores
//!   into candidate sets.
//! - [`demand`]: POI scoring and normalised demand weights on fine cells.
//! - [`mclp`]: maximal-coverage site selection (budgeted and
//!   coverage-target greedy).
//! - [`queueing`]: finite-capacity multi-server queues with outage-degraded
//!   service, cost models, and port-count optimization.
//! - [`voronoi`]: nearest-hub assignment and coverage-guarantee repair.
//! - [`forecast`]: EV-share growth, hourly arrival profiles, and capacity
//!   paths.
//! - [`equity`]: spatial coverage and income-stratified access metrics.
//! - [`pipeline`]: the end-to-end deterministic run that ties the stages
//!   together behind the CLI.

pub mod centrality;
pub mod cli;
pub mod config;
pub mod demand;
pub mod equity;
pub mod error;
pub mod fixture;
pub mod forecast;
pub mod geom;
pub mod hexgrid;
pub mod io;
pub mod mclp;
pub mod pipeline;
pub mod queueing;
pub mod roadgraph;
pub mod spatial;
pub mod voronoi;

pub use error::{Error, Result};
