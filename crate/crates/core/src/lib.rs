//! Deterministic Ball Mapper engine.
//!
//! Covers a multi-dimensional point cloud with an ε-net of balls
//! ([`net::greedy_net`]), connects balls that share points into a graph
//! ([`graph::build_graph`]), colors the graph by outcome, axis, year, or
//! distance to a reference subset ([`color`]), and renders it as SVG or
//! DOT ([`render`]). [`cloud`] holds the point-cloud type, CSV ingestion,
//! and the preparation steps (range filtering, rolling moments, min-max
//! normalization); [`synth`] generates reproducible datasets with exact
//! target correlations.
//!
//! Everything is a pure function of its inputs and the explicit seeds, so
//! identical runs produce byte-identical artifacts.

pub mod cloud;
pub mod color;
pub mod error;
pub mod graph;
pub mod net;
pub mod render;
pub mod synth;

pub use error::{Error, Result};
