//! Optimal any-angle pathfinding on grids.
//!
//! Start from a [`GridMap`], build a sparse visibility graph with
//! [`visgraph::build_svg`] or the levelled variant with [`search::Enlsvg`],
//! then query shortest paths between grid vertices.

pub mod error;
pub mod format;
pub mod frac;
pub mod grid;
pub mod hierarchy;
pub mod map_io;
pub mod mapgen;
pub mod oracle;
pub mod scan;
pub mod search;
pub mod visgraph;

pub use error::{Error, Result};
pub use frac::Frac;
pub use grid::{GridMap, GridVertex, ObstacleConfig};
pub use search::{audit_path, Enlsvg, PathResult};
pub use visgraph::VisGraph;
