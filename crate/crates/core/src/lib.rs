//! Level-set percolation of the discrete and metric-graph Gaussian free field
//! on a rectangle, with the conformal crossing limit and the SLE driving
//! diffusion used to compare against it.

pub mod error;
pub mod gff;
pub mod harness;
pub mod lattice;
pub mod limits;
pub mod metric;
pub mod oracle;
pub mod percolation;
pub mod selftest;
pub mod spectral;
pub mod union_find;

pub use error::{GffError, HarnessError, LatticeError, LimitsError, MetricError, PercolationError};
pub use gff::{BoundaryCondition, Field, GffSampler};
pub use lattice::{Arc, ArcSelector, LatticeRect};
pub use metric::EdgeStates;
pub use percolation::CrossingMode;
pub use harness::{Estimate, Event, ExperimentConfig};
