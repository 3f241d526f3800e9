//! Random k-SAT models with heterogeneous weights and geometric locality.
//!
//! * [`geometry`]: torus ground space, p-norms, distance CDFs.
//! * [`weights`]: power-law weight sequences and their moments.
//! * [`genmodel`]: the non-uniform (power-law) and the geometric samplers.
//! * [`structure`]: incidence graphs, expansion checks, unsatisfiable cores, niceness.
//! * [`voronoi`]: weighted order-k Voronoi region counting and certificates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod exec;
pub mod genmodel;
pub mod geometry;
pub mod rng;
pub mod sampling;
pub mod structure;
pub mod voronoi;
pub mod weights;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{GeometrySpec, Ground, Norm, TorusPoint};
pub use voronoi::{RegionKey, WeightedSites};
pub use weights::WeightSequence;
