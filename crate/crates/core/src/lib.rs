//! Approximate k-nearest-neighbor search in generic metric and non-metric
//! spaces, built around permutation-based filter-and-refine indexes.
//!
//! Objects live in a [`DataSet`] and are compared through a [`Space`].
//! Indexes:
//!
//! * [`index::BruteForce`]: exact linear scan.
//! * [`index::PermFilterIndex`]: linear scan over stored (optionally
//!   binarized) permutations followed by refinement.
//! * [`index::MiFileIndex`]: positional inverted file with accumulators.
//! * [`index::NappIndex`]: shared-closest-pivot counting with ScanCount.
//! * [`index::VpTree`]: vantage-point tree with a polynomial pruner.
//! * [`index::SwGraph`]: small-world proximity graph.
//!
//! [`eval`] implements the benchmarking protocol and [`io`] the file
//! formats, snapshots and synthetic generators.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod index;
pub mod io;
pub mod permutation;
pub mod result;
pub mod rng;
pub mod spaces;

pub use dataset::{DataSet, ObjectId};
pub use error::{Error, Result};
pub use result::{Neighbor, QueryResult, SearchStats};
pub use spaces::{Space, SpaceKind};

/// Library version recorded in snapshots and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
