//! Persistent homology of (not necessarily hierarchical) sequences of partitions.
//!
//! A sequence of partitions of a point set is encoded as a filtered simplicial
//! complex, the Multiscale Clustering Filtration, whose persistent homology
//! records how far the sequence is from a hierarchy (dimension 0) and which
//! cluster assignments conflict across scales (dimensions 1 and up).
//!
//! ```
//! use mcf::{build_mcf, reduce, Partition, ScaledPartitionSequence};
//!
//! let seq = ScaledPartitionSequence::enumerated(vec![
//!     Partition::from_labels(&[0, 1, 2]),
//!     Partition::from_labels(&[0, 0, 1]),
//!     Partition::from_labels(&[0, 1, 1]),
//!     Partition::from_labels(&[0, 1, 0]),
//!     Partition::from_labels(&[0, 0, 0]),
//! ])?;
//! let r = reduce(&build_mcf(&seq, 3)?, 2)?;
//! assert_eq!(r.diagram(1)?.points(), &[(4.0, 5.0)]);
//! # Ok::<(), mcf::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod filtrations;
pub mod homology;
pub mod measures;
pub mod metrics;
pub mod partitions;
pub mod synth;

pub use error::{Error, Result};
pub use filtrations::{
    build_cag, build_clique_filtration, build_mcf, build_mcnf, Cell, FilteredComplex, Simplex,
    WeightedGraph,
};
pub use homology::{reduce, reduce_with, PersistenceDiagram, ReductionOptions, ReductionResult};
pub use measures::{average_hierarchy, persistent_hierarchy, StepFunction};
pub use metrics::{bottleneck, filtration_distance, wasserstein};
pub use partitions::{Partition, ReorderStrategy, ScaledPartitionSequence};
