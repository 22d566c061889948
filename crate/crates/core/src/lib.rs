//! Observer placement for epidemic source localization on weighted networks.
//!
//! The crate is organised around the pipeline a user runs end to end:
//!
//! * [`graph`] loads or generates an undirected weighted network and caches
//!   all-pairs shortest paths with a deterministic tie-break.
//! * [`resolution`] groups nodes into equivalence classes under an observer
//!   set and computes the analytic localization metrics.
//! * [`placement`] chooses observers: the low-variance greedy (class count),
//!   the high-variance greedy (path coverage), alternate greedy objectives,
//!   the usual centrality benchmarks and an exhaustive oracle.
//! * [`epidemic`] simulates SI outbreaks with random per-edge delays.
//! * [`estimation`] recovers the source from observer infection times.
//! * [`harness`] runs seeded Monte-Carlo sweeps and writes CSV.
//!
//! Inner loops run on rayon when the `parallel` feature is enabled (the
//! default). [`par::set_parallel`] turns it off at runtime; both paths
//! produce bit-identical results.

pub mod epidemic;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod harness;
pub mod par;
pub mod placement;
pub mod resolution;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use resolution::{EquivalencePartition, ObserverSet, Prior};
