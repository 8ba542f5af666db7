//! Local online matching algorithms on large bipartite random graphs.
//!
//! The crate covers two stochastic constructions of a matching:
//!
//! * [`matching::explore`]: a local criterion run on a fixed bipartite graph,
//!   deleting matched pairs as it goes;
//! * [`matching::joint`]: the same criterion run while the graph itself is
//!   built by uniform half-edge pairing (the bipartite configuration model).
//!
//! Both are summarised by a pair of integer point measures counting the
//! undetermined nodes of each side by residual degree. Under the joint
//! construction that pair is a Markov chain, and [`hydro`] integrates its
//! deterministic large-graph limit to estimate the final matching coverage.
//!
//! The crate is `no_std` and only needs `alloc`. Randomness is supplied by the
//! caller through [`rand::Rng`].

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod degrees;
pub mod hydro;
pub mod matching;
pub mod measure;
pub mod seed;

pub use degrees::{DegreeError, DegreeSample, DistributionSpec, Graphicality};
pub use hydro::{HydroError, HydroState, KernelKind, MatchKernel};
pub use matching::{
    BipartiteMultigraph, Criterion, MatchError, NodeStatus, RunOptions, RunRecord, Snapshot,
};
pub use measure::{Mass, PointMeasure, TestFn};
