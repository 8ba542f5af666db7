//! Local online matching: exploration of a fixed graph and the joint
//! construction with the configuration model.
//!
//! Both constructions run exactly `n` steps. At each step a uniformly chosen
//! undetermined plus node is either matched to one of its undetermined minus
//! neighbours (picked by a [`Criterion`] from their residual degrees) or, when
//! it has none, declared isolated. Undetermined minus nodes left after step
//! `n` are isolated as well.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::measure::{MeasureError, PointMeasure};

mod coupling;
mod criterion;
pub mod explore;
mod graph;
pub mod joint;

pub use coupling::{coupled_pair_run, CoupledRun};
pub use criterion::{select_match, Criterion, CustomRule};
pub use explore::{explore_match, ExploreChain};
pub use graph::{configuration_model, BipartiteMultigraph};
pub use joint::{joint_construct, JointChain};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("cannot select a match from an empty neighbourhood")]
    EmptyNeighborhood,
    #[error("custom rule returned index {index} for {len} candidates")]
    InvalidRuleOutput { index: usize, len: usize },
    #[error("unknown matching criterion {0:?}")]
    UnknownCriterion(String),
    #[error("half-edge imbalance at step {t}: {plus_open} open plus vs {minus_open} open minus")]
    HalfEdgeImbalance {
        t: usize,
        plus_open: usize,
        minus_open: usize,
    },
    #[error("degree totals differ ({plus} vs {minus})")]
    UnbalancedDegrees { plus: u64, minus: u64 },
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: u32, n: usize },
    #[error("too many half-edges for 32-bit stub indices")]
    TooManyHalfEdges,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("all {0} steps have already run")]
    Finished(usize),
    #[error("replayed decisions diverge at step {t}")]
    ReplayDiverged { t: usize },
    #[error("node accounting broken: {0}")]
    Accounting(&'static str),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// State of a node during a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeStatus {
    #[default]
    Undetermined,
    /// Matched to the given node of the opposite side.
    Matched(u32),
    Isolated,
}

impl NodeStatus {
    pub fn is_undetermined(self) -> bool {
        self == NodeStatus::Undetermined
    }
}

/// What one step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Matched { plus: u32, minus: u32 },
    Isolated { plus: u32 },
}

impl StepEvent {
    pub fn plus(&self) -> u32 {
        match *self {
            StepEvent::Matched { plus, .. } | StepEvent::Isolated { plus } => plus,
        }
    }

    pub fn minus(&self) -> Option<u32> {
        match *self {
            StepEvent::Matched { minus, .. } => Some(minus),
            StepEvent::Isolated { .. } => None,
        }
    }
}

/// Source of the random choices of a construction step.
///
/// [`RandomDecisions`] draws them; the coupling replays a recorded sequence.
pub trait Decisions {
    /// Plus node explored next, taken from the undetermined `candidates`.
    fn pick_plus(&mut self, candidates: &[u32]) -> Result<u32, MatchError>;

    /// Position in `neighbors` of the match, given their residual degrees.
    fn pick_match(
        &mut self,
        criterion: &Criterion,
        neighbors: &[u32],
        degrees: &[u32],
    ) -> Result<usize, MatchError>;

    /// Called instead of `pick_match` when the explored node is isolated.
    fn isolate(&mut self) -> Result<(), MatchError> {
        Ok(())
    }
}

pub struct RandomDecisions<'a, R: ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> Decisions for RandomDecisions<'_, R> {
    fn pick_plus(&mut self, candidates: &[u32]) -> Result<u32, MatchError> {
        if candidates.is_empty() {
            return Err(MatchError::Accounting("no undetermined plus node left"));
        }
        Ok(candidates[self.0.gen_range(0..candidates.len())])
    }

    fn pick_match(
        &mut self,
        criterion: &Criterion,
        _neighbors: &[u32],
        degrees: &[u32],
    ) -> Result<usize, MatchError> {
        criterion.select(degrees, self.0)
    }
}

/// Random choices made by one joint-construction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepDecision {
    pub plus: u32,
    /// `None` when the plus node was isolated.
    pub matched: Option<u32>,
}

impl From<StepEvent> for StepDecision {
    fn from(e: StepEvent) -> Self {
        Self {
            plus: e.plus(),
            matched: e.minus(),
        }
    }
}

/// Undetermined plus nodes, with O(1) uniform access and removal.
#[derive(Debug, Clone)]
pub(crate) struct Pending {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl Pending {
    pub(crate) fn full(n: usize) -> Self {
        Self {
            items: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
        }
    }

    pub(crate) fn items(&self) -> &[u32] {
        &self.items
    }

    pub(crate) fn remove(&mut self, node: u32) {
        let p = self.pos[node as usize] as usize;
        let last = *self.items.last().expect("removing from an empty set");
        self.items.swap_remove(p);
        if p < self.items.len() {
            self.pos[last as usize] = p as u32;
        }
        self.pos[node as usize] = u32::MAX;
    }
}

/// Per-run settings shared by both constructions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record `(mu_plus_t, mu_minus_t)` snapshots.
    pub trajectory: bool,
    /// Steps between snapshots; `None` means `ceil(n / 1000)`.
    pub stride: Option<usize>,
    /// Keep the graph built by the joint construction.
    pub keep_graph: bool,
    /// Seed stored in the resulting record.
    pub seed: u64,
}

impl RunOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn with_trajectory(mut self) -> Self {
        self.trajectory = true;
        self
    }

    fn stride_for(&self, n: usize) -> usize {
        self.stride.unwrap_or_else(|| n.div_ceil(1000)).max(1)
    }
}

/// Measures of the undetermined nodes after `t` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub plus: PointMeasure,
    pub minus: PointMeasure,
}

/// Outcome of one construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Fraction of the `2n` nodes that end up matched.
    pub coverage: f64,
    pub matched_count: usize,
    pub isolated_count: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Snapshot>>,
    /// Graph produced by the joint construction, when requested.
    #[serde(skip)]
    pub final_graph: Option<BipartiteMultigraph>,
    /// Matched `(plus, minus)` pairs in matching order.
    #[serde(skip)]
    pub pairs: Vec<(u32, u32)>,
    /// Undetermined minus nodes after step `n`, by residual degree.
    #[serde(skip)]
    pub final_minus: PointMeasure,
}

impl RunRecord {
    pub fn n(&self) -> usize {
        (self.matched_count + self.isolated_count) / 2
    }
}

/// Collects snapshots at `t = 0`, every `stride` steps, and at `t = n`.
pub(crate) struct Recorder {
    stride: usize,
    snapshots: Option<Vec<Snapshot>>,
}

impl Recorder {
    pub(crate) fn new(options: &RunOptions, n: usize) -> Self {
        Self {
            stride: options.stride_for(n),
            snapshots: options.trajectory.then(Vec::new),
        }
    }

    pub(crate) fn observe(
        &mut self,
        t: usize,
        n: usize,
        plus: &PointMeasure,
        minus: &PointMeasure,
    ) {
        if let Some(snaps) = &mut self.snapshots {
            if t.is_multiple_of(self.stride) || t == n {
                snaps.push(Snapshot {
                    t,
                    plus: plus.clone(),
                    minus: minus.clone(),
                });
            }
        }
    }

    pub(crate) fn finish(self) -> Option<Vec<Snapshot>> {
        self.snapshots
    }
}

/// `1 - (unmatched minus nodes) / n`, the same float whichever count it is
/// derived from.
pub(crate) fn coverage(n: usize, matched_count: usize) -> f64 {
    1.0 - (n - matched_count / 2) as f64 / n as f64
}

/// Terminal accounting shared by both constructions.
pub(crate) fn finish_statuses(
    plus: &[NodeStatus],
    minus: &mut [NodeStatus],
) -> Result<(usize, usize), MatchError> {
    if plus.iter().any(|s| s.is_undetermined()) {
        return Err(MatchError::Accounting("plus node left undetermined"));
    }
    for s in minus.iter_mut() {
        if s.is_undetermined() {
            *s = NodeStatus::Isolated;
        }
    }
    let matched = plus
        .iter()
        .chain(minus.iter())
        .filter(|s| matches!(s, NodeStatus::Matched(_)))
        .count();
    let isolated = plus.len() + minus.len() - matched;
    let isolated_plus = plus.iter().filter(|s| **s == NodeStatus::Isolated).count();
    if matched % 2 != 0 || isolated_plus * 2 != isolated {
        return Err(MatchError::Accounting(
            "isolated nodes unbalanced across sides",
        ));
    }
    Ok((matched, isolated))
}
