//! Matching by exploration of a fully known graph.

use alloc::vec::Vec;

use rand::Rng;

use super::{
    coverage, finish_statuses, BipartiteMultigraph, Criterion, Decisions, MatchError, NodeStatus,
    Pending, RandomDecisions, Recorder, RunOptions, RunRecord, StepEvent,
};
use crate::measure::PointMeasure;

/// State of the exploration after `t` steps.
///
/// Degrees are counted in the remaining graph: the number of distinct
/// undetermined neighbours of an undetermined node. On a multigraph a
/// repeated edge therefore counts once.
#[derive(Debug, Clone)]
pub struct ExploreChain {
    t: usize,
    plus_adj: Vec<Vec<u32>>,
    minus_adj: Vec<Vec<u32>>,
    plus_deg: Vec<u32>,
    minus_deg: Vec<u32>,
    plus_status: Vec<NodeStatus>,
    minus_status: Vec<NodeStatus>,
    pending: Pending,
    mu_plus: PointMeasure,
    mu_minus: PointMeasure,
    pairs: Vec<(u32, u32)>,
    neighbors: Vec<u32>,
    degrees: Vec<u32>,
}

impl ExploreChain {
    pub fn new(graph: &BipartiteMultigraph) -> Result<Self, MatchError> {
        let n = graph.n();
        if n == 0 {
            return Err(MatchError::EmptyGraph);
        }
        let (plus_adj, minus_adj) = graph.distinct_adjacency();
        let plus_deg: Vec<u32> = plus_adj.iter().map(|a| a.len() as u32).collect();
        let minus_deg: Vec<u32> = minus_adj.iter().map(|a| a.len() as u32).collect();
        let mu_plus = PointMeasure::from_points(plus_deg.iter().map(|&d| d as usize));
        let mu_minus = PointMeasure::from_points(minus_deg.iter().map(|&d| d as usize));
        Ok(Self {
            t: 0,
            plus_adj,
            minus_adj,
            plus_deg,
            minus_deg,
            plus_status: alloc::vec![NodeStatus::Undetermined; n],
            minus_status: alloc::vec![NodeStatus::Undetermined; n],
            pending: Pending::full(n),
            mu_plus,
            mu_minus,
            pairs: Vec::new(),
            neighbors: Vec::new(),
            degrees: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.plus_status.len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.t == self.n()
    }

    /// Undetermined plus nodes counted by residual degree.
    pub fn plus_measure(&self) -> &PointMeasure {
        &self.mu_plus
    }

    /// Undetermined minus nodes counted by residual degree.
    pub fn minus_measure(&self) -> &PointMeasure {
        &self.mu_minus
    }

    pub fn plus_status(&self) -> &[NodeStatus] {
        &self.plus_status
    }

    pub fn minus_status(&self) -> &[NodeStatus] {
        &self.minus_status
    }

    pub fn matched_pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Rebuilds both measures from the remaining graph, ignoring the
    /// incrementally maintained degrees.
    pub fn recompute_measures(&self) -> (PointMeasure, PointMeasure) {
        let count = |adj: &[Vec<u32>], own: &[NodeStatus], other: &[NodeStatus]| {
            PointMeasure::from_points(
                adj.iter()
                    .zip(own)
                    .filter(|(_, s)| s.is_undetermined())
                    .map(|(a, _)| {
                        a.iter()
                            .filter(|&&w| other[w as usize].is_undetermined())
                            .count()
                    }),
            )
        };
        (
            count(&self.plus_adj, &self.plus_status, &self.minus_status),
            count(&self.minus_adj, &self.minus_status, &self.plus_status),
        )
    }

    /// Runs one step with choices taken from `decisions`.
    pub fn step<D: Decisions + ?Sized>(
        &mut self,
        criterion: &Criterion,
        decisions: &mut D,
    ) -> Result<StepEvent, MatchError> {
        if self.is_finished() {
            return Err(MatchError::Finished(self.n()));
        }
        let plus = decisions.pick_plus(self.pending.items())?;
        let i = plus as usize;
        if self.plus_status.get(i) != Some(&NodeStatus::Undetermined) {
            return Err(MatchError::ReplayDiverged { t: self.t });
        }

        self.neighbors.clear();
        self.degrees.clear();
        for &j in &self.plus_adj[i] {
            if self.minus_status[j as usize].is_undetermined() {
                self.neighbors.push(j);
                self.degrees.push(self.minus_deg[j as usize]);
            }
        }

        self.pending.remove(plus);
        self.mu_plus.remove_atom(self.plus_deg[i] as usize)?;
        let event = if self.neighbors.is_empty() {
            decisions.isolate()?;
            self.plus_status[i] = NodeStatus::Isolated;
            StepEvent::Isolated { plus }
        } else {
            let pick = decisions.pick_match(criterion, &self.neighbors, &self.degrees)?;
            let minus = *self
                .neighbors
                .get(pick)
                .ok_or(MatchError::InvalidRuleOutput {
                    index: pick,
                    len: self.neighbors.len(),
                })?;
            let j = minus as usize;
            self.plus_status[i] = NodeStatus::Matched(minus);
            self.minus_status[j] = NodeStatus::Matched(plus);
            self.mu_minus.remove_atom(self.minus_deg[j] as usize)?;

            for &w in &self.neighbors {
                if w != minus {
                    let d = &mut self.minus_deg[w as usize];
                    self.mu_minus.move_atom(*d as usize, *d as usize - 1)?;
                    *d -= 1;
                }
            }
            for &u in &self.minus_adj[j] {
                if self.plus_status[u as usize].is_undetermined() {
                    let d = &mut self.plus_deg[u as usize];
                    self.mu_plus.move_atom(*d as usize, *d as usize - 1)?;
                    *d -= 1;
                }
            }
            self.pairs.push((plus, minus));
            StepEvent::Matched { plus, minus }
        };
        self.t += 1;
        Ok(event)
    }

    pub(crate) fn run<D: Decisions + ?Sized>(
        mut self,
        criterion: &Criterion,
        decisions: &mut D,
        options: &RunOptions,
    ) -> Result<RunRecord, MatchError> {
        let n = self.n();
        let mut recorder = Recorder::new(options, n);
        recorder.observe(0, n, &self.mu_plus, &self.mu_minus);
        while !self.is_finished() {
            self.step(criterion, decisions)?;
            recorder.observe(self.t, n, &self.mu_plus, &self.mu_minus);
        }
        let (matched_count, isolated_count) =
            finish_statuses(&self.plus_status, &mut self.minus_status)?;
        Ok(RunRecord {
            coverage: coverage(n, matched_count),
            matched_count,
            isolated_count,
            seed: options.seed,
            trajectory: recorder.finish(),
            final_graph: None,
            pairs: self.pairs,
            final_minus: self.mu_minus,
        })
    }
}

/// Runs the exploration matching on `graph` to completion.
pub fn explore_match<R: Rng + ?Sized>(
    graph: &BipartiteMultigraph,
    criterion: &Criterion,
    rng: &mut R,
    options: &RunOptions,
) -> Result<RunRecord, MatchError> {
    ExploreChain::new(graph)?.run(criterion, &mut RandomDecisions(rng), options)
}
