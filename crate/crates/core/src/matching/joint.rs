//! Configuration model and matching built together.
//!
//! Only the open half-edges of each node (its availability) are tracked. When
//! a plus node is explored its open half-edges are paired uniformly with open
//! minus half-edges, one of the reached minus nodes is chosen as its match,
//! and the match's remaining half-edges are paired uniformly with open plus
//! half-edges.

use alloc::vec::Vec;

use rand::Rng;

use super::{
    coverage, finish_statuses, BipartiteMultigraph, Criterion, MatchError, NodeStatus, Pending,
    Recorder, RunOptions, RunRecord, StepDecision, StepEvent,
};
use crate::degrees::DegreeSample;
use crate::measure::PointMeasure;

const NONE: u32 = u32::MAX;

/// Open half-edges of one side, drawn uniformly without replacement.
#[derive(Debug, Clone)]
struct StubPool {
    owner: Vec<u32>,
    first: Vec<u32>,
    open: Vec<u32>,
    pos: Vec<u32>,
}

impl StubPool {
    fn new(degrees: &[u32]) -> Result<Self, MatchError> {
        let total: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
        if total >= u64::from(NONE) {
            return Err(MatchError::TooManyHalfEdges);
        }
        let mut owner = Vec::with_capacity(total as usize);
        let mut first = Vec::with_capacity(degrees.len());
        for (v, &d) in degrees.iter().enumerate() {
            first.push(owner.len() as u32);
            owner.extend(core::iter::repeat_n(v as u32, d as usize));
        }
        let open: Vec<u32> = (0..total as u32).collect();
        let pos = open.clone();
        Ok(Self {
            owner,
            first,
            open,
            pos,
        })
    }

    fn len(&self) -> usize {
        self.open.len()
    }

    fn take_at(&mut self, p: usize) -> u32 {
        let stub = self.open.swap_remove(p);
        if let Some(&moved) = self.open.get(p) {
            self.pos[moved as usize] = p as u32;
        }
        self.pos[stub as usize] = NONE;
        stub
    }

    /// Removes a uniformly chosen open half-edge and returns its owner.
    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u32 {
        let p = rng.gen_range(0..self.open.len());
        let stub = self.take_at(p);
        self.owner[stub as usize]
    }

    /// Removes every open half-edge of `node`.
    fn close_node(&mut self, node: u32) {
        let start = self.first[node as usize] as usize;
        let end = self
            .first
            .get(node as usize + 1)
            .map_or(self.owner.len(), |&e| e as usize);
        for stub in start..end {
            let p = self.pos[stub];
            if p != NONE {
                self.take_at(p as usize);
            }
        }
    }
}

/// State of the joint construction after `t` steps.
#[derive(Debug, Clone)]
pub struct JointChain {
    t: usize,
    plus_avail: Vec<u32>,
    minus_avail: Vec<u32>,
    plus_status: Vec<NodeStatus>,
    minus_status: Vec<NodeStatus>,
    pending: Pending,
    plus_pool: StubPool,
    minus_pool: StubPool,
    mu_plus: PointMeasure,
    mu_minus: PointMeasure,
    pairs: Vec<(u32, u32)>,
    edges: Option<Vec<(u32, u32)>>,
    log: Option<Vec<StepDecision>>,
    reached: Vec<u32>,
    reached_avail: Vec<u32>,
}

impl JointChain {
    pub fn new(sample: &DegreeSample) -> Result<Self, MatchError> {
        let n = sample.n();
        if n == 0 {
            return Err(MatchError::EmptyGraph);
        }
        let (plus_total, minus_total) = (sample.plus_total(), sample.minus_total());
        if plus_total != minus_total {
            return Err(MatchError::UnbalancedDegrees {
                plus: plus_total,
                minus: minus_total,
            });
        }
        let (mu_plus, mu_minus) = sample.measures();
        Ok(Self {
            t: 0,
            plus_avail: sample.plus.clone(),
            minus_avail: sample.minus.clone(),
            plus_status: alloc::vec![NodeStatus::Undetermined; n],
            minus_status: alloc::vec![NodeStatus::Undetermined; n],
            pending: Pending::full(n),
            plus_pool: StubPool::new(&sample.plus)?,
            minus_pool: StubPool::new(&sample.minus)?,
            mu_plus,
            mu_minus,
            pairs: Vec::new(),
            edges: None,
            log: None,
            reached: Vec::new(),
            reached_avail: Vec::new(),
        })
    }

    /// Keeps every paired edge so the final graph can be rebuilt.
    pub fn record_edges(mut self) -> Self {
        self.edges = Some(Vec::new());
        self
    }

    /// Keeps the node choices of every step for replay.
    pub fn record_decisions(mut self) -> Self {
        self.log = Some(Vec::new());
        self
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

    /// Undetermined plus nodes counted by availability.
    pub fn plus_measure(&self) -> &PointMeasure {
        &self.mu_plus
    }

    /// Undetermined minus nodes counted by availability.
    pub fn minus_measure(&self) -> &PointMeasure {
        &self.mu_minus
    }

    pub fn plus_availability(&self) -> &[u32] {
        &self.plus_avail
    }

    pub fn minus_availability(&self) -> &[u32] {
        &self.minus_avail
    }

    pub fn plus_status(&self) -> &[NodeStatus] {
        &self.plus_status
    }

    pub fn minus_status(&self) -> &[NodeStatus] {
        &self.minus_status
    }

    /// Open half-edges on the plus and minus side.
    pub fn open_half_edges(&self) -> (usize, usize) {
        (self.plus_pool.len(), self.minus_pool.len())
    }

    pub fn decisions(&self) -> Option<&[StepDecision]> {
        self.log.as_deref()
    }

    pub fn matched_pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// The edges paired so far, if recording was enabled.
    pub fn graph(&self) -> Option<BipartiteMultigraph> {
        let edges = self.edges.as_ref()?;
        BipartiteMultigraph::from_edges(self.n(), edges.iter().copied()).ok()
    }

    fn check_balance(&self) -> Result<(), MatchError> {
        let (plus_open, minus_open) = self.open_half_edges();
        if plus_open != minus_open {
            return Err(MatchError::HalfEdgeImbalance {
                t: self.t,
                plus_open,
                minus_open,
            });
        }
        Ok(())
    }

    fn consume_minus(&mut self, j: u32) -> Result<(), MatchError> {
        let a = &mut self.minus_avail[j as usize];
        self.mu_minus.move_atom(*a as usize, *a as usize - 1)?;
        *a -= 1;
        Ok(())
    }

    fn consume_plus(&mut self, i: u32) -> Result<(), MatchError> {
        let a = &mut self.plus_avail[i as usize];
        self.mu_plus.move_atom(*a as usize, *a as usize - 1)?;
        *a -= 1;
        Ok(())
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        criterion: &Criterion,
        rng: &mut R,
    ) -> Result<StepEvent, MatchError> {
        if self.is_finished() {
            return Err(MatchError::Finished(self.n()));
        }
        self.check_balance()?;
        let candidates = self.pending.items();
        let plus = candidates[rng.gen_range(0..candidates.len())];
        let i = plus as usize;
        self.pending.remove(plus);

        let a = self.plus_avail[i];
        let event = if a == 0 {
            self.mu_plus.remove_atom(0)?;
            self.plus_status[i] = NodeStatus::Isolated;
            StepEvent::Isolated { plus }
        } else {
            // Pair all of the plus node's half-edges first, then let the
            // criterion see the availabilities they found.
            self.plus_pool.close_node(plus);
            self.reached.clear();
            for _ in 0..a {
                let j = self.minus_pool.draw(rng);
                self.reached.push(j);
            }
            self.reached_avail.clear();
            for &j in &self.reached {
                self.reached_avail.push(self.minus_avail[j as usize]);
            }
            let pick = criterion.select(&self.reached_avail, rng)?;
            let minus = self.reached[pick];

            for l in 0..self.reached.len() {
                let j = self.reached[l];
                self.consume_minus(j)?;
                if let Some(edges) = &mut self.edges {
                    edges.push((plus, j));
                }
            }
            self.mu_plus.remove_atom(a as usize)?;
            self.plus_avail[i] = 0;

            let rest = self.minus_avail[minus as usize];
            self.minus_pool.close_node(minus);
            for _ in 0..rest {
                let u = self.plus_pool.draw(rng);
                self.consume_plus(u)?;
                if let Some(edges) = &mut self.edges {
                    edges.push((u, minus));
                }
            }
            self.mu_minus.remove_atom(rest as usize)?;
            self.minus_avail[minus as usize] = 0;

            self.plus_status[i] = NodeStatus::Matched(minus);
            self.minus_status[minus as usize] = NodeStatus::Matched(plus);
            self.pairs.push((plus, minus));
            StepEvent::Matched { plus, minus }
        };
        if let Some(log) = &mut self.log {
            log.push(event.into());
        }
        self.t += 1;
        self.check_balance()?;
        Ok(event)
    }

    pub(crate) fn run<R: Rng + ?Sized>(
        &mut self,
        criterion: &Criterion,
        rng: &mut R,
        options: &RunOptions,
    ) -> Result<RunRecord, MatchError> {
        let n = self.n();
        let mut recorder = Recorder::new(options, n);
        recorder.observe(0, n, &self.mu_plus, &self.mu_minus);
        while !self.is_finished() {
            self.step(criterion, rng)?;
            recorder.observe(self.t, n, &self.mu_plus, &self.mu_minus);
        }
        let mut minus_status = self.minus_status.clone();
        let (matched_count, isolated_count) =
            finish_statuses(&self.plus_status, &mut minus_status)?;
        Ok(RunRecord {
            coverage: coverage(n, matched_count),
            matched_count,
            isolated_count,
            seed: options.seed,
            trajectory: recorder.finish(),
            final_graph: self.graph(),
            pairs: self.pairs.clone(),
            final_minus: self.mu_minus.clone(),
        })
    }
}

/// Builds a configuration-model graph with degrees `sample` while matching it.
pub fn joint_construct<R: Rng + ?Sized>(
    sample: &DegreeSample,
    criterion: &Criterion,
    rng: &mut R,
    options: &RunOptions,
) -> Result<RunRecord, MatchError> {
    let mut chain = JointChain::new(sample)?;
    if options.keep_graph {
        chain = chain.record_edges();
    }
    chain.run(criterion, rng, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(plus: Vec<u32>, minus: Vec<u32>, c: Criterion, seed: u64) -> RunRecord {
        let sample = DegreeSample::new(plus, minus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let options = RunOptions {
            keep_graph: true,
            ..RunOptions::with_seed(seed)
        };
        joint_construct(&sample, &c, &mut rng, &options).unwrap()
    }

    #[test]
    fn single_edge() {
        let rec = run(vec![1], vec![1], Criterion::Greedy, 0);
        assert_eq!(rec.coverage, 1.0);
        assert_eq!(rec.final_graph.unwrap().edges(), vec![(0, 0, 1)]);
    }

    #[test]
    fn shared_minus_hub_covers_half() {
        for seed in 0..20 {
            let rec = run(vec![1, 1], vec![2, 0], Criterion::MinRes, seed);
            assert_eq!(rec.coverage, 0.5);
            assert_eq!(rec.final_graph.unwrap().edges(), vec![(0, 0, 1), (1, 0, 1)]);
        }
    }

    #[test]
    fn final_graph_has_the_sampled_degrees() {
        let plus = vec![3, 0, 2, 1, 4, 1];
        let minus = vec![1, 1, 2, 2, 3, 2];
        for c in [Criterion::Greedy, Criterion::MinRes] {
            for seed in 0..20 {
                let rec = run(plus.clone(), minus.clone(), c, seed);
                let g = rec.final_graph.unwrap();
                assert_eq!(g.degree_sample().plus, plus);
                assert_eq!(g.degree_sample().minus, minus);
                for &(i, j) in &rec.pairs {
                    assert!(g.plus_neighbors(i as usize).contains(&j));
                }
            }
        }
    }

    #[test]
    fn balance_holds_at_every_step() {
        let sample = DegreeSample::regular(300, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut chain = JointChain::new(&sample).unwrap();
        while !chain.is_finished() {
            chain.step(&Criterion::Greedy, &mut rng).unwrap();
            let (p, m) = chain.open_half_edges();
            assert_eq!(p, m);
            assert_eq!(chain.plus_measure().moment(&crate::TestFn::X) as usize, p);
            assert_eq!(chain.minus_measure().moment(&crate::TestFn::X) as usize, m);
        }
        assert_eq!(chain.open_half_edges(), (0, 0));
    }

    #[test]
    fn unbalanced_sample_is_rejected() {
        let sample = DegreeSample::new(vec![2, 1], vec![2, 2]).unwrap();
        assert!(matches!(
            JointChain::new(&sample),
            Err(MatchError::UnbalancedDegrees { plus: 3, minus: 4 })
        ));
    }
}
