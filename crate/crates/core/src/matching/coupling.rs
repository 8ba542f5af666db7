use rand::Rng;

use super::{
    BipartiteMultigraph, Criterion, Decisions, ExploreChain, JointChain, MatchError, RunOptions,
    RunRecord, StepDecision,
};
use crate::degrees::DegreeSample;

/// Replays the node choices of a joint run inside an exploration run.
///
/// Each replayed choice is checked against the exploration state: the plus
/// node must be undetermined, an isolation must happen exactly when the
/// joint run isolated, and the match must be a candidate the criterion could
/// have picked.
struct Replay<'a> {
    log: &'a [StepDecision],
    t: usize,
}

impl Replay<'_> {
    fn current(&self) -> Result<StepDecision, MatchError> {
        self.t
            .checked_sub(1)
            .and_then(|t| self.log.get(t))
            .copied()
            .ok_or(MatchError::ReplayDiverged { t: self.t })
    }
}

impl Decisions for Replay<'_> {
    fn pick_plus(&mut self, _candidates: &[u32]) -> Result<u32, MatchError> {
        let d = self
            .log
            .get(self.t)
            .ok_or(MatchError::ReplayDiverged { t: self.t })?;
        self.t += 1;
        Ok(d.plus)
    }

    fn pick_match(
        &mut self,
        criterion: &Criterion,
        neighbors: &[u32],
        degrees: &[u32],
    ) -> Result<usize, MatchError> {
        let t = self.t - 1;
        let target = self
            .current()?
            .matched
            .ok_or(MatchError::ReplayDiverged { t })?;
        neighbors
            .iter()
            .position(|&j| j == target)
            .filter(|&p| criterion.admits(degrees, p))
            .ok_or(MatchError::ReplayDiverged { t })
    }

    fn isolate(&mut self) -> Result<(), MatchError> {
        match self.current()?.matched {
            None => Ok(()),
            Some(_) => Err(MatchError::ReplayDiverged { t: self.t - 1 }),
        }
    }
}

/// A joint run and, when its graph is simple, the exploration of that graph
/// driven by the same choices.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub joint: RunRecord,
    pub explore: Option<RunRecord>,
    pub graph: BipartiteMultigraph,
    pub simple: bool,
    /// Step at which the replay stopped being admissible, if it did.
    pub divergence: Option<usize>,
}

impl CoupledRun {
    /// True when the replay completed and both runs recorded the same
    /// measures at every step and the same coverage.
    pub fn identical(&self) -> bool {
        match &self.explore {
            Some(e) => {
                self.divergence.is_none()
                    && e.coverage == self.joint.coverage
                    && e.trajectory == self.joint.trajectory
                    && e.pairs == self.joint.pairs
            }
            None => false,
        }
    }
}

/// Runs the joint construction, then replays its choices on the graph it
/// built. Trajectories are recorded at every step.
pub fn coupled_pair_run<R: Rng + ?Sized>(
    sample: &DegreeSample,
    criterion: &Criterion,
    rng: &mut R,
    seed: u64,
) -> Result<CoupledRun, MatchError> {
    let options = RunOptions {
        trajectory: true,
        stride: Some(1),
        keep_graph: true,
        seed,
    };
    let mut chain = JointChain::new(sample)?.record_edges().record_decisions();
    let joint = chain.run(criterion, rng, &options)?;
    let graph = chain
        .graph()
        .ok_or(MatchError::Accounting("edges were not recorded"))?;
    let simple = graph.is_simple();
    if !simple {
        return Ok(CoupledRun {
            joint,
            explore: None,
            graph,
            simple,
            divergence: None,
        });
    }
    let log = chain.decisions().unwrap_or_default();
    let mut replay = Replay { log, t: 0 };
    let (explore, divergence) =
        match ExploreChain::new(&graph)?.run(criterion, &mut replay, &options) {
            Ok(rec) => (Some(rec), None),
            Err(MatchError::ReplayDiverged { t }) => (None, Some(t)),
            Err(e) => return Err(e),
        };
    Ok(CoupledRun {
        joint,
        explore,
        graph,
        simple,
        divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degree_one_samples_always_couple() {
        let sample = DegreeSample::regular(40, 1);
        for c in [Criterion::Greedy, Criterion::MinRes] {
            for seed in 0..20 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let run = coupled_pair_run(&sample, &c, &mut rng, seed).unwrap();
                assert!(run.simple);
                assert!(run.identical(), "seed {seed}");
                assert_eq!(run.joint.coverage, 1.0);
            }
        }
    }

    #[test]
    fn replay_detects_foreign_choices() {
        // Plus 0 reaches minus 0 (degree 1) and minus 1 (degree 2); MINRES
        // cannot have matched it to minus 1.
        let g = BipartiteMultigraph::from_edges(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        let log = [StepDecision {
            plus: 0,
            matched: Some(1),
        }];
        let mut replay = Replay { log: &log, t: 0 };
        let mut chain = ExploreChain::new(&g).unwrap();
        assert_eq!(
            chain.step(&Criterion::MinRes, &mut replay),
            Err(MatchError::ReplayDiverged { t: 0 })
        );
    }
}
