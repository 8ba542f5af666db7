//! Replicated simulation studies.
//!
//! Every replication draws its randomness from a seed derived from the
//! master seed and the replication's coordinates, so results do not depend on
//! the number of worker threads or the order in which work is scheduled.

use bimatch_core::degrees::{sample_conditioned, DegreeSample, DEFAULT_MAX_ATTEMPTS};
use bimatch_core::hydro::{integrate, HydroState, KernelKind, OdeSettings};
use bimatch_core::matching::{configuration_model, explore_match, joint_construct};
use bimatch_core::{seed, BipartiteMultigraph, Criterion, DistributionSpec, RunOptions};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Stats;

/// Attempts at drawing a simple configuration-model graph before giving up.
pub const MAX_SIMPLE_ATTEMPTS: usize = 10_000;

/// Which matching construction produced a coverage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Matching by exploration of a fixed graph.
    #[default]
    Explore,
    /// Matching built together with the configuration model.
    Joint,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Explore => "explore",
            Construction::Joint => "joint",
        }
    }
}

/// Seed at a path of coordinates below `master`.
pub fn seed_at(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &i| seed::derive(s, i))
}

pub fn rng_at(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_at(master, path))
}

/// ODE coverage estimate for a criterion and initial degree laws.
pub fn ode_coverage(
    xi_plus: &DistributionSpec,
    xi_minus: &DistributionSpec,
    criterion: &Criterion,
    settings: &OdeSettings,
) -> Result<Option<f64>> {
    let kernel = match criterion {
        Criterion::Greedy => KernelKind::Greedy,
        Criterion::MinRes => KernelKind::MinRes,
        Criterion::Custom { .. } => return Ok(None),
    };
    let state = HydroState::from_specs(xi_plus, xi_minus)?;
    Ok(Some(
        integrate(&state, &kernel, settings)?.coverage_estimate(),
    ))
}

/// Draws conditioned degrees and a configuration-model graph on them,
/// redrawing the pairing until it is simple when `require_simple` is set.
pub fn sample_graph<R: Rng + ?Sized>(
    xi_plus: &DistributionSpec,
    xi_minus: &DistributionSpec,
    n: usize,
    require_simple: bool,
    rng: &mut R,
) -> Result<BipartiteMultigraph> {
    let sample = sample_conditioned(xi_plus, xi_minus, n, rng, DEFAULT_MAX_ATTEMPTS)?;
    for _ in 0..MAX_SIMPLE_ATTEMPTS {
        let g = configuration_model(&sample, rng)?;
        if !require_simple || g.is_simple() {
            return Ok(g);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no simple graph in {MAX_SIMPLE_ATTEMPTS} pairings of the sampled degrees"
    )))
}

fn coverage_on(graph: &BipartiteMultigraph, criterion: &Criterion, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(explore_match(graph, criterion, &mut rng, &RunOptions::with_seed(seed))?.coverage)
}

fn joint_coverage(sample: &DegreeSample, criterion: &Criterion, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(joint_construct(sample, criterion, &mut rng, &RunOptions::with_seed(seed))?.coverage)
}

/// Coverages of one group of replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub criterion: Criterion,
    pub coverages: Vec<f64>,
    pub stats: Stats,
}

impl Group {
    fn new(criterion: Criterion, coverages: Vec<f64>) -> Self {
        let stats = Stats::of(&coverages);
        Self {
            criterion,
            coverages,
            stats,
        }
    }
}

/// Splits per-replication coverage vectors (one entry per criterion) into
/// one group per criterion.
fn transpose(criteria: &[Criterion], per_rep: Vec<Vec<f64>>) -> Vec<Group> {
    criteria
        .iter()
        .enumerate()
        .map(|(c, &crit)| Group::new(crit, per_rep.iter().map(|r| r[c]).collect()))
        .collect()
}

/// Settings shared by every study.
#[derive(Debug, Clone, PartialEq)]
pub struct Replications {
    pub seed: u64,
    pub count: usize,
    pub criteria: Vec<Criterion>,
}

impl Replications {
    fn check(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        if self.criteria.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one criterion is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    #[serde(flatten)]
    pub group: Group,
    pub ode_reference: Option<f64>,
}

/// Coverage across graph sizes, each replication on a freshly drawn graph.
///
/// All criteria of a replication run on the same graph, with separate
/// matching randomness.
#[allow(clippy::too_many_arguments)]
pub fn run_convergence(
    xi_plus: &DistributionSpec,
    xi_minus: &DistributionSpec,
    n_values: &[usize],
    construction: Construction,
    require_simple: bool,
    reps: &Replications,
    ode: Option<&OdeSettings>,
) -> Result<Vec<ConvergenceRow>> {
    reps.check()?;
    if n_values.is_empty() {
        return Err(Error::InvalidParameter("n_values must not be empty".into()));
    }
    let references = reps
        .criteria
        .iter()
        .map(|c| match ode {
            Some(settings) => ode_coverage(xi_plus, xi_minus, c, settings),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (ni, &n) in n_values.iter().enumerate() {
        let per_rep = (0..reps.count)
            .into_par_iter()
            .map(|r| {
                let base = [ni as u64, r as u64];
                let mut rng = rng_at(reps.seed, &base);
                let run_seed = |c: usize| seed_at(reps.seed, &[ni as u64, r as u64, 1 + c as u64]);
                match construction {
                    Construction::Explore => {
                        let g = sample_graph(xi_plus, xi_minus, n, require_simple, &mut rng)?;
                        (0..reps.criteria.len())
                            .map(|c| coverage_on(&g, &reps.criteria[c], run_seed(c)))
                            .collect()
                    }
                    Construction::Joint => {
                        let sample = sample_conditioned(
                            xi_plus,
                            xi_minus,
                            n,
                            &mut rng,
                            DEFAULT_MAX_ATTEMPTS,
                        )?;
                        (0..reps.criteria.len())
                            .map(|c| joint_coverage(&sample, &reps.criteria[c], run_seed(c)))
                            .collect()
                    }
                }
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        for (group, reference) in transpose(&reps.criteria, per_rep)
            .into_iter()
            .zip(&references)
        {
            rows.push(ConvergenceRow {
                n,
                group,
                ode_reference: *reference,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub distribution: DistributionSpec,
    #[serde(flatten)]
    pub group: Group,
}

/// Coverage for a family of degree laws (used on both sides).
///
/// By default one graph is drawn per law and every replication explores it
/// with fresh matching randomness; `regenerate` draws a new graph per
/// replication instead.
pub fn run_sweep(
    distributions: &[DistributionSpec],
    n: usize,
    regenerate: bool,
    require_simple: bool,
    reps: &Replications,
) -> Result<Vec<SweepRow>> {
    reps.check()?;
    let mut rows = Vec::new();
    for (di, dist) in distributions.iter().enumerate() {
        let shared = if regenerate {
            None
        } else {
            let mut rng = rng_at(reps.seed, &[di as u64]);
            Some(sample_graph(dist, dist, n, require_simple, &mut rng)?)
        };
        let per_rep = (0..reps.count)
            .into_par_iter()
            .map(|r| {
                let fresh;
                let g = match &shared {
                    Some(g) => g,
                    None => {
                        let mut rng = rng_at(reps.seed, &[di as u64, r as u64]);
                        fresh = sample_graph(dist, dist, n, require_simple, &mut rng)?;
                        &fresh
                    }
                };
                (0..reps.criteria.len())
                    .map(|c| {
                        let s = seed_at(reps.seed, &[di as u64, r as u64, 1 + c as u64]);
                        coverage_on(g, &reps.criteria[c], s)
                    })
                    .collect()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        for group in transpose(&reps.criteria, per_rep) {
            rows.push(SweepRow {
                distribution: dist.clone(),
                group,
            });
        }
    }
    Ok(rows)
}

/// Bipartite graph whose adjacency matrix is upper triangular with a full
/// diagonal: plus node `i` is always linked to minus node `i` and to each
/// minus node `j > i` independently with probability
/// `p = 2 (avg_degree - 1) / (n - 1)`, which makes `avg_degree` the
/// expected average degree.
pub fn make_triangular_graph<R: Rng + ?Sized>(
    n: usize,
    avg_degree: f64,
    rng: &mut R,
) -> Result<BipartiteMultigraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "triangular graph needs n >= 2, got {n}"
        )));
    }
    let p = 2.0 * (avg_degree - 1.0) / (n - 1) as f64;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "average degree {avg_degree} needs edge probability {p}, outside [0, 1]"
        )));
    }
    let mut g = BipartiteMultigraph::empty(n);
    for i in 0..n as u32 {
        g.add_edge(i, i, 1)?;
    }
    if p == 0.0 {
        return Ok(g);
    }
    // Geometric gaps between successes along each row of the strict upper
    // triangle.
    let log_q = (1.0 - p).ln();
    for i in 0..n {
        let mut j = i;
        loop {
            let gap = if p >= 1.0 {
                0
            } else {
                let u: f64 = 1.0 - rng.gen::<f64>();
                (u.ln() / log_q).floor() as usize
            };
            j = j.saturating_add(gap).saturating_add(1);
            if j >= n {
                break;
            }
            g.add_edge(i as u32, j as u32, 1)?;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyRow {
    pub construction: Construction,
    #[serde(flatten)]
    pub group: Group,
}

/// Exploration on triangular graphs against the joint construction on the
/// same degree sequences.
pub fn run_topology_comparison(
    n: usize,
    avg_degree: f64,
    reps: &Replications,
) -> Result<Vec<TopologyRow>> {
    reps.check()?;
    let k = reps.criteria.len();
    let per_rep = (0..reps.count)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_at(reps.seed, &[r as u64]);
            let g = make_triangular_graph(n, avg_degree, &mut rng)?;
            let sample = g.degree_sample();
            let mut out = Vec::with_capacity(2 * k);
            for (c, crit) in reps.criteria.iter().enumerate() {
                out.push(coverage_on(
                    &g,
                    crit,
                    seed_at(reps.seed, &[r as u64, 1 + c as u64]),
                )?);
            }
            for (c, crit) in reps.criteria.iter().enumerate() {
                let s = seed_at(reps.seed, &[r as u64, 1 + (k + c) as u64]);
                out.push(joint_coverage(&sample, crit, s)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut rows = Vec::new();
    for (offset, construction) in [(0, Construction::Explore), (k, Construction::Joint)] {
        for (c, &crit) in reps.criteria.iter().enumerate() {
            let coverages = per_rep.iter().map(|v| v[offset + c]).collect();
            rows.push(TopologyRow {
                construction,
                group: Group::new(crit, coverages),
            });
        }
    }
    Ok(rows)
}

/// Where the graphs of [`match_records`] come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MatchSource {
    /// Exploration of one fixed graph, with fresh matching randomness per
    /// replication.
    Graph(BipartiteMultigraph),
    /// Exploration of a new configuration-model graph per replication.
    Fresh {
        xi_plus: DistributionSpec,
        xi_minus: DistributionSpec,
        n: usize,
    },
    /// Joint construction on new conditioned degrees per replication.
    Joint {
        xi_plus: DistributionSpec,
        xi_minus: DistributionSpec,
        n: usize,
    },
}

/// One run record per replication. Replication `r` draws its graph from the
/// seed at `[r]` and its matching from the seed at `[r, 1]`, which is also
/// the seed stored in the record.
pub fn match_records(
    source: &MatchSource,
    criterion: &Criterion,
    replications: usize,
    seed: u64,
    trajectory: bool,
) -> Result<Vec<bimatch_core::RunRecord>> {
    (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let run_seed = seed_at(seed, &[r, 1]);
            let mut options = RunOptions::with_seed(run_seed);
            options.trajectory = trajectory;
            let mut graph_rng = rng_at(seed, &[r]);
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
            Ok(match source {
                MatchSource::Graph(g) => explore_match(g, criterion, &mut rng, &options)?,
                MatchSource::Fresh {
                    xi_plus,
                    xi_minus,
                    n,
                } => {
                    let g = sample_graph(xi_plus, xi_minus, *n, false, &mut graph_rng)?;
                    explore_match(&g, criterion, &mut rng, &options)?
                }
                MatchSource::Joint {
                    xi_plus,
                    xi_minus,
                    n,
                } => {
                    let sample = sample_conditioned(
                        xi_plus,
                        xi_minus,
                        *n,
                        &mut graph_rng,
                        DEFAULT_MAX_ATTEMPTS,
                    )?;
                    joint_construct(&sample, criterion, &mut rng, &options)?
                }
            })
        })
        .collect()
}

/// Agreement between simulated coverage and the ODE estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSimReport {
    pub criterion: Criterion,
    pub n: usize,
    pub stats: Stats,
    pub ode: f64,
    pub gap: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Floor of the pass threshold, covering the ODE cutoff and finite-size bias.
pub const ODE_GAP_FLOOR: f64 = 2e-3;

impl OdeSimReport {
    pub fn new(criterion: Criterion, n: usize, stats: Stats, ode: f64) -> Self {
        let gap = (stats.mean - ode).abs();
        let threshold = (3.0 * stats.std_err()).max(ODE_GAP_FLOOR);
        Self {
            criterion,
            n,
            stats,
            ode,
            gap,
            threshold,
            pass: gap <= threshold,
        }
    }
}

/// Simulates exploration on fresh graphs and compares with the ODE.
#[allow(clippy::too_many_arguments)]
pub fn ode_vs_sim_report(
    xi_plus: &DistributionSpec,
    xi_minus: &DistributionSpec,
    criterion: Criterion,
    n: usize,
    replications: usize,
    ode_settings: &OdeSettings,
    seed: u64,
) -> Result<OdeSimReport> {
    let ode = ode_coverage(xi_plus, xi_minus, &criterion, ode_settings)?.ok_or_else(|| {
        Error::InvalidParameter(format!("no ODE kernel for criterion {criterion}"))
    })?;
    let reps = Replications {
        seed,
        count: replications,
        criteria: vec![criterion],
    };
    let rows = run_convergence(
        xi_plus,
        xi_minus,
        &[n],
        Construction::Explore,
        false,
        &reps,
        None,
    )?;
    Ok(OdeSimReport::new(criterion, n, rows[0].group.stats, ode))
}
