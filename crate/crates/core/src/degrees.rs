//! Degree distributions and conditioned degree sequences.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::measure::PointMeasure;

/// Default number of minus-side redraws in [`sample_conditioned`].
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

/// Tolerance on the total mass of an explicit pmf before renormalization.
const PMF_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DegreeError {
    #[error("invalid degree distribution: {0}")]
    InvalidSpec(String),
    #[error("could not condition on equal total degree after {attempts} attempts")]
    ConditioningFailed { attempts: usize },
    #[error("degree sequences have different lengths ({plus} vs {minus})")]
    LengthMismatch { plus: usize, minus: usize },
}

/// A degree distribution on one side of the bipartition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    /// Every node has degree `p`.
    Dirac { p: u32 },
    /// Poisson(`lambda`), truncated at `cap` and renormalized.
    Poisson {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
    /// Explicit probabilities of the degrees `0, 1, ..., probs.len() - 1`.
    Pmf { probs: Vec<f64> },
}

impl DistributionSpec {
    pub fn dirac(p: u32) -> Self {
        DistributionSpec::Dirac { p }
    }

    pub fn poisson(lambda: f64) -> Self {
        DistributionSpec::Poisson { lambda, cap: None }
    }

    pub fn pmf(probs: Vec<f64>) -> Self {
        DistributionSpec::Pmf { probs }
    }

    /// Truncation point used for Poisson laws: `max(50, ceil(lambda + 12 sqrt(lambda)))`.
    pub fn poisson_cap(lambda: f64) -> usize {
        let tail = libm::ceil(lambda + 12.0 * libm::sqrt(lambda));
        (tail as usize).max(50)
    }

    /// Probabilities over `0..=D`, non-negative and summing to one.
    pub fn probabilities(&self) -> Result<Vec<f64>, DegreeError> {
        match self {
            DistributionSpec::Dirac { p } => {
                let mut probs = alloc::vec![0.0; *p as usize + 1];
                probs[*p as usize] = 1.0;
                Ok(probs)
            }
            DistributionSpec::Poisson { lambda, cap } => {
                let lambda = *lambda;
                if !lambda.is_finite() || lambda < 0.0 {
                    return Err(DegreeError::InvalidSpec(alloc::format!(
                        "poisson parameter must be finite and non-negative, got {lambda}"
                    )));
                }
                let cap = cap.unwrap_or_else(|| Self::poisson_cap(lambda));
                if lambda == 0.0 {
                    return Ok(alloc::vec![1.0]);
                }
                // log-space recursion: ln p_k = -lambda + k ln(lambda) - ln k!
                let ln_lambda = libm::log(lambda);
                let mut ln_p = -lambda;
                let mut probs = Vec::with_capacity(cap + 1);
                probs.push(libm::exp(ln_p));
                for k in 1..=cap {
                    ln_p += ln_lambda - libm::log(k as f64);
                    probs.push(libm::exp(ln_p));
                }
                normalize(probs)
            }
            DistributionSpec::Pmf { probs } => {
                if probs.is_empty() {
                    return Err(DegreeError::InvalidSpec("empty pmf".into()));
                }
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(DegreeError::InvalidSpec(
                        "pmf entries must be finite and non-negative".into(),
                    ));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
                    return Err(DegreeError::InvalidSpec(alloc::format!(
                        "pmf sums to {total}, expected 1"
                    )));
                }
                normalize(probs.clone())
            }
        }
    }

    pub fn mean(&self) -> Result<f64, DegreeError> {
        Ok(self
            .probabilities()?
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum())
    }

    pub fn sampler(&self) -> Result<DegreeSampler, DegreeError> {
        DegreeSampler::new(&self.probabilities()?)
    }
}

fn normalize(mut probs: Vec<f64>) -> Result<Vec<f64>, DegreeError> {
    let total: f64 = probs.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(DegreeError::InvalidSpec("distribution has no mass".into()));
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Dirac { p } => write!(f, "dirac:{p}"),
            DistributionSpec::Poisson { lambda, .. } => write!(f, "poisson:{lambda}"),
            DistributionSpec::Pmf { probs } => {
                f.write_str("pmf:")?;
                for (i, p) in probs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `dirac:<p>`, `poisson:<lambda>` or `pmf:<p0>,<p1>,...`.
impl FromStr for DistributionSpec {
    type Err = DegreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| DegreeError::InvalidSpec(alloc::format!("{msg}: {s:?}"));
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| bad("expected <kind>:<parameter>"))?;
        let spec = match kind.trim() {
            "dirac" => DistributionSpec::Dirac {
                p: arg.trim().parse().map_err(|_| bad("bad dirac degree"))?,
            },
            "poisson" => DistributionSpec::Poisson {
                lambda: arg.trim().parse().map_err(|_| bad("bad poisson mean"))?,
                cap: None,
            },
            "pmf" => DistributionSpec::Pmf {
                probs: arg
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("bad pmf entry"))?,
            },
            _ => return Err(bad("unknown distribution kind")),
        };
        spec.probabilities()?;
        Ok(spec)
    }
}

/// Inversion sampler over a finite pmf.
#[derive(Debug, Clone)]
pub struct DegreeSampler {
    cdf: Vec<f64>,
    min_degree: u32,
    max_degree: u32,
}

impl DegreeSampler {
    pub fn new(probs: &[f64]) -> Result<Self, DegreeError> {
        let support = || probs.iter().enumerate().filter(|(_, p)| **p > 0.0);
        let min_degree = support()
            .next()
            .map(|(k, _)| k as u32)
            .ok_or_else(|| DegreeError::InvalidSpec("distribution has no mass".into()))?;
        let max_degree = support()
            .next_back()
            .map(|(k, _)| k as u32)
            .unwrap_or(min_degree);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs[..=max_degree as usize]
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Rounding must never leave a sliver above the last support point.
        *cdf.last_mut().unwrap() = f64::INFINITY;
        Ok(Self {
            cdf,
            min_degree,
            max_degree,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|c| *c <= u) as u32
    }

    pub fn min_degree(&self) -> u32 {
        self.min_degree
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }
}

/// Degree sequences of the two sides; node `i` of each side has degree `plus[i]` / `minus[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSample {
    pub plus: Vec<u32>,
    pub minus: Vec<u32>,
}

impl DegreeSample {
    pub fn new(plus: Vec<u32>, minus: Vec<u32>) -> Result<Self, DegreeError> {
        if plus.len() != minus.len() {
            return Err(DegreeError::LengthMismatch {
                plus: plus.len(),
                minus: minus.len(),
            });
        }
        Ok(Self { plus, minus })
    }

    /// Both sides with the same degree `p`.
    pub fn regular(n: usize, p: u32) -> Self {
        Self {
            plus: alloc::vec![p; n],
            minus: alloc::vec![p; n],
        }
    }

    pub fn n(&self) -> usize {
        self.plus.len()
    }

    pub fn plus_total(&self) -> u64 {
        self.plus.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn minus_total(&self) -> u64 {
        self.minus.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.plus
            .iter()
            .chain(&self.minus)
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Initial measures `sum_i delta_{d(i)}` of both sides.
    pub fn measures(&self) -> (PointMeasure, PointMeasure) {
        let d = self.max_degree() as usize;
        let mut plus = PointMeasure::zeros(d);
        let mut minus = PointMeasure::zeros(d);
        for &k in &self.plus {
            plus.add_atom(k as usize);
        }
        for &k in &self.minus {
            minus.add_atom(k as usize);
        }
        (plus, minus)
    }
}

/// Draws `n` i.i.d. degrees per side, conditioned on equal totals.
///
/// The plus sample is drawn once; the whole minus sample is redrawn until the
/// totals agree, up to `max_attempts` times.
pub fn sample_conditioned<R: Rng + ?Sized>(
    xi_plus: &DistributionSpec,
    xi_minus: &DistributionSpec,
    n: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<DegreeSample, DegreeError> {
    if n == 0 {
        return Err(DegreeError::InvalidSpec("n must be at least 1".into()));
    }
    let plus_sampler = xi_plus.sampler()?;
    let minus_sampler = xi_minus.sampler()?;

    // Totals live in [n * min, n * max]; disjoint ranges can never match.
    let range = |s: &DegreeSampler| {
        (
            n as u64 * u64::from(s.min_degree()),
            n as u64 * u64::from(s.max_degree()),
        )
    };
    let (plo, phi) = range(&plus_sampler);
    let (mlo, mhi) = range(&minus_sampler);
    if phi < mlo || mhi < plo {
        return Err(DegreeError::ConditioningFailed { attempts: 0 });
    }

    let plus: Vec<u32> = (0..n).map(|_| plus_sampler.sample(rng)).collect();
    let target: u64 = plus.iter().map(|&d| u64::from(d)).sum();
    let mut minus = alloc::vec![0u32; n];
    for _ in 0..max_attempts {
        let mut total = 0u64;
        for slot in minus.iter_mut() {
            *slot = minus_sampler.sample(rng);
            total += u64::from(*slot);
        }
        if total == target {
            return Ok(DegreeSample { plus, minus });
        }
    }
    Err(DegreeError::ConditioningFailed {
        attempts: max_attempts,
    })
}

/// Realizability of a pair of degree sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graphicality {
    /// Equal totals: a bipartite multigraph exists.
    pub multigraph_ok: bool,
    /// Gale-Ryser holds: a simple bipartite graph exists.
    pub simple_ok: bool,
}

pub fn graphical_check(sample: &DegreeSample) -> Graphicality {
    let multigraph_ok = sample.plus_total() == sample.minus_total();
    let simple_ok = multigraph_ok && gale_ryser(&sample.plus, &sample.minus);
    Graphicality {
        multigraph_ok,
        simple_ok,
    }
}

/// For `a` sorted decreasingly: `sum_{i<=k} a_i <= sum_j min(b_j, k)` for every k.
/// Assumes equal totals.
fn gale_ryser(a: &[u32], b: &[u32]) -> bool {
    let mut a = a.to_vec();
    a.sort_unstable_by(|x, y| y.cmp(x));
    let max_b = b.iter().copied().max().unwrap_or(0) as usize;
    // hist[d] = #{j : b_j = d}
    let mut hist = alloc::vec![0u64; max_b + 1];
    for &d in b {
        hist[d as usize] += 1;
    }
    // rhs(k) = sum_{b_j < k} b_j + k * #{b_j >= k}
    let mut count_ge = b.len() as u64;
    let mut sum_lt = 0u64;
    let mut lhs = 0u64;
    for (i, &ai) in a.iter().enumerate() {
        let k = i + 1;
        if k - 1 <= max_b {
            count_ge -= hist[k - 1];
            sum_lt += (k as u64 - 1) * hist[k - 1];
        }
        lhs += u64::from(ai);
        let rhs = sum_lt + k as u64 * count_ge;
        if lhs > rhs {
            return false;
        }
    }
    true
}
