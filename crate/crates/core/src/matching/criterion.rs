use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MatchError;

/// Deterministic local rule: given the residual degrees of the candidates in
/// a uniformly shuffled order, returns the 0-based position of the match.
pub type CustomRule = fn(&[u32]) -> usize;

/// A local matching criterion.
#[derive(Clone, Copy)]
pub enum Criterion {
    /// Uniformly random neighbour.
    Greedy,
    /// Uniformly random neighbour among those of minimal residual degree.
    MinRes,
    Custom {
        name: &'static str,
        rule: CustomRule,
    },
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Greedy => "greedy",
            Criterion::MinRes => "minres",
            Criterion::Custom { name, .. } => name,
        }
    }

    /// Picks the match among candidates with residual degrees `degrees`.
    ///
    /// The result is the index of the chosen candidate, distributed as
    /// `sigma(rule(d_sigma(1), ..., d_sigma(k)))` for a uniform permutation
    /// `sigma`. GREEDY and MINRES only draw the part of `sigma` they use.
    pub fn select<R: Rng + ?Sized>(
        &self,
        degrees: &[u32],
        rng: &mut R,
    ) -> Result<usize, MatchError> {
        let k = degrees.len();
        if k == 0 {
            return Err(MatchError::EmptyNeighborhood);
        }
        match self {
            Criterion::Greedy => Ok(rng.gen_range(0..k)),
            Criterion::MinRes => {
                let min = *degrees.iter().min().unwrap();
                let ties = degrees.iter().filter(|&&d| d == min).count();
                let pick = if ties == 1 { 0 } else { rng.gen_range(0..ties) };
                Ok(degrees
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d == min)
                    .nth(pick)
                    .unwrap()
                    .0)
            }
            Criterion::Custom { rule, .. } => {
                let mut sigma: Vec<usize> = (0..k).collect();
                sigma.shuffle(rng);
                let permuted: Vec<u32> = sigma.iter().map(|&i| degrees[i]).collect();
                let j = rule(&permuted);
                if j >= k {
                    return Err(MatchError::InvalidRuleOutput { index: j, len: k });
                }
                Ok(sigma[j])
            }
        }
    }

    /// Whether some draw of the permutation makes this criterion pick
    /// `choice`. Custom rules are not inverted and always admit any candidate.
    pub fn admits(&self, degrees: &[u32], choice: usize) -> bool {
        match self {
            Criterion::Greedy | Criterion::Custom { .. } => choice < degrees.len(),
            Criterion::MinRes => degrees
                .get(choice)
                .is_some_and(|d| Some(d) == degrees.iter().min()),
        }
    }
}

/// Free-function form of [`Criterion::select`].
pub fn select_match<R: Rng + ?Sized>(
    criterion: &Criterion,
    neighbor_degrees: &[u32],
    rng: &mut R,
) -> Result<usize, MatchError> {
    criterion.select(neighbor_degrees, rng)
}

impl fmt::Debug for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for Criterion {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl FromStr for Criterion {
    type Err = MatchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(Criterion::Greedy),
            "minres" => Ok(Criterion::MinRes),
            _ => Err(MatchError::UnknownCriterion(s.into())),
        }
    }
}

impl Serialize for Criterion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Criterion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = alloc::string::String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const DRAWS: usize = 100_000;

    fn histogram(c: Criterion, degrees: &[u32], seed: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0; degrees.len()];
        for _ in 0..DRAWS {
            counts[c.select(degrees, &mut rng).unwrap()] += 1;
        }
        counts
    }

    /// Pearson statistic against the uniform law on the non-zero cells.
    fn chi_square_uniform(counts: &[usize]) -> f64 {
        let total: usize = counts.iter().sum();
        let expected = total as f64 / counts.len() as f64;
        counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    }

    // Upper 0.1% points of chi-square with 1 and 2 degrees of freedom.
    const CHI2_1DF_999: f64 = 10.828;
    const CHI2_2DF_999: f64 = 13.816;

    #[test]
    fn greedy_is_uniform() {
        let counts = histogram(Criterion::Greedy, &[3, 1, 2], 7);
        assert!(chi_square_uniform(&counts) < CHI2_2DF_999, "{counts:?}");
    }

    #[test]
    fn minres_picks_the_unique_minimum() {
        let counts = histogram(Criterion::MinRes, &[3, 1, 2], 7);
        assert_eq!(counts, vec![0, DRAWS, 0]);
    }

    #[test]
    fn minres_breaks_ties_uniformly() {
        let counts = histogram(Criterion::MinRes, &[1, 1], 8);
        assert!(chi_square_uniform(&counts) < CHI2_1DF_999, "{counts:?}");
        let counts = histogram(Criterion::MinRes, &[2, 4, 2, 2], 9);
        assert_eq!(counts[1], 0);
        let tied = [counts[0], counts[2], counts[3]];
        assert!(chi_square_uniform(&tied) < CHI2_2DF_999, "{counts:?}");
    }

    #[test]
    fn custom_rule_composes_with_a_uniform_permutation() {
        // "first entry of maximal degree" must always land on a maximum.
        fn first_max(d: &[u32]) -> usize {
            let m = *d.iter().max().unwrap();
            d.iter().position(|&x| x == m).unwrap()
        }
        let c = Criterion::Custom {
            name: "maxres",
            rule: first_max,
        };
        let counts = histogram(c, &[5, 1, 5], 3);
        assert_eq!(counts[1], 0);
        assert!(chi_square_uniform(&[counts[0], counts[2]]) < CHI2_1DF_999);
    }

    #[test]
    fn empty_neighbourhood_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for c in [Criterion::Greedy, Criterion::MinRes] {
            assert_eq!(c.select(&[], &mut rng), Err(MatchError::EmptyNeighborhood));
        }
    }

    #[test]
    fn broken_custom_rule_is_reported() {
        let c = Criterion::Custom {
            name: "broken",
            rule: |d| d.len(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            c.select(&[1, 2], &mut rng),
            Err(MatchError::InvalidRuleOutput { index: 2, len: 2 })
        );
    }

    #[test]
    fn names_parse_back() {
        for c in [Criterion::Greedy, Criterion::MinRes] {
            assert_eq!(c.name().parse::<Criterion>().unwrap(), c);
        }
        assert!("MINRES".parse::<Criterion>().is_ok());
        assert!("optimal".parse::<Criterion>().is_err());
    }
}
