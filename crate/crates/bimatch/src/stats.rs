//! Summary statistics of replicated runs.

use serde::{Deserialize, Serialize};

/// Mean, sample standard deviation (divisor `N - 1`) and range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Stats {
    pub fn of(samples: &[f64]) -> Self {
        let mut acc = Accumulator::default();
        samples.iter().for_each(|&x| acc.push(x));
        acc.stats()
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.std_dev / (self.count as f64).sqrt()
    }
}

/// Streaming mean and variance (Welford), mergeable across workers.
#[derive(Debug, Clone, Copy)]
pub struct Accumulator {
    count: usize,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / total;
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn stats(&self) -> Stats {
        let std_dev = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).max(0.0).sqrt()
        } else {
            0.0
        };
        Stats {
            mean: if self.count > 0 { self.mean } else { f64::NAN },
            std_dev,
            min: self.min,
            max: self.max,
            count: self.count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let s = Stats::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max, s.count), (1.0, 4.0, 4));
    }

    #[test]
    fn single_sample_has_zero_spread() {
        let s = Stats::of(&[0.7]);
        assert_eq!(s.std_dev, 0.0);
        assert_eq!(s.mean, 0.7);
    }

    #[test]
    fn merging_halves_matches_one_pass() {
        let xs: Vec<f64> = (0..101).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let (mut a, mut b) = (Accumulator::default(), Accumulator::default());
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let whole = Stats::of(&xs);
        let merged = a.stats();
        assert!((whole.mean - merged.mean).abs() < 1e-12);
        assert!((whole.std_dev - merged.std_dev).abs() < 1e-12);
    }
}
