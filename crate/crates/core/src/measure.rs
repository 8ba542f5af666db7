//! Finite point measures on the non-negative integers.
//!
//! A [`PointMeasure`] stores its masses densely over `0..=D`. Residual degrees
//! only ever decrease in both matching constructions, so the support never
//! grows past the largest initial degree and every update is O(1).

use alloc::vec::Vec;
use core::fmt;
use core::ops::{AddAssign, SubAssign};

use serde::{Deserialize, Serialize};

/// Scalar type usable as the mass of an atom.
///
/// `u64` is used for the discrete chains, `f64` for scaled measures and the
/// hydrodynamic limit.
pub trait Mass:
    Copy + Default + PartialEq + PartialOrd + AddAssign + SubAssign + fmt::Debug
{
    const ZERO: Self;
    const ONE: Self;
    fn to_f64(self) -> f64;
}

impl Mass for u64 {
    const ZERO: Self = 0;
    const ONE: Self = 1;
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Mass for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

/// Test functions evaluated against a measure by [`PointMeasure::moment`].
///
/// The composite variants take an inner function: `XGradient(f)` is
/// `x * (f(x) - f(x - 1))` and `XShift(f)` is `x * f(x - 1)`. Both vanish at
/// `x = 0`, so the inner function is never queried at `-1`.
#[derive(Debug, Clone, Copy)]
pub enum TestFn<'a> {
    One,
    X,
    XSquared,
    /// Indicator of the positive integers.
    Positive,
    /// Indicator of the single point `k`.
    Atom(usize),
    /// `x * 1{x >= a}`.
    XTail(usize),
    XGradient(&'a TestFn<'a>),
    XShift(&'a TestFn<'a>),
}

impl TestFn<'_> {
    pub fn eval(&self, x: usize) -> f64 {
        let xf = x as f64;
        match *self {
            TestFn::One => 1.0,
            TestFn::X => xf,
            TestFn::XSquared => xf * xf,
            TestFn::Positive => f64::from(u8::from(x > 0)),
            TestFn::Atom(k) => f64::from(u8::from(x == k)),
            TestFn::XTail(a) => {
                if x >= a {
                    xf
                } else {
                    0.0
                }
            }
            TestFn::XGradient(inner) => {
                if x == 0 {
                    0.0
                } else {
                    xf * (inner.eval(x) - inner.eval(x - 1))
                }
            }
            TestFn::XShift(inner) => {
                if x == 0 {
                    0.0
                } else {
                    xf * inner.eval(x - 1)
                }
            }
        }
    }
}

/// Errors raised by atom updates.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("no atom to remove at {0}")]
    EmptyAtom(usize),
}

/// Finite measure on `{0, 1, ..., D}` with non-negative masses.
///
/// Equality ignores trailing zero masses: two measures are equal when they
/// put the same mass on every point.
#[derive(Clone, Default, Serialize, Deserialize)]
pub struct PointMeasure<M = u64> {
    masses: Vec<M>,
}

impl<M: Mass> PointMeasure<M> {
    pub fn new() -> Self {
        Self { masses: Vec::new() }
    }

    /// Zero measure with room for atoms `0..=max_point`.
    pub fn zeros(max_point: usize) -> Self {
        Self {
            masses: alloc::vec![M::ZERO; max_point + 1],
        }
    }

    /// Builds a measure from dense masses.
    ///
    /// Panics if any mass is negative or NaN.
    pub fn from_masses(masses: Vec<M>) -> Self {
        assert!(
            masses.iter().all(|m| *m >= M::ZERO),
            "point masses must be non-negative"
        );
        Self { masses }
    }

    pub fn masses(&self) -> &[M] {
        &self.masses
    }

    pub fn into_masses(self) -> Vec<M> {
        self.masses
    }

    /// Mass at `k` (zero outside the stored range).
    #[inline]
    pub fn mass(&self, k: usize) -> M {
        self.masses.get(k).copied().unwrap_or(M::ZERO)
    }

    /// Largest index with room allocated.
    pub fn max_point(&self) -> usize {
        self.masses.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.masses.iter().all(|m| *m == M::ZERO)
    }

    /// `<mu, phi> = sum_k phi(k) mu(k)`.
    pub fn moment(&self, phi: &TestFn<'_>) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, m)| **m != M::ZERO)
            .map(|(k, m)| phi.eval(k) * m.to_f64())
            .sum()
    }

    /// Total mass in the native mass type.
    pub fn total(&self) -> M {
        let mut acc = M::ZERO;
        for m in &self.masses {
            acc += *m;
        }
        acc
    }

    #[inline]
    pub fn add_atom(&mut self, k: usize) {
        if k >= self.masses.len() {
            self.masses.resize(k + 1, M::ZERO);
        }
        self.masses[k] += M::ONE;
    }

    #[inline]
    pub fn remove_atom(&mut self, k: usize) -> Result<(), MeasureError> {
        match self.masses.get_mut(k) {
            Some(m) if *m >= M::ONE => {
                *m -= M::ONE;
                Ok(())
            }
            _ => Err(MeasureError::EmptyAtom(k)),
        }
    }

    /// Moves one atom from `from` to `to` (the `delta_to - delta_from` update).
    #[inline]
    pub fn move_atom(&mut self, from: usize, to: usize) -> Result<(), MeasureError> {
        self.remove_atom(from)?;
        self.add_atom(to);
        Ok(())
    }

    /// Sum of two measures.
    pub fn merged(&self, other: &Self) -> Self {
        let len = self.masses.len().max(other.masses.len());
        let mut masses = alloc::vec![M::ZERO; len];
        for (k, slot) in masses.iter_mut().enumerate() {
            *slot += self.mass(k);
            *slot += other.mass(k);
        }
        Self { masses }
    }

    fn trimmed(&self) -> &[M] {
        let end = self
            .masses
            .iter()
            .rposition(|m| *m != M::ZERO)
            .map_or(0, |i| i + 1);
        &self.masses[..end]
    }
}

impl PointMeasure<u64> {
    /// Counts the values in `points`.
    pub fn from_points<I: IntoIterator<Item = usize>>(points: I) -> Self {
        let mut mu = Self::new();
        for k in points {
            mu.add_atom(k);
        }
        mu
    }

    /// The measure divided by `n`, as real masses.
    pub fn scaled(&self, n: usize) -> PointMeasure<f64> {
        let inv = 1.0 / n as f64;
        PointMeasure {
            masses: self.masses.iter().map(|&m| m as f64 * inv).collect(),
        }
    }
}

impl<M: Mass> PartialEq for PointMeasure<M> {
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl<M: Mass> fmt::Debug for PointMeasure<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, m) in self.masses.iter().enumerate() {
            if *m == M::ZERO {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{:?}d{}", m, k)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
