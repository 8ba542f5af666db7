//! Deterministic large-graph limit of the joint construction.
//!
//! The state is a pair of densities over degrees `0..=D`: the undetermined
//! plus and minus nodes per unit of `n`, counted by availability, at scaled
//! time `s = t / n`. Each point mass evolves by
//!
//! ```text
//! d plus(j)/ds  = -plus(j)/m + (F/m) * ((j+1) plus(j+1) - j plus(j)) / Ep
//! d minus(j)/ds = -G(j)/m    + (Ep/m) * ((j+1) minus(j+1) - j minus(j)) / Em
//! ```
//!
//! where `m` is the plus mass, `Ep` and `Em` the first moments, and `q_k` the
//! law of the availability of the match chosen by a plus node with `k` open
//! half-edges. `F = sum_k plus(k) E_{q_k}[a - 1]` is the flow of half-edges
//! the match closes on the plus side and `G(j) = sum_k plus(k) q_k(j + 1)` the
//! rate at which matches leave availability `j`.
//!
//! Because `m = 1 - s` vanishes at `s = 1`, [`integrate`] runs fixed-step RK4
//! up to `s = 1 - epsilon` and then finishes in logarithmic time
//! `u = -ln(1 - s)`, where the same field multiplied by `m` is smooth. A step
//! is split into equal substeps only when the decay rate of some mass, which
//! grows like `D / m`, would leave the stable region of RK4.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::degrees::{DegreeError, DistributionSpec};

/// Moments at or below this value are treated as zero.
pub const DEGENERACY_FLOOR: f64 = 1e-12;
pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Remaining plus mass at which the logarithmic-time phase stops.
pub const CLOSING_MASS: f64 = 1e-10;
/// Step in logarithmic time used by the closing phase.
pub const CLOSING_STEP: f64 = 0.01;
const TRAJECTORY_SPACING: f64 = 1e-3;
const MAX_STEP_CHANGE: f64 = 0.5;
/// Largest `rate * dt` per RK4 step; the method is stable up to about 2.78.
const STABLE_DECAY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HydroError {
    #[error("degenerate measure: {moment} = {value:e} is below the floor")]
    DegenerateMeasure { moment: &'static str, value: f64 },
    #[error("step too large: a mass moved by {change} at s = {s}")]
    StepTooLarge { s: f64, change: f64 },
    #[error("invalid settings: {0}")]
    InvalidSettings(&'static str),
    #[error(
        "initial state must start at s = 0 with unit mass on both sides (got {plus} and {minus})"
    )]
    NotNormalized { plus: f64, minus: f64 },
    #[error("non-finite value in the state at s = {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Degrees(#[from] DegreeError),
}

/// Plus and minus densities over `0..=D` at time `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroState {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub s: f64,
}

impl HydroState {
    /// State at `s = 0`; the shorter vector is padded with zeros.
    pub fn new(mut plus: Vec<f64>, mut minus: Vec<f64>) -> Self {
        let len = plus.len().max(minus.len()).max(1);
        plus.resize(len, 0.0);
        minus.resize(len, 0.0);
        Self {
            plus,
            minus,
            s: 0.0,
        }
    }

    /// Initial state with the two degree laws as densities.
    pub fn from_specs(
        plus: &DistributionSpec,
        minus: &DistributionSpec,
    ) -> Result<Self, DegreeError> {
        Ok(Self::new(plus.probabilities()?, minus.probabilities()?))
    }

    /// Largest representable degree `D`.
    pub fn max_degree(&self) -> usize {
        self.plus.len() - 1
    }

    pub fn plus_mass(&self) -> f64 {
        self.plus.iter().sum()
    }

    pub fn minus_mass(&self) -> f64 {
        self.minus.iter().sum()
    }

    pub fn plus_first_moment(&self) -> f64 {
        first_moment(&self.plus)
    }

    pub fn minus_first_moment(&self) -> f64 {
        first_moment(&self.minus)
    }
}

fn first_moment(v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(k, x)| k as f64 * x).sum()
}

/// Law of the availability of the match chosen by a plus node.
pub trait MatchKernel {
    fn name(&self) -> &str;

    /// Writes into `out[a]` the probability that a plus node with `k >= 1`
    /// open half-edges is matched to a minus node of availability `a`, given
    /// the minus density and its first moment `em > 0`. `out` has the length
    /// of `minus` and `out[0]` is always zero.
    fn pmf_into(&self, k: usize, minus: &[f64], em: f64, out: &mut [f64]);

    /// Adds the kernel terms of the field: returns `F` and adds `G` into `g`.
    fn accumulate(
        &self,
        plus: &[f64],
        minus: &[f64],
        em: f64,
        g: &mut [f64],
        scratch: &mut Vec<f64>,
    ) -> f64 {
        scratch.clear();
        scratch.resize(minus.len(), 0.0);
        let mut flow = 0.0;
        for (k, &w) in plus.iter().enumerate().skip(1) {
            if w == 0.0 {
                continue;
            }
            self.pmf_into(k, minus, em, scratch);
            for a in 1..scratch.len() {
                flow += w * (a as f64 - 1.0) * scratch[a];
                g[a - 1] += w * scratch[a];
            }
        }
        flow
    }
}

/// The two kernels derived for the built-in criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// Size-biased availability, whatever `k`.
    Greedy,
    /// Minimum of `k` independent size-biased availabilities.
    MinRes,
}

impl KernelKind {
    /// `R[a] = sum_{x >= a} x minus(x) / em`, with `R[D + 1] = 0`.
    fn tail_ratios(minus: &[f64], em: f64, out: &mut Vec<f64>) {
        out.clear();
        out.resize(minus.len() + 1, 0.0);
        let mut acc = 0.0;
        for a in (1..minus.len()).rev() {
            acc += a as f64 * minus[a];
            out[a] = acc / em;
        }
        out[0] = out[1];
    }
}

impl MatchKernel for KernelKind {
    fn name(&self) -> &str {
        match self {
            KernelKind::Greedy => "greedy",
            KernelKind::MinRes => "minres",
        }
    }

    fn pmf_into(&self, k: usize, minus: &[f64], em: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        match self {
            KernelKind::Greedy => {
                for a in 1..minus.len() {
                    out[a] = a as f64 * minus[a] / em;
                }
            }
            KernelKind::MinRes => {
                let mut ratios = Vec::new();
                Self::tail_ratios(minus, em, &mut ratios);
                let pow = |r: f64| (0..k).fold(1.0, |acc, _| acc * r);
                for a in 1..minus.len() {
                    out[a] = pow(ratios[a]) - pow(ratios[a + 1]);
                }
            }
        }
    }

    fn accumulate(
        &self,
        plus: &[f64],
        minus: &[f64],
        em: f64,
        g: &mut [f64],
        scratch: &mut Vec<f64>,
    ) -> f64 {
        match self {
            KernelKind::Greedy => {
                let active: f64 = plus.iter().skip(1).sum();
                let mut flow = 0.0;
                for a in 1..minus.len() {
                    let q = a as f64 * minus[a] / em;
                    flow += (a as f64 - 1.0) * q;
                    g[a - 1] += active * q;
                }
                active * flow
            }
            KernelKind::MinRes => {
                // Powers R[a]^k for increasing k, one multiplication each.
                Self::tail_ratios(minus, em, scratch);
                let ratios = scratch.clone();
                let powers = scratch;
                let mut flow = 0.0;
                for (k, &w) in plus.iter().enumerate().skip(1) {
                    if k > 1 {
                        for (p, r) in powers.iter_mut().zip(&ratios) {
                            *p *= r;
                        }
                    }
                    if w == 0.0 {
                        continue;
                    }
                    for a in 1..minus.len() {
                        let q = powers[a] - powers[a + 1];
                        flow += w * (a as f64 - 1.0) * q;
                        g[a - 1] += w * q;
                    }
                }
                flow
            }
        }
    }
}

impl core::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for KernelKind {
    type Err = crate::matching::MatchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<crate::matching::Criterion>()? {
            crate::matching::Criterion::Greedy => Ok(KernelKind::Greedy),
            _ => Ok(KernelKind::MinRes),
        }
    }
}

/// Availability law of the match of a plus node with `k` open half-edges.
///
/// Returns the all-zero vector for `k = 0`, which has no match.
pub fn kernel_pmf<K: MatchKernel + ?Sized>(
    kernel: &K,
    k: usize,
    minus: &[f64],
) -> Result<Vec<f64>, HydroError> {
    let em = first_moment(minus);
    if em <= DEGENERACY_FLOOR {
        return Err(HydroError::DegenerateMeasure {
            moment: "minus first moment",
            value: em,
        });
    }
    let mut out = alloc::vec![0.0; minus.len()];
    if k > 0 {
        kernel.pmf_into(k, minus, em, &mut out);
    }
    Ok(out)
}

/// Scratch buffers reused across field evaluations.
#[derive(Debug, Default, Clone)]
struct Workspace {
    g: Vec<f64>,
    scratch: Vec<f64>,
}

/// Writes `m` times the field into `dplus`/`dminus` and returns the fastest
/// decay rate of a single mass under it.
///
/// Exhausted half-edges on either side switch off the terms that would divide
/// by them instead of failing; [`rhs`] performs the strict checks.
fn scaled_field<K: MatchKernel + ?Sized>(
    plus: &[f64],
    minus: &[f64],
    kernel: &K,
    ws: &mut Workspace,
    dplus: &mut [f64],
    dminus: &mut [f64],
) -> f64 {
    let d = plus.len();
    let m: f64 = plus.iter().sum();
    let ep = first_moment(plus);
    let em = first_moment(minus);
    ws.g.clear();
    ws.g.resize(d, 0.0);
    let flow = if em > DEGENERACY_FLOOR && ep > DEGENERACY_FLOOR {
        kernel.accumulate(plus, minus, em, &mut ws.g, &mut ws.scratch)
    } else {
        0.0
    };
    let at = |v: &[f64], j: usize| v.get(j).copied().unwrap_or(0.0);
    for j in 0..d {
        let shift_plus = (j + 1) as f64 * at(plus, j + 1) - j as f64 * plus[j];
        let shift_minus = (j + 1) as f64 * at(minus, j + 1) - j as f64 * minus[j];
        dplus[j] = -plus[j]
            + if ep > DEGENERACY_FLOOR {
                flow * shift_plus / ep
            } else {
                0.0
            };
        dminus[j] = -ws.g[j]
            + if em > DEGENERACY_FLOOR && m > DEGENERACY_FLOOR {
                ep * shift_minus / em
            } else {
                0.0
            };
    }
    let top = (0..d)
        .rev()
        .find(|&j| plus[j] > 0.0 || minus[j] > 0.0)
        .unwrap_or(0) as f64;
    let plus_rate = if ep > DEGENERACY_FLOOR {
        flow / ep
    } else {
        0.0
    };
    let minus_rate = if em > DEGENERACY_FLOOR { ep / em } else { 0.0 };
    1.0 + top * plus_rate.max(minus_rate)
}

/// Time derivative of both densities at `state`.
pub fn rhs<K: MatchKernel + ?Sized>(
    state: &HydroState,
    kernel: &K,
) -> Result<(Vec<f64>, Vec<f64>), HydroError> {
    let m = state.plus_mass();
    for (moment, value) in [
        ("plus mass", m),
        ("plus first moment", state.plus_first_moment()),
        ("minus first moment", state.minus_first_moment()),
    ] {
        if value.is_nan() || value <= DEGENERACY_FLOOR {
            return Err(HydroError::DegenerateMeasure { moment, value });
        }
    }
    let d = state.plus.len();
    let (mut dplus, mut dminus) = (alloc::vec![0.0; d], alloc::vec![0.0; d]);
    scaled_field(
        &state.plus,
        &state.minus,
        kernel,
        &mut Workspace::default(),
        &mut dplus,
        &mut dminus,
    );
    for x in dplus.iter_mut().chain(dminus.iter_mut()) {
        *x /= m;
    }
    Ok((dplus, dminus))
}

/// Step size and stopping distance for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSettings {
    pub h: f64,
    pub epsilon: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            h: DEFAULT_STEP,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl OdeSettings {
    pub fn validate(&self) -> Result<(), HydroError> {
        if !(self.h > 0.0 && self.h <= 0.01) {
            return Err(HydroError::InvalidSettings("h must lie in (0, 0.01]"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.05) {
            return Err(HydroError::InvalidSettings("epsilon must lie in (0, 0.05]"));
        }
        Ok(())
    }
}

/// Output of [`integrate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Integration {
    /// States every `max(h, 1e-3)` in `s`, the state at `1 - epsilon`, and
    /// the terminal state.
    pub trajectory: Vec<HydroState>,
    /// State at `s = 1 - epsilon`.
    pub cutoff: HydroState,
    /// State once the plus mass has fallen to [`CLOSING_MASS`].
    pub terminal: HydroState,
}

impl Integration {
    /// Estimated matching coverage, read off the terminal state.
    pub fn coverage_estimate(&self) -> f64 {
        coverage_estimate(&self.terminal)
    }

    /// Coverage read off at `s = 1 - epsilon`, without the closing phase.
    pub fn cutoff_coverage(&self) -> f64 {
        coverage_estimate(&self.cutoff)
    }

    /// Largest `|plus mass - (1 - s)|` along the trajectory.
    pub fn mass_identity_residual(&self) -> f64 {
        self.trajectory
            .iter()
            .map(|st| (st.plus_mass() - (1.0 - st.s)).abs())
            .fold(0.0, f64::max)
    }
}

/// `1 - minus(0)`, clamped to `[0, 1]`.
pub fn coverage_estimate(state: &HydroState) -> f64 {
    (1.0 - state.minus.first().copied().unwrap_or(0.0)).clamp(0.0, 1.0)
}

struct Stepper<'k, K: ?Sized> {
    kernel: &'k K,
    ws: Workspace,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'k, K: MatchKernel + ?Sized> Stepper<'k, K> {
    fn new(kernel: &'k K, len: usize) -> Self {
        let z = alloc::vec![0.0; 2 * len];
        Self {
            kernel,
            ws: Workspace::default(),
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }

    /// Field on the stacked `[plus, minus]` vector, divided by the plus
    /// mass unless `log_time` is set. Returns the fastest decay rate.
    fn field(kernel: &K, ws: &mut Workspace, y: &[f64], out: &mut [f64], log_time: bool) -> f64 {
        let d = y.len() / 2;
        let (plus, minus) = y.split_at(d);
        let (dp, dm) = out.split_at_mut(d);
        let rate = scaled_field(plus, minus, kernel, ws, dp, dm);
        if log_time {
            return rate;
        }
        let m: f64 = plus.iter().sum();
        for x in out.iter_mut() {
            *x /= m;
        }
        rate / m
    }

    /// Advances by `dt`, split into as many equal RK4 steps as needed to keep
    /// every decaying mode inside the stable region. Returns the largest
    /// change of a single mass.
    fn advance(&mut self, y: &mut [f64], dt: f64, log_time: bool) -> f64 {
        let rate = Self::field(self.kernel, &mut self.ws, y, &mut self.k[0], log_time);
        let substeps = libm::ceil(dt * rate / STABLE_DECAY).max(1.0) as usize;
        let start = y.to_vec();
        for _ in 0..substeps {
            self.step(y, dt / substeps as f64, log_time);
        }
        y.iter()
            .zip(&start)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// One classical RK4 step of size `dt`, followed by clipping at zero.
    fn step(&mut self, y: &mut [f64], dt: f64, log_time: bool) {
        let Self { kernel, ws, k, tmp } = self;
        let [k1, k2, k3, k4] = k;
        Self::field(kernel, ws, y, k1, log_time);
        for (i, t) in tmp.iter_mut().enumerate() {
            *t = y[i] + 0.5 * dt * k1[i];
        }
        Self::field(kernel, ws, tmp, k2, log_time);
        for (i, t) in tmp.iter_mut().enumerate() {
            *t = y[i] + 0.5 * dt * k2[i];
        }
        Self::field(kernel, ws, tmp, k3, log_time);
        for (i, t) in tmp.iter_mut().enumerate() {
            *t = y[i] + dt * k3[i];
        }
        Self::field(kernel, ws, tmp, k4, log_time);
        for i in 0..y.len() {
            let delta = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            y[i] = (y[i] + delta).max(0.0);
        }
    }
}

fn unstack(y: &[f64], s: f64) -> HydroState {
    let d = y.len() / 2;
    HydroState {
        plus: y[..d].to_vec(),
        minus: y[d..].to_vec(),
        s,
    }
}

/// Integrates the densities from `s = 0` towards `s = 1`.
pub fn integrate<K: MatchKernel + ?Sized>(
    initial: &HydroState,
    kernel: &K,
    settings: &OdeSettings,
) -> Result<Integration, HydroError> {
    settings.validate()?;
    let (pm, mm) = (initial.plus_mass(), initial.minus_mass());
    if initial.s != 0.0 || (pm - 1.0).abs() > 1e-9 || (mm - 1.0).abs() > 1e-9 {
        return Err(HydroError::NotNormalized {
            plus: pm,
            minus: mm,
        });
    }
    if initial
        .plus
        .iter()
        .chain(&initial.minus)
        .any(|x| x.is_nan() || *x < 0.0)
        || initial.plus.len() != initial.minus.len()
    {
        return Err(HydroError::InvalidSettings(
            "densities must be non-negative and of equal length",
        ));
    }
    rhs(initial, kernel)?;

    let OdeSettings { h, epsilon } = *settings;
    let s_end = 1.0 - epsilon;
    let d = initial.plus.len();
    let mut y: Vec<f64> = initial.plus.iter().chain(&initial.minus).copied().collect();
    let mut stepper = Stepper::new(kernel, d);

    let spacing = (libm::round(TRAJECTORY_SPACING.max(h) / h) as usize).max(1);
    let mut trajectory = alloc::vec![initial.clone()];
    let mut s = 0.0;
    let mut i = 0usize;
    while s < s_end {
        i += 1;
        let next = (i as f64 * h).min(s_end);
        let next = if s_end - next < 1e-9 * h { s_end } else { next };
        let change = stepper.advance(&mut y, next - s, false);
        s = next;
        if change > MAX_STEP_CHANGE {
            return Err(HydroError::StepTooLarge { s, change });
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(HydroError::NonFinite(s));
        }
        if i.is_multiple_of(spacing) && s < s_end {
            trajectory.push(unstack(&y, s));
        }
    }
    let cutoff = unstack(&y, s_end);
    trajectory.push(cutoff.clone());

    let u_start = -libm::log(epsilon);
    let u_end = -libm::log(CLOSING_MASS);
    let steps = libm::ceil((u_end - u_start) / CLOSING_STEP) as usize;
    let du = (u_end - u_start) / steps as f64;
    for _ in 0..steps {
        stepper.advance(&mut y, du, true);
        if y.iter().any(|x| !x.is_finite()) {
            return Err(HydroError::NonFinite(1.0 - CLOSING_MASS));
        }
    }
    let terminal = unstack(&y, 1.0 - CLOSING_MASS);
    trajectory.push(terminal.clone());
    Ok(Integration {
        trajectory,
        cutoff,
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dirac(p: usize) -> Vec<f64> {
        let mut v = vec![0.0; p + 1];
        v[p] = 1.0;
        v
    }

    #[test]
    fn greedy_kernel_on_a_single_atom() {
        let q = kernel_pmf(&KernelKind::Greedy, 4, &dirac(2)).unwrap();
        assert_eq!(q, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn minres_kernel_on_two_atoms() {
        let q = kernel_pmf(&KernelKind::MinRes, 2, &[0.0, 1.0, 1.0]).unwrap();
        assert!((q[1] - 5.0 / 9.0).abs() < 1e-15);
        assert!((q[2] - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn minres_with_one_draw_is_greedy() {
        let minus = [0.1, 0.3, 0.2, 0.25, 0.15];
        let a = kernel_pmf(&KernelKind::MinRes, 1, &minus).unwrap();
        let b = kernel_pmf(&KernelKind::Greedy, 1, &minus).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_needs_minus_half_edges() {
        assert!(matches!(
            kernel_pmf(&KernelKind::Greedy, 1, &[1.0, 0.0]),
            Err(HydroError::DegenerateMeasure { .. })
        ));
    }

    #[test]
    fn fast_accumulate_matches_the_generic_one() {
        struct Slow(KernelKind);
        impl MatchKernel for Slow {
            fn name(&self) -> &str {
                "slow"
            }
            fn pmf_into(&self, k: usize, minus: &[f64], em: f64, out: &mut [f64]) {
                self.0.pmf_into(k, minus, em, out)
            }
        }
        let plus = [0.05, 0.2, 0.1, 0.3, 0.0, 0.35];
        let minus = [0.1, 0.3, 0.2, 0.25, 0.05, 0.1];
        let em = first_moment(&minus);
        for kind in [KernelKind::Greedy, KernelKind::MinRes] {
            let (mut g1, mut g2) = (vec![0.0; 6], vec![0.0; 6]);
            let mut scratch = Vec::new();
            let f1 = kind.accumulate(&plus, &minus, em, &mut g1, &mut scratch);
            let f2 = Slow(kind).accumulate(&plus, &minus, em, &mut g2, &mut scratch);
            assert!((f1 - f2).abs() < 1e-14, "{kind}");
            for (a, b) in g1.iter().zip(&g2) {
                assert!((a - b).abs() < 1e-14, "{kind}");
            }
        }
    }

    #[test]
    fn greedy_field_at_three_regular_start() {
        let state = HydroState::new(dirac(3), dirac(3));
        let (dp, dm) = rhs(&state, &KernelKind::Greedy).unwrap();
        let total: f64 = dp.iter().sum();
        assert!((total + 1.0).abs() < 1e-15);
        // Two half-edges close per match on the plus side besides the
        // explored node: d plus(2)/ds = F * 3 / 3 with F = 2.
        assert!((dp[2] - 2.0).abs() < 1e-15);
        assert!((dp[3] + 3.0).abs() < 1e-15);
        // Minus side: three reached nodes shift 3 -> 2, then the match
        // leaves from 2.
        assert!((dm[2] - 2.0).abs() < 1e-15);
        assert!((dm[3] + 3.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_rejects_degenerate_states() {
        let state = HydroState::new(dirac(0), dirac(0));
        assert!(matches!(
            rhs(&state, &KernelKind::Greedy),
            Err(HydroError::DegenerateMeasure { .. })
        ));
    }

    #[test]
    fn settings_are_checked() {
        let state = HydroState::new(dirac(1), dirac(1));
        let bad = OdeSettings {
            h: 0.02,
            epsilon: 1e-3,
        };
        assert!(matches!(
            integrate(&state, &KernelKind::Greedy, &bad),
            Err(HydroError::InvalidSettings(_))
        ));
        let unnormalized = HydroState::new(vec![0.0, 2.0], dirac(1));
        assert!(matches!(
            integrate(&unnormalized, &KernelKind::Greedy, &OdeSettings::default()),
            Err(HydroError::NotNormalized { .. })
        ));
    }

    #[test]
    fn perfect_pairs_are_fully_matched() {
        let state = HydroState::new(dirac(1), dirac(1));
        let run = integrate(
            &state,
            &KernelKind::MinRes,
            &OdeSettings {
                h: 1e-3,
                epsilon: 1e-3,
            },
        )
        .unwrap();
        assert!(run.coverage_estimate() > 0.999);
    }
}
