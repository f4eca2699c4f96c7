//! Deterministic composite-trapezoid quadrature on uniform grids.
//!
//! Every spectral integral in the crate (cross-correlations, rate bounds,
//! SINR gain) goes through this module so that results are reproducible
//! bit-for-bit for a given number of intervals.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pulse::{FtnConfig, PulseParams};

/// Default number of trapezoid intervals across a symmetric interval.
pub const DEFAULT_INTERVALS: usize = 8192;

/// Quadrature resolution: the number of trapezoid intervals spanning a full
/// symmetric interval `[-a, a]`. Even-symmetric integrands use half of them
/// on `[0, a]`, so both forms sample the same nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    intervals: usize,
}

impl Quadrature {
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "quadrature_points",
                value: intervals as f64,
                reason: "must be an even number >= 2",
            });
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn half_intervals(&self) -> usize {
        self.intervals / 2
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
        }
    }
}

/// Symmetry the caller declares for its integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// `f(-x) == f(x)`: integrate over the positive half and double.
    Even,
}

/// Composite trapezoid rule on `n` uniform intervals of `[a, b]`.
///
/// Fails on the first node where the integrand is not finite.
pub fn trapezoid<F>(mut f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(n >= 1);
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let x = if i == n { b } else { a + i as f64 * h };
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::NonFiniteIntegrand { frequency: x });
        }
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * y;
    }
    Ok(sum * h)
}

/// Integral over the symmetric interval `[-edge, edge]`.
pub fn symmetric_integral<F>(f: F, edge: f64, quad: Quadrature, symmetry: Symmetry) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    match symmetry {
        Symmetry::Even => Ok(2.0 * trapezoid(f, 0.0, edge, quad.half_intervals())?),
        Symmetry::None => trapezoid(f, -edge, edge, quad.intervals()),
    }
}

/// Integral over the symbol-rate band `[-1/(2 zeta T), 1/(2 zeta T)]`.
///
/// The band is cut at every frequency where an aliased copy of the pulse
/// spectrum changes branch (see [`crate::pulse::spectral_breakpoints`]) and
/// each piece gets a share of the intervals proportional to its length.
/// Interior cut points are sampled just inside each piece, so an integrand
/// that jumps there (the `beta = 0` brick wall with `zeta < 1`) is
/// integrated from its one-sided limits.
pub fn band_integral<F>(
    mut f: F,
    ftn: FtnConfig,
    pulse: &PulseParams,
    quad: Quadrature,
    symmetry: Symmetry,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let edge = ftn.band_edge(pulse);
    let cuts = crate::pulse::spectral_breakpoints(ftn, pulse);
    match symmetry {
        Symmetry::Even => {
            let mut knots = Vec::with_capacity(cuts.len() + 2);
            knots.push(0.0);
            knots.extend_from_slice(&cuts);
            knots.push(edge);
            Ok(2.0 * piecewise_trapezoid(&mut f, &knots, quad.half_intervals())?)
        }
        Symmetry::None => {
            let mut knots = Vec::with_capacity(2 * cuts.len() + 3);
            knots.push(-edge);
            knots.extend(cuts.iter().rev().map(|c| -c));
            knots.push(0.0);
            knots.extend_from_slice(&cuts);
            knots.push(edge);
            piecewise_trapezoid(&mut f, &knots, quad.intervals())
        }
    }
}

/// Composite trapezoid over consecutive pieces `[knots[i], knots[i+1]]`
/// sharing `total` intervals. The first and last knots are sampled exactly;
/// interior knots are approached from inside each piece.
fn piecewise_trapezoid<F>(f: &mut F, knots: &[f64], total: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let span = knots[knots.len() - 1] - knots[0];
    let last = knots.len() - 2;
    let mut sum = 0.0;
    for i in 0..=last {
        let (a, b) = (knots[i], knots[i + 1]);
        let len = b - a;
        let n = ((total as f64 * len / span) as usize).max(2);
        let nudge = INTERIOR_NUDGE * len;
        let lo = if i == 0 { a } else { a + nudge };
        let hi = if i == last { b } else { b - nudge };
        let h = len / n as f64;
        let mut piece = 0.0;
        for j in 0..=n {
            let x = if j == 0 {
                lo
            } else if j == n {
                hi
            } else {
                a + j as f64 * h
            };
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::NonFiniteIntegrand { frequency: x });
            }
            piece += if j == 0 || j == n { 0.5 * y } else { y };
        }
        sum += piece * h;
    }
    Ok(sum)
}

/// Relative inset used when sampling an interior cut point.
const INTERIOR_NUDGE: f64 = 1e-13;
