//! Guard functions and root bracketing for state events.
//!
//! A guard value `g >= 0` reads as the positive side and `g < 0` as the
//! negative side, matching the `H(0) = 1` convention of the medium switch.
//! A tangency that touches zero from above therefore never produces a
//! crossing.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    /// Negative to positive.
    Rising,
    /// Positive to negative.
    Falling,
    #[default]
    Any,
}

pub type GuardFn<'a> = dyn Fn(f64, &[f64]) -> f64 + 'a;

pub struct EventSpec<'a> {
    pub guard: Box<GuardFn<'a>>,
    pub direction: Direction,
    /// Localization tolerance, s.
    pub tol: f64,
}

impl<'a> EventSpec<'a> {
    pub fn new(guard: impl Fn(f64, &[f64]) -> f64 + 'a, direction: Direction, tol: f64) -> Self {
        Self {
            guard: Box::new(guard),
            direction,
            tol,
        }
    }
}

impl std::fmt::Debug for EventSpec<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventSpec")
            .field("direction", &self.direction)
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

#[inline]
pub(crate) fn positive(g: f64) -> bool {
    g >= 0.0
}

/// Whether moving from side `from` to side `to` is a reportable crossing.
pub(crate) fn fires(direction: Direction, from: bool, to: bool) -> bool {
    match direction {
        Direction::Rising => !from && to,
        Direction::Falling => from && !to,
        Direction::Any => from != to,
    }
}

/// Bracket produced by [`bracket_crossing`]: `lo` lies on the starting side,
/// `hi` on the far side, `hi - lo <= tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
}

/// Shrink a sign-change bracket with the Illinois variant of regula falsi,
/// falling back to bisection when progress stalls.
pub(crate) fn bracket_crossing<G>(mut g: G, lo: f64, hi: f64, g_lo: f64, g_hi: f64, tol: f64) -> Result<Bracket>
where
    G: FnMut(f64) -> Result<f64>,
{
    let side_lo = positive(g_lo);
    if side_lo == positive(g_hi) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let (mut a, mut fa, mut b, mut fb) = (lo, g_lo, hi, g_hi);
    // 1: kept `a` last time, 2: kept `b`
    let mut kept = 0u8;
    let mut width_check = b - a;
    let mut iter = 0usize;
    while b - a > tol && iter < 400 {
        iter += 1;
        let mut c = (a * fb - b * fa) / (fb - fa);
        let bisect = iter.is_multiple_of(3) && (b - a) > 0.5 * width_check;
        if iter.is_multiple_of(3) {
            width_check = b - a;
        }
        if bisect || !c.is_finite() || c <= a || c >= b {
            c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
        }
        let fc = g(c)?;
        if positive(fc) == side_lo {
            a = c;
            fa = fc;
            if kept == 2 {
                fb *= 0.5;
            }
            kept = 2;
        } else {
            b = c;
            fb = fc;
            if kept == 1 {
                fa *= 0.5;
            }
            kept = 1;
        }
    }
    Ok(Bracket { lo: a, hi: b, g_lo: fa, g_hi: fb })
}

/// Locate the time at which `guard` changes side within `[lo, hi]`, to within
/// `tol` seconds. Returns the first time observed on the far side.
pub fn locate_event<G>(lo: f64, hi: f64, mut guard: G, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let g_lo = guard(lo);
    let g_hi = guard(hi);
    Ok(bracket_crossing(|t| Ok(guard(t)), lo, hi, g_lo, g_hi, tol)?.hi)
}
