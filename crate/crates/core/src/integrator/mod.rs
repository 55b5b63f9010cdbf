//! Adaptive Runge-Kutta integration with state-event localization.
//!
//! The default scheme is Dormand-Prince 5(4) with PI step-size control and
//! fourth-order dense output. Classical RK4 at a fixed step is available as
//! a cross-check.
//!
//! When a step carries a guard across zero, the integrator re-steps from the
//! start of the step with shorter sizes until the crossing is bracketed to
//! the event tolerance, accepts the step that ends just before the crossing,
//! and carries the state across the surface with a blended micro-step. The
//! right-hand side may therefore be discontinuous across guard surfaces
//! without any accepted step straddling one.

mod events;
mod tableau;

pub use events::{locate_event, Bracket, Direction, EventSpec, GuardFn};

use crate::error::{Error, Result};
use events::{bracket_crossing, fires, positive};
use tableau::{dopri_step, eval, rk4_step, RhsFn, StepResult};



#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    DormandPrince45,
    /// Classical RK4 at `fixed_step`.
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Default localization tolerance for events, s.
    pub event_tol: f64,
    /// Step size for [`Method::Rk4`].
    pub fixed_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::DormandPrince45,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: 0.05,
            max_steps: 5_000_000,
            event_tol: 1e-6,
            fixed_step: 1e-4,
        }
    }
}

impl IntegratorConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (key, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("h_min", self.h_min),
            ("event_tol", self.event_tol),
            ("fixed_step", self.fixed_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{key} must be finite and > 0 (got {v})"));
            }
        }
        if !(self.h_min <= self.h_init && self.h_init <= self.h_max && self.h_max.is_finite()) {
            out.push(format!(
                "step sizes must satisfy 0 < h_min <= h_init <= h_max (got {}, {}, {})",
                self.h_min, self.h_init, self.h_max
            ));
        }
        if self.max_steps == 0 {
            out.push("max_steps must be > 0".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::IntegratorConfig(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    /// Index into the event list passed to the integrator.
    pub event: usize,
    pub t: f64,
    /// True for a negative-to-positive crossing.
    pub rising: bool,
    /// State just past the crossing, where integration resumed.
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub samples: Vec<Sample>,
    pub events: Vec<EventHit>,
    pub t: f64,
    pub y: Vec<f64>,
    pub stats: Stats,
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
// PI controller exponents for a fifth-order error estimator
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

/// Owns the step-size memory of one integration run, so a run split into
/// consecutive spans keeps its adapted step.
#[derive(Debug, Clone)]
pub struct Integrator {
    config: IntegratorConfig,
    h_next: Option<f64>,
    err_prev: f64,
    pub stats: Stats,
}

struct Located {
    t_lo: f64,
    lo: Option<StepResult>,
    t_hi: f64,
    y_hi: Vec<f64>,
    t_event: f64,
}

impl Integrator {
    pub fn new(config: IntegratorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            h_next: None,
            err_prev: 1e-4,
            stats: Stats::default(),
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    fn step(&self, f: &mut RhsFn<'_>, t: f64, y: &[f64], f0: &[f64], h: f64, evals: &mut usize) -> Result<StepResult> {
        match self.config.method {
            Method::DormandPrince45 => dopri_step(f, t, y, f0, h, evals),
            Method::Rk4 => rk4_step(f, t, y, f0, h, evals),
        }
    }

    fn error_norm(&self, y0: &[f64], r: &StepResult) -> f64 {
        if r.err.is_empty() {
            return 0.0;
        }
        let n = y0.len() as f64;
        let sum: f64 = r
            .err
            .iter()
            .zip(y0.iter().zip(&r.y))
            .map(|(e, (a, b))| {
                let sc = self.config.abs_tol + self.config.rel_tol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum();
        (sum / n).sqrt()
    }

    /// Integrate `y' = f(t, y)` from `t0` to `t_end`, reporting `events` and
    /// the dense-output state at each of `sample_times` inside `[t0, t_end]`.
    pub fn integrate<F>(
        &mut self,
        mut f: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        events: &[EventSpec<'_>],
        sample_times: &[f64],
    ) -> Result<Solution>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        if !(t0.is_finite() && t_end.is_finite()) || t_end < t0 {
            return Err(Error::IntegratorConfig(format!(
                "integration interval [{t0}, {t_end}] is empty or reversed"
            )));
        }
        let f: &mut RhsFn<'_> = &mut f;
        let mut times: Vec<f64> = sample_times
            .iter()
            .copied()
            .filter(|s| *s >= t0 && *s <= t_end)
            .collect();
        times.sort_by(f64::total_cmp);
        let mut next_sample = 0usize;
        let mut samples = Vec::new();
        let mut hits = Vec::new();
        let mut stats = Stats::default();

        let mut t = t0;
        let mut y = y0.to_vec();
        while next_sample < times.len() && times[next_sample] <= t0 {
            samples.push(Sample { t: times[next_sample], y: y.clone() });
            next_sample += 1;
        }
        if t_end == t0 {
            return Ok(Solution { samples, events: hits, t, y, stats });
        }

        let mut f0 = vec![0.0; y.len()];
        eval(f, t, &y, &mut f0, &mut stats.evaluations)?;
        let mut sides: Vec<bool> = events.iter().map(|e| positive((e.guard)(t, &y))).collect();

        let adaptive = self.config.method == Method::DormandPrince45;
        let mut h = if adaptive {
            self.h_next
                .unwrap_or(self.config.h_init)
                .clamp(self.config.h_min, self.config.h_max)
        } else {
            self.config.fixed_step
        };
        let mut steps = 0usize;

        loop {
            let remaining = t_end - t;
            if remaining <= 0.0 {
                break;
            }
            if steps >= self.config.max_steps {
                return Err(Error::MaxSteps { t, max_steps: self.config.max_steps });
            }
            steps += 1;

            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            let trial = self.step(f, t, &y, &f0, h_try, &mut stats.evaluations)?;
            let t_trial = if clipped { t_end } else { t + h_try };

            let crossed: Vec<usize> = events
                .iter()
                .enumerate()
                .filter(|(i, e)| fires(e.direction, sides[*i], positive((e.guard)(t_trial, &trial.y))))
                .map(|(i, _)| i)
                .collect();

            let err = self.error_norm(&y, &trial);
            if crossed.is_empty() {
                if adaptive && err > 1.0 {
                    stats.rejected += 1;
                    h = self.shrink(h_try, err, t)?;
                    continue;
                }
                emit(&mut samples, &times, &mut next_sample, t_trial, |s| trial.dense.eval(s));
                t = t_trial;
                y = trial.y;
                f0 = trial.f1;
                stats.accepted += 1;
                if adaptive {
                    let grown = self.grow(h_try, err);
                    h = if clipped { grown.max(h) } else { grown };
                    h = h.min(self.config.h_max);
                }
                continue;
            }

            let loc = self.localize(f, t, &y, &f0, &trial, t_trial, &crossed, events, &sides, &mut stats.evaluations)?;
            if adaptive {
                if let Some(lo) = &loc.lo {
                    let err_lo = self.error_norm(&y, lo);
                    if err_lo > 1.0 {
                        stats.rejected += 1;
                        h = self.shrink(h_try, err_lo, t)?;
                        continue;
                    }
                }
            }
            if let Some(lo) = &loc.lo {
                emit(&mut samples, &times, &mut next_sample, loc.t_lo, |s| lo.dense.eval(s));
            }
            emit(&mut samples, &times, &mut next_sample, loc.t_hi, |_| loc.y_hi.clone());

            for (i, e) in events.iter().enumerate() {
                let now = positive((e.guard)(loc.t_hi, &loc.y_hi));
                if fires(e.direction, sides[i], now) {
                    hits.push(EventHit { event: i, t: loc.t_event, rising: now, y: loc.y_hi.clone() });
                }
                sides[i] = now;
            }
            t = loc.t_hi;
            y = loc.y_hi;
            eval(f, t, &y, &mut f0, &mut stats.evaluations)?;
            stats.accepted += 1;
        }

        if adaptive {
            self.h_next = Some(h);
        }
        self.stats.accepted += stats.accepted;
        self.stats.rejected += stats.rejected;
        self.stats.evaluations += stats.evaluations;
        Ok(Solution { samples, events: hits, t, y, stats })
    }

    fn shrink(&self, h: f64, err: f64, t: f64) -> Result<f64> {
        let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
        let h_new = h * fac;
        if h_new < self.config.h_min {
            return Err(Error::StepUnderflow { t, h: h_new });
        }
        Ok(h_new)
    }

    fn grow(&mut self, h: f64, err: f64) -> f64 {
        let err = err.max(1e-10);
        let fac = (SAFETY * err.powf(-ALPHA) * self.err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX);
        self.err_prev = err.max(1e-4);
        h * fac
    }

    #[allow(clippy::too_many_arguments)]
    fn localize(
        &self,
        f: &mut RhsFn<'_>,
        t: f64,
        y: &[f64],
        f0: &[f64],
        trial: &StepResult,
        t_trial: f64,
        crossed: &[usize],
        events: &[EventSpec<'_>],
        sides: &[bool],
        evals: &mut usize,
    ) -> Result<Located> {
        let g_at = |e: usize, tt: f64, yy: &[f64]| (events[e].guard)(tt, yy);
        let crossed_at = |tt: f64, yy: &[f64]| {
            events
                .iter()
                .enumerate()
                .find(|(i, e)| fires(e.direction, sides[*i], positive((e.guard)(tt, yy))))
                .map(|(i, _)| i)
        };

        // earliest crossing by linear interpolation of guard values first
        let estimate = |e: usize| {
            let g0 = g_at(e, t, y);
            let g1 = g_at(e, t_trial, &trial.y);
            if g0 == g1 {
                0.0
            } else {
                g0 / (g0 - g1)
            }
        };
        let mut cand = *crossed
            .iter()
            .min_by(|a, b| estimate(**a).total_cmp(&estimate(**b)))
            .expect("at least one crossed guard");

        let mut hi_step = trial.clone();
        let mut hi_h = trial.h;
        let mut lo_step: Option<StepResult>;
        let mut lo_h;

        loop {
            let tol = events[cand].tol.min(self.config.event_tol).max(f64::EPSILON * t.abs().max(1.0));
            let g_lo = g_at(cand, t, y);
            let g_hi = g_at(cand, t + hi_h, &hi_step.y);
            let mut last: Vec<(f64, StepResult)> = Vec::new();
            let b = bracket_crossing(
                |hh| {
                    let r = self.step(f, t, y, f0, hh, evals)?;
                    let g = g_at(cand, t + hh, &r.y);
                    last.push((hh, r));
                    Ok(g)
                },
                0.0,
                hi_h,
                g_lo,
                g_hi,
                tol,
            )?;
            let pick = |hh: f64, last: &mut Vec<(f64, StepResult)>| last.iter().rposition(|(x, _)| *x == hh).map(|i| last.swap_remove(i).1);
            if b.hi != hi_h {
                hi_step = pick(b.hi, &mut last).expect("bracket end was evaluated");
                hi_h = b.hi;
            }
            lo_step = if b.lo == 0.0 { None } else { pick(b.lo, &mut last) };
            lo_h = b.lo;

            // another guard may already have crossed before this one
            let (t_lo, y_lo) = match &lo_step {
                Some(r) => (t + lo_h, r.y.as_slice()),
                None => (t, y),
            };
            match crossed_at(t_lo, y_lo) {
                Some(e) if lo_h > 0.0 => {
                    cand = e;
                    hi_step = lo_step.take().expect("lo step exists");
                    hi_h = lo_h;
                }
                _ => break,
            }
        }

        let (t_lo, y_lo, f_lo) = match &lo_step {
            Some(r) => (t + lo_h, r.y.clone(), r.f1.clone()),
            None => (t, y.to_vec(), f0.to_vec()),
        };
        let t_hi = t + hi_h;
        let w = hi_h - lo_h;
        let g_lo = g_at(cand, t_lo, &y_lo);
        let side_lo = positive(g_lo);

        let y_pred: Vec<f64> = y_lo.iter().zip(&f_lo).map(|(a, d)| a + w * d).collect();
        let g_pred = g_at(cand, t_hi, &y_pred);
        let (y_hi, t_event) = if positive(g_pred) == side_lo || w == 0.0 {
            (hi_step.y.clone(), t_lo + 0.5 * w)
        } else {
            let s = (g_lo / (g_lo - g_pred)).clamp(0.0, 1.0);
            let mut f_new = vec![0.0; y.len()];
            eval(f, t_hi, &y_pred, &mut f_new, evals)?;
            let blended: Vec<f64> = (0..y.len())
                .map(|i| y_lo[i] + w * (s * f_lo[i] + (1.0 - s) * f_new[i]))
                .collect();
            let y_hi = if positive(g_at(cand, t_hi, &blended)) == side_lo {
                y_pred
            } else {
                blended
            };
            (y_hi, t_lo + s * w)
        };

        Ok(Located { t_lo, lo: lo_step, t_hi, y_hi, t_event })
    }
}

fn emit(samples: &mut Vec<Sample>, times: &[f64], next: &mut usize, upto: f64, at: impl Fn(f64) -> Vec<f64>) {
    while *next < times.len() && times[*next] <= upto {
        let s = times[*next];
        samples.push(Sample { t: s, y: at(s) });
        *next += 1;
    }
}

/// One-shot integration with a fresh [`Integrator`].
pub fn integrate<F>(
    f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    config: &IntegratorConfig,
    events: &[EventSpec<'_>],
    sample_times: &[f64],
) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    Integrator::new(config.clone())?.integrate(f, t0, y0, t_end, events, sample_times)
}

/// A single Dormand-Prince step: the fifth-order state and the
/// per-component difference to the embedded fourth-order solution.
pub fn step_embedded<F>(mut f: F, t: f64, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::IntegratorConfig(format!("step size must be > 0 (got {h})")));
    }
    let f: &mut RhsFn<'_> = &mut f;
    let mut evals = 0;
    let mut k1 = vec![0.0; y.len()];
    eval(f, t, y, &mut k1, &mut evals)?;
    let r = dopri_step(f, t, y, &k1, h, &mut evals)?;
    Ok((r.y, r.err))
}
