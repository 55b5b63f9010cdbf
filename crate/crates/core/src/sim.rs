//! Closed-loop mission execution and the trajectory log.

use serde::Serialize;

use crate::config::{Model, ScenarioConfig};
use crate::control::{advance_stage, control_law, ControlOutput, Plant, Stage, StageState};
use crate::dynamics::{state_derivative_2d_rotors, state_derivative_3d, State2D, State3D};
use crate::error::{Error, Result};
use crate::integrator::{Direction, EventSpec, Integrator, Stats};
use crate::vehicle::ROTORS;

/// One logged row. `theta_deg` is in degrees; everything else is SI.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta_deg: f64,
    pub theta_rate: f64,
    pub omega: [f64; ROTORS],
    pub rho: [f64; ROTORS],
    pub stage: u8,
    pub collective: f64,
    pub cut_mask: u8,
    pub shortfall: bool,
    pub thrust_demand: f64,
    pub thrust_delivered: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub samples: Vec<TrajectorySample>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn stage_samples(&self, stage: Stage) -> impl Iterator<Item = &TrajectorySample> {
        self.samples.iter().filter(move |s| s.stage == stage.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageSpan {
    pub stage: u8,
    pub entry: f64,
    pub exit: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// 1-based rotor number.
    pub rotor: usize,
    pub t: f64,
    /// Rotor moved from the air side to the water side.
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionSummary {
    pub completed: bool,
    pub stages: Vec<StageSpan>,
    pub crossings: Vec<Crossing>,
    /// First to last rotor crossing on the way down, s.
    pub descent_transit: Option<f64>,
    pub ascent_transit: Option<f64>,
    /// Z when stage 2 ended, m.
    pub depth_at_rotation_exit: Option<f64>,
    /// Pitch range logged during cruise, deg.
    pub cruise_pitch_band_deg: Option<(f64, f64)>,
    pub max_cruise_pitch_error_deg: Option<f64>,
    pub final_t: f64,
    /// Final integrator state in model order.
    pub final_state: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct MissionOutput {
    pub record: TrajectoryRecord,
    pub summary: MissionSummary,
}

/// A failed run with everything logged up to the failure.
#[derive(Debug, Clone)]
pub struct MissionError {
    pub error: Error,
    pub record: TrajectoryRecord,
}

impl std::fmt::Display for MissionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} samples)", self.error, self.record.len())
    }
}

impl std::error::Error for MissionError {}

fn plant(model: Model, y: &[f64]) -> Plant {
    match model {
        Model::Planar => Plant {
            z: y[1],
            vz: y[3],
            speed: y[2].hypot(y[3]),
            theta: y[4],
            theta_rate: y[5],
        },
        Model::Full => Plant {
            z: y[2],
            vz: y[5],
            speed: (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]).sqrt(),
            theta: y[7],
            theta_rate: y[10],
        },
    }
}

fn z_index(model: Model) -> usize {
    match model {
        Model::Planar => 1,
        Model::Full => 2,
    }
}

fn initial_state(cfg: &ScenarioConfig) -> Vec<f64> {
    let s = State2D {
        x: cfg.x0,
        z: cfg.z0,
        vx: 0.0,
        vz: 0.0,
        theta: cfg.theta0,
        theta_rate: 0.0,
    };
    match cfg.model {
        Model::Planar => s.to_array().to_vec(),
        Model::Full => State3D::from_planar(&s).to_array().to_vec(),
    }
}

fn rhs(cfg: &ScenarioConfig, stage: &StageState, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let out = control_law(stage, &plant(cfg.model, y), &cfg.mission, &cfg.vehicle, &cfg.geometry);
    match cfg.model {
        Model::Planar => {
            let d = state_derivative_2d_rotors(&State2D::from_slice(y), &out.command, &cfg.vehicle, &cfg.geometry)?;
            dy.copy_from_slice(&d.to_array());
        }
        Model::Full => {
            let d = state_derivative_3d(&State3D::from_slice(y), &out.command, &cfg.vehicle, &cfg.geometry)?;
            dy.copy_from_slice(&d.to_array());
        }
    }
    Ok(())
}

fn sample(cfg: &ScenarioConfig, t: f64, y: &[f64], stage: Stage, out: &ControlOutput) -> TrajectorySample {
    let (x, yy, z, theta, theta_rate) = match cfg.model {
        Model::Planar => (y[0], 0.0, y[1], y[4], y[5]),
        Model::Full => (y[0], y[1], y[2], y[7], y[10]),
    };
    TrajectorySample {
        t,
        x,
        y: yy,
        z,
        theta_deg: theta.to_degrees(),
        theta_rate,
        omega: out.command.speeds,
        rho: std::array::from_fn(|i| out.media[i].rho),
        stage: stage.index(),
        collective: out.collective,
        cut_mask: out.cut_mask,
        shortfall: out.shortfall,
        thrust_demand: out.thrust_demand,
        thrust_delivered: out.thrust_delivered,
    }
}

/// Guard levels on Z: each rotor station, both edges of its interface band
/// and the centroid switch at 0. Returns unique levels and, per level, the
/// rotors whose station it is.
fn guard_levels(cfg: &ScenarioConfig) -> Vec<(f64, Vec<usize>)> {
    let eps = cfg.mission.interface_band;
    let mut levels: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut add = |z: f64, rotor: Option<usize>| {
        let pos = levels.iter().position(|(l, _)| *l == z);
        let i = pos.unwrap_or_else(|| {
            levels.push((z, Vec::new()));
            levels.len() - 1
        });
        if let Some(r) = rotor {
            levels[i].1.push(r);
        }
    };
    add(0.0, None);
    for (i, r) in cfg.geometry.rotors.iter().enumerate() {
        add(r.station, Some(i));
        if cfg.mission.mode == crate::control::MissionMode::FiveStage {
            add(r.station - eps, None);
            add(r.station + eps, None);
        }
    }
    levels
}

/// Run the configured plan to completion, a stage timeout or an integrator
/// failure. Samples are logged every `sample_interval` seconds; the stage is
/// re-evaluated only at sample times.
pub fn run_mission(cfg: &ScenarioConfig) -> std::result::Result<MissionOutput, Box<MissionError>> {
    let mut record = TrajectoryRecord::default();
    match run_inner(cfg, &mut record) {
        Ok(summary) => Ok(MissionOutput { record, summary }),
        Err(error) => Err(Box::new(MissionError { error, record })),
    }
}

fn run_inner(cfg: &ScenarioConfig, record: &mut TrajectoryRecord) -> Result<MissionSummary> {
    cfg.validate()?;
    let dt = cfg.sample_interval;
    let zi = z_index(cfg.model);
    let levels = guard_levels(cfg);
    let events: Vec<EventSpec> = levels
        .iter()
        .map(|(l, _)| {
            let l = *l;
            EventSpec::new(move |_, y: &[f64]| y[zi] - l, Direction::Any, cfg.integrator.event_tol)
        })
        .collect();

    let mut integ = Integrator::new(cfg.integrator.clone())?;
    let mut y = initial_state(cfg);
    let mut state = StageState::initial(&cfg.mission, 0.0);
    let mut spans: Vec<StageSpan> = Vec::new();
    let mut crossings = Vec::new();
    let mut depth_exit = None;
    let mut k: u64 = 0;

    loop {
        let t = k as f64 * dt;
        let pl = plant(cfg.model, &y);
        let next = advance_stage(t, &state, &pl, &cfg.mission, &cfg.geometry);
        let next = match next {
            Ok(n) => n,
            Err(e) => {
                let out = control_law(&state, &pl, &cfg.mission, &cfg.vehicle, &cfg.geometry);
                record.samples.push(sample(cfg, t, &y, state.stage, &out));
                return Err(e);
            }
        };
        if next.stage != state.stage {
            let passed_rotation = (Stage::Descend..=Stage::RotateToHorizontal).contains(&state.stage)
                && next.stage > Stage::RotateToHorizontal;
            if passed_rotation {
                depth_exit = Some(pl.z);
            }
            close_span(&mut spans, state.stage, state.entry_time, t);
            // stages passed through within this tick
            if state.stage != Stage::Hover {
                for s in (state.stage.index() + 1)..next.stage.index() {
                    close_span(&mut spans, Stage::from_index(s).expect("valid stage"), t, t);
                }
            }
        }
        state = next;
        let out = control_law(&state, &pl, &cfg.mission, &cfg.vehicle, &cfg.geometry);
        if out.all_cut {
            record.samples.push(sample(cfg, t, &y, state.stage, &out));
            return Err(Error::AllRotorsCut);
        }
        record.samples.push(sample(cfg, t, &y, state.stage, &out));
        if state.stage == Stage::Done {
            break;
        }

        let t_next = (k + 1) as f64 * dt;
        let frozen = state;
        let sol = integ.integrate(|_, yy, dy| rhs(cfg, &frozen, yy, dy), t, &y, t_next, &events, &[])?;
        for hit in &sol.events {
            for &r in &levels[hit.event].1 {
                crossings.push(Crossing { rotor: r + 1, t: hit.t, descending: !hit.rising });
            }
        }
        y = sol.y;
        k += 1;
    }

    let transit = |down: bool| {
        let ts: Vec<f64> = crossings.iter().filter(|c| c.descending == down).map(|c| c.t).collect();
        if ts.is_empty() {
            None
        } else {
            let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some(hi - lo)
        }
    };
    let cruise: Vec<f64> = record.stage_samples(Stage::Cruise).map(|s| s.theta_deg).collect();
    let cruise_ref = cfg.mission.cruise_pitch.to_degrees();
    let final_t = record.samples.last().map_or(0.0, |s| s.t);
    let stats: Stats = integ.stats;

    Ok(MissionSummary {
        completed: true,
        stages: spans,
        descent_transit: transit(true),
        ascent_transit: transit(false),
        crossings,
        depth_at_rotation_exit: depth_exit,
        cruise_pitch_band_deg: (!cruise.is_empty()).then(|| {
            (
                cruise.iter().cloned().fold(f64::INFINITY, f64::min),
                cruise.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        }),
        max_cruise_pitch_error_deg: cruise.iter().map(|th| (th - cruise_ref).abs()).reduce(f64::max),
        final_t,
        final_state: y,
        accepted_steps: stats.accepted,
        rejected_steps: stats.rejected,
        rhs_evaluations: stats.evaluations,
    })
}

fn close_span(spans: &mut Vec<StageSpan>, stage: Stage, entry: f64, exit: f64) {
    spans.push(StageSpan {
        stage: stage.index(),
        entry,
        exit,
        duration: exit - entry,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::MissionMode;

    fn hover_cfg(model: Model) -> ScenarioConfig {
        let mut cfg = ScenarioConfig { model, ..Default::default() };
        cfg.mission.mode = MissionMode::Hover;
        cfg
    }

    #[test]
    fn hover_holds_altitude() {
        for model in [Model::Planar, Model::Full] {
            let out = run_mission(&hover_cfg(model)).unwrap();
            let z0 = out.record.samples[0].z;
            assert_eq!(out.record.samples.last().unwrap().t, 10.0);
            for s in &out.record.samples {
                assert!((s.z - z0).abs() < 1e-3);
                assert!(s.theta_deg.abs() < 0.01);
            }
        }
    }

    #[test]
    fn samples_strictly_increase() {
        let out = run_mission(&hover_cfg(Model::Planar)).unwrap();
        assert_eq!(out.record.len(), 1001);
        assert!(out.record.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn timeout_keeps_partial_record() {
        let mut cfg = ScenarioConfig::default();
        cfg.mission.stage_timeouts[0] = 0.5;
        let err = run_mission(&cfg).unwrap_err();
        assert!(matches!(err.error, Error::StageTimeout { stage: 1, .. }));
        assert!(err.record.len() > 40);
    }
}
