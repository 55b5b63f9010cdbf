//! Pitch control, interface throttle scheduling, thrust allocation and the
//! five-stage mission supervisor.

use std::f64::consts::PI;

use crate::dynamics::RotorCommand;
use crate::error::{Error, Result};
use crate::vehicle::{rotor_media, MediumSample, RotorGeometry, VehicleParams, ROTORS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PDGains {
    pub kp: f64,
    /// Rate gain, s. Negative values damp under the law of [`pd_pitch_command`].
    pub kd: f64,
}

/// `u = K_P (theta_ref - theta) + K_D theta_dot`.
pub fn pd_pitch_command(theta_ref: f64, theta: f64, theta_rate: f64, gains: PDGains) -> f64 {
    gains.kp * (theta_ref - theta) + gains.kd * theta_rate
}

pub fn throttle_to_omega(throttle: f64, medium: &MediumSample, params: &VehicleParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&throttle) {
        return Err(Error::ThrottleRange { throttle });
    }
    Ok(throttle * params.omega_max(medium.in_air))
}

/// Rotors whose station lies strictly within `eps` of the airframe height.
pub fn interface_cut_mask(z: f64, stations: &[f64; ROTORS], eps: f64) -> [bool; ROTORS] {
    std::array::from_fn(|i| (z - stations[i]).abs() < eps)
}

/// Zero the throttle of every rotor inside the interface band.
pub fn interface_throttle_schedule(
    z: f64,
    stations: &[f64; ROTORS],
    base: &[f64; ROTORS],
    eps: f64,
) -> [f64; ROTORS] {
    let cut = interface_cut_mask(z, stations, eps);
    std::array::from_fn(|i| if cut[i] { 0.0 } else { base[i] })
}

pub fn cut_bits(cut: &[bool; ROTORS]) -> u8 {
    cut.iter()
        .enumerate()
        .fold(0u8, |acc, (i, &c)| if c { acc | (1 << i) } else { acc })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compensation {
    pub throttles: [f64; ROTORS],
    /// Thrust of the uncut command, N.
    pub thrust_before: f64,
    pub thrust_after: f64,
    /// Some active rotor hit its limit and the total could not be restored.
    pub shortfall: bool,
    pub all_cut: bool,
}

fn rotor_gain(m: &MediumSample, params: &VehicleParams) -> f64 {
    let w = params.omega_max(m.in_air);
    params.k_t * m.rho * w * w
}

/// Restore the thrust of `throttles` after the rotors in `cut` are silenced
/// by scaling the remaining speeds. Rotors that would exceed their medium's
/// limit are clamped and the rest absorb the difference.
pub fn thrust_compensation(
    throttles: &[f64; ROTORS],
    cut: &[bool; ROTORS],
    media: &[MediumSample; ROTORS],
    params: &VehicleParams,
) -> Compensation {
    let gain: [f64; ROTORS] = std::array::from_fn(|i| rotor_gain(&media[i], params));
    let thrust = |u: &[f64; ROTORS]| (0..ROTORS).map(|i| gain[i] * u[i] * u[i]).sum::<f64>();
    let before = thrust(throttles);
    let mut out: [f64; ROTORS] = std::array::from_fn(|i| if cut[i] { 0.0 } else { throttles[i] });

    let all_cut = cut.iter().all(|&c| c);
    if all_cut || !cut.iter().any(|&c| c) {
        let after = thrust(&out);
        return Compensation {
            throttles: out,
            thrust_before: before,
            thrust_after: after,
            shortfall: all_cut && before > 0.0,
            all_cut,
        };
    }

    let mut clamped = [false; ROTORS];
    let mut shortfall = false;
    loop {
        let fixed: f64 = (0..ROTORS).filter(|&i| !cut[i] && clamped[i]).map(|i| gain[i]).sum();
        let free: Vec<usize> = (0..ROTORS).filter(|&i| !cut[i] && !clamped[i]).collect();
        if free.is_empty() {
            shortfall = true;
            break;
        }
        let need = before - fixed;
        let have: f64 = free.iter().map(|&i| gain[i] * out[i] * out[i]).sum();
        if need <= 0.0 {
            for &i in &free {
                out[i] = 0.0;
            }
            break;
        }
        if have > 0.0 {
            let s = (need / have).sqrt();
            for &i in &free {
                out[i] *= s;
            }
        } else {
            // active rotors idle: spread the demand as one common throttle
            let g: f64 = free.iter().map(|&i| gain[i]).sum();
            let u = (need / g).sqrt();
            for &i in &free {
                out[i] = u;
            }
        }
        let over: Vec<usize> = free.iter().copied().filter(|&i| out[i] > 1.0).collect();
        if over.is_empty() {
            break;
        }
        for i in over {
            out[i] = 1.0;
            clamped[i] = true;
        }
    }
    Compensation {
        throttles: out,
        thrust_before: before,
        thrust_after: thrust(&out),
        shortfall,
        all_cut: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Allocation {
    /// Split from the first-order expansion of the pitch moment.
    #[default]
    Linearized,
    /// Split solved against the full quadratic moment with throttle limits.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mix {
    pub throttles: [f64; ROTORS],
    pub delta: f64,
    pub saturated: bool,
}

const THROTTLE_FLOOR: f64 = 0.05;

/// Allocate a collective throttle and a pitch-moment demand (N m) to the
/// rotors: rotors ahead of the pitch axis run at `collective - delta`, those
/// behind at `collective + delta`.
pub fn mix_pitch_to_rotors(
    collective: f64,
    pitch_torque: f64,
    geometry: &RotorGeometry,
    media: &[MediumSample; ROTORS],
    params: &VehicleParams,
    allocation: Allocation,
) -> Mix {
    // per-rotor moment arm weights and side (+1 behind, -1 ahead, 0 on axis)
    let mut c = [0.0; ROTORS];
    let mut side = [0.0; ROTORS];
    for (i, r) in geometry.rotors.iter().enumerate() {
        let cos = r.azimuth.cos();
        c[i] = params.arm_length * cos.abs() * rotor_gain(&media[i], params);
        side[i] = if cos.abs() < 1e-12 { 0.0 } else { -cos.signum() };
    }
    let raw = |d: f64| -> [f64; ROTORS] { std::array::from_fn(|i| collective + side[i] * d) };
    let moment = |u: &[f64; ROTORS]| (0..ROTORS).map(|i| side[i] * c[i] * u[i] * u[i]).sum::<f64>();
    let clamp = |u: [f64; ROTORS]| -> [f64; ROTORS] { std::array::from_fn(|i| u[i].clamp(0.0, 1.0)) };

    let delta = match allocation {
        Allocation::Linearized => {
            let (mut cr, mut cf) = (0.0, 0.0);
            for i in 0..ROTORS {
                if side[i] > 0.0 {
                    cr += c[i];
                } else if side[i] < 0.0 {
                    cf += c[i];
                }
            }
            let u = collective.max(THROTTLE_FLOOR);
            if cr + cf > 0.0 {
                (pitch_torque - (cr - cf) * collective * collective) / (2.0 * u * (cr + cf))
            } else {
                0.0
            }
        }
        Allocation::Exact => {
            let m = |d: f64| moment(&clamp(raw(d)));
            let (mut lo, mut hi) = (-1.0, 1.0);
            if pitch_torque <= m(lo) {
                hi = lo;
            } else if pitch_torque >= m(hi) {
                lo = hi;
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if m(mid) < pitch_torque {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
            }
            0.5 * (lo + hi)
        }
    };
    let unclamped = raw(delta);
    let throttles = clamp(unclamped);
    let mut saturated = unclamped != throttles;
    if allocation == Allocation::Exact {
        let scale = pitch_torque.abs().max(1e-12);
        saturated = saturated || (moment(&throttles) - pitch_torque).abs() > 1e-9 * scale;
    }
    Mix {
        throttles,
        delta,
        saturated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// Open-loop hover at the equilibrium speed.
    Hover = 0,
    Descend = 1,
    RotateToHorizontal = 2,
    Cruise = 3,
    RotateToVertical = 4,
    Ascend = 5,
    Done = 6,
}

impl Stage {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Some(match i {
            0 => Stage::Hover,
            1 => Stage::Descend,
            2 => Stage::RotateToHorizontal,
            3 => Stage::Cruise,
            4 => Stage::RotateToVertical,
            5 => Stage::Ascend,
            6 => Stage::Done,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissionMode {
    #[default]
    FiveStage,
    Hover,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub mode: MissionMode,
    /// m, positive down
    pub target_depth: f64,
    /// rad
    pub cruise_pitch: f64,
    pub cruise_throttle: f64,
    /// s
    pub cruise_duration: f64,
    /// Vertical speed in stages 1 and 5, m/s.
    pub descent_rate: f64,
    /// Interface band half-width, m.
    pub interface_band: f64,
    /// Height the centroid must exceed to finish stage 5, m.
    pub clearance: f64,
    /// rad
    pub settle_band: f64,
    /// s
    pub settle_time: f64,
    /// Per-stage limits for stages 1..=5, s.
    pub stage_timeouts: [f64; 5],
    /// Use (K_P1, K_D1) in every stage.
    pub single_gain_set: bool,
    pub allocation: Allocation,
    /// Climb-rate loop gain, 1/s.
    pub climb_gain: f64,
    /// Depth-hold stiffness, 1/s^2.
    pub depth_gain: f64,
    /// Length of the hover plan, s.
    pub hover_duration: f64,
}

impl Default for MissionPlan {
    fn default() -> Self {
        Self {
            mode: MissionMode::FiveStage,
            target_depth: 1.35,
            cruise_pitch: 70.0 * PI / 180.0,
            cruise_throttle: 0.35,
            cruise_duration: 5.0,
            descent_rate: 0.5,
            interface_band: 0.05,
            clearance: 0.3,
            settle_band: 2.0 * PI / 180.0,
            settle_time: 0.5,
            stage_timeouts: [60.0, 30.0, 30.0, 30.0, 30.0],
            single_gain_set: false,
            allocation: Allocation::Linearized,
            climb_gain: 4.0,
            depth_gain: 4.0,
            hover_duration: 10.0,
        }
    }
}

impl MissionPlan {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let pos = [
            ("target_depth", self.target_depth),
            ("descent_rate", self.descent_rate),
            ("interface_band", self.interface_band),
            ("settle_band_deg", self.settle_band),
            ("climb_gain", self.climb_gain),
            ("depth_gain", self.depth_gain),
            ("hover_duration", self.hover_duration),
        ];
        for (key, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{key} must be finite and > 0 (got {v})"));
            }
        }
        if !(self.cruise_throttle > 0.0 && self.cruise_throttle <= 1.0) {
            out.push(format!("cruise_throttle must lie in (0, 1] (got {})", self.cruise_throttle));
        }
        if !(self.cruise_pitch.is_finite() && self.cruise_pitch.abs() < PI / 2.0) {
            out.push(format!(
                "cruise_pitch_deg must lie strictly between -90 and 90 (got {})",
                self.cruise_pitch.to_degrees()
            ));
        }
        for (key, v) in [
            ("cruise_duration", self.cruise_duration),
            ("settle_time", self.settle_time),
            ("clearance", self.clearance),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!("{key} must be finite and >= 0 (got {v})"));
            }
        }
        for (i, v) in self.stage_timeouts.iter().enumerate() {
            if !(*v > 0.0) {
                out.push(format!("stage_timeouts[{i}] must be > 0 (got {v})"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    fn gains(&self, stage: Stage, params: &VehicleParams) -> PDGains {
        match stage {
            Stage::RotateToVertical | Stage::Ascend if !self.single_gain_set => params.gains_2,
            _ => params.gains_1,
        }
    }

    fn pitch_ref(&self, stage: Stage) -> f64 {
        match stage {
            Stage::RotateToHorizontal | Stage::Cruise => self.cruise_pitch,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageState {
    pub stage: Stage,
    pub entry_time: f64,
    /// Start of the current run of samples inside the settling band.
    pub settled_since: Option<f64>,
    /// Depth-hold setpoint for stages 2 and 4, m.
    pub hold_z: f64,
}

impl StageState {
    pub fn initial(plan: &MissionPlan, t0: f64) -> Self {
        Self {
            stage: match plan.mode {
                MissionMode::FiveStage => Stage::Descend,
                MissionMode::Hover => Stage::Hover,
            },
            entry_time: t0,
            settled_since: None,
            hold_z: -plan.target_depth,
        }
    }

    fn enter(&mut self, stage: Stage, t: f64) {
        self.stage = stage;
        self.entry_time = t;
        self.settled_since = None;
    }
}

/// The part of the vehicle state the controller reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant {
    pub z: f64,
    pub vz: f64,
    /// |v|, m/s
    pub speed: f64,
    pub theta: f64,
    pub theta_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub command: RotorCommand,
    pub throttles: [f64; ROTORS],
    pub media: [MediumSample; ROTORS],
    pub collective: f64,
    pub cut_mask: u8,
    pub shortfall: bool,
    pub all_cut: bool,
    pub mix_saturated: bool,
    pub thrust_demand: f64,
    pub thrust_delivered: f64,
}

/// Rotor command for the current stage. Pure in its inputs, so it can be
/// evaluated inside the right-hand side of the equations of motion.
pub fn control_law(
    state: &StageState,
    plant: &Plant,
    plan: &MissionPlan,
    params: &VehicleParams,
    geometry: &RotorGeometry,
) -> ControlOutput {
    let media = rotor_media(plant.z, geometry, params);
    let stage = state.stage;

    if matches!(stage, Stage::Hover | Stage::Done) {
        let w = if stage == Stage::Hover { params.hover_speed() } else { 0.0 };
        let speeds: [f64; ROTORS] = std::array::from_fn(|i| w.min(params.omega_max(media[i].in_air)));
        let throttles = std::array::from_fn(|i| speeds[i] / params.omega_max(media[i].in_air));
        let thrust = (0..ROTORS).map(|i| params.k_t * media[i].rho * speeds[i] * speeds[i]).sum();
        return ControlOutput {
            command: RotorCommand { speeds },
            throttles,
            media,
            collective: if stage == Stage::Hover { w / params.omega_max_air } else { 0.0 },
            cut_mask: 0,
            shortfall: false,
            all_cut: false,
            mix_saturated: false,
            thrust_demand: thrust,
            thrust_delivered: thrust,
        };
    }

    let g = media[0].g_eff;
    let k_drag = 0.5 * crate::vehicle::centroid_medium(plant.z, params).rho * params.drag_coefficient * params.drag_area;
    let drag_ff = k_drag * plant.speed * plant.vz;
    let vertical = |a_cmd: f64| {
        let tz = params.mass * a_cmd + drag_ff;
        (tz / plant.theta.cos().max(0.2)).max(0.0)
    };
    let full: f64 = media.iter().map(|m| rotor_gain(m, params)).sum();
    let collective_for = |thrust: f64| (thrust / full).sqrt().clamp(0.0, 1.0);

    let collective = match stage {
        Stage::Descend | Stage::Ascend => {
            let v_ref = if stage == Stage::Descend { -plan.descent_rate } else { plan.descent_rate };
            collective_for(vertical(g + plan.climb_gain * (v_ref - plant.vz)))
        }
        Stage::RotateToHorizontal | Stage::RotateToVertical => collective_for(vertical(
            g + plan.depth_gain * (state.hold_z - plant.z) - plan.climb_gain * plant.vz,
        )),
        Stage::Cruise => plan.cruise_throttle,
        Stage::Hover | Stage::Done => unreachable!(),
    };

    let u = pd_pitch_command(plan.pitch_ref(stage), plant.theta, plant.theta_rate, plan.gains(stage, params));
    let mix = mix_pitch_to_rotors(collective, params.i_yy * u, geometry, &media, params, plan.allocation);
    let cut = interface_cut_mask(plant.z, &geometry.stations(), plan.interface_band);
    let comp = thrust_compensation(&mix.throttles, &cut, &media, params);
    let speeds = std::array::from_fn(|i| comp.throttles[i] * params.omega_max(media[i].in_air));

    ControlOutput {
        command: RotorCommand { speeds },
        throttles: comp.throttles,
        media,
        collective,
        cut_mask: cut_bits(&cut),
        shortfall: comp.shortfall,
        all_cut: comp.all_cut,
        mix_saturated: mix.saturated,
        thrust_demand: comp.thrust_before,
        thrust_delivered: comp.thrust_after,
    }
}

/// Apply every stage transition due at sample time `t`; transitions may
/// cascade within one call. Fails when the current stage has run past its
/// time limit.
pub fn advance_stage(
    t: f64,
    state: &StageState,
    plant: &Plant,
    plan: &MissionPlan,
    geometry: &RotorGeometry,
) -> Result<StageState> {
    const EPS: f64 = 1e-9;
    let mut s = *state;
    loop {
        let elapsed = t - s.entry_time;
        let settled = |s: &mut StageState, target: f64| {
            if (plant.theta - target).abs() < plan.settle_band {
                let since = *s.settled_since.get_or_insert(t);
                t - since >= plan.settle_time - EPS
            } else {
                s.settled_since = None;
                false
            }
        };
        let next = match s.stage {
            Stage::Hover => (elapsed >= plan.hover_duration - EPS).then_some(Stage::Done),
            Stage::Descend => (plant.z <= -plan.target_depth).then_some(Stage::RotateToHorizontal),
            Stage::RotateToHorizontal => settled(&mut s, plan.cruise_pitch).then_some(Stage::Cruise),
            Stage::Cruise => (elapsed >= plan.cruise_duration - EPS).then_some(Stage::RotateToVertical),
            Stage::RotateToVertical => settled(&mut s, 0.0).then_some(Stage::Ascend),
            Stage::Ascend => {
                let all_air = geometry.rotors.iter().all(|r| plant.z - r.station >= 0.0);
                (all_air && plant.z > plan.clearance).then_some(Stage::Done)
            }
            Stage::Done => None,
        };
        match next {
            Some(stage) => {
                if stage == Stage::RotateToVertical {
                    s.hold_z = plant.z;
                }
                s.enter(stage, t);
            }
            None => {
                let i = s.stage.index();
                if (1..=5).contains(&i) && elapsed > plan.stage_timeouts[i as usize - 1] {
                    return Err(Error::StageTimeout { stage: i, t, elapsed });
                }
                return Ok(s);
            }
        }
    }
}

/// One supervisor tick: advance the stage, then evaluate the control law.
pub fn mission_step(
    t: f64,
    plant: &Plant,
    state: &StageState,
    plan: &MissionPlan,
    params: &VehicleParams,
    geometry: &RotorGeometry,
) -> Result<(RotorCommand, StageState)> {
    let next = advance_stage(t, state, plant, plan, geometry)?;
    Ok((control_law(&next, plant, plan, params, geometry).command, next))
}
