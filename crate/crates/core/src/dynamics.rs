//! State derivatives for the full rigid-body model and the planar
//! X-Z-pitch transition model.
//!
//! Both models share the same constitutive laws from [`crate::vehicle`]:
//! per-rotor density from the rotor's station, gravity from the centroid's
//! medium, quadratic drag from the centroid's density.

use crate::error::{Error, Result};
use crate::geom3d::{body_to_inertial, EulerAngles, Vec3};
use crate::vehicle::{
    control_torque, density_at, drag_force, gravity_at, gyroscopic_torque, total_thrust,
    RotorGeometry, VehicleParams, ARMS, ROTORS,
};

/// Full rigid-body state. `position.z` is measured from the interface,
/// positive up; `rates` are body rates `(p, q, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State3D {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: EulerAngles,
    pub rates: Vec3,
}

impl State3D {
    pub const DIM: usize = 12;

    pub fn to_array(&self) -> [f64; 12] {
        let (p, v, a, w) = (self.position, self.velocity, self.attitude, self.rates);
        [
            p.x, p.y, p.z, v.x, v.y, v.z, a.roll, a.pitch, a.yaw, w.x, w.y, w.z,
        ]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Self {
            position: Vec3::new(y[0], y[1], y[2]),
            velocity: Vec3::new(y[3], y[4], y[5]),
            attitude: EulerAngles::new(y[8], y[7], y[6]),
            rates: Vec3::new(y[9], y[10], y[11]),
        }
    }

    /// Drop the out-of-plane components without checking them.
    pub fn planar_projection(&self) -> State2D {
        State2D {
            x: self.position.x,
            z: self.position.z,
            vx: self.velocity.x,
            vz: self.velocity.z,
            theta: self.attitude.pitch,
            theta_rate: self.rates.y,
        }
    }

    pub fn from_planar(s: &State2D) -> Self {
        Self {
            position: Vec3::new(s.x, 0.0, s.z),
            velocity: Vec3::new(s.vx, 0.0, s.vz),
            attitude: EulerAngles::new(0.0, s.theta, 0.0),
            rates: Vec3::new(0.0, s.theta_rate, 0.0),
        }
    }
}

/// Planar state in the X-Z plane with pitch `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State2D {
    pub x: f64,
    pub z: f64,
    pub vx: f64,
    pub vz: f64,
    pub theta: f64,
    pub theta_rate: f64,
}

impl State2D {
    pub const DIM: usize = 6;

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.z, self.vx, self.vz, self.theta, self.theta_rate]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Self {
            x: y[0],
            z: y[1],
            vx: y[2],
            vz: y[3],
            theta: y[4],
            theta_rate: y[5],
        }
    }
}

/// Per-rotor angular speeds, rad/s, in geometry order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorCommand {
    pub speeds: [f64; ROTORS],
}

impl RotorCommand {
    pub fn uniform(omega: f64) -> Self {
        Self {
            speeds: [omega; ROTORS],
        }
    }
}

/// Arm-pair speeds: both rotors of an arm spin at the same rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairCommand {
    pub speeds: [f64; ARMS],
}

impl PairCommand {
    pub fn expand(&self, geometry: &RotorGeometry) -> RotorCommand {
        RotorCommand {
            speeds: std::array::from_fn(|i| self.speeds[geometry.rotors[i].arm]),
        }
    }
}

/// How the pair-speed planar model samples the medium of each arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairSampling {
    /// One density per arm, taken at the arm's mean station.
    #[default]
    MeanStation,
    /// Each rotor of the pair samples its own station; the pair's thrust
    /// uses the average density.
    PerRotor,
}

const LIMIT_SLACK: f64 = 1e-12;

fn check_command(speeds: &[f64], limits: impl Fn(usize) -> (f64, bool)) -> Result<()> {
    for (i, &w) in speeds.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite {
                what: "rotor command",
            });
        }
        if w < 0.0 {
            return Err(Error::NegativeRotorSpeed { omega: w });
        }
        let (limit, in_air) = limits(i);
        if w > limit * (1.0 + LIMIT_SLACK) {
            return Err(Error::RotorSpeedLimit {
                rotor: i + 1,
                omega: w,
                limit,
                medium: if in_air { "air" } else { "water" },
            });
        }
    }
    Ok(())
}

fn rotor_densities(
    z: f64,
    u: &RotorCommand,
    params: &VehicleParams,
    geometry: &RotorGeometry,
) -> Result<[f64; ROTORS]> {
    let media: [_; ROTORS] = std::array::from_fn(|i| density_at(z, geometry.rotors[i].station, params));
    check_command(&u.speeds, |i| (params.omega_max(media[i].in_air), media[i].in_air))?;
    Ok(std::array::from_fn(|i| media[i].rho))
}

/// Time derivative of the full state. The returned record holds rates in
/// each field (position field = velocity, and so on).
pub fn state_derivative_3d(
    s: &State3D,
    u: &RotorCommand,
    params: &VehicleParams,
    geometry: &RotorGeometry,
) -> Result<State3D> {
    let z = s.position.z;
    let rho = rotor_densities(z, u, params, geometry)?;

    let thrust = total_thrust(&u.speeds, &rho, params);
    let thrust_inertial = body_to_inertial(&Vec3::new(0.0, 0.0, thrust), &s.attitude)?;
    let drag = drag_force(&s.velocity, density_at(z, 0.0, params).rho, params);
    let g = gravity_at(z, params);
    let accel = (thrust_inertial + drag) / params.mass - Vec3::new(0.0, 0.0, g);

    let tau = control_torque(&u.speeds, &rho, geometry, params)
        - gyroscopic_torque(&s.rates, &u.speeds, geometry, params);
    let (p, q, r) = (s.rates.x, s.rates.y, s.rates.z);
    let (ixx, iyy, izz) = (params.i_xx, params.i_yy, params.i_zz);
    let rates_dot = Vec3::new(
        (iyy - izz) / ixx * q * r + tau.x / ixx,
        (izz - ixx) / iyy * r * p + tau.y / iyy,
        (ixx - iyy) / izz * q * p + tau.z / izz,
    );

    Ok(State3D {
        position: s.velocity,
        velocity: accel,
        attitude: EulerAngles::new(r, q, p),
        rates: rates_dot,
    })
}

/// Angle between the velocity and the inertial vertical, in `[0, pi]`.
/// Zero for a vehicle at rest.
pub fn angle_of_attack(vx: f64, vz: f64) -> f64 {
    if vx == 0.0 && vz == 0.0 {
        0.0
    } else {
        vx.abs().atan2(vz)
    }
}

fn planar_rates(
    s: &State2D,
    thrust: f64,
    pitch_torque: f64,
    params: &VehicleParams,
) -> State2D {
    let (sin_t, cos_t) = s.theta.sin_cos();
    let drag = drag_force(
        &Vec3::new(s.vx, 0.0, s.vz),
        density_at(s.z, 0.0, params).rho,
        params,
    );
    State2D {
        x: s.vx,
        z: s.vz,
        vx: (sin_t * thrust + drag.x) / params.mass,
        vz: -gravity_at(s.z, params) + (cos_t * thrust + drag.z) / params.mass,
        theta: s.theta_rate,
        theta_rate: pitch_torque / params.i_yy,
    }
}

/// Planar model driven by arm-pair speeds.
///
/// Each arm contributes `2 K_T rho_a w_a^2` of thrust; the pitch moment is
/// `-K_T d sum_a 2 rho_a cos(Phi_a) w_a^2`, which for the default azimuths is
/// `2 K_T d (sqrt 2 / 2)(-f_1 - f_2 + f_3 + f_4)`.
pub fn state_derivative_2d(
    s: &State2D,
    u: &PairCommand,
    params: &VehicleParams,
    geometry: &RotorGeometry,
    sampling: PairSampling,
) -> Result<State2D> {
    let arm_stations = geometry.arm_stations();
    let mut arm_rho = [0.0; ARMS];
    match sampling {
        PairSampling::MeanStation => {
            let media: [_; ARMS] = std::array::from_fn(|a| density_at(s.z, arm_stations[a], params));
            check_command(&u.speeds, |a| (params.omega_max(media[a].in_air), media[a].in_air))?;
            for a in 0..ARMS {
                arm_rho[a] = media[a].rho;
            }
        }
        PairSampling::PerRotor => {
            let expanded = u.expand(geometry);
            let rho = rotor_densities(s.z, &expanded, params, geometry)?;
            for (i, r) in geometry.rotors.iter().enumerate() {
                arm_rho[r.arm] += 0.5 * rho[i];
            }
        }
    }

    let mut arm_cos = [0.0; ARMS];
    for r in &geometry.rotors {
        arm_cos[r.arm] = r.azimuth.cos();
    }
    let mut thrust = 0.0;
    let mut torque = 0.0;
    for a in 0..ARMS {
        let f = 2.0 * params.k_t * arm_rho[a] * u.speeds[a] * u.speeds[a];
        thrust += f;
        torque -= params.arm_length * arm_cos[a] * f;
    }
    Ok(planar_rates(s, thrust, torque, params))
}

/// Planar model driven by individual rotor speeds, each rotor sampling its
/// own station. Reduces to [`state_derivative_2d`] when both rotors of every
/// arm share a speed and a medium.
pub fn state_derivative_2d_rotors(
    s: &State2D,
    u: &RotorCommand,
    params: &VehicleParams,
    geometry: &RotorGeometry,
) -> Result<State2D> {
    let rho = rotor_densities(s.z, u, params, geometry)?;
    let thrust = total_thrust(&u.speeds, &rho, params);
    let torque = control_torque(&u.speeds, &rho, geometry, params).y;
    Ok(planar_rates(s, thrust, torque, params))
}

/// Project a planar 3D state onto X-Z-pitch, rejecting out-of-plane
/// components larger than `tol`.
pub fn reduce_3d_to_2d(s: &State3D, tol: f64) -> Result<State2D> {
    let checks = [
        ("Y", s.position.y),
        ("Y velocity", s.velocity.y),
        ("roll", s.attitude.roll),
        ("yaw", s.attitude.yaw),
        ("roll rate", s.rates.x),
        ("yaw rate", s.rates.z),
    ];
    for (component, value) in checks {
        if value.abs() > tol {
            return Err(Error::NotPlanar {
                component,
                value,
                tol,
            });
        }
    }
    Ok(s.planar_projection())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn setup() -> (VehicleParams, RotorGeometry) {
        (VehicleParams::default(), RotorGeometry::default())
    }

    #[test]
    fn hover_3d_balances() {
        let (p, g) = setup();
        let s = State3D {
            position: Vec3::new(0.0, 0.0, 2.0),
            ..Default::default()
        };
        let d = state_derivative_3d(&s, &RotorCommand::uniform(p.hover_speed()), &p, &g).unwrap();
        assert!(d.velocity.amax() < 1e-9);
        assert!(d.rates.amax() < 1e-9);
    }

    #[test]
    fn rotors_off_underwater_sinks_at_g_water() {
        let (p, g) = setup();
        let s = State3D {
            position: Vec3::new(0.0, 0.0, -1.0),
            ..Default::default()
        };
        let d = state_derivative_3d(&s, &RotorCommand::default(), &p, &g).unwrap();
        assert_eq!(d.velocity, Vec3::new(0.0, 0.0, -0.35));
    }

    #[test]
    fn equal_speeds_level_no_spin_up() {
        let (p, g) = setup();
        for z in [1.0, -1.0] {
            let s = State3D {
                position: Vec3::new(0.0, 0.0, z),
                ..Default::default()
            };
            let d = state_derivative_3d(&s, &RotorCommand::uniform(20.0), &p, &g).unwrap();
            // azimuth round-off only
            assert!(d.rates.amax() < 1e-12, "{:?}", d.rates);
        }
    }

    #[test]
    fn over_limit_command_rejected() {
        let (p, g) = setup();
        let s = State3D {
            position: Vec3::new(0.0, 0.0, -1.0),
            ..Default::default()
        };
        let err = state_derivative_3d(&s, &RotorCommand::uniform(100.0), &p, &g).unwrap_err();
        assert!(matches!(err, Error::RotorSpeedLimit { medium: "water", .. }));
        let s2 = State2D { z: -1.0, ..Default::default() };
        assert!(state_derivative_2d(&s2, &PairCommand { speeds: [100.0; 4] }, &p, &g, PairSampling::MeanStation).is_err());
        assert!(state_derivative_2d_rotors(&s2, &RotorCommand::uniform(-1.0), &p, &g).is_err());
    }

    #[test]
    fn angle_of_attack_cases() {
        assert_eq!(angle_of_attack(0.0, 1.0), 0.0);
        assert!((angle_of_attack(1.0, 0.0) - PI / 2.0).abs() < 1e-15);
        assert!((angle_of_attack(0.0, -1.0) - PI).abs() < 1e-15);
        assert_eq!(angle_of_attack(0.0, 0.0), 0.0);
    }

    #[test]
    fn planar_hover_and_symmetry() {
        let (p, g) = setup();
        let s = State2D { z: 1.0, ..Default::default() };
        let wh = p.hover_speed();
        let d = state_derivative_2d(&s, &PairCommand { speeds: [wh; 4] }, &p, &g, PairSampling::MeanStation).unwrap();
        assert_eq!(d.vx, 0.0);
        assert!(d.vz.abs() < 1e-12);
        assert!(d.theta_rate.abs() < 1e-12);

        // mixed media with equal pair speeds: pitch stays balanced because
        // front and rear arms share media
        let s = State2D { z: 0.0, theta: 0.4, ..Default::default() };
        let d = state_derivative_2d(&s, &PairCommand { speeds: [15.0; 4] }, &p, &g, PairSampling::PerRotor).unwrap();
        assert!(d.theta_rate.abs() < 1e-12);
    }

    #[test]
    fn planar_terminal_sink() {
        let (p, g) = setup();
        let vt = p.terminal_sink_speed().unwrap();
        let s = State2D { z: -1.0, vz: -vt, ..Default::default() };
        let d = state_derivative_2d(&s, &PairCommand::default(), &p, &g, PairSampling::MeanStation).unwrap();
        assert!(d.vz.abs() < 1e-3);
    }

    #[test]
    fn drag_decomposes_with_angle_of_attack() {
        let (p, g) = setup();
        let s = State2D { z: -1.0, vx: 0.3, vz: -0.2, ..Default::default() };
        let d = state_derivative_2d(&s, &PairCommand::default(), &p, &g, PairSampling::MeanStation).unwrap();
        let speed = (0.3f64 * 0.3 + 0.2 * 0.2).sqrt();
        let fd = 0.5 * p.rho_water * p.drag_coefficient * p.drag_area * speed * speed;
        let alpha = angle_of_attack(0.3, -0.2);
        // the drag magnitudes per axis are F_d sin(alpha) and F_d cos(alpha)
        assert!((d.vx.abs() * p.mass - fd * alpha.sin()).abs() < 1e-12);
        assert!(((d.vz + p.g_water).abs() * p.mass - fd * alpha.cos().abs()).abs() < 1e-12);
        assert!(d.vx < 0.0 && d.vz + p.g_water > 0.0);
    }

    #[test]
    fn thrust_direction_follows_pitch() {
        let (p, g) = setup();
        let u = PairCommand { speeds: [300.0; 4] };
        let level = state_derivative_2d(&State2D { z: 1.0, ..Default::default() }, &u, &p, &g, PairSampling::MeanStation).unwrap();
        assert_eq!(level.vx, 0.0);
        let sideways = State2D { z: 1.0, theta: PI / 2.0, ..Default::default() };
        let d = state_derivative_2d(&sideways, &u, &p, &g, PairSampling::MeanStation).unwrap();
        assert!((d.vz + p.g_air).abs() < 1e-12);
        assert!(d.vx > 0.0);
    }

    #[test]
    fn reduce_cases() {
        let planar = State2D { x: 1.0, z: -0.5, vx: 0.2, vz: -0.1, theta: 0.3, theta_rate: 0.05 };
        let s = State3D::from_planar(&planar);
        assert_eq!(reduce_3d_to_2d(&s, 1e-6).unwrap(), planar);
        let hover = State3D { position: Vec3::new(0.0, 0.0, 1.0), ..Default::default() };
        assert_eq!(reduce_3d_to_2d(&hover, 1e-6).unwrap(), State2D { z: 1.0, ..Default::default() });
        let mut off = s;
        off.velocity.y = 0.1;
        assert!(matches!(reduce_3d_to_2d(&off, 1e-6), Err(Error::NotPlanar { .. })));
    }

    #[test]
    fn array_roundtrip() {
        let s = State3D {
            position: Vec3::new(1.0, 2.0, 3.0),
            velocity: Vec3::new(4.0, 5.0, 6.0),
            attitude: EulerAngles::new(0.1, 0.2, 0.3),
            rates: Vec3::new(7.0, 8.0, 9.0),
        };
        assert_eq!(State3D::from_slice(&s.to_array()), s);
    }

    fn rel_close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
    }

    proptest! {
        #[test]
        fn planar_consistency(
            x in -5.0..5.0f64, z in -3.0..3.0f64,
            vx in -1.0..1.0f64, vz in -1.0..1.0f64,
            theta in -1.4..1.4f64, q in -2.0..2.0f64,
            front in 0.0..1.0f64, rear in 0.0..1.0f64,
        ) {
            // left and right arms mirror each other
            let u = [front, front, rear, rear];
            let (p, g) = setup();
            let s2 = State2D { x, z, vx, vz, theta, theta_rate: q };
            let s3 = State3D::from_planar(&s2);
            let rotors = std::array::from_fn(|i| {
                let m = density_at(z, g.rotors[i].station, &p);
                u[g.rotors[i].arm] * p.omega_max_water.min(if m.in_air { p.omega_max_air } else { p.omega_max_water })
            });
            let cmd = RotorCommand { speeds: rotors };
            let d3 = state_derivative_3d(&s3, &cmd, &p, &g).unwrap();
            let r3 = reduce_3d_to_2d(&d3, 1e-9).unwrap();
            let d2 = state_derivative_2d_rotors(&s2, &cmd, &p, &g).unwrap();
            for (a, b) in r3.to_array().iter().zip(d2.to_array()) {
                prop_assert!(rel_close(*a, b, 1e-9), "{a} vs {b}");
            }
            // away from the interface the pair form agrees as well
            if z.abs() > 0.06 {
                let pairs = PairCommand { speeds: std::array::from_fn(|a| rotors[2 * a]) };
                let dp = state_derivative_2d(&s2, &pairs, &p, &g, PairSampling::MeanStation).unwrap();
                for (a, b) in dp.to_array().iter().zip(d2.to_array()) {
                    prop_assert!(rel_close(*a, b, 1e-9), "{a} vs {b}");
                }
            }
        }

        #[test]
        fn drag_is_dissipative(z in -3.0..3.0f64, vx in -2.0..2.0f64, vz in -2.0..2.0f64) {
            let (p, g) = setup();
            let s = State2D { z, vx, vz, ..Default::default() };
            let d = state_derivative_2d(&s, &PairCommand::default(), &p, &g, PairSampling::MeanStation).unwrap();
            let drag_x = d.vx * p.mass;
            let drag_z = (d.vz + gravity_at(z, &p)) * p.mass;
            prop_assert!(drag_x * vx + drag_z * vz <= 1e-15);
        }
    }
}
