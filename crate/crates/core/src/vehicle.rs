//! Vehicle parameters, rotor layout, per-rotor medium sensing and the
//! force/torque laws built on the momentum-theory thrust model
//! `T = K_T * rho * omega^2`.

use std::f64::consts::PI;

use crate::control::PDGains;
use crate::error::{Error, Result};
use crate::geom3d::Vec3;

pub const ROTORS: usize = 8;
pub const ARMS: usize = 4;

/// Physical and control constants of the vehicle.
///
/// Defaults reproduce the published simulation table. `k_q`, `rotor_inertia`,
/// `i_xx` and `i_zz` have no published value; their defaults are
/// engineering choices (`K_Q = 1e-6`, `I_r = 1e-5`, `I_xx = I_yy`,
/// `I_zz = 2 I_yy`) and should be overridden when better data exist.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams {
    /// m, kg
    pub mass: f64,
    pub i_xx: f64,
    pub i_yy: f64,
    pub i_zz: f64,
    /// K_T, m^4/rad^2
    pub k_t: f64,
    /// K_Q, m^5/rad^2
    pub k_q: f64,
    /// d, centroid-to-rotor distance in the body xy-plane, m
    pub arm_length: f64,
    pub drag_coefficient: f64,
    /// Drag reference area, m^2
    pub drag_area: f64,
    pub rho_air: f64,
    pub rho_water: f64,
    pub g_air: f64,
    /// Residual sink acceleration of the quasi-neutrally buoyant hull.
    pub g_water: f64,
    pub omega_max_air: f64,
    pub omega_max_water: f64,
    pub rotor_inertia: f64,
    /// (K_P1, K_D1)
    pub gains_1: PDGains,
    /// (K_P2, K_D2)
    pub gains_2: PDGains,
}

impl Default for VehicleParams {
    fn default() -> Self {
        let i_yy = 3.46e-2;
        Self {
            mass: 2.00,
            i_xx: i_yy,
            i_yy,
            i_zz: 2.0 * i_yy,
            k_t: 1.34e-5,
            k_q: 1.0e-6,
            arm_length: 0.3,
            drag_coefficient: 0.8,
            drag_area: 6.16e-2,
            rho_air: 1.225,
            rho_water: 999.97,
            g_air: 9.81,
            g_water: 0.35,
            omega_max_air: 773.1,
            omega_max_water: 23.25,
            rotor_inertia: 1.0e-5,
            gains_1: PDGains { kp: 1.50, kd: -1.70 },
            gains_2: PDGains { kp: 1.00, kd: -0.84 },
        }
    }
}

impl VehicleParams {
    /// Every violated invariant, each message naming its config key.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("m", self.mass),
            ("I_xx", self.i_xx),
            ("I_yy", self.i_yy),
            ("I_zz", self.i_zz),
            ("K_t", self.k_t),
            ("K_Q", self.k_q),
            ("d", self.arm_length),
            ("A", self.drag_area),
            ("rho_air", self.rho_air),
            ("rho_water", self.rho_water),
            ("g_air", self.g_air),
            ("g_water", self.g_water),
            ("omega_max_air", self.omega_max_air),
            ("omega_max_water", self.omega_max_water),
            ("I_r", self.rotor_inertia),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{key} must be finite and > 0 (got {v})"));
            }
        }
        // C_d = 0 is allowed: it disables drag.
        if !(self.drag_coefficient.is_finite() && self.drag_coefficient >= 0.0) {
            out.push(format!(
                "C_d must be finite and >= 0 (got {})",
                self.drag_coefficient
            ));
        }
        if self.rho_water <= self.rho_air {
            out.push("rho_water must exceed rho_air".into());
        }
        if self.omega_max_air <= self.omega_max_water {
            out.push("omega_max_air must exceed omega_max_water".into());
        }
        if self.g_water >= self.g_air {
            out.push("g_water must be below g_air".into());
        }
        for (kp_key, kd_key, g) in [
            ("K_P1", "K_D1", self.gains_1),
            ("K_P2", "K_D2", self.gains_2),
        ] {
            if !(g.kp.is_finite() && g.kp > 0.0) {
                out.push(format!("{kp_key} must be finite and > 0 (got {})", g.kp));
            }
            if !g.kd.is_finite() {
                out.push(format!("{kd_key} must be finite (got {})", g.kd));
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

    pub fn omega_max(&self, in_air: bool) -> f64 {
        if in_air {
            self.omega_max_air
        } else {
            self.omega_max_water
        }
    }

    /// Rotor speed at which eight rotors in air balance the weight.
    pub fn hover_speed(&self) -> f64 {
        (self.mass * self.g_air / (ROTORS as f64 * self.k_t * self.rho_air)).sqrt()
    }

    /// Steady rotors-off sink speed in water, or `None` without drag.
    pub fn terminal_sink_speed(&self) -> Option<f64> {
        let k = self.rho_water * self.drag_coefficient * self.drag_area;
        (k > 0.0).then(|| (2.0 * self.mass * self.g_water / k).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Ccw,
    Cw,
}

impl Spin {
    /// sigma: -1 for CCW, +1 for CW
    pub fn sigma(self) -> f64 {
        match self {
            Spin::Ccw => -1.0,
            Spin::Cw => 1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Spin::Ccw => Spin::Cw,
            Spin::Cw => Spin::Ccw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotor {
    /// Arm azimuth about body z, rad.
    pub azimuth: f64,
    pub spin: Spin,
    /// Signed vertical station h_i relative to the airframe datum, m.
    /// The rotor reads as in air while `Z - h_i >= 0`.
    pub station: f64,
    /// Arm index 0..4.
    pub arm: usize,
}

/// Eight rotors on four arms; rotor `2a` is the upper (h > 0) and `2a + 1`
/// the lower (h < 0) rotor of arm `a`.
///
/// Arms 0 and 1 sit at positive body x (cos azimuth > 0) and arms 2 and 3 at
/// negative body x, so the planar pitch torque carries the sign pattern
/// (-, -, +, +) over arms.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorGeometry {
    pub rotors: [Rotor; ROTORS],
}

impl Default for RotorGeometry {
    fn default() -> Self {
        Self::symmetric(
            [45.0, 315.0, 135.0, 225.0],
            [Spin::Cw, Spin::Ccw, Spin::Cw, Spin::Ccw],
            0.05,
            -0.05,
        )
    }
}

impl RotorGeometry {
    /// Coaxial counter-rotating arms: the lower rotor of each arm spins
    /// opposite to its upper rotor.
    pub fn symmetric(
        azimuths_deg: [f64; ARMS],
        upper_spins: [Spin; ARMS],
        upper_station: f64,
        lower_station: f64,
    ) -> Self {
        let rotors = std::array::from_fn(|i| {
            let arm = i / 2;
            let upper = i % 2 == 0;
            Rotor {
                azimuth: azimuths_deg[arm] * PI / 180.0,
                spin: if upper {
                    upper_spins[arm]
                } else {
                    upper_spins[arm].reversed()
                },
                station: if upper { upper_station } else { lower_station },
                arm,
            }
        });
        Self { rotors }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let cw = self.rotors.iter().filter(|r| r.spin == Spin::Cw).count();
        if cw != 4 {
            out.push(format!("geometry needs 4 CW and 4 CCW rotors, found {cw} CW"));
        }
        for arm in 0..ARMS {
            let on_arm: Vec<&Rotor> = self.rotors.iter().filter(|r| r.arm == arm).collect();
            let upper = on_arm.iter().filter(|r| r.station > 0.0).count();
            let lower = on_arm.iter().filter(|r| r.station < 0.0).count();
            if on_arm.len() != 2 || upper != 1 || lower != 1 {
                out.push(format!(
                    "arm {} must host one upper (h > 0) and one lower (h < 0) rotor",
                    arm + 1
                ));
            }
        }
        for (i, r) in self.rotors.iter().enumerate() {
            if !(r.azimuth.is_finite() && r.station.is_finite()) {
                out.push(format!("rotor {} has non-finite azimuth or station", i + 1));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Geometry(v.join("; ")))
        }
    }

    pub fn stations(&self) -> [f64; ROTORS] {
        std::array::from_fn(|i| self.rotors[i].station)
    }

    /// Mean station of each arm.
    pub fn arm_stations(&self) -> [f64; ARMS] {
        let mut sum = [0.0; ARMS];
        let mut n = [0usize; ARMS];
        for r in &self.rotors {
            sum[r.arm] += r.station;
            n[r.arm] += 1;
        }
        std::array::from_fn(|a| sum[a] / n[a].max(1) as f64)
    }
}

/// Local medium seen by one rotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSample {
    pub rho: f64,
    /// Effective gravity; follows the airframe centroid, not the rotor.
    pub g_eff: f64,
    pub in_air: bool,
}

/// Unit step with `H(0) = 1`.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Medium at a rotor whose station is `station` when the airframe sits at
/// `z` relative to the interface: `rho = rho_water + H(z - h)(rho_air - rho_water)`.
pub fn density_at(z: f64, station: f64, params: &VehicleParams) -> MediumSample {
    // selecting rather than blending keeps both densities exact
    let in_air = heaviside(z - station) == 1.0;
    MediumSample {
        rho: if in_air { params.rho_air } else { params.rho_water },
        g_eff: gravity_at(z, params),
        in_air,
    }
}

/// Effective gravity on the hull, switched on the sign of the centroid's Z.
pub fn gravity_at(z: f64, params: &VehicleParams) -> f64 {
    if z >= 0.0 {
        params.g_air
    } else {
        params.g_water
    }
}

/// Medium at the airframe centroid.
pub fn centroid_medium(z: f64, params: &VehicleParams) -> MediumSample {
    density_at(z, 0.0, params)
}

/// Per-rotor media for airframe height `z`.
pub fn rotor_media(z: f64, geometry: &RotorGeometry, params: &VehicleParams) -> [MediumSample; ROTORS] {
    std::array::from_fn(|i| density_at(z, geometry.rotors[i].station, params))
}

fn check_speed(omega: f64) -> Result<()> {
    if omega.is_nan() {
        return Err(Error::NonFinite {
            what: "rotor speed",
        });
    }
    if omega < 0.0 {
        return Err(Error::NegativeRotorSpeed { omega });
    }
    Ok(())
}

/// Thrust along the rotor axis, N.
pub fn rotor_thrust(omega: f64, rho: f64, params: &VehicleParams) -> Result<f64> {
    check_speed(omega)?;
    Ok(params.k_t * rho * omega * omega)
}

/// Signed reaction torque about body z, `sigma * K_Q * rho * omega^2`.
pub fn rotor_reaction_torque(omega: f64, rho: f64, spin: Spin, params: &VehicleParams) -> Result<f64> {
    check_speed(omega)?;
    Ok(spin.sigma() * params.k_q * rho * omega * omega)
}

/// Momentum-theory thrust coefficient `T / (rho A (omega b)^2)`.
pub fn thrust_coefficient(thrust: f64, rho: f64, omega: f64, disk_area: f64, radius: f64) -> Result<f64> {
    let denom = rho * disk_area * (omega * radius).powi(2);
    if !(rho > 0.0 && omega > 0.0 && disk_area > 0.0 && radius > 0.0) || denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(thrust / denom)
}

/// Combined coefficient of a coaxial upper/lower pair. Analysis only: the
/// simulator neglects coaxial interference.
pub fn coaxial_thrust_coefficient(
    thrust_upper: f64,
    thrust_lower: f64,
    rho: f64,
    omega: f64,
    disk_area: f64,
    radius: f64,
) -> Result<f64> {
    thrust_coefficient(thrust_upper + thrust_lower, rho, omega, disk_area, radius)
}

/// `K_T * sum(rho_i omega_i^2)`.
pub fn total_thrust(omegas: &[f64], rhos: &[f64], params: &VehicleParams) -> f64 {
    params.k_t
        * omegas
            .iter()
            .zip(rhos)
            .map(|(w, rho)| rho * w * w)
            .sum::<f64>()
}

/// Reaction moments `(tau_phi, tau_theta, tau_psi)`:
///
/// ```text
/// tau_phi   =  K_T sum rho_i d sin(Phi_i) w_i^2
/// tau_theta = -K_T sum rho_i d cos(Phi_i) w_i^2
/// tau_psi   =  K_Q sum rho_i sigma_i w_i^2
/// ```
pub fn control_torque(
    omegas: &[f64; ROTORS],
    rhos: &[f64; ROTORS],
    geometry: &RotorGeometry,
    params: &VehicleParams,
) -> Vec3 {
    let mut tau = Vec3::zeros();
    for ((r, w), rho) in geometry.rotors.iter().zip(omegas).zip(rhos) {
        let f = rho * w * w;
        let (s, c) = r.azimuth.sin_cos();
        tau.x += f * s;
        tau.y -= f * c;
        tau.z += f * r.spin.sigma();
    }
    Vec3::new(
        params.k_t * params.arm_length * tau.x,
        params.k_t * params.arm_length * tau.y,
        params.k_q * tau.z,
    )
}

/// Gyroscopic moment `I_r (omega x k) sum s_i`, with signed spin
/// `s_i = -sigma_i * w_i` so that counter-rotating pairs cancel.
pub fn gyroscopic_torque(
    body_rates: &Vec3,
    omegas: &[f64; ROTORS],
    geometry: &RotorGeometry,
    params: &VehicleParams,
) -> Vec3 {
    let net_spin: f64 = geometry
        .rotors
        .iter()
        .zip(omegas)
        .map(|(r, w)| -r.spin.sigma() * w)
        .sum();
    body_rates.cross(&Vec3::z()) * (params.rotor_inertia * net_spin)
}

/// Quadratic drag `-1/2 rho C_d A |v| v`.
pub fn drag_force(velocity: &Vec3, rho: f64, params: &VehicleParams) -> Vec3 {
    let speed = velocity.norm();
    velocity * (-0.5 * rho * params.drag_coefficient * params.drag_area * speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p() -> VehicleParams {
        VehicleParams::default()
    }

    #[test]
    fn heaviside_convention() {
        assert_eq!(heaviside(-0.5), 0.0);
        assert_eq!(heaviside(0.5), 1.0);
        assert_eq!(heaviside(0.0), 1.0);
    }

    #[test]
    fn density_switches_at_station() {
        let p = p();
        assert_eq!(density_at(1.0, 0.0, &p).rho, 1.225);
        assert_eq!(density_at(-1.0, 0.0, &p).rho, 999.97);
        assert_eq!(density_at(0.3, 0.3, &p).rho, 1.225);
        assert!(density_at(0.3, 0.3, &p).in_air);
        // gravity follows the centroid, not the rotor
        let s = density_at(-0.01, -0.05, &p);
        assert!(s.in_air);
        assert_eq!(s.g_eff, p.g_water);
        assert_eq!(density_at(0.0, 0.05, &p).g_eff, p.g_air);
    }

    #[test]
    fn thrust_values() {
        let p = p();
        assert_eq!(rotor_thrust(0.0, 1.225, &p).unwrap(), 0.0);
        // K_T rho w^2 = 1.34e-5 * 1.225 * 773.1^2
        let t_air = rotor_thrust(773.1, 1.225, &p).unwrap();
        assert_relative_eq!(t_air, 9.810_976_458, max_relative = 1e-9);
        let t_water = rotor_thrust(23.25, 999.97, &p).unwrap();
        assert_relative_eq!(t_water, 7.243_320_194, max_relative = 1e-9);
        assert!(matches!(
            rotor_thrust(-1.0, 1.225, &p),
            Err(Error::NegativeRotorSpeed { .. })
        ));
    }

    #[test]
    fn reaction_torque_values() {
        let p = p();
        assert_eq!(rotor_reaction_torque(0.0, 1.225, Spin::Cw, &p).unwrap(), 0.0);
        let cw = rotor_reaction_torque(100.0, 1.225, Spin::Cw, &p).unwrap();
        let ccw = rotor_reaction_torque(100.0, 1.225, Spin::Ccw, &p).unwrap();
        assert_eq!(cw + ccw, 0.0);
        assert_relative_eq!(cw, 1.0e-6 * 1.225 * 1.0e4, max_relative = 1e-15);
        assert!(rotor_reaction_torque(-3.0, 1.225, Spin::Cw, &p).is_err());
    }

    #[test]
    fn thrust_coefficients() {
        let b = 0.127;
        let area = PI * b * b;
        assert_eq!(thrust_coefficient(0.0, 1.225, 773.1, area, b).unwrap(), 0.0);
        let t = 1.225 * area * (773.1 * b).powi(2);
        assert_relative_eq!(thrust_coefficient(t, 1.225, 773.1, area, b).unwrap(), 1.0, max_relative = 1e-15);
        // hand evaluation: 9.81 / (1.225 * pi * 0.127^2 * (773.1 * 0.127)^2)
        let ct = thrust_coefficient(9.81, 1.225, 773.1, area, b).unwrap();
        assert_relative_eq!(ct, 0.016_394_448_6, max_relative = 1e-8);
        assert!(matches!(
            thrust_coefficient(1.0, 1.225, 0.0, area, b),
            Err(Error::ZeroDenominator)
        ));

        let single = thrust_coefficient(3.0, 999.97, 20.0, area, b).unwrap();
        assert_eq!(coaxial_thrust_coefficient(0.0, 0.0, 999.97, 20.0, area, b).unwrap(), 0.0);
        assert_eq!(coaxial_thrust_coefficient(3.0, 0.0, 999.97, 20.0, area, b).unwrap(), single);
        assert_relative_eq!(
            coaxial_thrust_coefficient(3.0, 3.0, 999.97, 20.0, area, b).unwrap(),
            2.0 * single,
            max_relative = 1e-15
        );
    }

    #[test]
    fn total_thrust_cases() {
        let p = p();
        assert_eq!(total_thrust(&[0.0; 8], &[1.225; 8], &p), 0.0);
        let wh = p.hover_speed();
        assert_relative_eq!(wh, 386.53, epsilon = 0.01);
        assert_relative_eq!(total_thrust(&[wh; 8], &[1.225; 8], &p), 19.62, max_relative = 1e-12);
        let w = 10.0;
        let mixed = [1.225, 999.97, 1.225, 999.97, 1.225, 999.97, 1.225, 999.97];
        assert_relative_eq!(
            total_thrust(&[w; 8], &mixed, &p),
            p.k_t * w * w * (4.0 * 1.225 + 4.0 * 999.97),
            max_relative = 1e-14
        );
    }

    #[test]
    fn control_torque_symmetry_and_row_signs() {
        let p = p();
        let g = RotorGeometry::default();
        let tau = control_torque(&[300.0; 8], &[1.225; 8], &g, &p);
        assert!(tau.amax() < 1e-12);

        // only the upper rotor on the 45 degree arm
        let mut w = [0.0; 8];
        w[0] = 300.0;
        let tau = control_torque(&w, &[1.225; 8], &g, &p);
        assert_relative_eq!(tau.x / tau.y, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn control_torque_pitch_reduces_to_planar_form() {
        let p = p();
        let g = RotorGeometry::default();
        let pair = [210.0, 195.0, 230.0, 260.0];
        let rho_pair = [1.225, 999.97, 1.225, 1.225];
        let w: [f64; 8] = std::array::from_fn(|i| pair[i / 2]);
        let rho: [f64; 8] = std::array::from_fn(|i| rho_pair[i / 2]);
        let tau = control_torque(&w, &rho, &g, &p);
        let s: f64 = -rho_pair[0] * pair[0].powi(2) - rho_pair[1] * pair[1].powi(2)
            + rho_pair[2] * pair[2].powi(2)
            + rho_pair[3] * pair[3].powi(2);
        let planar = 2.0 * p.k_t * p.arm_length * (2f64.sqrt() / 2.0) * s;
        assert_relative_eq!(tau.y, planar, max_relative = 1e-12);
    }

    #[test]
    fn yaw_cancels_for_balanced_spins() {
        let p = p();
        let g = RotorGeometry::default();
        let w = [100.0, 100.0, 120.0, 120.0, 90.0, 90.0, 80.0, 80.0];
        let tau = control_torque(&w, &[999.97; 8], &g, &p);
        assert!(tau.z.abs() < 1e-15);
    }

    #[test]
    fn gyroscopic_cases() {
        let p = p();
        let g = RotorGeometry::default();
        assert_eq!(
            gyroscopic_torque(&Vec3::new(0.0, 0.0, 3.0), &[200.0; 8], &g, &p),
            Vec3::zeros()
        );
        assert_eq!(
            gyroscopic_torque(&Vec3::new(1.0, 2.0, 3.0), &[0.0; 8], &g, &p),
            Vec3::zeros()
        );
        // rotor 2 (index 1) is CCW, so its signed spin is +w
        let mut w = [0.0; 8];
        w[1] = 50.0;
        assert_eq!(g.rotors[1].spin, Spin::Ccw);
        let tau = gyroscopic_torque(&Vec3::new(1.0, 0.0, 0.0), &w, &g, &p);
        assert_relative_eq!(tau.y, -p.rotor_inertia * 50.0, max_relative = 1e-15);
        assert_eq!(tau.x, 0.0);
        assert_eq!(tau.z, 0.0);
    }

    #[test]
    fn drag_terminal_balances() {
        let p = p();
        assert_eq!(drag_force(&Vec3::zeros(), 999.97, &p), Vec3::zeros());
        let vt = p.terminal_sink_speed().unwrap();
        assert_relative_eq!(vt, 0.1686, epsilon = 1e-4);
        let f = drag_force(&Vec3::new(0.0, 0.0, -vt), p.rho_water, &p);
        assert_relative_eq!(f.z, p.mass * p.g_water, max_relative = 1e-12);
        // air: v = sqrt(2 m g / (rho_air C_d A)) ~ 25.5 m/s
        let va = (2.0 * p.mass * p.g_air / (p.rho_air * p.drag_coefficient * p.drag_area)).sqrt();
        assert_relative_eq!(va, 25.5, epsilon = 0.05);
        let f = drag_force(&Vec3::new(0.0, 0.0, -va), p.rho_air, &p);
        assert_relative_eq!(f.z, 19.62, max_relative = 1e-12);
    }

    #[test]
    fn default_geometry_is_valid() {
        let g = RotorGeometry::default();
        assert!(g.violations().is_empty());
        assert_eq!(g.arm_stations(), [0.0; 4]);
        let mut bad = g.clone();
        bad.rotors[1].spin = Spin::Cw;
        assert!(bad.validate().is_err());
        let mut bad = g;
        bad.rotors[1].station = 0.05;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn default_params_validate() {
        assert!(p().violations().is_empty());
        let mut bad = p();
        bad.mass = -1.0;
        let v = bad.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].starts_with("m "));
    }

    proptest! {
        #[test]
        fn medium_thrust_ratio(w in 1e-3..1e3f64) {
            let p = p();
            let ratio = rotor_thrust(w, p.rho_water, &p).unwrap() / rotor_thrust(w, p.rho_air, &p).unwrap();
            prop_assert!((ratio / (p.rho_water / p.rho_air) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn density_piecewise_constant(z in -5.0..5.0f64, h in -0.5..0.5f64) {
            let p = p();
            let s = density_at(z, h, &p);
            if z >= h { prop_assert_eq!(s.rho, p.rho_air) } else { prop_assert_eq!(s.rho, p.rho_water) }
        }

        #[test]
        fn drag_opposes_and_scales(vx in -3.0..3.0f64, vy in -3.0..3.0f64, vz in -3.0..3.0f64, s in 0.1..10.0f64) {
            let p = p();
            let v = Vec3::new(vx, vy, vz);
            let f = drag_force(&v, p.rho_water, &p);
            prop_assert!(f.dot(&v) <= 0.0);
            if v.norm() > 1e-6 {
                prop_assert!((f.normalize().dot(&v.normalize()) + 1.0).abs() < 1e-12);
                let fs = drag_force(&(v * s), p.rho_water, &p);
                prop_assert!((fs.norm() / f.norm() - s * s).abs() < 1e-9 * s * s);
            }
        }

        #[test]
        fn yaw_zero_when_spin_sums_match(a in 0.0..500.0f64, b in 0.0..500.0f64, c in 0.0..500.0f64, d in 0.0..500.0f64) {
            // each arm's pair shares a speed, so CW and CCW rho w^2 sums agree
            let p = p();
            let g = RotorGeometry::default();
            let w = [a, a, b, b, c, c, d, d];
            prop_assert!(control_torque(&w, &[p.rho_air; 8], &g, &p).z.abs() < 1e-12);
        }
    }
}
