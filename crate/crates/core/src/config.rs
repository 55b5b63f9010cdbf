//! Scenario configuration in sectioned TOML.
//!
//! ```toml
//! [vehicle]      # m, I_yy, K_t, d, C_d, A, rho_air, ... K_P1, K_D1, K_P2, K_D2
//! [geometry]     # azimuths_deg, upper_spins, upper_station, lower_station
//! [integrator]   # method, rel_tol, abs_tol, h_init, h_min, h_max, event_tol, ...
//! [mission]      # mode, target_depth, cruise_pitch_deg, cruise_throttle, ...
//! [scenario]     # model, sample_interval, x0, z0, theta0_deg, output, format
//! ```
//!
//! Every key is optional; missing keys take the defaults. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::control::{Allocation, MissionMode, MissionPlan, PDGains};
use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, Method};
use crate::vehicle::{RotorGeometry, Spin, VehicleParams, ARMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum Model {
    #[default]
    #[serde(rename = "2d")]
    Planar,
    #[serde(rename = "3d")]
    Full,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2d" => Ok(Model::Planar),
            "3d" => Ok(Model::Full),
            other => Err(Error::ConfigParse(format!("unknown model {other:?} (expected 2d or 3d)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::Jsonl),
            other => Err(Error::ConfigParse(format!("unknown format {other:?} (expected csv or jsonl)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub vehicle: VehicleParams,
    pub geometry: RotorGeometry,
    pub integrator: IntegratorConfig,
    pub mission: MissionPlan,
    pub model: Model,
    /// s
    pub sample_interval: f64,
    pub x0: f64,
    pub z0: f64,
    /// rad
    pub theta0: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::default(),
            geometry: RotorGeometry::default(),
            integrator: IntegratorConfig::default(),
            mission: MissionPlan::default(),
            model: Model::Planar,
            sample_interval: 0.01,
            x0: 0.0,
            z0: 1.0,
            theta0: 0.0,
            output: None,
            format: Format::Csv,
        }
    }
}

impl ScenarioConfig {
    /// Every violated invariant across all blocks.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        out.extend(self.vehicle.violations().into_iter().map(|m| format!("vehicle: {m}")));
        out.extend(self.geometry.violations().into_iter().map(|m| format!("geometry: {m}")));
        out.extend(self.integrator.violations().into_iter().map(|m| format!("integrator: {m}")));
        out.extend(self.mission.violations().into_iter().map(|m| format!("mission: {m}")));
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            out.push(format!("scenario: sample_interval must be finite and > 0 (got {})", self.sample_interval));
        }
        for (k, v) in [("x0", self.x0), ("z0", self.z0)] {
            if !v.is_finite() {
                out.push(format!("scenario: {k} must be finite"));
            }
        }
        if !(self.theta0.abs() < std::f64::consts::FRAC_PI_2) {
            out.push("scenario: theta0_deg must lie strictly between -90 and 90".into());
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
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    vehicle: RawVehicle,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    mission: RawMission,
    #[serde(default)]
    scenario: RawScenario,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawVehicle {
    m: Option<f64>,
    I_xx: Option<f64>,
    I_yy: Option<f64>,
    I_zz: Option<f64>,
    K_t: Option<f64>,
    K_Q: Option<f64>,
    I_r: Option<f64>,
    d: Option<f64>,
    C_d: Option<f64>,
    A: Option<f64>,
    rho_air: Option<f64>,
    rho_water: Option<f64>,
    g_air: Option<f64>,
    g_water: Option<f64>,
    omega_max_air: Option<f64>,
    omega_max_water: Option<f64>,
    K_P1: Option<f64>,
    K_D1: Option<f64>,
    K_P2: Option<f64>,
    K_D2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawSpin {
    Cw,
    Ccw,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    azimuths_deg: Option<[f64; ARMS]>,
    upper_spins: Option<[RawSpin; ARMS]>,
    upper_station: Option<f64>,
    lower_station: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawMethod {
    Dopri45,
    Rk4,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: Option<RawMethod>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    h_init: Option<f64>,
    h_min: Option<f64>,
    h_max: Option<f64>,
    event_tol: Option<f64>,
    fixed_step: Option<f64>,
    max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawMode {
    Mission,
    Hover,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawAllocation {
    Linearized,
    Exact,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMission {
    mode: Option<RawMode>,
    target_depth: Option<f64>,
    cruise_pitch_deg: Option<f64>,
    cruise_throttle: Option<f64>,
    cruise_duration: Option<f64>,
    descent_rate: Option<f64>,
    interface_band: Option<f64>,
    clearance: Option<f64>,
    settle_band_deg: Option<f64>,
    settle_time: Option<f64>,
    stage_timeouts: Option<[f64; 5]>,
    single_gain_set: Option<bool>,
    allocation: Option<RawAllocation>,
    climb_gain: Option<f64>,
    depth_gain: Option<f64>,
    hover_duration: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    model: Option<Model>,
    sample_interval: Option<f64>,
    x0: Option<f64>,
    z0: Option<f64>,
    theta0_deg: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RawConfig {
    fn build(self) -> ScenarioConfig {
        let mut c = ScenarioConfig::default();

        let v = self.vehicle;
        let p = &mut c.vehicle;
        // I_xx and I_zz follow I_yy unless given
        if let Some(iyy) = v.I_yy {
            p.i_yy = iyy;
            p.i_xx = iyy;
            p.i_zz = 2.0 * iyy;
        }
        set(&mut p.mass, v.m);
        set(&mut p.i_xx, v.I_xx);
        set(&mut p.i_zz, v.I_zz);
        set(&mut p.k_t, v.K_t);
        set(&mut p.k_q, v.K_Q);
        set(&mut p.rotor_inertia, v.I_r);
        set(&mut p.arm_length, v.d);
        set(&mut p.drag_coefficient, v.C_d);
        set(&mut p.drag_area, v.A);
        set(&mut p.rho_air, v.rho_air);
        set(&mut p.rho_water, v.rho_water);
        set(&mut p.g_air, v.g_air);
        set(&mut p.g_water, v.g_water);
        set(&mut p.omega_max_air, v.omega_max_air);
        set(&mut p.omega_max_water, v.omega_max_water);
        p.gains_1 = PDGains {
            kp: v.K_P1.unwrap_or(p.gains_1.kp),
            kd: v.K_D1.unwrap_or(p.gains_1.kd),
        };
        p.gains_2 = PDGains {
            kp: v.K_P2.unwrap_or(p.gains_2.kp),
            kd: v.K_D2.unwrap_or(p.gains_2.kd),
        };

        let g = self.geometry;
        let def = RotorGeometry::default();
        let az = g
            .azimuths_deg
            .unwrap_or(std::array::from_fn(|a| def.rotors[2 * a].azimuth.to_degrees()));
        let spins = g
            .upper_spins
            .map(|s| {
                s.map(|x| match x {
                    RawSpin::Cw => Spin::Cw,
                    RawSpin::Ccw => Spin::Ccw,
                })
            })
            .unwrap_or(std::array::from_fn(|a| def.rotors[2 * a].spin));
        c.geometry = RotorGeometry::symmetric(
            az,
            spins,
            g.upper_station.unwrap_or(def.rotors[0].station),
            g.lower_station.unwrap_or(def.rotors[1].station),
        );
        if g.azimuths_deg.is_none() {
            // keep the exact default angles rather than a degree round trip
            for (r, d) in c.geometry.rotors.iter_mut().zip(def.rotors.iter()) {
                r.azimuth = d.azimuth;
            }
        }

        let i = self.integrator;
        let ic = &mut c.integrator;
        if let Some(m) = i.method {
            ic.method = match m {
                RawMethod::Dopri45 => Method::DormandPrince45,
                RawMethod::Rk4 => Method::Rk4,
            };
        }
        set(&mut ic.rel_tol, i.rel_tol);
        set(&mut ic.abs_tol, i.abs_tol);
        set(&mut ic.h_init, i.h_init);
        set(&mut ic.h_min, i.h_min);
        set(&mut ic.h_max, i.h_max);
        set(&mut ic.event_tol, i.event_tol);
        set(&mut ic.fixed_step, i.fixed_step);
        set(&mut ic.max_steps, i.max_steps);

        let m = self.mission;
        let mp = &mut c.mission;
        if let Some(mode) = m.mode {
            mp.mode = match mode {
                RawMode::Mission => MissionMode::FiveStage,
                RawMode::Hover => MissionMode::Hover,
            };
        }
        if let Some(a) = m.allocation {
            mp.allocation = match a {
                RawAllocation::Linearized => Allocation::Linearized,
                RawAllocation::Exact => Allocation::Exact,
            };
        }
        set(&mut mp.target_depth, m.target_depth);
        set(&mut mp.cruise_pitch, m.cruise_pitch_deg.map(f64::to_radians));
        set(&mut mp.cruise_throttle, m.cruise_throttle);
        set(&mut mp.cruise_duration, m.cruise_duration);
        set(&mut mp.descent_rate, m.descent_rate);
        set(&mut mp.interface_band, m.interface_band);
        set(&mut mp.clearance, m.clearance);
        set(&mut mp.settle_band, m.settle_band_deg.map(f64::to_radians));
        set(&mut mp.settle_time, m.settle_time);
        set(&mut mp.stage_timeouts, m.stage_timeouts);
        set(&mut mp.single_gain_set, m.single_gain_set);
        set(&mut mp.climb_gain, m.climb_gain);
        set(&mut mp.depth_gain, m.depth_gain);
        set(&mut mp.hover_duration, m.hover_duration);

        let s = self.scenario;
        set(&mut c.model, s.model);
        set(&mut c.sample_interval, s.sample_interval);
        set(&mut c.x0, s.x0);
        set(&mut c.z0, s.z0);
        set(&mut c.theta0, s.theta0_deg.map(f64::to_radians));
        c.output = s.output;
        set(&mut c.format, s.format);
        c
    }
}

fn parse_table(table: toml::Table) -> Result<ScenarioConfig> {
    let raw: RawConfig = table.try_into().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
    let cfg = raw.build();
    cfg.validate()?;
    Ok(cfg)
}

fn parse_raw(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::ConfigParse(e.to_string()))
}

/// Parse and validate config text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    // parse straight from text first for line/column diagnostics
    toml::from_str::<RawConfig>(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    parse_table(parse_raw(text)?)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parse config text with `section.key = value` overrides applied first.
pub fn parse_config_with(text: &str, overrides: &[(String, toml::Value)]) -> Result<ScenarioConfig> {
    toml::from_str::<RawConfig>(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    let mut table = parse_raw(text)?;
    for (key, value) in overrides {
        let (section, field) = key
            .split_once('.')
            .ok_or_else(|| Error::ConfigParse(format!("override key {key:?} must look like section.key")))?;
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(field.to_string(), value.clone());
            }
            _ => return Err(Error::ConfigParse(format!("{section} is not a section"))),
        }
    }
    parse_table(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), ScenarioConfig::default());
        let c = parse_config("").unwrap();
        assert_eq!(c.vehicle.mass, 2.0);
        assert_eq!(c.vehicle.i_yy, 3.46e-2);
        assert_eq!(c.vehicle.k_t, 1.34e-5);
        assert_eq!(c.vehicle.omega_max_water, 23.25);
        assert_eq!(c.vehicle.gains_2, PDGains { kp: 1.0, kd: -0.84 });
    }

    #[test]
    fn table_keys_verbatim() {
        let text = "[vehicle]\nm = 2.5\nI_yy = 0.04\nK_t = 2e-5\nd = 0.25\nC_d = 0.9\nA = 0.05\n\
                    rho_air = 1.2\nrho_water = 1000.0\ng_air = 9.8\ng_water = 0.3\n\
                    omega_max_air = 700.0\nomega_max_water = 20.0\nK_P1 = 2.0\nK_D1 = -1.0\nK_P2 = 1.1\nK_D2 = -0.5\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.vehicle.mass, 2.5);
        assert_eq!(c.vehicle.i_xx, 0.04);
        assert_eq!(c.vehicle.i_zz, 0.08);
        assert_eq!(c.vehicle.arm_length, 0.25);
        assert_eq!(c.vehicle.gains_1, PDGains { kp: 2.0, kd: -1.0 });
        assert_eq!(c.vehicle.omega_max_air, 700.0);
    }

    #[test]
    fn negative_mass_names_key() {
        let err = parse_config("[vehicle]\nm = -1\n").unwrap_err();
        match err {
            Error::Validation(v) => assert!(v.iter().any(|m| m.contains("m must be"))),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn violations_listed_exhaustively() {
        let err = parse_config("[vehicle]\nm = -1\nK_t = 0\n[scenario]\nsample_interval = 0\n").unwrap_err();
        match err {
            Error::Validation(v) => assert_eq!(v.len(), 3, "{v:?}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(parse_config("foo = 1\n"), Err(Error::ConfigParse(_))));
        let err = parse_config("[vehicle]\nfoo = 1\n").unwrap_err().to_string();
        assert!(err.contains("foo"), "{err}");
        assert!(matches!(parse_config("[vehicle\n"), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn enums_and_sections() {
        let c = parse_config(
            "[integrator]\nmethod = \"rk4\"\nfixed_step = 1e-3\n[mission]\nmode = \"hover\"\nallocation = \"exact\"\n\
             cruise_pitch_deg = 65.0\n[scenario]\nmodel = \"3d\"\nformat = \"jsonl\"\n[geometry]\nupper_station = 0.1\nlower_station = -0.08\n",
        )
        .unwrap();
        assert_eq!(c.integrator.method, Method::Rk4);
        assert_eq!(c.mission.mode, MissionMode::Hover);
        assert_eq!(c.mission.allocation, Allocation::Exact);
        assert!((c.mission.cruise_pitch - 65f64.to_radians()).abs() < 1e-15);
        assert_eq!(c.model, Model::Full);
        assert_eq!(c.format, Format::Jsonl);
        assert_eq!(c.geometry.rotors[0].station, 0.1);
        assert_eq!(c.geometry.rotors[1].station, -0.08);
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config_with("", &[("mission.cruise_throttle".into(), toml::Value::Float(0.5))]).unwrap();
        assert_eq!(c.mission.cruise_throttle, 0.5);
        assert!(parse_config_with("", &[("nosection".into(), toml::Value::Float(0.5))]).is_err());
        assert!(parse_config_with("", &[("mission.bogus".into(), toml::Value::Float(0.5))]).is_err());
    }
}
