//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::Instant;

use hydroquad::config::{Model, ScenarioConfig};
use hydroquad::control::{MissionMode, Stage};
use hydroquad::dynamics::{
    reduce_3d_to_2d, state_derivative_2d, state_derivative_2d_rotors, state_derivative_3d, PairCommand,
    PairSampling, RotorCommand, State2D, State3D,
};
use hydroquad::integrator::{integrate, IntegratorConfig, Method};
use hydroquad::sim::{run_mission, MissionOutput};
use hydroquad::vehicle::{density_at, rotor_thrust, RotorGeometry, VehicleParams, ROTORS};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mission(cfg: &ScenarioConfig) -> Result<MissionOutput, String> {
    run_mission(cfg).map_err(|e| e.to_string())
}

// Table values, typed in independently of the crate defaults.
const M: f64 = 2.0;
const K_T: f64 = 1.34e-5;
const C_D: f64 = 0.8;
const AREA: f64 = 6.16e-2;
const RHO_AIR: f64 = 1.225;
const RHO_WATER: f64 = 999.97;
const G_AIR: f64 = 9.81;
const G_WATER: f64 = 0.35;

fn hover_equilibrium() -> Result<Outcome, String> {
    let omega_h = (M * G_AIR / (8.0 * K_T * RHO_AIR)).sqrt();
    if (omega_h - 386.530_763_4).abs() > 1e-6 {
        return Ok(outcome(false, format!("omega_h = {omega_h}")));
    }
    let crate_omega = VehicleParams::default().hover_speed();
    let mut worst_z = 0.0f64;
    let mut worst_th = 0.0f64;
    let mut slowest = 0.0f64;
    for model in [Model::Planar, Model::Full] {
        let mut cfg = ScenarioConfig { model, ..Default::default() };
        cfg.mission.mode = MissionMode::Hover;
        cfg.mission.hover_duration = 10.0;
        let start = Instant::now();
        let out = mission(&cfg)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let first = &out.record.samples[0];
        if out.record.samples.last().map(|s| s.t) != Some(10.0) {
            return Ok(outcome(false, "hover run did not reach 10 s".into()));
        }
        if out.record.stage_samples(Stage::Hover).count() < 1000 {
            return Ok(outcome(false, "too few hover samples".into()));
        }
        for s in out.record.stage_samples(Stage::Hover) {
            for w in s.omega {
                if (w - omega_h).abs() > 1e-9 * omega_h {
                    return Ok(outcome(false, format!("commanded {w} rad/s")));
                }
            }
            worst_z = worst_z.max((s.z - first.z).abs());
            worst_th = worst_th.max(s.theta_deg.abs());
        }
    }
    Ok(outcome(
        worst_z < 1e-3 && worst_th < 0.01 && slowest < 1.0 && (crate_omega - omega_h).abs() < 1e-9,
        format!("omega_h {omega_h:.4} rad/s, max |dZ| {worst_z:.2e} m, max |theta| {worst_th:.2e} deg, slowest run {slowest:.3} s"),
    ))
}

fn terminal_sink() -> Result<Outcome, String> {
    let v_t = (2.0 * M * G_WATER / (RHO_WATER * C_D * AREA)).sqrt();
    let p = VehicleParams::default();
    let g = RotorGeometry::default();
    let off = RotorCommand::default();
    let start = State2D { z: -50.0, ..Default::default() };
    let sol = integrate(
        |_, y, dy| {
            let d = state_derivative_2d_rotors(&State2D::from_slice(y), &off, &p, &g)?;
            dy.copy_from_slice(&d.to_array());
            Ok(())
        },
        0.0,
        &start.to_array(),
        20.0,
        &IntegratorConfig::default(),
        &[],
        &[],
    )
    .map_err(|e| e.to_string())?;
    let v = -sol.y[3];
    let rel = (v - v_t).abs() / v_t;
    Ok(outcome(
        rel < 0.01 && (v_t - 0.168_552_494).abs() < 1e-8,
        format!("sink {v:.6} m/s, oracle {v_t:.6} m/s, rel err {rel:.2e}"),
    ))
}

fn five_stage_mission() -> Result<Outcome, String> {
    let out = mission(&ScenarioConfig::default())?;
    let rec = &out.record;
    let seen: Vec<u8> = {
        let mut v: Vec<u8> = rec.samples.iter().map(|s| s.stage).collect();
        v.dedup();
        v
    };
    let all_stages = seen == vec![1, 2, 3, 4, 5, 6];
    let exit2 = rec.stage_samples(Stage::RotateToHorizontal).last().map(|s| s.z);
    let depth_ok = matches!(exit2, Some(z) if (z + 1.35).abs() <= 0.05);
    let cruise: Vec<_> = rec.stage_samples(Stage::Cruise).collect();
    let pitch_ok = !cruise.is_empty() && cruise.iter().all(|s| (65.0..=75.0).contains(&s.theta_deg));
    let throttle_ok = cruise.iter().all(|s| s.collective == 0.35);
    let x_ok = cruise.windows(2).all(|w| w[1].x >= w[0].x);
    let (lo, hi) = cruise
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.theta_deg), b.max(s.theta_deg)));
    Ok(outcome(
        all_stages && depth_ok && pitch_ok && throttle_ok && x_ok,
        format!(
            "stages {seen:?}, Z at stage-2 exit {exit2:?}, cruise pitch [{lo:.2}, {hi:.2}] deg, throttle 0.35: {throttle_ok}, X nondecreasing: {x_ok}"
        ),
    ))
}

fn transition_budget() -> Result<Outcome, String> {
    let out = mission(&ScenarioConfig::default())?;
    let stations: [f64; ROTORS] = std::array::from_fn(|i| if i % 2 == 0 { 0.05 } else { -0.05 });
    let eps = 0.05;
    let mut in_band = 0usize;
    let mut leaks = 0usize;
    for s in &out.record.samples {
        for i in 0..ROTORS {
            if (s.z - stations[i]).abs() < eps {
                in_band += 1;
                if s.omega[i] != 0.0 {
                    leaks += 1;
                }
            }
        }
    }
    let span = |down: bool| {
        let ts: Vec<f64> = out.summary.crossings.iter().filter(|c| c.descending == down).map(|c| c.t).collect();
        let rotors = ts.len();
        let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (rotors, hi - lo)
    };
    let (n_down, down) = span(true);
    let (n_up, up) = span(false);
    Ok(outcome(
        n_down == ROTORS && n_up == ROTORS && down < 2.0 && up < 2.0 && in_band > 0 && leaks == 0,
        format!(
            "descent {down:.3} s over {n_down} rotors, ascent {up:.3} s over {n_up} rotors, {in_band} in-band samples, {leaks} non-zero"
        ),
    ))
}

fn medium_ratio() -> Result<Outcome, String> {
    let p = VehicleParams::default();
    let expected = RHO_WATER / RHO_AIR;
    let mut worst = 0.0f64;
    for w in [1.0, 23.25, 100.0, 386.5, 773.1] {
        let air = rotor_thrust(w, density_at(1.0, 0.05, &p).rho, &p).map_err(|e| e.to_string())?;
        let water = rotor_thrust(w, density_at(-1.0, 0.05, &p).rho, &p).map_err(|e| e.to_string())?;
        worst = worst.max((water / air - expected).abs() / expected);
    }
    Ok(outcome(
        worst < 1e-9 && (expected - 816.3).abs() < 0.05,
        format!("ratio oracle {expected:.4}, max rel err {worst:.2e}"),
    ))
}

fn integrator_convergence() -> Result<Outcome, String> {
    let mut errs = Vec::new();
    for k in 4..=10 {
        let tol = 10f64.powi(-k);
        let cfg = IntegratorConfig { rel_tol: tol, abs_tol: tol * 1e-4, h_max: 1.0, ..Default::default() };
        let sol = integrate(
            |_, y, d| {
                d[0] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            1.0,
            &cfg,
            &[],
            &[],
        )
        .map_err(|e| e.to_string())?;
        errs.push((sol.y[0] - (-1f64).exp()).abs());
    }
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);

    let dopri = mission(&ScenarioConfig::default())?;
    let mut rk4_cfg = ScenarioConfig::default();
    rk4_cfg.integrator.method = Method::Rk4;
    rk4_cfg.integrator.fixed_step = 1e-4;
    let rk4 = mission(&rk4_cfg)?;
    let a = &dopri.summary.final_state;
    let b = &rk4.summary.final_state;
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let same_end = dopri.summary.final_t == rk4.summary.final_t;
    let list: Vec<String> = errs.iter().map(|e| format!("{e:.1e}")).collect();
    Ok(outcome(
        monotone && same_end && diff < 1e-5,
        format!("errors [{}], RK45 vs RK4 final-state max diff {diff:.2e}", list.join(", ")),
    ))
}

struct Lcg(u64);

impl Lcg {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        lo + (hi - lo) * ((self.0 >> 11) as f64 / (1u64 << 53) as f64)
    }
}

fn model_consistency() -> Result<Outcome, String> {
    let p = VehicleParams::default();
    let g = RotorGeometry::default();
    let mut rng = Lcg(7);
    let mut worst = 0.0f64;
    let n = 5000;
    for _ in 0..n {
        let s = State2D {
            x: rng.uniform(-10.0, 10.0),
            z: rng.uniform(-2.0, 2.0),
            vx: rng.uniform(-3.0, 3.0),
            vz: rng.uniform(-3.0, 3.0),
            theta: rng.uniform(-1.5, 1.5),
            theta_rate: rng.uniform(-3.0, 3.0),
        };
        // pairwise-equal: both rotors of an arm, and mirrored left/right arms
        let limit = if s.z >= 0.05 { p.omega_max_air } else { p.omega_max_water };
        let front = rng.uniform(0.0, limit);
        let rear = rng.uniform(0.0, limit);
        let pair = PairCommand { speeds: [front, front, rear, rear] };
        let u = pair.expand(&g);
        let d3 = state_derivative_3d(&State3D::from_planar(&s), &u, &p, &g).map_err(|e| e.to_string())?;
        let r3 = reduce_3d_to_2d(&d3, 1e-9).map_err(|e| e.to_string())?;
        for d2 in [
            state_derivative_2d_rotors(&s, &u, &p, &g).map_err(|e| e.to_string())?,
            state_derivative_2d(&s, &pair, &p, &g, PairSampling::PerRotor).map_err(|e| e.to_string())?,
        ] {
            for (a, b) in r3.to_array().iter().zip(d2.to_array()) {
                let rel = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                if a != &b {
                    worst = worst.max(rel);
                }
            }
        }
    }
    Ok(outcome(worst < 1e-9, format!("{n} planar states, max relative mismatch {worst:.2e}")))
}

fn compensation_conservation() -> Result<Outcome, String> {
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    let mut compensated = 0usize;
    for model in [Model::Planar, Model::Full] {
        let out = mission(&ScenarioConfig { model, ..Default::default() })?;
        for s in out.record.samples.iter().filter(|s| !s.shortfall) {
            checked += 1;
            if s.cut_mask != 0 {
                compensated += 1;
            }
            let scale = s.thrust_demand.abs().max(s.thrust_delivered.abs());
            if scale > 0.0 {
                worst = worst.max((s.thrust_demand - s.thrust_delivered).abs() / scale);
            }
        }
    }
    Ok(outcome(
        worst < 1e-9 && compensated > 0,
        format!("{checked} samples ({compensated} with cut rotors), max relative mismatch {worst:.2e}"),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome, String>); 8] = [
        ("1 hover equilibrium", hover_equilibrium),
        ("2 terminal sink velocity", terminal_sink),
        ("3 five-stage mission", five_stage_mission),
        ("4 transition budget", transition_budget),
        ("5 thrust medium ratio", medium_ratio),
        ("6 integrator convergence", integrator_convergence),
        ("7 model consistency", model_consistency),
        ("8 compensation conservation", compensation_conservation),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("{} criterion {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
