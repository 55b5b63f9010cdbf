//! Built-in verification checks run by `hydroquad validate`.

use serde::Serialize;

use crate::config::{Model, ScenarioConfig};
use crate::control::{interface_cut_mask, MissionMode};
use crate::dynamics::{
    state_derivative_2d, state_derivative_2d_rotors, state_derivative_3d, PairCommand, PairSampling, RotorCommand,
    State2D, State3D,
};
use crate::error::Result;
use crate::integrator::{integrate, IntegratorConfig};
use crate::sim::run_mission;
use crate::vehicle::{density_at, ARMS, ROTORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Hover,
    Terminal,
    Convergence,
    Reduction,
    TransitionBudget,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "all" => Suite::All,
            "hover" => Suite::Hover,
            "terminal" => Suite::Terminal,
            "convergence" => Suite::Convergence,
            "reduction" => Suite::Reduction,
            "transition-budget" | "transition" => Suite::TransitionBudget,
            _ => return Err(format!("unknown suite {s:?}")),
        })
    }
}

fn check(name: &'static str, ok: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> CheckResult {
    check(name, false, format!("run failed: {e}"))
}

pub fn run_suite(suite: Suite, cfg: &ScenarioConfig) -> Vec<CheckResult> {
    let all = suite == Suite::All;
    let mut out = Vec::new();
    if all || suite == Suite::Hover {
        out.push(hover(cfg));
    }
    if all || suite == Suite::Terminal {
        out.push(terminal(cfg));
    }
    if all || suite == Suite::Convergence {
        out.push(convergence(cfg));
    }
    if all || suite == Suite::Reduction {
        out.push(reduction(cfg));
    }
    if all || suite == Suite::TransitionBudget {
        out.push(transition_budget(cfg));
    }
    out
}

/// Hover at the equilibrium speed in both models: |dZ| < 1 mm, |theta| < 0.01 deg.
pub fn hover(base: &ScenarioConfig) -> CheckResult {
    const NAME: &str = "hover";
    let mut worst_z = 0.0f64;
    let mut worst_th = 0.0f64;
    for model in [Model::Planar, Model::Full] {
        let mut cfg = base.clone();
        cfg.model = model;
        cfg.mission.mode = MissionMode::Hover;
        cfg.theta0 = 0.0;
        cfg.z0 = cfg.z0.max(1.0);
        let out = match run_mission(&cfg) {
            Ok(o) => o,
            Err(e) => return failed(NAME, e),
        };
        let z0 = out.record.samples[0].z;
        for s in &out.record.samples {
            worst_z = worst_z.max((s.z - z0).abs());
            worst_th = worst_th.max(s.theta_deg.abs());
        }
    }
    check(
        NAME,
        worst_z < 1e-3 && worst_th < 0.01,
        format!("max |dZ| = {worst_z:.3e} m, max |theta| = {worst_th:.3e} deg"),
    )
}

/// Rotors off, fully submerged: the sink rate settles at the drag-limited speed.
pub fn terminal(cfg: &ScenarioConfig) -> CheckResult {
    const NAME: &str = "terminal";
    let p = &cfg.vehicle;
    let Some(v_t) = p.terminal_sink_speed() else {
        return CheckResult {
            name: NAME,
            status: Status::Skipped,
            detail: "C_d = 0: no drag equilibrium".into(),
        };
    };
    // time constant v_t / g_water; run 40 of them
    let t_end = 40.0 * v_t / p.g_water;
    let start = State2D { z: -10.0 - 2.0 * v_t * t_end, ..Default::default() };
    let off = RotorCommand::default();
    let res = integrate(
        |_, y, dy| {
            let d = state_derivative_2d_rotors(&State2D::from_slice(y), &off, p, &cfg.geometry)?;
            dy.copy_from_slice(&d.to_array());
            Ok(())
        },
        0.0,
        &start.to_array(),
        t_end,
        &cfg.integrator,
        &[],
        &[],
    );
    match res {
        Ok(sol) => {
            let v = -sol.y[3];
            let rel = (v - v_t).abs() / v_t;
            check(NAME, rel < 0.01, format!("sink {v:.6} m/s vs {v_t:.6} m/s (rel {rel:.2e})"))
        }
        Err(e) => failed(NAME, e),
    }
}

/// Global error of y' = -y at t = 1 for rel_tol 1e-4 .. 1e-10.
pub fn decay_errors(base: &IntegratorConfig) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for k in 4..=10 {
        let tol = 10f64.powi(-k);
        let cfg = IntegratorConfig {
            rel_tol: tol,
            abs_tol: tol * 1e-4,
            h_init: 1e-3,
            h_max: 1.0,
            method: crate::integrator::Method::DormandPrince45,
            ..base.clone()
        };
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
        )?;
        out.push((tol, (sol.y[0] - (-1f64).exp()).abs()));
    }
    Ok(out)
}

/// Least-squares slope of log(error) against log(tol).
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn convergence(cfg: &ScenarioConfig) -> CheckResult {
    const NAME: &str = "convergence";
    match decay_errors(&cfg.integrator) {
        Ok(errs) => {
            let monotone = errs.windows(2).all(|w| w[1].1 < w[0].1);
            let slope = loglog_slope(&errs);
            let list: Vec<String> = errs.iter().map(|(t, e)| format!("{t:.0e}:{e:.2e}")).collect();
            check(
                NAME,
                monotone && (1.0 / 3.0..=3.0).contains(&slope),
                format!("slope {slope:.3}, errors {}", list.join(" ")),
            )
        }
        Err(e) => failed(NAME, e),
    }
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

/// Largest relative mismatch between planar 3D derivatives and the planar
/// models over `n` pseudo-random states with pairwise-equal commands.
pub fn reduction_mismatch(cfg: &ScenarioConfig, n: usize) -> Result<f64> {
    let p = &cfg.vehicle;
    let g = &cfg.geometry;
    let mut rng = Lcg(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let s = State2D {
            x: rng.range(-5.0, 5.0),
            z: rng.range(-2.0, 2.0),
            vx: rng.range(-2.0, 2.0),
            vz: rng.range(-2.0, 2.0),
            theta: rng.range(-1.4, 1.4),
            theta_rate: rng.range(-2.0, 2.0),
        };
        let mut limit = [f64::INFINITY; ARMS];
        for r in &g.rotors {
            let m = density_at(s.z, r.station, p);
            limit[r.arm] = limit[r.arm].min(p.omega_max(m.in_air));
        }
        let pair = PairCommand { speeds: std::array::from_fn(|a| rng.range(0.0, limit[a])) };
        let u = pair.expand(g);
        let d3 = state_derivative_3d(&State3D::from_planar(&s), &u, p, g)?.planar_projection();
        let refs = [
            state_derivative_2d_rotors(&s, &u, p, g)?,
            state_derivative_2d(&s, &pair, p, g, PairSampling::PerRotor)?,
        ];
        for d2 in refs {
            for (a, b) in d3.to_array().iter().zip(d2.to_array()) {
                let scale = a.abs().max(b.abs()).max(1e-12);
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    Ok(worst)
}

pub fn reduction(cfg: &ScenarioConfig) -> CheckResult {
    const NAME: &str = "reduction";
    match reduction_mismatch(cfg, 2000) {
        Ok(w) => check(NAME, w < 1e-9, format!("max relative mismatch {w:.3e}")),
        Err(e) => failed(NAME, e),
    }
}

/// Default mission: first-to-last rotor crossing under 2 s each way, and
/// every logged throttle inside the band exactly 0.
pub fn transition_budget(base: &ScenarioConfig) -> CheckResult {
    const NAME: &str = "transition-budget";
    let mut cfg = base.clone();
    cfg.mission.mode = MissionMode::FiveStage;
    let out = match run_mission(&cfg) {
        Ok(o) => o,
        Err(e) => return failed(NAME, e),
    };
    let stations = cfg.geometry.stations();
    let mut leaks = 0usize;
    for s in &out.record.samples {
        let cut = interface_cut_mask(s.z, &stations, cfg.mission.interface_band);
        leaks += (0..ROTORS).filter(|&i| cut[i] && s.omega[i] != 0.0).count();
    }
    let down = out.summary.descent_transit;
    let up = out.summary.ascent_transit;
    let ok = matches!(down, Some(d) if d < 2.0) && matches!(up, Some(u) if u < 2.0) && leaks == 0;
    check(
        NAME,
        ok,
        format!("descent {down:?} s, ascent {up:?} s, non-zero throttles in band: {leaks}"),
    )
}
