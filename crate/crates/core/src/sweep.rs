//! One-key parameter sweeps run in parallel.

use serde::Serialize;

use crate::config::parse_config_with;
use crate::error::{Error, Result};
use crate::sim::run_mission;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub completed: bool,
    pub final_t: f64,
    pub descent_transit: Option<f64>,
    pub ascent_transit: Option<f64>,
    pub cruise_pitch_min_deg: Option<f64>,
    pub cruise_pitch_max_deg: Option<f64>,
    pub final_x: Option<f64>,
    pub error: Option<String>,
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Run the scenario in `base_text` once per value of `key` (`section.key`).
/// Configs are checked up front; run failures are reported per row.
pub fn sweep(base_text: &str, key: &str, values: &[f64], threads: usize) -> Result<Vec<SweepRow>> {
    let configs = values
        .iter()
        .map(|&v| parse_config_with(base_text, &[(key.to_string(), toml::Value::Float(v))]))
        .collect::<Result<Vec<_>>>()?;
    let threads = threads.max(1);
    let mut rows: Vec<Option<SweepRow>> = vec![None; values.len()];
    for (chunk_vals, (chunk_cfg, chunk_out)) in values
        .chunks(threads)
        .zip(configs.chunks(threads).zip(rows.chunks_mut(threads)))
    {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk_cfg
                .iter()
                .zip(chunk_vals)
                .map(|(cfg, &value)| s.spawn(move || row(value, run_mission(cfg))))
                .collect();
            for (slot, h) in chunk_out.iter_mut().zip(handles) {
                *slot = Some(h.join().expect("sweep worker panicked"));
            }
        });
    }
    rows.into_iter()
        .map(|r| r.ok_or_else(|| Error::Format("missing sweep row".into())))
        .collect()
}

fn row(
    value: f64,
    res: std::result::Result<crate::sim::MissionOutput, Box<crate::sim::MissionError>>,
) -> SweepRow {
    match res {
        Ok(out) => SweepRow {
            value,
            completed: out.summary.completed,
            final_t: out.summary.final_t,
            descent_transit: out.summary.descent_transit,
            ascent_transit: out.summary.ascent_transit,
            cruise_pitch_min_deg: out.summary.cruise_pitch_band_deg.map(|b| b.0),
            cruise_pitch_max_deg: out.summary.cruise_pitch_band_deg.map(|b| b.1),
            final_x: out.record.samples.last().map(|s| s.x),
            error: None,
        },
        Err(e) => SweepRow {
            value,
            completed: false,
            final_t: e.record.samples.last().map_or(0.0, |s| s.t),
            descent_transit: None,
            ascent_transit: None,
            cruise_pitch_min_deg: None,
            cruise_pitch_max_deg: None,
            final_x: e.record.samples.last().map(|s| s.x),
            error: Some(e.error.to_string()),
        },
    }
}

pub fn write_table<W: std::io::Write>(key: &str, rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        key,
        "completed",
        "final_t",
        "descent_transit",
        "ascent_transit",
        "cruise_pitch_min_deg",
        "cruise_pitch_max_deg",
        "final_x",
        "error",
    ])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
    for r in rows {
        wr.write_record([
            format!("{:?}", r.value),
            r.completed.to_string(),
            format!("{:?}", r.final_t),
            opt(r.descent_transit),
            opt(r.ascent_transit),
            opt(r.cruise_pitch_min_deg),
            opt(r.cruise_pitch_max_deg),
            opt(r.final_x),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
