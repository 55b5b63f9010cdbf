//! Trajectory files (CSV and JSON lines) and plot series.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{Error, Result};
use crate::sim::{TrajectoryRecord, TrajectorySample};
use crate::vehicle::{ARMS, ROTORS};

/// Column order of every trajectory file.
pub fn columns() -> Vec<String> {
    let mut c: Vec<String> = ["t", "X", "Y", "Z", "theta_deg", "theta_rate"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    c.extend((1..=ROTORS).map(|i| format!("omega_{i}")));
    c.extend((1..=ROTORS).map(|i| format!("rho_{i}")));
    c.extend(
        ["stage", "collective", "cut_mask", "shortfall", "thrust_demand", "thrust_delivered"]
            .iter()
            .map(|s| s.to_string()),
    );
    c
}

enum Cell {
    F(f64),
    U(u8),
}

fn cells(s: &TrajectorySample) -> Vec<Cell> {
    let mut v = vec![
        Cell::F(s.t),
        Cell::F(s.x),
        Cell::F(s.y),
        Cell::F(s.z),
        Cell::F(s.theta_deg),
        Cell::F(s.theta_rate),
    ];
    v.extend(s.omega.iter().map(|&w| Cell::F(w)));
    v.extend(s.rho.iter().map(|&r| Cell::F(r)));
    v.extend([
        Cell::U(s.stage),
        Cell::F(s.collective),
        Cell::U(s.cut_mask),
        Cell::U(s.shortfall as u8),
        Cell::F(s.thrust_demand),
        Cell::F(s.thrust_delivered),
    ]);
    v
}

fn from_values(get: impl Fn(usize) -> Result<f64>) -> Result<TrajectorySample> {
    let int = |i: usize| -> Result<u8> {
        let v = get(i)?;
        if v.fract() == 0.0 && (0.0..=255.0).contains(&v) {
            Ok(v as u8)
        } else {
            Err(Error::Format(format!("column {} must be a small integer, got {v}", columns()[i])))
        }
    };
    let base = 6 + 2 * ROTORS;
    Ok(TrajectorySample {
        t: get(0)?,
        x: get(1)?,
        y: get(2)?,
        z: get(3)?,
        theta_deg: get(4)?,
        theta_rate: get(5)?,
        omega: {
            let mut a = [0.0; ROTORS];
            for (i, slot) in a.iter_mut().enumerate() {
                *slot = get(6 + i)?;
            }
            a
        },
        rho: {
            let mut a = [0.0; ROTORS];
            for (i, slot) in a.iter_mut().enumerate() {
                *slot = get(6 + ROTORS + i)?;
            }
            a
        },
        stage: int(base)?,
        collective: get(base + 1)?,
        cut_mask: int(base + 2)?,
        shortfall: match int(base + 3)? {
            0 => false,
            1 => true,
            v => return Err(Error::Format(format!("shortfall must be 0 or 1, got {v}"))),
        },
        thrust_demand: get(base + 4)?,
        thrust_delivered: get(base + 5)?,
    })
}

pub fn write_csv<W: Write>(record: &TrajectoryRecord, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(columns())?;
    for s in &record.samples {
        let row: Vec<String> = cells(s)
            .into_iter()
            .map(|c| match c {
                Cell::F(v) => format!("{v:?}"),
                Cell::U(v) => v.to_string(),
            })
            .collect();
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<TrajectoryRecord> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != columns() {
        return Err(Error::Format("CSV header does not match the trajectory schema".into()));
    }
    let mut samples = Vec::new();
    for (n, row) in rd.records().enumerate() {
        let row = row?;
        let get = |i: usize| -> Result<f64> {
            row.get(i)
                .ok_or_else(|| Error::Format(format!("row {}: missing column {i}", n + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {}, column {}: {e}", n + 1, columns()[i])))
        };
        samples.push(from_values(get)?);
    }
    Ok(TrajectoryRecord { samples })
}

pub fn write_jsonl<W: Write>(record: &TrajectoryRecord, mut w: W) -> Result<()> {
    let names = columns();
    for s in &record.samples {
        let mut obj = Map::new();
        for (name, c) in names.iter().zip(cells(s)) {
            let v = match c {
                Cell::F(v) => serde_json::Number::from_f64(v)
                    .map(Value::Number)
                    .ok_or_else(|| Error::Format(format!("{name} is not finite")))?,
                Cell::U(v) => Value::from(v),
            };
            obj.insert(name.clone(), v);
        }
        serde_json::to_writer(&mut w, &Value::Object(obj))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: Read>(r: R) -> Result<TrajectoryRecord> {
    let names = columns();
    let mut samples = Vec::new();
    for (n, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line)?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Format(format!("line {}: expected an object", n + 1)))?;
        if obj.len() != names.len() {
            return Err(Error::Format(format!("line {}: expected {} fields", n + 1, names.len())));
        }
        let get = |i: usize| -> Result<f64> {
            obj.get(&names[i])
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Format(format!("line {}: missing or non-numeric {}", n + 1, names[i])))
        };
        samples.push(from_values(get)?);
    }
    Ok(TrajectoryRecord { samples })
}

pub fn emit_trajectory(record: &TrajectoryRecord, path: &Path, format: Format) -> Result<()> {
    let f = std::io::BufWriter::new(fs::File::create(path)?);
    match format {
        Format::Csv => write_csv(record, f),
        Format::Jsonl => write_jsonl(record, f),
    }
}

pub fn read_trajectory(path: &Path, format: Format) -> Result<TrajectoryRecord> {
    let f = fs::File::open(path)?;
    match format {
        Format::Csv => read_csv(f),
        Format::Jsonl => read_jsonl(f),
    }
}

/// Named `(t, value)` series for the plot panels. Arm speeds are the RMS of
/// the arm's two rotors.
pub fn plot_series(record: &TrajectoryRecord) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = (1..=ARMS).map(|a| (format!("omega_arm{a}"), Vec::new())).collect();
    out.push(("x".into(), Vec::new()));
    out.push(("z".into(), Vec::new()));
    out.push(("theta".into(), Vec::new()));
    for s in &record.samples {
        for a in 0..ARMS {
            let (u, l) = (s.omega[2 * a], s.omega[2 * a + 1]);
            out[a].1.push((s.t, (0.5 * (u * u + l * l)).sqrt()));
        }
        out[ARMS].1.push((s.t, s.x));
        out[ARMS + 1].1.push((s.t, s.z));
        out[ARMS + 2].1.push((s.t, s.theta_deg));
    }
    out
}

/// Write one `.dat` file per series and an SVG per panel into `dir`.
/// Returns the paths written.
pub fn emit_plot_data(record: &TrajectoryRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let series = plot_series(record);
    let mut written = Vec::new();
    for (name, pts) in &series {
        let path = dir.join(format!("{name}.dat"));
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        for (t, v) in pts {
            writeln!(f, "{t:?} {v:?}")?;
        }
        f.flush()?;
        written.push(path);
    }
    if record.is_empty() {
        return Ok(written);
    }
    let panels: [(&str, &str, &[usize]); 4] = [
        ("rotor_speeds", "rotor speed (rad/s)", &[0, 1, 2, 3]),
        ("x", "X (m)", &[4]),
        ("z", "Z (m)", &[5]),
        ("theta", "pitch (deg)", &[6]),
    ];
    for (file, label, idx) in panels {
        let path = dir.join(format!("{file}.svg"));
        let lines: Vec<(&str, &[(f64, f64)])> = idx.iter().map(|&i| (series[i].0.as_str(), series[i].1.as_slice())).collect();
        fs::write(&path, render_svg(label, &lines))?;
        written.push(path);
    }
    Ok(written)
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn render_svg(ylabel: &str, lines: &[(&str, &[(f64, f64)])]) -> String {
    let (w, h, m) = (640.0, 360.0, 50.0);
    let pts = lines.iter().flat_map(|(_, p)| p.iter());
    let (mut t0, mut t1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(t, v) in pts {
        t0 = t0.min(t);
        t1 = t1.max(t);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    if t1 <= t0 {
        t1 = t0 + 1.0;
    }
    if v1 <= v0 {
        v0 -= 0.5;
        v1 += 0.5;
    }
    let sx = |t: f64| m + (t - t0) / (t1 - t0) * (w - 2.0 * m);
    let sy = |v: f64| h - m - (v - v0) / (v1 - v0) * (h - 2.0 * m);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <path d=\"M{m} {m} V{} H{}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">t (s)</text>\n\
         <text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">{ylabel}</text>\n\
         <text x=\"{m}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{t0:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{t1:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{v0:.3}</text>\n\
         <text x=\"{}\" y=\"{m}\" font-size=\"10\" text-anchor=\"end\">{v1:.3}</text>\n",
        h - m,
        w - m,
        w / 2.0,
        h - 10.0,
        h / 2.0,
        h / 2.0,
        h - m + 14.0,
        w - m,
        h - m + 14.0,
        m - 4.0,
        h - m,
        m - 4.0,
    );
    for (k, (name, p)) in lines.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let d: Vec<String> = p.iter().map(|&(t, v)| format!("{:.2},{:.2}", sx(t), sy(v))).collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"><title>{name}</title></polyline>\n",
            d.join(" ")
        ));
        if lines.len() > 1 {
            s.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"{color}\">{name}</text>\n",
                w - m - 70.0,
                m + 12.0 * (k as f64 + 1.0)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}
