use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hydroquad::config::{load_config, parse_config, Format, Model, ScenarioConfig};
use hydroquad::error::Error;
use hydroquad::output::{emit_plot_data, emit_trajectory, read_trajectory};
use hydroquad::sim::run_mission;
use hydroquad::sweep::{linspace, sweep, write_table};
use hydroquad::validate::{run_suite, Status, Suite};

const OK: u8 = 0;
const VALIDATION_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;
const RUNTIME_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "hydroquad", version, about = "Air/water multirotor mission simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the model selector.
    #[arg(long, value_parser = ["2d", "3d"])]
    model: Option<String>,
    /// Reserved; runs are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured mission and write the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Trajectory output path; overrides scenario.output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "jsonl"])]
        format: Option<String>,
    },
    /// Run built-in verification checks.
    Validate {
        #[command(flatten)]
        common: Common,
        /// all, hover, terminal, convergence, reduction or transition-budget
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Write plot series and SVG panels for a run.
    Plotdata {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "plots")]
        out: PathBuf,
        /// Read this trajectory CSV instead of simulating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Vary one config key over a range and tabulate mission outcomes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Key as section.name, e.g. mission.cruise_throttle
        #[arg(long)]
        key: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        threads: usize,
        /// Table output path (CSV); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_text(common: &Common) -> Result<String, Error> {
    match &common.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => Ok(String::new()),
    }
}

fn load(common: &Common) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => parse_config("")?,
    };
    if let Some(m) = &common.model {
        cfg.model = m.parse::<Model>()?;
    }
    Ok(cfg)
}

fn config_failure(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e {
        Error::Io(_) | Error::ConfigParse(_) | Error::Validation(_) | Error::Geometry(_) | Error::IntegratorConfig(_) => {
            CONFIG_ERROR
        }
        _ => RUNTIME_FAILURE,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { common, out, format } => {
            let mut cfg = match load(&common) {
                Ok(c) => c,
                Err(e) => return config_failure(&e),
            };
            if let Some(f) = format {
                cfg.format = f.parse::<Format>().expect("validated by clap");
            }
            let path = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| {
                PathBuf::from(match cfg.format {
                    Format::Csv => "trajectory.csv",
                    Format::Jsonl => "trajectory.jsonl",
                })
            });
            match run_mission(&cfg) {
                Ok(res) => {
                    if let Err(e) = emit_trajectory(&res.record, &path, cfg.format) {
                        eprintln!("error: {e}");
                        return ExitCode::from(RUNTIME_FAILURE);
                    }
                    println!("{}", serde_json::to_string_pretty(&res.summary).expect("summary serializes"));
                    ExitCode::from(OK)
                }
                Err(fail) => {
                    // keep the partial log for diagnosis
                    let _ = emit_trajectory(&fail.record, &path, cfg.format);
                    eprintln!("error: {fail}");
                    ExitCode::from(RUNTIME_FAILURE)
                }
            }
        }
        Command::Validate { common, suite } => {
            let cfg = match load(&common) {
                Ok(c) => c,
                Err(e) => return config_failure(&e),
            };
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let results = run_suite(suite, &cfg);
            let mut failed = false;
            for r in &results {
                let tag = match r.status {
                    Status::Pass => "PASS",
                    Status::Fail => {
                        failed = true;
                        "FAIL"
                    }
                    Status::Skipped => "SKIP",
                };
                println!("{tag} {:<18} {}", r.name, r.detail);
            }
            ExitCode::from(if failed { VALIDATION_FAILED } else { OK })
        }
        Command::Plotdata { common, out, input } => {
            let record = match input {
                Some(p) => match read_trajectory(&p, Format::Csv) {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(RUNTIME_FAILURE);
                    }
                },
                None => {
                    let cfg = match load(&common) {
                        Ok(c) => c,
                        Err(e) => return config_failure(&e),
                    };
                    match run_mission(&cfg) {
                        Ok(r) => r.record,
                        Err(fail) => {
                            eprintln!("error: {fail}");
                            return ExitCode::from(RUNTIME_FAILURE);
                        }
                    }
                }
            };
            match emit_plot_data(&record, &out) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::from(OK)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(RUNTIME_FAILURE)
                }
            }
        }
        Command::Sweep { common, key, from, to, steps, threads, out } => {
            let mut text = match config_text(&common) {
                Ok(t) => t,
                Err(e) => return config_failure(&e),
            };
            if let Some(m) = &common.model {
                // appended last so it overrides any scenario.model in the file
                text = match hydroquad::config::parse_config_with(
                    &text,
                    &[("scenario.model".into(), toml::Value::String(m.clone()))],
                ) {
                    Ok(_) => {
                        let mut t: toml::Table = text.parse().unwrap_or_default();
                        let sc = t
                            .entry("scenario")
                            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
                        if let toml::Value::Table(sc) = sc {
                            sc.insert("model".into(), toml::Value::String(m.clone()));
                        }
                        t.to_string()
                    }
                    Err(e) => return config_failure(&e),
                };
            }
            let rows = match sweep(&text, &key, &linspace(from, to, steps), threads) {
                Ok(r) => r,
                Err(e) => return config_failure(&e),
            };
            let res = match out {
                Some(p) => std::fs::File::create(&p)
                    .map_err(Error::from)
                    .and_then(|f| write_table(&key, &rows, f)),
                None => write_table(&key, &rows, std::io::stdout().lock()),
            };
            if let Err(e) = res {
                eprintln!("error: {e}");
                return ExitCode::from(RUNTIME_FAILURE);
            }
            if rows.iter().any(|r| !r.completed) {
                ExitCode::from(RUNTIME_FAILURE)
            } else {
                ExitCode::from(OK)
            }
        }
    }
}
