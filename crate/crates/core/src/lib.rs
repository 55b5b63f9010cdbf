//! Simulation of an eight-rotor multirotor that flies in air and swims in
//! water, crossing the free surface without stopping.
//!
//! The crate models the vehicle's rigid-body dynamics with per-rotor medium
//! switching, integrates them with an adaptive Runge-Kutta scheme that
//! localizes every interface crossing, and closes the loop with a PD pitch
//! controller and a five-stage dive/cruise/surface mission supervisor.
//!
//! ```
//! use hydroquad::{config::ScenarioConfig, sim::run_mission};
//!
//! let out = run_mission(&ScenarioConfig::default()).unwrap();
//! assert!(out.summary.completed);
//! ```

pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod geom3d;
pub mod integrator;
pub mod output;
pub mod sim;
pub mod sweep;
pub mod validate;
pub mod vehicle;

pub use error::{Error, Result};
