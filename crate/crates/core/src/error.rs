use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pitch {pitch} rad is outside the singularity-free interval (-pi/2, pi/2)")]
    SingularPitch { pitch: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("rotor speed must be non-negative, got {omega} rad/s")]
    NegativeRotorSpeed { omega: f64 },

    #[error("rotor {rotor} commanded {omega} rad/s exceeds the {medium} limit of {limit} rad/s")]
    RotorSpeedLimit {
        rotor: usize,
        omega: f64,
        limit: f64,
        medium: &'static str,
    },

    #[error("throttle {throttle} outside [0, 1]")]
    ThrottleRange { throttle: f64 },

    #[error("zero denominator in thrust coefficient (rho, omega, disk area and radius must be positive)")]
    ZeroDenominator,

    #[error("invalid rotor geometry: {0}")]
    Geometry(String),

    #[error("state is not planar: {component} = {value} exceeds tolerance {tol}")]
    NotPlanar {
        component: &'static str,
        value: f64,
        tol: f64,
    },

    #[error("invalid integrator setting: {0}")]
    IntegratorConfig(String),

    #[error("non-finite derivative at t = {t}")]
    NonFiniteDerivative { t: f64 },

    #[error("step size underflow at t = {t} (h = {h} < h_min)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxSteps { t: f64, max_steps: usize },

    #[error("guard does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("active rotor set is empty; vehicle is ballistic through the interface band")]
    AllRotorsCut,

    #[error("stage {stage} timed out at t = {t} s after {elapsed} s")]
    StageTimeout { stage: u8, t: f64, elapsed: f64 },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("{0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
