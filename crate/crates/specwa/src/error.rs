use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("orbit length {requested} exceeds the configured cap {cap}")]
    OrbitCapExceeded { requested: u64, cap: u64 },

    #[error("radius {radius} is not above twice the net resolution {resolution}")]
    RadiusBelowResolution { radius: f64, resolution: f64 },

    #[error("point is nearly periodic: orbit separation {separation} not attainable at resolution {resolution}")]
    PointNearlyPeriodic { separation: f64, resolution: f64 },

    #[error("element lacks the {0} representation required by this algebra")]
    MissingRepresentation(&'static str),

    #[error("all {trials} sampled trials were degenerate")]
    DegenerateSample { trials: usize },

    #[error("sampler cannot separate supports on this net: {0}")]
    SamplerCannotSeparate(String),

    #[error("too few usable scales for a modulus-of-continuity fit ({0})")]
    TooFewScales(usize),

    #[error("weight is not invertible (no positive lower bound declared)")]
    WeightNotInvertible,

    #[error("unsupported dynamics: {0}")]
    UnsupportedDynamics(String),

    #[error("series did not converge: {0}")]
    NonConvergent(String),

    #[error("resolvent branch unavailable: {0}")]
    BranchUnavailable(String),

    #[error("weight vanishes (min |w| = {0:e})")]
    WeightVanishes(f64),

    #[error("weight vanishes on the orbit at step {step}")]
    WeightVanishesOnOrbit { step: i64 },

    #[error("epsilon schedule degenerate at n = {n}: eps = {eps}")]
    ScheduleDegenerate { n: usize, eps: f64 },

    #[error("no admissible window at horizon {n}: {reason}")]
    NoAdmissibleWindow { n: usize, reason: String },

    #[error("functional tails are not summable (forward ratio {forward:.4}, backward ratio {backward:.4})")]
    TailsNotSummable { forward: f64, backward: f64 },

    #[error("report has no {0} section")]
    SectionMissing(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("expression error at offset {pos}: {msg}")]
    Expr { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
