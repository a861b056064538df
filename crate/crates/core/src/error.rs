use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("denominator is zero")]
    ZeroDenominator,

    #[error("improper transfer function: numerator degree {num_degree} exceeds denominator degree {den_degree} plus delay {delay}")]
    Improper {
        num_degree: usize,
        den_degree: usize,
        delay: u32,
    },

    #[error("invalid sample time {0}; must be positive and finite")]
    InvalidSampleTime(f64),

    #[error("sample time mismatch: {0} vs {1}")]
    SampleTimeMismatch(f64, f64),

    #[error("system is unstable (max pole magnitude {max_pole_magnitude:.6}); infinity norm does not bound an l2 gain")]
    Unstable { max_pole_magnitude: f64 },

    #[error("smith predictor design failed: {0}")]
    Design(String),

    #[error("unstable factor (z - {root}) could not be cancelled: remainder {remainder:e} exceeds {tolerance:e}")]
    Cancellation {
        root: f64,
        remainder: f64,
        tolerance: f64,
    },

    #[error("invalid delay bounds: lower {lo} must be strictly below upper {hi}")]
    DelayBounds { lo: u32, hi: u32 },

    #[error("delay {delay} of packet {packet} outside admissible range [{lo}, {hi}]")]
    DelayOutOfRange {
        packet: usize,
        delay: i64,
        lo: i64,
        hi: i64,
    },

    #[error("invalid selection at instant {instant}: {reason}")]
    Selection { instant: i64, reason: String },

    #[error("truncation T = {t} below validity bound {min} for the {family} pattern")]
    TruncationTooSmall {
        family: &'static str,
        t: u32,
        min: u32,
    },

    #[error("oracle search needs an estimated {required} steps, budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },

    #[error("nominal loop is unstable at nominal delay {tau_hat} (max pole magnitude {max_pole_magnitude:.6})")]
    NominalUnstable {
        tau_hat: u32,
        max_pole_magnitude: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),
}
