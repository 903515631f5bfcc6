use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error(
        "M = {m}, N = {n} exceeds the binomial cap of {cap} for the closed-form sums; \
         use the quadrature or Monte Carlo path instead"
    )]
    BinomialCap { m: u32, n: u32, cap: u32 },

    #[error("realization holds {got_users} user and {got_eves} eavesdropper powers, expected {users} and {eves}")]
    DimensionMismatch {
        users: usize,
        eves: usize,
        got_users: usize,
        got_eves: usize,
    },

    #[error("closed-form SOP {raw} lies outside [0, 1] beyond the rounding allowance")]
    OutOfRange { raw: f64 },

    #[error(
        "quadrature did not converge after {intervals} subintervals: estimate {estimate}, \
         error estimate {error_estimate:e}, requested {requested:e}"
    )]
    NotConverged {
        intervals: usize,
        estimate: f64,
        error_estimate: f64,
        requested: f64,
    },

    #[error("at {axis} = {value}: {source}")]
    Row {
        axis: &'static str,
        value: f64,
        source: Box<Error>,
    },

    #[error("parameter file, line {line}: {reason}")]
    ParamFile { line: usize, reason: String },

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("recipe {name}: {reason}")]
    Recipe { name: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
