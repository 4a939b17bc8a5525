use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("potential evaluation failed at t = {0}")]
    PotentialEvaluation(f64),
    #[error("bisection bracket [{lo}, {hi}] does not exhibit opposite verdicts")]
    Bracket { lo: f64, hi: f64 },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("trajectory does not cover [{lo}, {hi}]")]
    Coverage { lo: f64, hi: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
