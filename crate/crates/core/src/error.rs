use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state component {name} = {value} is not strictly positive")]
    NonPositiveState { name: &'static str, value: f64 },

    #[error("parameter validation failed: {}", format_violations(.0))]
    Validation(Vec<crate::model::Violation>),

    #[error("step underflow at t = {t}: h = {h} fell below h_min = {h_min}")]
    StepUnderflow { t: f64, h: f64, h_min: f64 },

    #[error("time {t} outside trajectory domain [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("estimated region has nonpositive lower bound for {component} ({value})")]
    DegenerateRegion { component: &'static str, value: f64 },
}

fn format_violations(v: &[crate::model::Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
