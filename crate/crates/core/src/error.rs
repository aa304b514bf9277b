use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be a positive finite number, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("alpha equals nu (|alpha - nu| = {} <= sep_tol = {sep_tol}, nu = {nu}, alpha = {alpha})", (alpha - nu).abs())]
    AlphaEqualsNu { nu: f64, alpha: f64, sep_tol: f64 },
    #[error("{name} = {value} out of range, expected {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("0-mode excluded: the mean flow is not controllable")]
    ZeroMode,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("missing key {0}")]
    MissingKey(String),
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("key {key}: {message}")]
    InvalidValue { key: String, message: String },
    #[error(transparent)]
    Param(#[from] ParamError),
}
