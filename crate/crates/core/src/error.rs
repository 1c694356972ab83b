use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unsupported function `{name}` at offset {offset}")]
    UnsupportedFunction { name: String, offset: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },
    #[error("omega0 outside (−F(E₃), F(−E₃)) = ({}, {})", signed(.lo), signed(.hi))]
    Omega0OutOfRange { omega0: f64, lo: f64, hi: f64 },
    #[error("ray from the origin misses the shape")]
    RayMiss,
    #[error("empty slice: {0}")]
    EmptySlice(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Number rounded to 12 decimals, printed with a typographic minus sign.
pub(crate) fn signed<T: std::borrow::Borrow<f64>>(x: T) -> String {
    let v = *x.borrow();
    let s = format!("{}", (v * 1e12).round() / 1e12);
    match s.strip_prefix('-') {
        Some(rest) => format!("−{rest}"),
        None => s,
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
