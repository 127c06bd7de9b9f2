use std::fmt;

/// Errors reported by the simulation library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Block length is not a power of two >= 4.
    BadLength(usize),
    /// Layer number is invalid for the given transform size.
    BadLayer { n: usize, layer: usize },
    /// PAM order outside the supported set {2, 4, 8, 16}.
    BadPamOrder(usize),
    /// Bit buffer length does not match the configuration.
    BitCountMismatch { expected: usize, got: usize },
    /// Signal length does not match the configuration.
    LengthMismatch { expected: usize, got: usize },
    /// Combining coefficient outside [0, 1].
    BadAlpha(f64),
    /// SNR values must be positive and finite.
    BadSnr(f64),
    /// A scalar parameter is out of its valid range.
    BadParameter { name: &'static str, value: f64 },
    /// No tabulated optimal DC bias for this PAM order.
    NoBiasTable(usize),
    /// Malformed sweep configuration file.
    Config { line: usize, message: String },
    /// A BER curve does not bracket the requested target.
    TargetNotBracketed(f64),
    /// Signal contains non-finite samples.
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadLength(n) => {
                write!(f, "block length {n} is not a power of two >= 4")
            }
            Error::BadLayer { n, layer } => {
                write!(f, "layer {layer} is invalid for transform size {n}")
            }
            Error::BadPamOrder(m) => {
                write!(f, "unsupported PAM order {m} (expected 2, 4, 8 or 16)")
            }
            Error::BitCountMismatch { expected, got } => {
                write!(f, "bit count mismatch: expected {expected}, got {got}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::BadAlpha(a) => write!(f, "combining coefficient {a} outside [0, 1]"),
            Error::BadSnr(s) => write!(f, "SNR {s} must be positive and finite"),
            Error::BadParameter { name, value } => {
                write!(f, "parameter {name} = {value} out of range")
            }
            Error::NoBiasTable(m) => {
                write!(
                    f,
                    "no tabulated optimal bias for {m}-PAM; supply bias_db explicitly"
                )
            }
            Error::Config { line, message } => write!(f, "config line {line}: {message}"),
            Error::TargetNotBracketed(t) => {
                write!(f, "curve does not bracket target BER {t:e}")
            }
            Error::NonFinite => write!(f, "signal contains non-finite samples"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
