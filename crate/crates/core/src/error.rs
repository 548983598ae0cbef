use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A value that must be finite was NaN or infinite.
    NonFinite { context: &'static str },
    /// Tensor, plane or layer dimensions do not line up.
    ShapeMismatch { context: &'static str },
    /// An index fell outside its valid range.
    OutOfRange {
        context: &'static str,
        index: usize,
        limit: usize,
    },
    /// A parameter violates a documented invariant.
    InvalidParam { context: &'static str },
    /// An integer value does not fit the declared quantized range.
    QuantRange { value: i64, bit_width: u8 },
    /// A constant needs more shift-add terms than the hardware budget.
    ShiftAddBudget { terms: usize, budget: usize },
    /// The power table does not cover every layer of the run.
    MissingCoefficient { layer: usize },
    /// A ratio against a zero baseline is undefined.
    ZeroBaseline { context: &'static str },
    /// The neural-core budget is smaller than the number of layers.
    BudgetTooSmall { budget: u32, layers: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { context } => write!(f, "non-finite value in {context}"),
            Error::ShapeMismatch { context } => write!(f, "shape mismatch in {context}"),
            Error::OutOfRange {
                context,
                index,
                limit,
            } => write!(f, "{context}: index {index} out of range (limit {limit})"),
            Error::InvalidParam { context } => write!(f, "invalid parameter: {context}"),
            Error::QuantRange { value, bit_width } => {
                write!(f, "value {value} outside signed {bit_width}-bit range")
            }
            Error::ShiftAddBudget { terms, budget } => {
                write!(
                    f,
                    "constant needs {terms} shift-add terms, budget is {budget}"
                )
            }
            Error::MissingCoefficient { layer } => {
                write!(f, "power table has no coefficient for layer {layer}")
            }
            Error::ZeroBaseline { context } => {
                write!(f, "undefined ratio against zero baseline in {context}")
            }
            Error::BudgetTooSmall { budget, layers } => {
                write!(f, "budget {budget} cannot cover {layers} layers")
            }
        }
    }
}

impl core::error::Error for Error {}
