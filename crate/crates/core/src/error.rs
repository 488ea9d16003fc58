use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error in `{field}`: {message}")]
    Syntax { field: String, message: String },
    #[error("rule not total: no output for pattern {pattern}")]
    RuleNotTotal { pattern: String },
    #[error("symbol `{symbol}` is not in the {alphabet} alphabet")]
    UnknownSymbol { symbol: String, alphabet: String },
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("the automaton is not correlation-free (V' must be {{0}})")]
    NotCfca,
    #[error("the automaton is not deterministic")]
    NotDeterministic,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("window of length {len} is too short, need at least {min}")]
    WindowTooShort { len: usize, min: usize },
    #[error("budget exceeded for {what}: need {needed}, limit {limit}")]
    BudgetExceeded { what: String, needed: String, limit: u128 },
    #[error("state alphabets differ: {0}")]
    AlphabetMismatch(String),
    #[error("restriction not stable: neighborhood {neighborhood} with random word {random} maps to {output}")]
    Stability { neighborhood: String, random: String, output: String },
    #[error("projection not compatible: {left} and {right} project equally but their images under random word {random} do not")]
    Compatibility { left: String, right: String, random: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>, needed: impl ToString, limit: u128) -> Self {
        Error::BudgetExceeded { what: what.into(), needed: needed.to_string(), limit }
    }

    pub(crate) fn syntax(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Syntax { field: field.into(), message: message.into() }
    }

    /// True for the errors that signal an exhausted budget rather than a bad input.
    pub fn is_resource_exhausted(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
