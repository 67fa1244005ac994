use crate::word::WordError;

fn fmt_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    let parts: Vec<String> = path.iter().map(|i| i.to_string()).collect();
    format!("root.{}", parts.join("."))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("undefined input at {}: state {state} has no rule for {symbol}", fmt_path(.path))]
    UndefinedInput {
        path: Vec<usize>,
        state: String,
        symbol: String,
    },
    #[error("unknown input symbol {0}")]
    UnknownSymbol(String),
    #[error("symbol {symbol} has arity {expected} but got {found} children")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate input symbol {0}")]
    DuplicateSymbol(String),
    #[error("input symbol {0} is declared with different arities")]
    AlphabetMismatch(String),
    #[error("duplicate state {0}")]
    DuplicateState(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("duplicate rule for state {state} and symbol {symbol}")]
    DuplicateRule { state: String, symbol: String },
    #[error("invalid rule for state {state} and symbol {symbol}: {reason}")]
    InvalidRule {
        state: String,
        symbol: String,
        reason: String,
    },
    #[error("the axiom state has an empty domain")]
    EmptyTransducer,
    #[error("state {0} has an empty domain")]
    EmptyDomain(String),
    #[error("transducers are not same-ordered at ({left}, {right}) on {symbol}")]
    NotSameOrdered {
        left: String,
        right: String,
        symbol: String,
    },
    #[error("domains differ at ({left}, {right}) on {symbol}")]
    DomainMismatch {
        left: String,
        right: String,
        symbol: String,
    },
    #[error("verdict for state {0} does not match the transducer")]
    InvalidVerdict(String),
}

pub type Result<T> = std::result::Result<T, Error>;
