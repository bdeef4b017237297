use thiserror::Error;

/// Errors raised by field construction, family handling and the numerical checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("field of order {order} exceeds the table limit {limit}")]
    FieldTooLarge { order: u128, limit: u64 },

    #[error("no irreducible polynomial of degree {0} found")]
    NoIrreducible(u32),

    #[error("{m} does not divide the extension degree {n}")]
    NotADivisor { m: u32, n: u32 },

    #[error("p divides d (p = {p}, d = {d})")]
    PDividesDegree { p: u32, d: usize },

    #[error("p divides h (p = {p}, h = {h})")]
    PDividesCharacter { p: u32, h: i64 },

    #[error("family of size {size} exceeds the exhaustive limit {limit}")]
    FamilyTooLarge { size: u128, limit: u128 },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that signal a tolerance breach rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
