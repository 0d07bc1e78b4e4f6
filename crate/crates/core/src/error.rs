use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountError {
    #[error("amount overflow")]
    Overflow,
    #[error("amount underflow")]
    Underflow,
    #[error("{0} Worldcoin is not a whole number of millicoin")]
    NonRepresentable(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a quantity")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid country code {0:?}: expected 2-8 uppercase ASCII letters or digits")]
    InvalidCountryCode(String),
    #[error("threshold ordering violated: c1 x lt ({lt}) must be >= c2 x ct ({ct})")]
    ThresholdOrdering { lt: String, ct: String },
    #[error("effective threshold does not fit the amount range")]
    ThresholdOverflow,
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error(transparent)]
    Amount(#[from] AmountError),
}
