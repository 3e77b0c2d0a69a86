use thiserror::Error;

/// Errors raised while building links or evaluating the NLI model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NliError {
    #[error("config: {0}")]
    Config(String),
    #[error("channels `{first}` and `{second}` overlap")]
    OverlappingChannels { first: String, second: String },
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("unknown modulation format `{0}` and no explicit phi")]
    UnknownFormat(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid span: {0}")]
    InvalidSpan(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("cut index {index} out of range for {channels} channels")]
    CutOutOfRange { index: usize, channels: usize },
    #[error("span index {index} out of range for {spans} spans")]
    SpanOutOfRange { index: usize, spans: usize },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("reversed integration bounds")]
    ReversedBounds,
    #[error("empty constellation")]
    EmptyConstellation,
    #[error("degenerate constellation: zero mean energy")]
    DegenerateConstellation,
    #[error("effective field attenuation must be positive, got {0} Np/m")]
    NonPhysicalLoss(f64),
    #[error("degenerate Raman profile fit (sigma_bar = {sigma_bar}, alpha1_bar = {alpha1_bar})")]
    DegenerateRamanFit { alpha1_bar: f64, sigma_bar: f64 },
    #[error("span {0} does not have flat loss; flat loss mode cannot be used")]
    NotFlatLoss(usize),
    #[error("fitted correction mode requires a coefficient table")]
    MissingCoefficients,
    #[error("coefficients: {0}")]
    Coefficients(String),
    #[error("channel {0} is the channel under test")]
    InterfererIsCut(usize),
    #[error("OSNR undefined: {0}")]
    DegenerateOsnr(&'static str),
}

pub type Result<T, E = NliError> = std::result::Result<T, E>;
