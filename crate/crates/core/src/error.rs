use thiserror::Error;

/// Errors raised by window construction, lattice bookkeeping and frame analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("signals live on different grids")]
    GridMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shift or rescaling leaves the grid domain: {0}")]
    OutOfDomain(String),
    #[error("generator {generator}: p0 = {p0} differs from the painless value 2π/(Pμ) = {expected}")]
    NotPainless { generator: usize, p0: f64, expected: f64 },
    #[error("translation steps q0 are not commensurate; the density has no common period")]
    IncommensurateLattice,
    #[error("zero signal at battery index {0}")]
    ZeroSignal(usize),
    #[error("signal is not in the Hardy space: negative-frequency energy fraction {0:.3e}")]
    NotHardy(f64),
    #[error("v(ε) = v0 − P/ε vanishes at ε = {0}")]
    DegenerateV(f64),
    #[error("λ = {lambda} must be strictly below the reference lower bound {alpha}")]
    LambdaTooLarge { lambda: f64, alpha: f64 },
    #[error("atom families are not aligned: {0}")]
    IndexMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, FrameError>;
