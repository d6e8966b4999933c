use alloc::string::String;

/// Errors raised by the physics core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("vector `{name}` is not unit-norm (|v| = {norm})")]
    NotUnitVector { name: &'static str, norm: f64 },
    #[error("polarization is not transverse to the propagation direction (|pol·k| = {dot})")]
    NotTransverse { dot: f64 },
    #[error("no transition matches wavelength {wavelength_nm:.3} nm")]
    UnknownWavelength { wavelength_nm: f64 },
    #[error("beam wavelength {beam_nm:.3} nm does not match transition at {transition_nm:.3} nm")]
    WavelengthMismatch { beam_nm: f64, transition_nm: f64 },
    #[error("required {0} beam is missing")]
    MissingBeam(&'static str),
    #[error("rate matrix has {0} closed classes; steady state is not unique")]
    DegenerateNullSpace(usize),
    #[error("branching fractions out of {level} sum to {sum}")]
    BranchingNotNormalized { level: &'static str, sum: f64 },
    #[error("{n}-ion string is unstable: ω_r/ω_z = {ratio:.4} below zigzag threshold {threshold:.4}")]
    StringUnstable { n: usize, ratio: f64, threshold: f64 },
    #[error("time step {dt:e} s exceeds limit {limit:e} s")]
    TimeStepTooLarge { dt: f64, limit: f64 },
    #[error("non-finite state at t = {time:e} s (ion {ion})")]
    NonFinite { time: f64, ion: usize },
    #[error("index {index} out of range for {len} ions")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("averaging window too short: {got:e} s < {need:e} s")]
    WindowTooShort { got: f64, need: f64 },
    #[error("velocity grid too coarse: spacing {spacing:e} m/s > {limit:e} m/s")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("velocity grid does not bracket v = 0")]
    GridDoesNotBracketZero,
    #[error("force profile never reaches the requested threshold")]
    BelowThreshold,
    #[error("solver did not converge: {0}")]
    NoConvergence(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
