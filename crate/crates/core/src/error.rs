use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two sampled functions live on different frequency grids.
    GridMismatch,
    /// The grid cannot resolve the requested pulse.
    GridTooCoarse { required_span: f64, span: f64, required_spacing: f64, spacing: f64 },
    /// A parameter violated its documented domain.
    InvalidParameter { name: &'static str, value: f64 },
    /// Time outside the control schedule.
    OutOfRange { t: f64, start: f64, end: f64 },
    NonFinite { what: &'static str },
    /// The channel absorbed the whole pulse; nothing left to post-select.
    DegenerateChannel,
    /// Reflection phase requested where the reflection amplitude vanishes.
    UndefinedPhase,
    /// Odd cat state with zero amplitude is the zero vector.
    DegenerateCat,
    TruncationInadequate { tail_mass: f64 },
    IntegratorFailure { t: f64, reason: &'static str },
    ZeroPostSelection,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridMismatch => write!(f, "sampled functions are defined on different grids"),
            Error::GridTooCoarse { required_span, span, required_spacing, spacing } => write!(
                f,
                "grid too coarse: span {span:e} rad/s (need >= {required_span:e}), spacing {spacing:e} rad/s (need <= {required_spacing:e})"
            ),
            Error::InvalidParameter { name, value } => write!(f, "invalid value {value} for {name}"),
            Error::OutOfRange { t, start, end } => {
                write!(f, "time {t:e} s outside schedule [{start:e}, {end:e}]")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::DegenerateChannel => write!(f, "channel output has zero norm"),
            Error::UndefinedPhase => write!(f, "reflection amplitude vanishes; phase undefined"),
            Error::DegenerateCat => write!(f, "odd cat state with zero amplitude"),
            Error::TruncationInadequate { tail_mass } => {
                write!(f, "Fock truncation inadequate: tail mass {tail_mass:e}")
            }
            Error::IntegratorFailure { t, reason } => write!(f, "integrator failed at t = {t:e} s: {reason}"),
            Error::ZeroPostSelection => write!(f, "post-selection probability is zero"),
        }
    }
}

impl core::error::Error for Error {}
