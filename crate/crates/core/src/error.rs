use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("the UE must lie strictly below the access point (ap.z = {ap_z}, ue.z = {ue_z})")]
    UeNotBelowAp { ap_z: f64, ue_z: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The gain scale b_H vanished; the continuous part collapses onto μ_H.
    #[error("degenerate gain distribution (b_H = 0); use the point-mass path")]
    DegenerateScale,

    #[error("no nonzero samples in the empirical distribution")]
    NoContinuousSamples,

    #[error("too few samples ({0}); at least 100 are required")]
    TooFewSamples(usize),

    #[error("operation requires {0}")]
    Unsupported(&'static str),
}

pub(crate) fn check_range(
    what: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value, range })
    }
}
