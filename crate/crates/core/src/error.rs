use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Adaptive refinement hit its depth or evaluation budget. Usually means
    /// the path runs through a singular point of the field.
    #[error("quadrature did not converge on [{lo}, {hi}] (depth {depth})")]
    QuadratureNonConvergence { lo: f64, hi: f64, depth: u32 },

    #[error("loop is not closed: endpoints {gap:e} m apart")]
    OpenPath { gap: f64 },

    #[error("wavelength must be positive, got {0}")]
    NonpositiveWavelength(f64),

    #[error("wavefront at z={wavefront_z} does not match aperture station z={aperture_z}")]
    StationMismatch { wavefront_z: f64, aperture_z: f64 },

    #[error("near-field geometry: distance {distance:e} below limit {limit:e}")]
    DegenerateGeometry { distance: f64, limit: f64 },

    #[error("channel mismatch: {0}")]
    ChannelMismatch(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("too few fringes in analysis window ({found} maxima, need 3)")]
    TooFewFringes { found: usize },

    #[error("patterns are sampled on different grids")]
    GridMismatch,
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::UnknownScenario(_)
                | Error::OpenPath { .. }
                | Error::NonpositiveWavelength(_)
                | Error::StationMismatch { .. }
                | Error::ChannelMismatch(_)
                | Error::GridMismatch
        )
    }
}
