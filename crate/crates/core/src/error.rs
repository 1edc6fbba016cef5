use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A device sits exactly on an antenna, so the free-space term is undefined.
    #[error("degenerate geometry: device {device} coincides with antenna {antenna}")]
    DegenerateGeometry { antenna: usize, device: usize },

    /// `n_antennas * min_spacing` does not fit on the waveguide.
    #[error(
        "infeasible geometry: {n_antennas} antennas with spacing {min_spacing_m} m \
         do not fit on a {span_m} m waveguide"
    )]
    InfeasibleGeometry {
        n_antennas: usize,
        min_spacing_m: f64,
        span_m: f64,
    },

    #[error("infeasible allocation{}: {reason}", device_suffix(.device))]
    Infeasible {
        reason: String,
        device: Option<usize>,
    },

    #[error("solver tolerance failure: {0}")]
    Tolerance(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot write {path}: {reason}")]
    Output { path: String, reason: String },
}

fn device_suffix(device: &Option<usize>) -> String {
    match device {
        Some(k) => format!(" (device {k})"),
        None => String::new(),
    }
}

impl Error {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn infeasible(reason: impl Into<String>, device: Option<usize>) -> Self {
        Error::Infeasible {
            reason: reason.into(),
            device,
        }
    }

    pub(crate) fn output(path: &std::path::Path, reason: impl std::fmt::Display) -> Self {
        Error::Output {
            path: path.display().to_string(),
            reason: reason.to_string(),
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. } | Error::InfeasibleGeometry { .. }
        )
    }
}
