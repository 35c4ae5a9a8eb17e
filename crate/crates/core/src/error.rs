use thiserror::Error;

/// Where in the mesh a pointwise failure happened.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Location {
    pub element: Option<usize>,
    pub node: Option<usize>,
    pub time: Option<f64>,
    pub stage: Option<usize>,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(e) = self.element {
            parts.push(format!("element {e}"));
        }
        if let Some(n) = self.node {
            parts.push(format!("node {n}"));
        }
        if let Some(t) = self.time {
            parts.push(format!("t = {t:.6e}"));
        }
        if let Some(s) = self.stage {
            parts.push(format!("RK stage {s}"));
        }
        if parts.is_empty() {
            write!(f, "unknown location")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dry state (h = {h:e} <= h_min) at {location}")]
    DryState { h: f64, location: Location },

    #[error("non-finite value at {location}")]
    NonFinite { location: Location },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attach mesh/time context to a pointwise error.
    pub fn at(self, element: usize, node: usize) -> Self {
        match self {
            Error::DryState { h, mut location } => {
                location.element = Some(element);
                location.node = Some(node);
                Error::DryState { h, location }
            }
            Error::NonFinite { mut location } => {
                location.element = Some(element);
                location.node = Some(node);
                Error::NonFinite { location }
            }
            other => other,
        }
    }

    pub fn at_time(self, time: f64, stage: Option<usize>) -> Self {
        match self {
            Error::DryState { h, mut location } => {
                location.time = Some(time);
                location.stage = stage;
                Error::DryState { h, location }
            }
            Error::NonFinite { mut location } => {
                location.time = Some(time);
                location.stage = stage;
                Error::NonFinite { location }
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
