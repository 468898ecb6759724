use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Sizes, dimensions or coordinate ranges do not fit the operation.
    #[error("instance shape: {0}")]
    Shape(String),

    /// An exact quantity does not fit the documented integer width, or an
    /// enumeration exceeds its cap.
    #[error("arithmetic capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A value handed in from outside (a solver output, a matching file)
    /// contradicts an identity that must hold for it.
    #[error("inconsistent value: {0}")]
    Inconsistency(String),

    /// Something that cannot happen for valid input happened anyway.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("promise violated: {0}")]
    PromiseViolation(String),

    #[error("{layer}: {source}")]
    Layer {
        layer: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn inconsistency(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Attributes the error to a pipeline layer.
    pub fn at(self, layer: &'static str) -> Self {
        Error::Layer {
            layer,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping layer attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Layer { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) trait LayerExt<T> {
    fn layer(self, layer: &'static str) -> Result<T>;
}

impl<T> LayerExt<T> for Result<T> {
    fn layer(self, layer: &'static str) -> Result<T> {
        self.map_err(|e| e.at(layer))
    }
}
