use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the pure computations in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    Domain(&'static str),
    /// A non-finite value reached an integrator or a law.
    NonFinite(&'static str),
    /// The feature is on the wrong side of the camera or inside its focal distance.
    NotVisible,
    /// Image flow is too small to form a time-to-transit ratio.
    IndeterminateFlow,
    /// A paired-feature law was given two coincident features.
    DegeneratePair,
    /// The vehicle sits (numerically) on the feature it should circle.
    SingularCircle {
        distance: f64,
    },
    /// Initial heading exactly opposite to the goal direction.
    SingularHeading,
    /// A feature label did not resolve against the scene.
    UnknownFeature(String),
    InvalidScene(String),
    InvalidProtocol(String),
    /// The curve never crosses the line through the vine perpendicular to the reference heading.
    Unclassifiable,
    /// Curves do not share a sample grid.
    GridMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::NonFinite(what) => write!(f, "non-finite value: {what}"),
            Error::NotVisible => f.write_str("feature not visible to the camera"),
            Error::IndeterminateFlow => f.write_str("image flow too small to compute time-to-transit"),
            Error::DegeneratePair => f.write_str("paired-feature law needs two distinct features"),
            Error::SingularCircle { distance } => {
                write!(f, "cannot circle a feature at distance {distance:e} m")
            }
            Error::SingularHeading => f.write_str("initial heading is the singular opposite direction"),
            Error::UnknownFeature(id) => write!(f, "unknown feature `{id}`"),
            Error::InvalidScene(msg) => write!(f, "invalid scene: {msg}"),
            Error::InvalidProtocol(msg) => write!(f, "invalid protocol: {msg}"),
            Error::Unclassifiable => f.write_str("curve never reaches the vine's transit line"),
            Error::GridMismatch => f.write_str("curves do not share a sample grid"),
        }
    }
}

impl core::error::Error for Error {}
