use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported dimension d = {d} (supported: {supported})")]
    UnsupportedDimension { d: usize, supported: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// `|E_F| <= m != 0`: there is no Fermi surface and no Fermi momentum.
    #[error("no Fermi surface for E_F = {fermi_energy}, m = {mass} (|E_F| <= m != 0)")]
    UndefinedRegime { fermi_energy: f64, mass: f64 },

    #[error("regime mismatch: requested {requested}, parameters are in regime {actual}")]
    RegimeMismatch {
        requested: &'static str,
        actual: &'static str,
    },

    /// Successive refinements disagreed; `trace` holds the refinement sequence.
    #[error("{what} did not converge (refinement trace: {trace:?})")]
    NonConvergence { what: &'static str, trace: Vec<f64> },

    #[error(
        "resolution guard violated: spacing {spacing} * scale {scale} * momentum radius \
         {momentum_radius} exceeds pi"
    )]
    ResolutionGuard {
        spacing: f64,
        scale: f64,
        momentum_radius: f64,
    },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("insufficient points for fitting: {usable} usable, at least 3 required")]
    InsufficientPoints { usable: usize },

    #[error("rank-deficient regression design (scales must be distinct)")]
    RankDeficient,

    #[error("zero-coefficient regime requires an explicit reference scale")]
    MissingReference,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
