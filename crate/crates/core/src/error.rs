use thiserror::Error;

/// Errors produced by the design and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid array geometry or group structure.
    #[error("configuration error: {0}")]
    Config(String),

    /// An angle or other physical quantity outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve or factorization failed beyond what diagonal loading
    /// can repair.
    #[error("numerical error: {what} (condition estimate {condition:.3e})")]
    Numerical { what: String, condition: f64 },

    /// The cone solver reported a problem status other than optimal where an
    /// optimum was required.
    #[error("solver failure: {0}")]
    Solver(String),

    /// An enumeration was refused because the candidate set is too large.
    #[error("size refusal: {what} would enumerate {count} candidates (limit {limit})")]
    TooLarge {
        what: String,
        count: u128,
        limit: u128,
    },

    /// No DCSA restart converged to a complementary binary selection. The
    /// best fractional iterate is attached for inspection.
    #[error("design failure: no restart converged to a complementary binary selection")]
    DesignFailure(Box<crate::dcsa::SplitDesign>),

    /// The difference coarray of the supplied positions misses spatial lags,
    /// so no hole-free augmented covariance exists.
    #[error("coarray hole: missing lags {0:?}")]
    CoarrayHole(Vec<usize>),
}
