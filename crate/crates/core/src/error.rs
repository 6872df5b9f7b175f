use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("grid functions are defined on different node sets")]
    GridMismatch,

    #[error("integrator failed near x = {x}: worst local error estimate {worst_error:e}")]
    Integrator { x: f64, worst_error: f64 },

    #[error("incomplete spectrum: located {found} zeros but the argument principle counts {counted}")]
    IncompleteSpectrum { found: usize, counted: usize },

    #[error("ambiguous multiplicity for cluster at {center}: winding estimate {estimate}")]
    MultiplicityAmbiguity { center: Complex64, estimate: f64 },

    #[error("ill-conditioned contour around {center} (radius {radius:e}): zero between r and 2r")]
    IllConditionedContour { center: Complex64, radius: f64 },

    #[error("numbering ambiguity: {0}")]
    NumberingAmbiguity(String),

    #[error("evaluation at {lambda} hits a pole of the renormalized product; displace the contour")]
    Singularity { lambda: Complex64 },

    #[error("no admissible contour radius around {center}")]
    Contour { center: Complex64 },

    #[error("basis degeneracy: {0}")]
    BasisDegeneracy(String),

    #[error("additional data missing for index {0}")]
    InputIncomplete(usize),

    #[error("a[{index}] vanishes although k_n < m_n for n = {n}; spectrum contradicts admissibility")]
    Contradiction { n: usize, index: usize },

    #[error("spectrum is not admissible: {0}")]
    Inadmissible(String),

    #[error("expression parse error at column {column}: {message}")]
    Expression { column: usize, message: String },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
