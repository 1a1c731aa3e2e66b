use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the evaluation and continuation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("odd dimension n = {0} is not supported (n must be even)")]
    OddDimension(usize),

    #[error("determinant {det} is too far from 1 (|det - 1| = {deviation:.3e})")]
    Determinant { det: Complex64, deviation: f64 },

    #[error("too close to the discriminant locus: |disc| = {clearance:.3e} at sample {index} (floor {floor:.3e})")]
    DiscriminantProximity {
        clearance: f64,
        index: usize,
        floor: f64,
    },

    #[error("root finder did not converge; polynomial coefficients (ascending) {coeffs:?}")]
    RootFinder { coeffs: Vec<Complex64> },

    #[error("singular pencil member: {0}")]
    SingularPencil(String),

    #[error("defective pencil: eigenvalue {value} is (nearly) multiple")]
    DefectivePencil { value: Complex64 },

    #[error("zero vector")]
    ZeroVector,

    #[error("point lies on a quadric (|Q| = {value:.3e})")]
    OnQuadric { value: f64 },

    #[error("both quadric gradients vanish at the point")]
    SingularPoint,

    #[error("isotopy failed at s = {s:.6}: vertex {vertex}, clearance {clearance:.3e}: {reason}")]
    Isotopy {
        s: f64,
        vertex: usize,
        clearance: f64,
        reason: String,
        clearance_trace: Vec<f64>,
    },

    #[error("quadrature failed at vertex {vertex}: {reason}")]
    Quadrature { vertex: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::OddDimension(_)
            | Error::Determinant { .. }
            | Error::ZeroVector
            | Error::Json(_) => 2,
            Error::DiscriminantProximity { .. } | Error::DefectivePencil { .. } => 3,
            Error::Isotopy { .. } => 4,
            Error::Quadrature { .. } | Error::OnQuadric { .. } | Error::RootFinder { .. } => 5,
            Error::SingularPencil(_) | Error::SingularPoint => 2,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
