use crate::geometry::ExtDualVec;
use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("polygon needs at least one vertex")]
    EmptyPolygon,

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("operation requires a two-dimensional polygon")]
    DegeneratePolygon,

    #[error("the zero polynomial has no Newton polygon")]
    ZeroPolynomial,

    #[error("polynomial is not normalized (vertex coefficients must be 1)")]
    NotNormalized,

    #[error("degree {0} is a multiple of the Gorenstein degree")]
    RadialDegree(ExtDualVec),

    #[error("witness support must be a lattice point or segment inside the kernel line of the degree")]
    WitnessOutsideKernel,

    #[error("({m}, Q) is not a deformation pair of the polygon")]
    NotDeformationPair { m: ExtDualVec },

    #[error("polynomial is not mutable at {m}: slice at level {level} is not divisible")]
    NotMutable { m: ExtDualVec, level: i64 },

    #[error("mutation step {index} failed: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("element {0} does not lie in the dual monoid")]
    NotInMonoid(ExtDualVec),

    #[error("element {0} has no representation over the stored generators")]
    NoRepresentation(ExtDualVec),

    #[error("generating set rejected: {0}")]
    BadGeneratingSet(String),

    #[error("transported generating set fails representation compatibility at {0}")]
    TransportIncompatible(ExtDualVec),

    #[error("certification failed: nonzero expansion term {term} at parameter degree {t_degree:?}")]
    Certification { term: String, t_degree: Vec<u32> },

    #[error("family is not mutable along the requested parameter: {0}")]
    FamilyNotMutable(String),

    #[error("internal degree bookkeeping violated: {0}")]
    DegreeBookkeeping(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
