use thiserror::Error;

#[derive(Debug, Error)]
pub enum SemError {
    #[error("unsupported order {0}: supported polynomial orders are 1..=7")]
    UnsupportedOrder(usize),
    #[error("point ({0}, {1}) lies outside the reference triangle")]
    OutsideReferenceTriangle(f64, f64),
    #[error("expected {expected} nodal values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("nodal basis is ill-conditioned (condition number {0:.3e} exceeds 1e12)")]
    IllConditionedBasis(f64),

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },
    #[error("empty mesh: no triangles found")]
    EmptyMesh,
    #[error("element {0} is degenerate (collinear vertices)")]
    DegenerateElement(usize),

    #[error("curve parameter out of range: {0}")]
    CurveRange(String),

    #[error("permutation of length {got} is not a bijection over 0..{expected}")]
    InvalidPermutation { expected: usize, got: usize },

    #[error("non-positive material value ({name} = {value}) on element {element}")]
    InvalidMaterial {
        name: &'static str,
        value: f64,
        element: usize,
    },
    #[error("no material entry for region tag {0}")]
    MissingMaterial(i32),
    #[error("lumped mass entry {node} is non-positive ({value})")]
    NonPositiveLumpedMass { node: usize, value: f64 },
    #[error("state dimensions do not match mesh: {0}")]
    DimensionMismatch(String),
    #[error("simulation became unstable (non-finite values) at step {step}")]
    Unstable { step: usize },

    #[error("invalid cache configuration: {0}")]
    InvalidCacheConfig(String),

    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("archive error: {0}")]
    Archive(String),
}

pub type Result<T> = std::result::Result<T, SemError>;
