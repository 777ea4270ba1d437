use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("triangulation failed: {0}")]
    TriangulationFailure(String),

    #[error("unsupported quadrature order {0} (supported: 1..=4)")]
    UnsupportedOrder(usize),

    #[error("mesh generation failed: {0}")]
    GenerationFailure(String),

    #[error("hierarchy constraint violated between levels {coarse} and {fine}: h_fine = {h_fine}, h_coarse = {h_coarse}")]
    HierarchyConstraintViolation {
        coarse: usize,
        fine: usize,
        h_coarse: f64,
        h_fine: f64,
    },

    #[error("invalid hierarchy request: {0}")]
    InvalidHierarchy(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format version mismatch: expected {expected}, found {found}")]
    FormatVersion { expected: u32, found: u32 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("singular elliptic projector on cell {cell}")]
    SingularProjector { cell: usize },

    #[error("singular local solve: {0}")]
    SingularLocalSolve(String),

    #[error("insufficient snapshots: {snapshots} snapshots for {modes} modes")]
    InsufficientSnapshots { snapshots: usize, modes: usize },

    #[error("shape mismatch: compressor trained for {expected}-gons, element has {found} vertices")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("point ({x}, {y}) lies outside element {cell}")]
    PointOutsideElement { cell: usize, x: f64, y: f64 },

    #[error("coverage gap: intersection area {area} deviates from domain area {expected}")]
    CoverageGap { area: f64, expected: f64 },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("conjugate gradients stagnated after {iterations} iterations (relative residual {residual:e})")]
    CgStagnation { iterations: usize, residual: f64 },

    #[error("power iteration did not converge after {0} iterations")]
    NonConvergence(usize),

    #[error("multigrid did not reach tolerance within {iterations} iterations (relative residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },

    #[error("residual history is empty or starts at zero")]
    EmptyHistory,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("error on cell {cell}: {source}")]
    Cell {
        cell: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn on_cell(self, cell: usize) -> Self {
        match self {
            e @ Error::Cell { .. } => e,
            e => Error::Cell {
                cell,
                source: Box::new(e),
            },
        }
    }
}
