//! Error type shared by every stage of the alignment pipeline.

use thiserror::Error;

/// Errors raised by dataset ingestion, graph construction, transport and
/// embedding. Each variant belongs to one of two classes: invalid inputs
/// (bad files, bad parameters, degenerate label sets) or numerical failures
/// (singular systems, disconnected graphs, kernel underflow). The class
/// drives the CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: row {row}, column '{column}': cannot parse '{value}' as a number")]
    NonNumericCell {
        path: String,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: label column '{column}' not found in header")]
    MissingLabelColumn { path: String, column: String },

    #[error("{path}: {reason}")]
    MalformedFile { path: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset '{name}': feature value at row {row}, column {col} is not finite")]
    NonFiniteFeature { name: String, row: usize, col: usize },

    #[error("dataset '{name}' is empty")]
    EmptyDataset { name: String },

    #[error("pair ({source_index}, {target_index}) out of range for datasets of size {n} x {m}")]
    PairOutOfRange {
        source_index: usize,
        target_index: usize,
        n: usize,
        m: usize,
    },

    #[error("duplicate {side} index {index} in pair set")]
    DuplicatePairIndex { side: &'static str, index: usize },

    #[error("neighbor count k={k} out of range [1, {max}] for {n} samples")]
    NeighborCountOutOfRange { k: usize, max: usize, n: usize },

    #[error("zero k-NN bandwidth at row {row}: duplicate points up to the {k}-th neighbor")]
    ZeroBandwidth { row: usize, k: usize },

    #[error("matrix shape mismatch: {context} (expected {expected}, got {actual})")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("stationary distribution residual {residual:.3e} exceeds tolerance {tolerance:.1e}; operator is not the normalization of a symmetric affinity")]
    StationaryResidual { residual: f64, tolerance: f64 },

    #[error("linear system is numerically singular ({detail}); the diffusion graph is likely disconnected")]
    SingularSystem { detail: String },

    #[error("domain '{domain}' has no labeled samples")]
    NoLabeledSamples { domain: String },

    #[error("no class labels are shared between the two domains")]
    NoSharedClasses,

    #[error("only one shared class ('{class}'); label profiles would be degenerate")]
    SingleSharedClass { class: String },

    #[error("class '{class}' has no labeled samples in domain '{domain}'")]
    ClassMissingInDomain { class: String, domain: String },

    #[error("label profile row {row} has near-zero norm ({norm:.3e})")]
    DegenerateProfile { row: usize, norm: f64 },

    #[error("label profiles were built with different class orders")]
    ClassOrderMismatch,

    #[error("profile row {row} in domain '{domain}' has zero norm; cosine distance undefined")]
    ZeroNormProfileRow { domain: String, row: usize },

    #[error("mass vectors are infeasible: sum(a)={sum_a} != sum(b)={sum_b}")]
    InfeasibleMasses { sum_a: f64, sum_b: f64 },

    #[error("mass vector entry {index} on side '{side}' is not positive")]
    NonPositiveMass { side: &'static str, index: usize },

    #[error("exact assignment requires a square cost matrix, got {n} x {m}; use epsilon > 0 for unbalanced transport")]
    NonSquareCost { n: usize, m: usize },

    #[error("Gibbs kernel exp(-D/epsilon) underflowed to zero across {what}; raise epsilon")]
    KernelUnderflow { what: String },

    #[error("coupling row {row} has zero mass; barycentric projection undefined")]
    ZeroCouplingRow { row: usize },

    #[error("joint graph is disconnected ({components} components); cannot embed")]
    DisconnectedGraph { components: usize },

    #[error("embedding dimension d={d} out of range [1, {max}]")]
    EmbeddingDimOutOfRange { d: usize, max: usize },

    #[error("pair set is empty")]
    EmptyPairSet,

    #[error("target domain has no rows with known true labels")]
    NoEvaluableTargets,

    #[error("stage '{stage}': {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the pipeline stage at which the error surfaced.
    pub fn at_stage(self, stage: &'static str) -> Self {
        match self {
            // keep the innermost stage tag
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Stage name, if the error was tagged with one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// True for numerical failures (as opposed to invalid inputs or
    /// parameters). Numerical failures map to a distinct CLI exit code.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StationaryResidual { .. }
            | Error::SingularSystem { .. }
            | Error::KernelUnderflow { .. }
            | Error::DisconnectedGraph { .. }
            | Error::DegenerateProfile { .. }
            | Error::ZeroNormProfileRow { .. }
            | Error::ZeroCouplingRow { .. } => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
