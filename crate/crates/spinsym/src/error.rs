use thiserror::Error;

/// Grid node witness attached to structural failures.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWitness {
    pub index: Vec<usize>,
    pub point: Vec<f64>,
}

impl std::fmt::Display for NodeWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "node {:?} at {:?}", self.index, self.point)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("evaluation error at offset {offset}: {message}")]
    Eval { offset: usize, message: String },

    #[error("problem file error at line {line}: {message}")]
    ProblemFile { line: usize, message: String },

    #[error("finite-difference stencil leaves the chart along axis {axis} at {point:?}")]
    StencilOutOfBounds { axis: usize, point: Vec<f64> },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("matrix is not Hermitian (defect {defect:.3e} at {witness})")]
    NotHermitian { defect: f64, witness: NodeWitness },

    #[error("principal symbol is degenerate at {witness} (|det e| = {det:.3e})")]
    Degenerate { det: f64, witness: NodeWitness },

    #[error("metric has wrong signature at {witness}: eigenvalues {eigs:?}")]
    WrongSignature { eigs: Vec<f64>, witness: NodeWitness },

    #[error("vector field is not timelike at {witness} (g(u,u) = {value:.3e})")]
    NotTimelike { value: f64, witness: NodeWitness },

    #[error("charge is not constant over the chart: {0}")]
    ChargeNotConstant(String),

    #[error("charge formulas disagree at {witness}: trace formula {trace_value:.6}, sgn det e = {det_sign}")]
    ChargeMismatch {
        trace_value: f64,
        det_sign: i8,
        witness: NodeWitness,
    },

    #[error("gauge map invalid at {witness}: {reason}")]
    InvalidGauge { reason: String, witness: NodeWitness },

    #[error("frame is not orthonormal at {witness} (defect {defect:.3e})")]
    NotOrthonormal { defect: f64, witness: NodeWitness },

    #[error("relating map leaves the identity component at {witness}: {reason}")]
    OutsideIdentityComponent { reason: String, witness: NodeWitness },

    #[error("Gram-Schmidt degenerated at {witness}: reference basis exhausted")]
    GramSchmidtBreakdown { witness: NodeWitness },

    #[error("singular frame matrix while solving for the potential at {witness}")]
    SingularFrame { witness: NodeWitness },

    #[error("extracted potential has imaginary residue {residue:.3e} at {witness}")]
    ComplexPotential { residue: f64, witness: NodeWitness },

    #[error("matrix is not a rotation / restricted Lorentz transformation: {0}")]
    NotRotation(String),

    #[error("quaternion is not unit length (|q| = {0})")]
    NotUnitQuaternion(f64),

    #[error("ambiguous lifting step {step}: consecutive samples too far apart")]
    AmbiguousLift { step: usize },

    #[error("rotation path is not closed (gap {0:.3e})")]
    PathNotClosed(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("numerical verdict failed: {0}")]
    VerdictFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code classes for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Eval { .. } | Error::ProblemFile { .. } => 2,
            Error::VerdictFailed(_) => 4,
            _ => 3,
        }
    }
}
