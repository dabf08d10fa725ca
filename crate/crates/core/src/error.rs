use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported subspace: M exceeds 2j (M = {m}, 2j = {two_j})")]
    UnsupportedSubspace { m: i64, two_j: u32 },

    #[error("symmetric tridiagonal eigensolver did not converge (dimension {dim})")]
    EigenNonConvergence { dim: usize },

    #[error("no ESQPT: {0}")]
    NoEsqpt(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid too coarse: spacing {spacing} exceeds {limit} needed to resolve Fock components up to n = {n_max}")]
    GridTooCoarse { spacing: f64, limit: f64, n_max: usize },

    #[error("grid mismatch between phase fields")]
    GridMismatch,

    #[error("wrong field kind: expected {expected}, got {got}")]
    WrongFieldKind { expected: &'static str, got: &'static str },

    #[error("point ({x}, {p}) outside classical domain")]
    OutsideDomain { x: f64, p: f64 },

    #[error("empty support: no seed above threshold {threshold}")]
    EmptySupport { threshold: f64 },

    #[error("stationary seed at ({x}, {p}): trajectory is a fixed point")]
    StationarySeed { x: f64, p: f64 },

    #[error("contour closure failed: {0}")]
    ContourClosure(String),

    #[error("stationary energy {energy}: period undefined")]
    StationaryEnergy { energy: f64 },

    #[error("stationary center: quasipotential slope {slope} vanishes at the packet center")]
    StationaryCenter { slope: f64 },

    #[error("no root in bracket: {0}")]
    NoRootInBracket(String),

    #[error("validity violated: n|beta| = {lhs} does not exceed {margin} x {rhs}")]
    ValidityViolated { lhs: f64, rhs: f64, margin: f64 },

    #[error("no peaks found")]
    NoPeaks,

    #[error("insufficient peaks: need at least {needed}, found {found}")]
    InsufficientPeaks { needed: usize, found: usize },

    #[error("run failed: {0}")]
    RunFailed(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by invalid user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::UnsupportedSubspace { .. }
                | Error::NoEsqpt(_)
                | Error::DimensionMismatch { .. }
                | Error::GridMismatch
                | Error::WrongFieldKind { .. }
                | Error::Parse { .. }
        )
    }
}
