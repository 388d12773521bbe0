//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while building operators, deriving frames,
/// diagonalizing or evaluating observables.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Fock cutoff too small to hold a ladder operator.
    #[error("invalid dimension {0}: Fock cutoff must be >= 2")]
    InvalidDimension(usize),

    /// Operator/space/state dimensions do not match.
    #[error("shape mismatch: {0}")]
    ShapeError(String),

    /// Detuning hits a mechanical sideband, the dispersive elimination
    /// diverges.
    #[error("resonant detuning: |delta_a_tilde {sign} omega_b| = {magnitude:.3e} below guard")]
    ResonanceError { sign: char, magnitude: f64 },

    /// Dispersive-regime requirement violated for (G, delta_a_tilde) input.
    #[error("dispersive condition violated: G/|delta_a_tilde - omega_b| = {ratio:.4} >= {threshold}")]
    DispersiveRegime { ratio: f64, threshold: f64 },

    /// The quadratic form of the mechanical mode is no longer positive;
    /// the harmonic description fails.
    #[error("mechanical instability: 1 + alpha*gtc^2 - 4 xi/omega_b = {argument:.6e} <= 0")]
    MechanicalInstability { argument: f64 },

    /// A closed-form phase expression was requested outside its domain.
    #[error("phase domain error: {0}")]
    PhaseDomainError(String),

    /// Non-Hermitian input where a Hermitian operator is required.
    #[error("operator is not hermitian (max deviation {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    /// Iterative eigensolver ran out of iterations.
    #[error("eigensolver did not converge: worst residual {residual:.3e} after {iterations} iterations")]
    ConvergenceFailure { residual: f64, iterations: usize },

    /// Moment order must be even, positive and modest.
    #[error("invalid moment order {0}: must be even, >= 2 and <= 20")]
    InvalidOrder(i64),

    /// A moment expansion was asked to run without all required inputs.
    #[error("incomplete input: missing normal-ordered moment of order {0}")]
    IncompleteInput(usize),

    /// g2 of a state with (numerically) zero occupation.
    #[error("undefined correlation: occupation {0:.3e} is zero or below the floor")]
    UndefinedCorrelation(f64),

    /// Symmetry-broken pair reconstruction needs opposite-parity inputs.
    #[error("symmetry error: {0}")]
    SymmetryError(String),

    /// State vector is too far from unit norm to silently renormalize.
    #[error("state norm {0} deviates from 1 by more than 1e-6")]
    NotNormalized(f64),

    /// Bad configuration file or CLI input.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while writing results.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
