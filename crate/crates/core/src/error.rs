use alloc::boxed::Box;
use alloc::vec::Vec;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("Fock cutoff {0} is too small (need at least 1)")]
    CutoffTooSmall(usize),

    #[error("matrix is not symmetric: |H[{row}][{col}] - H[{col}][{row}]| = {asymmetry:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        asymmetry: f64,
    },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigen iteration failed to converge")]
    EigenIteration,

    #[error("energies not converged below cutoff {max_cutoff}")]
    NotConverged {
        max_cutoff: usize,
        previous: Vec<f64>,
        last: Vec<f64>,
    },

    #[error("level {level} out of range (dimension {dimension})")]
    LevelOutOfRange { level: usize, dimension: usize },

    #[error("transition requires i < j, got ({i}, {j})")]
    LevelOrder { i: usize, j: usize },

    #[error("operation requires epsilon = 0, got {0}")]
    NonZeroBias(f64),

    #[error("regime boundary b{index} not bracketed in (0, 2]")]
    RootNotBracketed { index: u8 },

    #[error("regime boundaries not strictly increasing: {0:?}")]
    UnorderedBoundaries([f64; 4]),

    #[error("delta/omega = {0} outside the supported domain [0, 1)")]
    DeltaRatioOutOfDomain(f64),

    #[error("at epsilon = {epsilon}: {source}")]
    AtBias { epsilon: f64, source: Box<Error> },

    #[error("axis `{0}` is empty or unsorted")]
    BadAxis(&'static str),

    #[error("displaced-state coefficients truncated: norm {norm} < 1 - 1e-8 at cutoff {n_fock}")]
    TruncatedCoefficients { norm: f64, n_fock: usize },

    #[error("feature pattern does not match any populated table cell")]
    UnpopulatedPattern,

    #[error("insufficient observations: {0}")]
    InsufficientObservations(&'static str),

    #[error("observation {index}: {reason}")]
    BadObservation { index: usize, reason: &'static str },
}

impl Error {
    pub(crate) fn at_bias(self, epsilon: f64) -> Self {
        Error::AtBias {
            epsilon,
            source: Box::new(self),
        }
    }
}
