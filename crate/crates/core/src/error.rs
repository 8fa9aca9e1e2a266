use thiserror::Error;

/// Errors shared by the numerical layers of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spin must satisfy 2S >= 1, got 2S = {0}")]
    InvalidSpin(u32),

    #[error("matrix is not hermitian: max |H - H^dag| = {0:.3e}")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown spin axis `{0}` (expected one of x, y, z)")]
    UnknownAxis(char),

    #[error("empty operator label")]
    EmptyLabel,

    #[error("unsupported Floquet-Magnus order {0} (implemented up to 2)")]
    UnsupportedOrder(u8),

    #[error("ansatz elements are not numerically independent (gram eigenvalue ratio {0:.3e})")]
    IllConditionedAnsatz(f64),

    #[error("generator does not lie in the ansatz span: relative residual {0:.3e}")]
    SpanFailure(f64),

    #[error("initial state is already at infinite-temperature energy (|E_inf - E_0| = {0:.3e})")]
    DegenerateNormalization(f64),

    #[error("evolution time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("need at least 3 distinct eigenphases, got {0}")]
    TooFewPhases(usize),

    #[error("need more constraints than ansatz elements: n_con = {n_con}, ansatz size = {n_ansatz}")]
    TooFewConstraints { n_con: usize, n_ansatz: usize },

    #[error("quadrature not converged: doubling the order moved an entry by {0:.3e} relative")]
    QuadratureOrderTooLow(f64),

    #[error("linear algebra backend failure: {0}")]
    LinAlg(#[from] ndarray_linalg::error::LinalgError),
}
