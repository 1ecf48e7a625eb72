use thiserror::Error;

/// Errors produced while validating, fitting or parsing frequency-response data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: at least {min} samples required, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("frequencies must be strictly increasing (violated at index {index})")]
    NonMonotoneFrequencies { index: usize },

    #[error("frequency {value} outside the declared band [{w_min}, {w_max}]")]
    FrequencyOutOfBand { value: f64, w_min: f64, w_max: f64 },

    #[error("invalid band: w_max must be positive and exceed w_min (w_min={w_min}, w_max={w_max})")]
    InvalidBand { w_min: f64, w_max: f64 },

    #[error("sample at x=0 has |Im H| = {imag} above the symmetry tolerance {tol}; impulse response is not real")]
    NonRealAtZero { imag: f64, tol: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("singular value decomposition failed to converge")]
    SvdNoConvergence,

    #[error("rank zero under tolerance: all {count} singular values discarded at xi={xi}")]
    RankZero { count: usize, xi: f64 },

    #[error("right-hand side length {rhs_len} does not match factored matrix rows {rows}")]
    RhsLengthMismatch { rhs_len: usize, rows: usize },

    #[error("truncation tolerance xi must satisfy 0 < xi < 1, got {0}")]
    InvalidXi(f64),

    #[error("extension period b must satisfy 1 < b <= 4, got {0}")]
    InvalidPeriod(f64),

    #[error("need at least {need} collocation points for {modes} modes, got {got}")]
    Underdetermined { need: usize, got: usize, modes: usize },

    #[error("smoothness fit requires at least 3 positive error samples")]
    SmoothnessFitInput,

    #[error("port index ({i}, {j}) out of range for {n_ports}-port network")]
    PortOutOfRange { i: usize, j: usize, n_ports: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
