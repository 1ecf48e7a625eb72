//! Causality verification for bandlimited tabulated frequency responses.
//!
//! The pipeline: rescale the data onto [-0.5, 0.5], mirror it by conjugate
//! symmetry, fit a causal Fourier continuation by truncated-SVD least
//! squares, then characterize any causality violations from the
//! reconstruction errors and a resolution sweep.

pub mod continuation;
pub mod diagnostics;
pub mod error;
mod extended;
pub mod generators;
pub mod lsq_svd;
pub mod spectrum;
pub mod touchstone;

pub use continuation::{
    CausalContinuation, ContinuationConfig, FitDiagnostics, Formulation, Precision,
    ReconstructionError,
};
pub use diagnostics::{BoundCoefficients, CausalityReport, SmoothnessFit, Verdict};
pub use error::{Error, Result};
pub use lsq_svd::{SvdFactors, TruncatedSolution, XiMode};
pub use spectrum::{BandKind, RescaledResponse, SampledResponse};
pub use touchstone::NetworkData;
