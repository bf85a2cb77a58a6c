//! Model-generic boundary calculus.

pub mod backend;
pub mod calculus;
pub mod verify;

pub use backend::{Faulty, ModelBackend};
pub use calculus::{
    dtn, greens_identity_residual, lambda_metric, q0, robin, BoundaryCalculus, DtNMatrix, G12Metric, KernelPair,
    MatchedPair, RobinBoundary, SpectralRelationResult,
};
pub use verify::{verify_suite, VerificationReport, VerifyConfig};
