//! Verified-arithmetic decision pipeline for two families of exponential
//! Diophantine equations over Lucas and Pell numbers:
//!
//! ```text
//! L_m^{n+k} + L_m^n = L_r        P_m^{n+k} + P_m^n = P_r        (m, n >= 2)
//! ```
//!
//! The pipeline runs the classical effective method end to end with certified
//! interval arithmetic: a Matveev-type lower bound for linear forms in
//! logarithms caps the exponent `k`, continued-fraction reductions (a
//! Legendre-criterion argument for the Lucas family, two Dujella-Petho
//! passes for the Pell family) shrink that cap to single or double digits,
//! divisibility bounds pin `m` and `n`, and an exhaustive exact search over
//! the final box settles the equations. Every stage is recorded in a
//! machine-readable [`cert::ProofCertificate`] with its computed value, the
//! expected reference value, and a verdict.
//!
//! Module map:
//!
//! - [`dyadic`], [`real`]: exact dyadic endpoints and outward-rounded
//!   interval arithmetic with verified `sqrt` and `ln`.
//! - [`seq`]: big-integer Lucas/Pell kernels, membership, exact divisibility.
//! - [`cf`]: certified continued-fraction expansion and the two halves of
//!   Legendre's convergent criterion.
//! - [`baker`]: logarithmic heights, the Matveev coefficient, the bound
//!   propagation chains, and the Lucas Legendre reduction.
//! - [`reduce`]: the Dujella-Petho reduction scan.
//! - [`search`]: exhaustive verification over the final boxes.
//! - [`cert`]: the JSON proof certificate.
//! - [`pipeline`]: the per-equation strategies, their registry, and the
//!   orchestrator.

pub mod baker;
pub mod cert;
pub mod cf;
pub mod dyadic;
pub mod error;
pub mod pipeline;
pub mod real;
pub mod reduce;
pub mod search;
pub mod seq;

pub use cert::ProofCertificate;
pub use error::{Error, Result};
pub use pipeline::{run_pipeline, CheckMode, PipelineConfig, StageSelect, StrategyRegistry};
pub use real::{VerifiedReal, DEFAULT_PRECISION_BITS};
pub use seq::{SequenceKind, SolutionTuple};
