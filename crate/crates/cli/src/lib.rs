//! Run-directory orchestration for cross-platform comparison pipelines.
//!
//! A run lives in one directory:
//!
//! ```text
//! runs/<id>/
//!   manifest.json     parameters + master seed; its hash tags every output
//!   circuits/         circuit JSON
//!   datasets/         one JSON-Lines file per platform
//!   estimates/        pairwise fidelity matrix + per-pair JSON
//!   analysis/         subsystem, PCA and routing artifacts
//! ```
//!
//! All randomness is derived from the manifest's master seed through named
//! substreams, so re-running any command against the same manifest produces
//! byte-identical outputs, independent of the thread count.

pub mod commands;
pub mod manifest;

pub use commands::*;
pub use manifest::{RunLock, RunManifest};
