//! Cross-platform comparison of quantum computations on emulated noisy devices.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! - [`circuits`]: test-state circuits (GHZ ladders, quantum-volume circuits)
//!   and the random primitives behind them (uniform permutations, Haar SU(4)).
//! - [`platforms`]: named device emulations with depolarizing gate noise and
//!   readout flips, plus exact density-matrix oracles for validation.
//! - [`measure`]: randomized Pauli-basis measurement settings (uniform or
//!   greedy max-spread sampling), shot acquisition, and the portable JSON-Lines
//!   dataset format exchanged with a central repository.
//! - [`estimate`]: overlap/purity/fidelity estimators from measurement data,
//!   via outcome cross-correlations (Protocol I) or classical shadows
//!   (Protocol II), subsystem restriction, and hierarchical bootstrap errors.
//! - [`analyze`]: Pauli-expectation feature vectors and PCA projections that
//!   expose technology clustering across devices.
//! - [`route`]: SWAP-insertion cost of running circuits on restricted
//!   connectivity graphs.
//!
//! Everything is deterministic given a master seed: randomness is derived
//! through named substreams ([`rng::substream`]) and all parallel reductions
//! use a fixed order, so results are reproducible across thread counts.

pub mod analyze;
pub mod circuits;
pub mod error;
pub mod estimate;
pub mod measure;
pub mod platforms;
pub mod rng;
pub mod route;
pub mod stats;

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;

pub use analyze::{FeatureConfig, FeatureMatrix, PauliOp, PauliString, PcaResult};
pub use circuits::{Circuit, Gate, GateKind, Permutation};
pub use error::{Error, Result};
pub use estimate::{FidelityEstimate, Protocol};
pub use measure::{Basis, MeasurementDataset, MeasurementSetting, SettingRecord};
pub use platforms::{DensityMatrix, NoiseModel, PlatformProfile, Technology};
pub use route::{ConnectivityGraph, GraphName, RoutedCost};
