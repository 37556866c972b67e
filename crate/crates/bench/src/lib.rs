//! Benchmark fixtures shared by the criterion targets.

use qcross_core::circuits::{build_ghz, Circuit};
use qcross_core::measure::{acquire_dataset, sample_settings_random, MeasurementDataset};
use qcross_core::platforms::{ConnectivitySpec, NoiseModel, PlatformProfile, Technology};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn noisy_profile(name: &str) -> PlatformProfile {
    PlatformProfile::new(
        name,
        Technology::TrappedIon,
        NoiseModel {
            p1: 4e-4,
            p2: 1.2e-2,
            readout_eps: 5e-3,
        },
        ConnectivitySpec::Named("complete".into()),
    )
    .unwrap()
}

/// A GHZ dataset at a configurable size, for estimator benchmarks.
pub fn ghz_dataset(n: usize, m_u: usize, m_s: u32, seed: u64) -> MeasurementDataset {
    let circuit = build_ghz(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let settings = sample_settings_random(n, m_u, &mut rng);
    acquire_dataset(&noisy_profile("bench"), &circuit, &settings, m_s, seed).unwrap()
}

pub fn qv_circuit(n: usize, d: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    qcross_core::circuits::sample_qv_circuit(n, d, &mut rng).unwrap()
}
