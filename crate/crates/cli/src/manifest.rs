//! The run manifest: every parameter a run needs, in one hashed file.

use anyhow::{bail, Context, Result};
use qcross_core::platforms::ConnectivitySpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    /// "ghz" or "qv".
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformEntry {
    pub name: String,
    pub technology: String,
    pub p1: f64,
    pub p2: f64,
    pub readout_eps: f64,
    pub connectivity: ConnectivitySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionSpec {
    pub m_u: usize,
    pub m_s: u32,
    /// "random" or "greedy".
    pub sampler: String,
    pub n_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSpec {
    /// "I" or "II".
    pub protocol: String,
    pub bootstrap_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    /// Creation timestamp (RFC 3339). Excluded from the hash; derived
    /// artifacts copy it instead of reading the wall clock, so identical
    /// manifests reproduce identical files.
    pub created: String,
    pub master_seed: u64,
    pub circuit: CircuitSpec,
    pub platforms: Vec<PlatformEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquisition: Option<AcquisitionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation: Option<EstimationSpec>,
}

impl RunManifest {
    /// SHA-256 of the canonical manifest JSON, covering everything that
    /// defines the run's data: run id, master seed, circuit, platforms and
    /// acquisition parameters. The timestamp and the estimation section are
    /// blanked: re-analysis must not re-tag already-acquired data, and the
    /// estimation parameters are echoed inside the estimate outputs.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.created = String::new();
        canonical.estimation = None;
        let bytes = serde_json::to_vec(&canonical).expect("manifest serialization");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn path(run_dir: &Path) -> PathBuf {
        run_dir.join("manifest.json")
    }

    pub fn save(&self, run_dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        let tmp = run_dir.join("manifest.json.tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, Self::path(run_dir))?;
        Ok(())
    }

    pub fn load(run_dir: &Path) -> Result<RunManifest> {
        let path = Self::path(run_dir);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Exclusive lock on a run directory, released on drop.
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(run_dir: &Path) -> Result<RunLock> {
        let path = run_dir.join(".lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(RunLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                bail!(
                    "run directory {} is locked (concurrent invocation? remove {} if stale)",
                    run_dir.display(),
                    path.display()
                )
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_manifest() -> RunManifest {
        RunManifest {
            run_id: "demo".into(),
            created: "2021-06-01T00:00:00Z".into(),
            master_seed: 7,
            circuit: CircuitSpec {
                kind: "ghz".into(),
                n: 5,
                d: None,
                label: "ghz5".into(),
            },
            platforms: vec![],
            acquisition: None,
            estimation: None,
        }
    }

    #[test]
    fn hash_ignores_timestamp_and_estimation() {
        let a = sample_manifest();
        let mut b = a.clone();
        b.created = "2022-01-01T00:00:00Z".into();
        b.estimation = Some(EstimationSpec {
            protocol: "II".into(),
            bootstrap_b: 100,
        });
        assert_eq!(a.hash(), b.hash());
        b.master_seed = 8;
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.acquisition = Some(AcquisitionSpec {
            m_u: 100,
            m_s: 2000,
            sampler: "greedy".into(),
            n_candidates: 200,
        });
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let lock = RunLock::acquire(dir.path()).unwrap();
        assert!(RunLock::acquire(dir.path()).is_err());
        drop(lock);
        let _again = RunLock::acquire(dir.path()).unwrap();
    }

    #[test]
    fn manifest_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let m = sample_manifest();
        m.save(dir.path()).unwrap();
        assert_eq!(RunManifest::load(dir.path()).unwrap(), m);
    }
}
