//! Run manifests: enough provenance to reproduce any output byte-for-byte.

use causalman::sampling::BatchMeta;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Content hash of the generating graph's canonical serialization.
    pub graph_fingerprint: String,
    pub master_seed: u64,
    /// SHA-256 of the resolved schedule JSON.
    pub schedule_digest: String,
    /// Unix epoch seconds at write time.
    pub timestamp: u64,
    pub rows: usize,
    pub columns: usize,
    pub batches: Vec<BatchMeta>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn now_epoch_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
