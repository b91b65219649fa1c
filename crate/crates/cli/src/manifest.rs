//! Run manifest embedded in every report: the full configuration plus
//! content digests of the inputs, so equal manifests imply byte-identical
//! reports.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use avert_core::model::ReachParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub gate_kind: String,
    pub mdr_mode: String,
    pub match_threshold: f64,
    pub classes: Vec<String>,
    pub dataset_id: String,
    pub pipeline_id: String,
    pub params: ReachParams,
    pub inputs: Vec<InputDigest>,
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
