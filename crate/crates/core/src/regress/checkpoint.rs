//! QCK1 checkpoint format.
//!
//! Layout (little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QCK1"
//! 4       4     u32 version = 1
//! 8       8     u64 json_len
//! 16      ...   JSON metadata (layer spec, train config, normalization,
//!               optimizer state)
//! ...     8     u64 parameter count
//! ...     ...   f32 parameter block, little-endian
//! ...     8     u64 FNV-1a checksum over everything after the version field
//! ```
//!
//! Parameters are stored and held in `f32`, so a save/load round trip
//! reproduces predictions bit for bit.

use serde::{Deserialize, Serialize};

use super::adam::{AdamState, TrainConfig};
use super::dataset::Normalization;
use super::pccnn::{LayerSpec, PccnnModel};
use super::RegressError;

pub const QCK_MAGIC: [u8; 4] = *b"QCK1";
pub const QCK_VERSION: u32 = 1;

/// Everything needed to resume training or run inference.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: PccnnModel,
    pub adam: AdamState,
    pub config: TrainConfig,
    pub normalization: Normalization,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    input_len: usize,
    layers: Vec<LayerSpec>,
    train_config: TrainConfig,
    normalization: Normalization,
    adam: AdamState,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

pub fn save_checkpoint(ck: &Checkpoint) -> Vec<u8> {
    let meta = Meta {
        input_len: ck.model.input_len(),
        layers: ck.model.layers().to_vec(),
        train_config: ck.config.clone(),
        normalization: ck.normalization,
        adam: ck.adam.clone(),
    };
    let json = serde_json::to_vec(&meta).expect("checkpoint metadata serializes");
    let params = ck.model.parameters();

    let mut out = Vec::with_capacity(16 + json.len() + 8 + params.len() * 4 + 8);
    out.extend_from_slice(&QCK_MAGIC);
    out.extend_from_slice(&QCK_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for &p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let checksum = fnv1a64(&out[8..]);
    out.extend_from_slice(&checksum.to_le_bytes());
    out
}

pub fn load_checkpoint(bytes: &[u8]) -> Result<Checkpoint, RegressError> {
    if bytes.len() < 4 || bytes[..4] != QCK_MAGIC {
        return Err(RegressError::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(RegressError::ChecksumMismatch);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != QCK_VERSION {
        return Err(RegressError::VersionMismatch(version));
    }
    if bytes.len() < 24 {
        return Err(RegressError::ChecksumMismatch);
    }
    let stored_checksum = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
    let payload = &bytes[8..bytes.len() - 8];
    if fnv1a64(payload) != stored_checksum {
        return Err(RegressError::ChecksumMismatch);
    }

    let json_len = u64::from_le_bytes(payload[..8].try_into().unwrap()) as usize;
    let rest = &payload[8..];
    if rest.len() < json_len + 8 {
        return Err(RegressError::ChecksumMismatch);
    }
    let meta: Meta = serde_json::from_slice(&rest[..json_len])
        .map_err(|e| RegressError::MalformedCheckpoint(e.to_string()))?;
    let rest = &rest[json_len..];
    let count = u64::from_le_bytes(rest[..8].try_into().unwrap()) as usize;
    let block = &rest[8..];
    if block.len() != count * 4 {
        return Err(RegressError::ChecksumMismatch);
    }
    let params: Vec<f32> = block
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let mut model = PccnnModel::new(meta.input_len, meta.layers)?;
    if model.param_count() != count {
        return Err(RegressError::MalformedCheckpoint(format!(
            "parameter block has {count} values, architecture needs {}",
            model.param_count()
        )));
    }
    model.set_parameters(&params)?;
    if meta.adam.first_moment.len() != count || meta.adam.second_moment.len() != count {
        return Err(RegressError::MalformedCheckpoint(
            "optimizer state length does not match parameters".into(),
        ));
    }
    Ok(Checkpoint {
        model,
        adam: meta.adam,
        config: meta.train_config,
        normalization: meta.normalization,
    })
}
