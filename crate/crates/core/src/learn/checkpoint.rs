//! Binary checkpoint: magic, version, JSON header, then little-endian `f64` weights.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Architecture, Network};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"DCNETCK1";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CheckpointMeta {
    pub label: String,
    pub seed: u64,
    pub epochs: usize,
    pub final_train_loss: Option<f64>,
    pub final_val_loss: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    architecture: Architecture,
    param_count: usize,
    meta: CheckpointMeta,
}

pub fn write_checkpoint<T: Scalar, W: Write>(mut w: W, net: &Network<T>, meta: &CheckpointMeta) -> Result<()> {
    let header = serde_json::to_vec(&Header {
        architecture: *net.architecture(),
        param_count: net.param_count(),
        meta: meta.clone(),
    })
    .map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u64).to_le_bytes())?;
    w.write_all(&header)?;
    for p in net.params() {
        w.write_all(&p.f64().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<T: Scalar, R: Read>(mut r: R) -> Result<(Network<T>, CheckpointMeta)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a network checkpoint".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut header = vec![0u8; len];
    r.read_exact(&mut header)?;
    let header: Header = serde_json::from_slice(&header).map_err(|e| Error::Format(e.to_string()))?;
    let mut params = Vec::with_capacity(header.param_count);
    for _ in 0..header.param_count {
        r.read_exact(&mut b8)?;
        params.push(T::of(f64::from_le_bytes(b8)));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format("trailing bytes after checkpoint weights".into()));
    }
    let net = Network::from_params(header.architecture, params)?;
    Ok((net, header.meta))
}

pub fn save_checkpoint<T: Scalar>(path: &Path, net: &Network<T>, meta: &CheckpointMeta) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, net, meta)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<(Network<T>, CheckpointMeta)> {
    let bytes = std::fs::read(path)?;
    read_checkpoint(bytes.as_slice())
}
