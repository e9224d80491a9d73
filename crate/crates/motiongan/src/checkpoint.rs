//! `motiongan-ckpt-v1` archives.
//!
//! Layout: the format tag and a newline, a little-endian `u64` header length,
//! a JSON header (configuration, training state and a tensor index), then the
//! raw little-endian tensor data in index order.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tch::{Device, Kind, Tensor};

use crate::config::{NetConfig, TrainConfig};
use crate::error::{Error, Result};

pub const FORMAT: &str = "motiongan-ckpt-v1";

/// Position of a ChaCha8 stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    /// `u128` as a decimal string.
    pub word_pos: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<i64>,
    pub dtype: String,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub net: NetConfig,
    pub train: TrainConfig,
    pub step: u64,
    pub rng: RngState,
    /// Running means of the seven loss components over all steps so far.
    pub running_means: [f64; 7],
    pub tensors: Vec<TensorEntry>,
}

/// A loaded archive.
#[derive(Debug)]
pub struct Checkpoint {
    pub path: PathBuf,
    pub header: CheckpointHeader,
    tensors: HashMap<String, Tensor>,
}

fn dtype_name(kind: Kind) -> Result<&'static str> {
    match kind {
        Kind::Float => Ok("f32"),
        Kind::Double => Ok("f64"),
        other => Err(Error::Argument(format!("cannot checkpoint {other:?} tensors"))),
    }
}

fn element_size(dtype: &str) -> Option<usize> {
    match dtype {
        "f32" => Some(4),
        "f64" => Some(8),
        _ => None,
    }
}

fn tensor_bytes(t: &Tensor) -> Result<Vec<u8>> {
    let flat = t.detach().to_device(Device::Cpu).contiguous().view([-1]);
    Ok(match t.kind() {
        Kind::Float => Vec::<f32>::try_from(&flat)?.iter().flat_map(|v| v.to_le_bytes()).collect(),
        Kind::Double => Vec::<f64>::try_from(&flat)?.iter().flat_map(|v| v.to_le_bytes()).collect(),
        other => return Err(Error::Argument(format!("cannot checkpoint {other:?} tensors"))),
    })
}

/// Writes `tensors` with `header` (whose tensor index is filled in here).
/// The file is written to a sibling temporary and renamed into place.
pub fn write(path: &Path, mut header: CheckpointHeader, tensors: &[(String, Tensor)]) -> Result<()> {
    header.format = FORMAT.to_string();
    header.tensors.clear();
    let mut offset = 0u64;
    let mut blobs = Vec::with_capacity(tensors.len());
    for (name, t) in tensors {
        let dtype = dtype_name(t.kind())?;
        let bytes = tensor_bytes(t)?;
        header.tensors.push(TensorEntry {
            name: name.clone(),
            shape: t.size(),
            dtype: dtype.to_string(),
            offset,
        });
        offset += bytes.len() as u64;
        blobs.push(bytes);
    }
    let json = serde_json::to_vec(&header).map_err(|e| Error::checkpoint(path, e.to_string()))?;
    let tmp = path.with_extension("ckpt.partial");
    let result = (|| -> std::io::Result<()> {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        out.write_all(FORMAT.as_bytes())?;
        out.write_all(b"\n")?;
        out.write_all(&(json.len() as u64).to_le_bytes())?;
        out.write_all(&json)?;
        for b in &blobs {
            out.write_all(b)?;
        }
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| Error::io(path, e))
}

impl Checkpoint {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let bad = |m: &str| Error::checkpoint(path, m.to_string());
        let magic = format!("{FORMAT}\n");
        let rest = bytes
            .strip_prefix(magic.as_bytes())
            .ok_or_else(|| bad(&format!("not a {FORMAT} archive")))?;
        if rest.len() < 8 {
            return Err(bad("truncated header"));
        }
        let len = u64::from_le_bytes(rest[..8].try_into().unwrap()) as usize;
        let json = rest.get(8..8 + len).ok_or_else(|| bad("truncated header"))?;
        let header: CheckpointHeader = serde_json::from_slice(json).map_err(|e| bad(&format!("header: {e}")))?;
        let data = &rest[8 + len..];
        let mut tensors = HashMap::new();
        for entry in &header.tensors {
            let size = element_size(&entry.dtype).ok_or_else(|| bad(&format!("unknown dtype {}", entry.dtype)))?;
            let numel: i64 = entry.shape.iter().product();
            let start = entry.offset as usize;
            let raw = data
                .get(start..start + numel as usize * size)
                .ok_or_else(|| bad(&format!("data for '{}' is truncated", entry.name)))?;
            let t = if size == 4 {
                let v: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
                Tensor::from_slice(&v)
            } else {
                let v: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
                Tensor::from_slice(&v)
            };
            tensors.insert(entry.name.clone(), t.view(entry.shape.as_slice()));
        }
        Ok(Self {
            path: path.to_path_buf(),
            header,
            tensors,
        })
    }

    pub fn get(&self, name: &str) -> Option<Tensor> {
        self.tensors.get(name).map(|t| t.shallow_clone())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.header.tensors.iter().map(|e| e.name.as_str())
    }

    /// Copies every tensor of `targets` from the archive, matching by name.
    pub fn restore(&self, targets: &[(String, Tensor)]) -> Result<()> {
        for (name, target) in targets {
            let src = self
                .get(name)
                .ok_or_else(|| Error::checkpoint(&self.path, format!("missing tensor '{name}'")))?;
            if src.size() != target.size() {
                return Err(Error::checkpoint(
                    &self.path,
                    format!("tensor '{name}' has shape {:?}, expected {:?}", src.size(), target.size()),
                ));
            }
            let mut target = target.shallow_clone();
            tch::no_grad(|| target.copy_(&src.to_kind(target.kind()).to_device(target.device())));
        }
        Ok(())
    }
}
