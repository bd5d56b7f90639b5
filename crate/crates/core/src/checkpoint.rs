//! Binary model checkpoints.
//!
//! Layout:
//!
//! ```text
//! NADEK1 n=2 k=5 D=784 h1=500 act=tanh\n
//! epochs=1000 best_valid=87.1 seed=1 mean=0.1,0.2,...\n
//! <W, c, [W2, c2,] V, b as little-endian f64, row-major>
//! ```
//!
//! The imputation mean lives in the metadata line so that the payload holds
//! exactly the parameter tensors.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{CheckpointError, Error, Result};
use crate::model::{Activation, EmpiricalMean, Model, ModelParams, StructureConfig};

pub const MAGIC: &str = "NADEK1";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckpointMeta {
    pub epochs_completed: usize,
    pub best_valid: Option<f64>,
    pub seed: u64,
    /// Any other `key=value` pairs, kept verbatim.
    pub extra: BTreeMap<String, String>,
}

fn header_line(config: &StructureConfig) -> String {
    let mut s = format!(
        "{MAGIC} n={} k={} D={} h1={}",
        config.layers(),
        config.k,
        config.dim,
        config.hidden1
    );
    if let Some(h2) = config.hidden2 {
        s.push_str(&format!(" h2={h2}"));
    }
    s.push_str(&format!(" act={}", config.activation));
    s
}

fn meta_line(meta: &CheckpointMeta, mean: &EmpiricalMean) -> String {
    let mut parts = vec![
        format!("epochs={}", meta.epochs_completed),
        format!("best_valid={}", meta.best_valid.map_or("none".to_string(), |v| v.to_string())),
        format!("seed={}", meta.seed),
    ];
    for (k, v) in &meta.extra {
        parts.push(format!("{k}={v}"));
    }
    let mean: Vec<String> = mean.as_slice().iter().map(|m| m.to_string()).collect();
    parts.push(format!("mean={}", mean.join(",")));
    parts.join(" ")
}

/// Payload size in bytes for a structure.
pub fn payload_len(config: &StructureConfig) -> usize {
    ModelParams::zeros(config).scalar_count() * 8
}

pub fn encode(model: &Model, meta: &CheckpointMeta) -> Result<Vec<u8>> {
    model
        .params
        .check_shapes(&model.config)
        .map_err(|e| CheckpointError::ShapeMismatch(e.to_string()))?;
    if meta.extra.iter().any(|(k, v)| k.contains([' ', '=', '\n']) || v.contains([' ', '\n'])) {
        return Err(Error::contract("metadata keys and values may not contain whitespace"));
    }
    let mut out = Vec::with_capacity(payload_len(&model.config) + 64);
    out.extend_from_slice(header_line(&model.config).as_bytes());
    out.push(b'\n');
    out.extend_from_slice(meta_line(meta, &model.mean).as_bytes());
    out.push(b'\n');
    for t in model.params.tensors() {
        for v in t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn split_line(bytes: &[u8]) -> Option<(&[u8], &[u8])> {
    let pos = bytes.iter().position(|&b| b == b'\n')?;
    Some((&bytes[..pos], &bytes[pos + 1..]))
}

fn parse_header(line: &str) -> Result<StructureConfig, CheckpointError> {
    let mut tokens = line.split(' ');
    let magic = tokens.next().unwrap_or_default();
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic.chars().take(16).collect()));
    }
    let mut fields = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| CheckpointError::Header(format!("field {tok:?} is not key=value")))?;
        fields.insert(k, v);
    }
    let num = |key: &str| -> Result<usize, CheckpointError> {
        fields
            .get(key)
            .ok_or_else(|| CheckpointError::Header(format!("missing {key}")))?
            .parse()
            .map_err(|_| CheckpointError::Header(format!("{key} is not a count")))
    };
    let n = num("n")?;
    let hidden2 = match (n, fields.contains_key("h2")) {
        (2, false) => None,
        (3, true) => Some(num("h2")?),
        _ => return Err(CheckpointError::Header(format!("n={n} inconsistent with h2 presence"))),
    };
    let activation = match fields.get("act") {
        Some(&"tanh") => Activation::Tanh,
        Some(&"sigmoid") => Activation::Sigmoid,
        other => return Err(CheckpointError::Header(format!("bad act {other:?}"))),
    };
    let config = StructureConfig {
        dim: num("D")?,
        k: num("k")?,
        hidden1: num("h1")?,
        hidden2,
        activation,
    };
    config.validate().map_err(|e| CheckpointError::Header(e.to_string()))?;
    Ok(config)
}

pub fn decode(bytes: &[u8]) -> Result<(Model, CheckpointMeta)> {
    let (header, rest) = match split_line(bytes) {
        Some(parts) => parts,
        None if bytes.starts_with(MAGIC.as_bytes()) => {
            return Err(CheckpointError::Truncated { expected: MAGIC.len() + 2, found: bytes.len() }.into())
        }
        None => {
            let shown = String::from_utf8_lossy(&bytes[..bytes.len().min(16)]).into_owned();
            return Err(CheckpointError::BadMagic(shown).into());
        }
    };
    let header = std::str::from_utf8(header).map_err(|_| CheckpointError::BadMagic("<non-utf8>".into()))?;
    let config = parse_header(header)?;
    let expected = payload_len(&config);

    let (meta_bytes, payload) =
        split_line(rest).ok_or(CheckpointError::Truncated { expected, found: 0 })?;
    let meta_str =
        std::str::from_utf8(meta_bytes).map_err(|_| CheckpointError::Header("metadata is not utf-8".into()))?;
    let mut meta = CheckpointMeta::default();
    let mut mean = None;
    for tok in meta_str.split(' ').filter(|t| !t.is_empty()) {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| CheckpointError::Header(format!("metadata {tok:?} is not key=value")))?;
        let bad = |what: &str| CheckpointError::Header(format!("metadata {k}: bad {what}"));
        match k {
            "epochs" => meta.epochs_completed = v.parse().map_err(|_| bad("count"))?,
            "best_valid" if v == "none" => meta.best_valid = None,
            "best_valid" => meta.best_valid = Some(v.parse().map_err(|_| bad("number"))?),
            "seed" => meta.seed = v.parse().map_err(|_| bad("seed"))?,
            "mean" => {
                let values = v
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(str::parse::<f64>)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad("number"))?;
                mean = Some(values);
            }
            _ => {
                meta.extra.insert(k.to_string(), v.to_string());
            }
        }
    }
    let mean = mean.ok_or_else(|| CheckpointError::Header("metadata lacks mean".into()))?;
    if mean.len() != config.dim {
        return Err(CheckpointError::ShapeMismatch(format!(
            "mean has {} entries, header says D={}",
            mean.len(),
            config.dim
        ))
        .into());
    }
    let mean = EmpiricalMean::new(mean).map_err(|e| CheckpointError::Header(e.to_string()))?;

    if payload.len() < expected {
        return Err(CheckpointError::Truncated { expected, found: payload.len() }.into());
    }
    if payload.len() > expected {
        return Err(CheckpointError::ShapeMismatch(format!(
            "payload holds {} bytes, header shapes need {expected}",
            payload.len()
        ))
        .into());
    }
    let mut params = ModelParams::zeros(&config);
    let mut chunks = payload.chunks_exact(8);
    for t in params.tensors_mut() {
        for (v, chunk) in t.data.iter_mut().zip(&mut chunks) {
            *v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        }
    }
    if params.tensors().iter().any(|t| t.data.iter().any(|v| !v.is_finite())) {
        return Err(CheckpointError::ShapeMismatch("payload holds non-finite values".into()).into());
    }
    Ok((Model::new(config, params, mean)?, meta))
}

pub fn save_checkpoint(path: impl AsRef<Path>, model: &Model, meta: &CheckpointMeta) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(model, meta)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Model, CheckpointMeta)> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
