//! JSON checkpoints. Weights are stored as base64 of little-endian f64,
//! row-major; the tree description and its hash guard against loading
//! parameters onto a different skeleton.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::autodiff::{DenseBlock, Tensor};
use crate::codes::PlotkinTree;
use crate::error::{Error, Result};
use crate::ko::model::{KoCode, KoModel, Neuralize, NodeBlocks, Profile};

pub const CHECKPOINT_FORMAT: &str = "kocodes-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    code: KoCode,
    profile: Profile,
    neuralize: Neuralize,
    init_seed: Option<u64>,
    lineage: Vec<String>,
    tree_hash: String,
    tree: PlotkinTree,
    blocks: Vec<BlockRecord>,
}

#[derive(Serialize, Deserialize)]
struct BlockRecord {
    node: usize,
    role: String,
    widths: Vec<usize>,
    tensors: Vec<TensorRecord>,
}

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    rows: usize,
    cols: usize,
    data: String,
}

fn encode_tensor(t: &Tensor) -> TensorRecord {
    let bytes: Vec<u8> = t.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    TensorRecord { rows: t.rows(), cols: t.cols(), data: B64.encode(bytes) }
}

fn decode_tensor(r: &TensorRecord) -> Result<Tensor> {
    let bytes = B64
        .decode(&r.data)
        .map_err(|e| Error::Checkpoint(format!("bad base64 payload: {e}")))?;
    if bytes.len() != 8 * r.rows * r.cols {
        return Err(Error::Checkpoint(format!(
            "tensor {}x{} carries {} bytes",
            r.rows,
            r.cols,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Tensor::new(r.rows, r.cols, data)
}

const ROLES: [&str; 3] = ["encoder", "decoder_left", "decoder_right"];

pub fn checkpoint_to_string(model: &KoModel) -> Result<String> {
    let mut blocks = Vec::new();
    for (node, b) in model.blocks.iter().enumerate() {
        let Some(b) = b else { continue };
        for (role, block) in ROLES.iter().zip([&b.encoder, &b.dec_left, &b.dec_right]) {
            blocks.push(BlockRecord {
                node,
                role: role.to_string(),
                widths: block.widths.clone(),
                tensors: block.params().into_iter().map(encode_tensor).collect(),
            });
        }
    }
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        code: model.code.clone(),
        profile: model.profile,
        neuralize: model.neuralize,
        init_seed: model.init_seed,
        lineage: model.lineage.clone(),
        tree_hash: model.tree.structure_hash(),
        tree: model.tree.clone(),
        blocks,
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn checkpoint_from_str(s: &str) -> Result<KoModel> {
    let file: CheckpointFile =
        serde_json::from_str(s).map_err(|e| Error::Checkpoint(format!("unreadable checkpoint: {e}")))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!("unknown format '{}'", file.format)));
    }
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {} (this build reads {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    let mut model = KoModel::new(file.code, file.profile, file.neuralize, crate::ko::model::Init::Zeros)?;
    let expected = model.tree.structure_hash();
    if file.tree_hash != expected || file.tree.structure_hash() != expected {
        return Err(Error::Checkpoint("tree hash does not match the declared code".into()));
    }
    let mut seen = vec![[false; 3]; model.blocks.len()];
    for rec in &file.blocks {
        let role = ROLES
            .iter()
            .position(|r| *r == rec.role)
            .ok_or_else(|| Error::Checkpoint(format!("unknown block role '{}'", rec.role)))?;
        let slot: &mut NodeBlocks = model
            .blocks
            .get_mut(rec.node)
            .and_then(Option::as_mut)
            .ok_or_else(|| Error::Checkpoint(format!("no neural block at node {}", rec.node)))?;
        let block: &mut DenseBlock = match role {
            0 => &mut slot.encoder,
            1 => &mut slot.dec_left,
            _ => &mut slot.dec_right,
        };
        if block.widths != rec.widths || rec.tensors.len() != 2 * (rec.widths.len() - 1) {
            return Err(Error::Checkpoint(format!("block {} {} has the wrong shape", rec.node, rec.role)));
        }
        for (dst, src) in block.params_mut().into_iter().zip(&rec.tensors) {
            let t = decode_tensor(src)?;
            if t.shape() != dst.shape() {
                return Err(Error::Checkpoint(format!("tensor shape mismatch in node {}", rec.node)));
            }
            *dst = t;
        }
        seen[rec.node][role] = true;
    }
    for (node, b) in model.blocks.iter().enumerate() {
        if b.is_some() && seen[node] != [true; 3] {
            return Err(Error::Checkpoint(format!("missing blocks for node {node}")));
        }
    }
    model.init_seed = file.init_seed;
    model.lineage = file.lineage;
    Ok(model)
}

pub fn save_checkpoint(model: &KoModel, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(model)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<KoModel> {
    checkpoint_from_str(&std::fs::read_to_string(path)?)
}
