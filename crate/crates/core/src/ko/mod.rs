//! KO codes: neural Plotkin trees.

pub mod checkpoint;
pub mod forward;
pub mod model;

pub use checkpoint::{checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint};
pub use forward::{
    binarize_kob, count_ko_decode_ops, decode_result_from_llrs, ko_decode, ko_decode_batch, ko_encode,
    ko_encode_batch, BoundModel,
};
pub use model::{Init, KoCode, KoModel, Neuralize, NodeBlocks, Profile};

use crate::codes::LeafKind;
use crate::error::Result;

/// Soft re-encoding of a leaf: bit probabilities P(m_j = 1) become soft
/// signs 1 − 2p_j, and each codeword position is the product of the soft
/// signs of the message bits XORed into it.
pub fn soft_reencode(leaf: LeafKind, probs: &[f64]) -> Result<Vec<f64>> {
    let signs: Vec<f64> = probs.iter().map(|p| 1.0 - 2.0 * p).collect();
    leaf.encode_signs(&signs)
}
