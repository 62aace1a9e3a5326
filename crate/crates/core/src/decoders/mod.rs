//! Classical decoders: LLR rules, FHT, MAP, Soft-MAP and recursive decoding.

pub mod dumer;
pub mod fht;
pub mod llr;
pub mod map;
pub mod softmap;

pub use dumer::{dumer_decode, dumer_decode_counted, sc_decode_polar, DecodeResult, LeafRecord, LeafRule};
pub use fht::{fht, fht_map_decode_rm1};
pub use llr::{
    hard_bit, lse, lse_grad, majority_decode_repetition, parity_adjusted_add, parity_adjusted_add_bits, sigmoid,
    soft_sign,
};
pub use map::{codeword_score, map_decode};
pub use softmap::{leaf_codeword_signs, soft_map, soft_map_codebook, soft_map_llrs, SoftMapOutput};
