//! KO encoder and decoder, recorded on an autodiff tape.
//!
//! Encoder node (sign domain): `(u, g̃(u, v) + u ⊙ v)`, root rescaled to ‖x‖² = n.
//! Decoder node with halves (y1, y2):
//! left feature  `f̃_left(y1, y2) + LSE(y1, y2)`,
//! right feature `f̃_right(y1, y2, y_v, v̂) + y1 + v̂ ⊙ y2`,
//! where `v̂` is the soft re-encoding of the left subtree's Soft-MAP output.
//! With all parameters zero both reduce to the classical Plotkin encoder and
//! the recursive decoder with Soft-MAP leaves.

use crate::autodiff::{BoundBlock, Tape, Tensor, Var};
use crate::bits::{bpsk, BitWord};
use crate::channel::RealCodeword;
use crate::codes::{LeafKind, Node};
use crate::decoders::{hard_bit, DecodeResult, LeafRecord};
use crate::error::{check_len, Result};
use crate::eval::opcount::Ops;
use crate::ko::model::KoModel;

/// Parameter handles of a model registered on a tape.
pub struct BoundModel {
    pub encoder: Vec<Option<BoundBlock>>,
    pub decoder: Vec<Option<(BoundBlock, BoundBlock)>>,
}

impl BoundModel {
    pub fn encoder_vars(&self) -> Vec<Var> {
        self.encoder.iter().flatten().flat_map(|b| b.params.clone()).collect()
    }

    pub fn decoder_vars(&self) -> Vec<Var> {
        self.decoder
            .iter()
            .flatten()
            .flat_map(|(l, r)| l.params.iter().chain(&r.params).copied().collect::<Vec<_>>())
            .collect()
    }
}

impl KoModel {
    pub fn bind(&self, tape: &mut Tape) -> BoundModel {
        let encoder = self.blocks.iter().map(|b| b.as_ref().map(|b| b.encoder.bind(tape))).collect();
        let decoder = self
            .blocks
            .iter()
            .map(|b| b.as_ref().map(|b| (b.dec_left.bind(tape), b.dec_right.bind(tape))))
            .collect();
        BoundModel { encoder, decoder }
    }

    /// Encodes a batch of messages into a B × n tensor of normalized codewords.
    pub fn encode_taped(&self, tape: &mut Tape, bound: &BoundModel, msgs: &[BitWord]) -> Result<Var> {
        for m in msgs {
            check_len(self.k(), m.len())?;
        }
        let raw = self.encode_node(tape, bound, &self.tree.root, msgs)?;
        tape.row_normalize(raw)
    }

    fn encode_node(&self, tape: &mut Tape, bound: &BoundModel, node: &Node, msgs: &[BitWord]) -> Result<Var> {
        match node {
            Node::Internal { id, left, right, .. } => {
                let v = self.encode_node(tape, bound, left, msgs)?;
                let u = self.encode_node(tape, bound, right, msgs)?;
                let uv = tape.mul(u, v)?;
                let second = match &bound.encoder[*id] {
                    Some(g) => {
                        let h = tape.value(u).cols();
                        let z = tape.stack_coords(&[u, v])?;
                        let gz = g.apply(tape, z)?;
                        let gz = tape.reshape(gz, msgs.len(), h)?;
                        tape.add(gz, uv)?
                    }
                    None => uv,
                };
                tape.concat_cols(&[u, second])
            }
            Node::Leaf { leaf, msg_start, msg_end, .. } => {
                let mut data = Vec::with_capacity(msgs.len() * leaf.len());
                for m in msgs {
                    data.extend(bpsk(&leaf.encode(&m.slice(*msg_start..*msg_end))?));
                }
                Ok(tape.leaf(Tensor::new(msgs.len(), leaf.len(), data)?))
            }
        }
    }

    /// Decodes a B × n tensor of channel outputs into B × k message LLRs,
    /// ordered by message index.
    pub fn decode_taped(&self, tape: &mut Tape, bound: &BoundModel, y: Var) -> Result<Var> {
        check_len(self.n(), tape.value(y).cols())?;
        let mut slices = Vec::new();
        self.decode_node(tape, bound, &self.tree.root, y, &mut slices)?;
        slices.sort_by_key(|(start, _)| *start);
        let parts: Vec<Var> = slices.into_iter().map(|(_, v)| v).collect();
        tape.concat_cols(&parts)
    }

    fn decode_node(
        &self,
        tape: &mut Tape,
        bound: &BoundModel,
        node: &Node,
        l: Var,
        slices: &mut Vec<(usize, Var)>,
    ) -> Result<Var> {
        let rows = tape.value(l).rows();
        match node {
            Node::Internal { id, left, right, .. } => {
                let h = tape.value(l).cols() / 2;
                let y1 = tape.slice_cols(l, 0, h)?;
                let y2 = tape.slice_cols(l, h, 2 * h)?;
                let blocks = bound.decoder[*id].as_ref();

                let lse = tape.lse(y1, y2)?;
                let lv = match blocks {
                    Some((f_left, _)) => {
                        let z = tape.stack_coords(&[y1, y2])?;
                        let fz = f_left.apply(tape, z)?;
                        let fz = tape.reshape(fz, rows, h)?;
                        tape.add(fz, lse)?
                    }
                    None => lse,
                };
                let sv = self.decode_node(tape, bound, left, lv, slices)?;

                let flipped = tape.mul(sv, y2)?;
                let parity = tape.add(y1, flipped)?;
                let lu = match blocks {
                    Some((_, f_right)) => {
                        let z = tape.stack_coords(&[y1, y2, lv, sv])?;
                        let fz = f_right.apply(tape, z)?;
                        let fz = tape.reshape(fz, rows, h)?;
                        tape.add(fz, parity)?
                    }
                    None => parity,
                };
                let su = self.decode_node(tape, bound, right, lu, slices)?;
                let prod = tape.mul(su, sv)?;
                tape.concat_cols(&[su, prod])
            }
            Node::Leaf { leaf: LeafKind::Frozen { .. }, .. } => {
                let len = tape.value(l).cols();
                Ok(tape.leaf(Tensor::filled(rows, len, 1.0)))
            }
            Node::Leaf { leaf, msg_start, .. } => {
                let llr = tape.soft_map(l, *leaf)?;
                slices.push((*msg_start, llr));
                let soft = tape.soft_sign(llr);
                tape.sign_encode(soft, *leaf)
            }
        }
    }
}

/// Encodes one message: a real codeword with ‖x‖² = n.
pub fn ko_encode(model: &KoModel, msg: &BitWord) -> Result<RealCodeword> {
    let rows = ko_encode_batch(model, std::slice::from_ref(msg))?;
    Ok(RealCodeword::from_normalized(rows.row(0).to_vec()))
}

/// Encodes a batch of messages into a B × n tensor.
pub fn ko_encode_batch(model: &KoModel, msgs: &[BitWord]) -> Result<Tensor> {
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape);
    let x = model.encode_taped(&mut tape, &bound, msgs)?;
    Ok(tape.value(x).clone())
}

/// KO-b: the sign of every encoder output symbol (0 ↦ +1).
pub fn binarize_kob(model: &KoModel, msg: &BitWord) -> Result<RealCodeword> {
    let x = ko_encode(model, msg)?;
    Ok(RealCodeword::from_normalized(
        x.symbols().iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect(),
    ))
}

/// Decodes one received word into message LLRs and hard decisions.
pub fn ko_decode(model: &KoModel, y: &[f64]) -> Result<(Vec<f64>, DecodeResult)> {
    check_len(model.n(), y.len())?;
    let llrs = ko_decode_batch(model, &Tensor::row_vector(y.to_vec()))?;
    let l = llrs.row(0).to_vec();
    let result = decode_result_from_llrs(model, &l);
    Ok((l, result))
}

/// Decodes a B × n batch into B × k LLRs.
pub fn ko_decode_batch(model: &KoModel, y: &Tensor) -> Result<Tensor> {
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape);
    let yv = tape.leaf(y.clone());
    let l = model.decode_taped(&mut tape, &bound, yv)?;
    Ok(tape.value(l).clone())
}

/// Hard decisions (1 iff L < 0) with per-leaf records in decoding order.
pub fn decode_result_from_llrs(model: &KoModel, llrs: &[f64]) -> DecodeResult {
    let bits: Vec<u8> = llrs.iter().map(|&v| hard_bit(v)).collect();
    let message = BitWord::new(bits).expect("hard bits");
    let leaves = model
        .tree
        .message_leaves()
        .into_iter()
        .map(|info| LeafRecord {
            index: info.index,
            kind: info.kind,
            bits: message.slice(info.msg.clone()),
            msg: info.msg,
        })
        .collect();
    DecodeResult { message, llrs: Some(llrs.to_vec()), leaves }
}

/// Operation count of one KO decode of `y`.
pub fn count_ko_decode_ops(model: &KoModel, y: &[f64], ops: &mut impl Ops) -> Result<()> {
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape);
    let yv = tape.leaf(Tensor::row_vector(y.to_vec()));
    model.decode_taped(&mut tape, &bound, yv)?;
    tape.count_ops(ops);
    Ok(())
}
