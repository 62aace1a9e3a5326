//! Recursive decoding over a Plotkin tree (Dumer's decoder for RM codes,
//! successive cancellation for Polar codes).
//!
//! At an internal node with input halves `(L1, L2)`:
//! `L_v = LSE(L1, L2)` feeds the left child; its decision, re-encoded in the
//! sign domain as `s_v`, gives `L_u = L1 + s_v ⊙ L2` for the right child; the
//! node returns `(s_u, s_u ⊙ s_v)`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::codes::{LeafKind, Node, PlotkinTree};
use crate::decoders::fht::fht_map_counted;
use crate::decoders::llr::{hard_bit, lse_halves, majority_counted, parity_add_unchecked, soft_sign};
use crate::decoders::softmap::soft_map_counted;
use crate::error::{check_len, Result};
use crate::eval::opcount::Ops;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafRule {
    /// MAP codeword decisions at the leaves, hard re-encoding.
    HardMap,
    /// Soft-MAP bit LLRs at the leaves, soft re-encoding with tanh(L/2).
    SoftMap,
}

/// Decoded sub-message of one message leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafRecord {
    /// Leaf position in decoding order (frozen leaves included in the numbering).
    pub index: usize,
    pub kind: LeafKind,
    pub msg: Range<usize>,
    pub bits: BitWord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub message: BitWord,
    /// Per-message-bit LLRs (Soft-MAP rule only).
    pub llrs: Option<Vec<f64>>,
    /// Message leaves in decoding order.
    pub leaves: Vec<LeafRecord>,
}

pub fn dumer_decode(tree: &PlotkinTree, l: &[f64], rule: LeafRule) -> Result<DecodeResult> {
    dumer_decode_counted(tree, l, rule, &mut ())
}

/// Successive cancellation for Polar trees: frozen leaves contribute the
/// known zero word.
pub fn sc_decode_polar(tree: &PlotkinTree, l: &[f64]) -> Result<DecodeResult> {
    dumer_decode(tree, l, LeafRule::HardMap)
}

pub fn dumer_decode_counted(
    tree: &PlotkinTree,
    l: &[f64],
    rule: LeafRule,
    ops: &mut impl Ops,
) -> Result<DecodeResult> {
    check_len(tree.n, l.len())?;
    let mut st = State {
        rule,
        message: vec![0; tree.k],
        llrs: (rule == LeafRule::SoftMap).then(|| vec![0.0; tree.k]),
        leaves: Vec::new(),
    };
    decode_node(&tree.root, l, &mut st, ops)?;
    Ok(DecodeResult {
        message: BitWord::from_raw(st.message),
        llrs: st.llrs,
        leaves: st.leaves,
    })
}

struct State {
    rule: LeafRule,
    message: Vec<u8>,
    llrs: Option<Vec<f64>>,
    leaves: Vec<LeafRecord>,
}

fn decode_node(node: &Node, l: &[f64], st: &mut State, ops: &mut impl Ops) -> Result<Vec<f64>> {
    match node {
        Node::Internal { left, right, .. } => {
            let h = l.len() / 2;
            let (l1, l2) = l.split_at(h);
            let lv = lse_halves(l1, l2, ops);
            let sv = decode_node(left, &lv, st, ops)?;
            let lu = parity_add_unchecked(l1, l2, &sv, ops);
            let mut su = decode_node(right, &lu, st, ops)?;
            ops.mul(h);
            let second: Vec<f64> = su.iter().zip(&sv).map(|(a, b)| a * b).collect();
            su.extend(second);
            Ok(su)
        }
        Node::Leaf { index, leaf, msg_start, msg_end } => {
            if let LeafKind::Frozen { .. } = leaf {
                return Ok(vec![1.0; l.len()]);
            }
            let (bits, signs) = match st.rule {
                LeafRule::HardMap => hard_leaf(*leaf, l, ops),
                LeafRule::SoftMap => {
                    let out = soft_map_counted(*leaf, l, ops)?;
                    ops.cmp(out.llrs.len());
                    ops.exp_log(out.llrs.len());
                    ops.mul(out.llrs.len());
                    let bits: Vec<u8> = out.llrs.iter().map(|&v| hard_bit(v)).collect();
                    let soft: Vec<f64> = out.llrs.iter().map(|&v| soft_sign(v)).collect();
                    ops.mul(sign_encode_muls(leaf.m(), leaf.rm_order().unwrap_or(0)));
                    let signs = leaf.encode_signs(&soft)?;
                    if let Some(llrs) = st.llrs.as_mut() {
                        llrs[*msg_start..*msg_end].copy_from_slice(&out.llrs);
                    }
                    (bits, signs)
                }
            };
            st.message[*msg_start..*msg_end].copy_from_slice(&bits);
            st.leaves.push(LeafRecord {
                index: *index,
                kind: *leaf,
                msg: *msg_start..*msg_end,
                bits: BitWord::from_raw(bits),
            });
            Ok(signs)
        }
    }
}

fn hard_leaf(leaf: LeafKind, l: &[f64], ops: &mut impl Ops) -> (Vec<u8>, Vec<f64>) {
    let to_signs = |cw: &[u8]| cw.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect::<Vec<f64>>();
    match leaf {
        LeafKind::Repetition { .. } => {
            let b = majority_counted(l, ops);
            let s = 1.0 - 2.0 * f64::from(b);
            (vec![b], vec![s; l.len()])
        }
        LeafKind::FirstOrder { m } => {
            let (cw, msg) = fht_map_counted(l, m, ops);
            (msg.into_bits(), to_signs(cw.bits()))
        }
        LeafKind::FullRate { .. } => {
            // every word is a codeword, so bitwise decisions are MAP
            ops.cmp(l.len());
            let cw: Vec<u8> = l.iter().map(|&v| hard_bit(v)).collect();
            (full_rate_message(&cw), to_signs(&cw))
        }
        LeafKind::Frozen { .. } => (Vec::new(), vec![1.0; l.len()]),
    }
}

/// Inverse of the full-rate recursive encoder: `(u, u ⊕ v) ↦ (msg(u), msg(v))`.
pub(crate) fn full_rate_message(cw: &[u8]) -> Vec<u8> {
    if cw.len() == 1 {
        return cw.to_vec();
    }
    let h = cw.len() / 2;
    let (u, uv) = cw.split_at(h);
    let v: Vec<u8> = u.iter().zip(uv).map(|(a, b)| a ^ b).collect();
    let mut out = full_rate_message(u);
    out.extend(full_rate_message(&v));
    out
}

fn sign_encode_muls(m: usize, r: usize) -> usize {
    if r == 0 || m == 0 {
        return 0;
    }
    (1 << (m - 1)) + sign_encode_muls(m - 1, r.min(m - 1)) + sign_encode_muls(m - 1, r - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bpsk;
    use crate::codes::{build_polar_tree, build_rm_tree, PolarSpec};
    use crate::eval::opcount::OpCounter;

    fn noiseless_llr(cw: &BitWord) -> Vec<f64> {
        bpsk(cw).iter().map(|x| 2.0 * x / 1e-4).collect()
    }

    #[test]
    fn full_rate_inverse() {
        for m in 0..=3 {
            let leaf = LeafKind::FullRate { m };
            for i in 0..1u64 << (1 << m).min(8) {
                let msg = BitWord::from_index(i, 1 << m);
                let cw = leaf.encode(&msg).unwrap();
                assert_eq!(full_rate_message(cw.bits()), msg.bits());
            }
        }
    }

    #[test]
    fn rm31_all_messages_both_rules() {
        let tree = build_rm_tree(3, 1).unwrap();
        for i in 0..16 {
            let msg = BitWord::from_index(i, 4);
            let l = noiseless_llr(&tree.encode(&msg).unwrap());
            for rule in [LeafRule::HardMap, LeafRule::SoftMap] {
                let out = dumer_decode(&tree, &l, rule).unwrap();
                assert_eq!(out.message, msg);
                let order: Vec<String> = out.leaves.iter().map(|r| r.kind.label()).collect();
                assert_eq!(order, ["RM(2,0)", "RM(1,0)", "RM(1,1)"]);
            }
        }
    }

    #[test]
    fn polar_2_1_hand_example() {
        let tree = build_polar_tree(&PolarSpec::from_active_set(2, &[2]).unwrap()).unwrap();
        let out = sc_decode_polar(&tree, &[-4.0, -5.0]).unwrap();
        assert_eq!(out.message.bits(), &[1]);
    }

    #[test]
    fn records_cover_the_message() {
        let tree = build_rm_tree(5, 2).unwrap();
        let msg = BitWord::from_index(0x2f3a, tree.k);
        let out = dumer_decode(&tree, &noiseless_llr(&tree.encode(&msg).unwrap()), LeafRule::HardMap).unwrap();
        let mut rebuilt = vec![9u8; tree.k];
        for r in &out.leaves {
            rebuilt[r.msg.clone()].copy_from_slice(r.bits.bits());
        }
        assert_eq!(rebuilt, msg.bits());
    }

    #[test]
    fn counting_does_not_change_the_result() {
        let tree = build_rm_tree(8, 2).unwrap();
        let l: Vec<f64> = (0..256).map(|i| ((i * 37 % 11) as f64) - 4.5).collect();
        let mut c = OpCounter::default();
        let a = dumer_decode_counted(&tree, &l, LeafRule::HardMap, &mut c).unwrap();
        assert_eq!(a, dumer_decode(&tree, &l, LeafRule::HardMap).unwrap());
        assert!(c.total() > 0);
    }
}
