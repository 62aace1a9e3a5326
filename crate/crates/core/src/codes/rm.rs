use serde::{Deserialize, Serialize};

use super::tree::{rm_dimension, LeafKind, PlotkinTree, Shape};
use crate::bits::{kronecker_generator, BinaryMatrix, BitWord};
use crate::error::{Error, Result};

/// Largest RM variable count accepted by [`rm_spec`].
pub const MAX_RM_M: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeVariant {
    Rm,
    Polar,
}

/// Block parameters of a code. `r` is only defined for RM. For Polar codes
/// `min_distance` is the smallest weight among the active generator rows,
/// which is the minimum distance of codes picked by channel reliability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub variant: CodeVariant,
    pub m: usize,
    pub r: Option<usize>,
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub min_distance: Option<usize>,
}

pub fn rm_spec(m: usize, r: usize) -> Result<CodeSpec> {
    if m > MAX_RM_M {
        return Err(Error::InvalidParameter(format!("RM variable count m = {m} exceeds {MAX_RM_M}")));
    }
    if r > m {
        return Err(Error::InvalidParameter(format!("RM order r = {r} exceeds m = {m}")));
    }
    let n = 1usize << m;
    let k = rm_dimension(m, r);
    Ok(CodeSpec {
        variant: CodeVariant::Rm,
        m,
        r: Some(r),
        n,
        k,
        rate: k as f64 / n as f64,
        min_distance: Some(1 << (m - r)),
    })
}

/// Plotkin tree of RM(m, r).
///
/// Leaves follow the usual convention: first-order trees bottom out at
/// repetition codes and RM(1,1); trees of order ≥ 2 stop at first-order
/// codes on the left and a full-rate code at the bottom right.
pub fn build_rm_tree(m: usize, r: usize) -> Result<PlotkinTree> {
    rm_spec(m, r)?;
    fn shape(m: usize, r: usize, root_order: usize) -> Shape {
        if r == 0 {
            Shape::Leaf(LeafKind::Repetition { m })
        } else if r >= m {
            Shape::Leaf(LeafKind::FullRate { m })
        } else if r == 1 && root_order >= 2 {
            Shape::Leaf(LeafKind::FirstOrder { m })
        } else {
            Shape::Internal(Box::new(shape(m - 1, r - 1, root_order)), Box::new(shape(m - 1, r, root_order)))
        }
    }
    PlotkinTree::from_shape(format!("RM({m},{r})"), shape(m, r, r))
}

pub fn rm_encode(tree: &PlotkinTree, msg: &BitWord) -> Result<BitWord> {
    tree.encode(msg)
}

/// Rows of the Kronecker generator with Hamming weight ≥ 2^{m−r}, in row order.
pub fn rm_generator_rows(m: usize, r: usize) -> Result<BinaryMatrix> {
    rm_spec(m, r)?;
    if m == 0 {
        return BinaryMatrix::from_rows(vec![BitWord::from_raw(vec![1])]);
    }
    let g = kronecker_generator(m)?;
    let threshold = 1usize << (m - r);
    let rows = g
        .row_weights()
        .into_iter()
        .enumerate()
        .filter(|&(_, w)| w >= threshold)
        .map(|(i, _)| g.row(i))
        .collect();
    BinaryMatrix::from_rows(rows)
}

/// All 2^k codewords of a tree, indexed by message integer.
pub fn enumerate_codebook(tree: &PlotkinTree) -> Result<Vec<BitWord>> {
    tree.codebook()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::hamming_weight;
    use crate::codes::tree::Node;
    use std::collections::BTreeSet;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    #[test]
    fn spec_parameters() {
        let s = rm_spec(8, 2).unwrap();
        assert_eq!((s.n, s.k), (256, 37));
        let s = rm_spec(9, 2).unwrap();
        // 1 + 9 + 36
        assert_eq!((s.n, s.k), (512, 46));
        let s = rm_spec(3, 1).unwrap();
        assert_eq!((s.n, s.k, s.min_distance), (8, 4, Some(4)));
        assert!((s.rate - 0.5).abs() < 1e-15);
        assert!(rm_spec(2, 3).is_err());
        assert!(rm_spec(11, 1).is_err());
    }

    #[test]
    fn rm31_tree_shape() {
        let t = build_rm_tree(3, 1).unwrap();
        let Node::Internal { left, right, .. } = &t.root else { panic!("root must be internal") };
        assert!(matches!(**left, Node::Leaf { leaf: LeafKind::Repetition { m: 2 }, .. }));
        let Node::Internal { left: rl, right: rr, .. } = &**right else { panic!() };
        assert!(matches!(**rl, Node::Leaf { leaf: LeafKind::Repetition { m: 1 }, .. }));
        assert!(matches!(**rr, Node::Leaf { leaf: LeafKind::FullRate { m: 1 }, .. }));

        let leaves = t.leaves();
        let labels: Vec<_> = leaves.iter().map(|l| l.kind.label()).collect();
        assert_eq!(labels, ["RM(2,0)", "RM(1,0)", "RM(1,1)"]);
        // (m1,m2) -> RM(1,1), m3 -> RM(1,0), m4 -> RM(2,0)
        assert_eq!(leaves[0].msg, 3..4);
        assert_eq!(leaves[1].msg, 2..3);
        assert_eq!(leaves[2].msg, 0..2);
    }

    #[test]
    fn rm82_tree_shape() {
        let t = build_rm_tree(8, 2).unwrap();
        assert_eq!(t.internal_count(), 6);
        let labels: Vec<_> = t.leaves().iter().map(|l| l.kind.label()).collect();
        assert_eq!(labels, ["RM(7,1)", "RM(6,1)", "RM(5,1)", "RM(4,1)", "RM(3,1)", "RM(2,1)", "RM(2,2)"]);
        let leaves = t.leaves();
        assert_eq!(leaves[0].msg, 29..37);
        assert_eq!(leaves[6].msg, 0..4);
        assert_eq!((t.n, t.k), (256, 37));
    }

    #[test]
    fn full_rate_and_repetition_roots() {
        let t = build_rm_tree(2, 2).unwrap();
        assert_eq!(t.internal_count(), 0);
        assert_eq!(t.leaves()[0].kind, LeafKind::FullRate { m: 2 });
        assert_eq!(t.k, 4);
        let t = build_rm_tree(4, 0).unwrap();
        assert_eq!(t.leaves()[0].kind, LeafKind::Repetition { m: 4 });
    }

    #[test]
    fn rm31_encoding_closed_form() {
        let t = build_rm_tree(3, 1).unwrap();
        assert_eq!(rm_encode(&t, &w("0000")).unwrap(), w("00000000"));
        assert_eq!(rm_encode(&t, &w("1000")).unwrap(), w("11111111"));
        assert_eq!(rm_encode(&t, &w("0001")).unwrap(), w("00001111"));
        // (m1, m1⊕m2, m1⊕m3, m1⊕m2⊕m3, ...) with m2 = 1
        assert_eq!(rm_encode(&t, &w("0100")).unwrap(), w("01010101"));
        assert!(rm_encode(&t, &w("010")).is_err());
    }

    #[test]
    fn generator_row_selection() {
        let g = rm_generator_rows(1, 1).unwrap();
        assert_eq!(g.rows(), 2);
        let mut wts = rm_generator_rows(3, 1).unwrap().row_weights();
        wts.sort_unstable();
        assert_eq!(wts, vec![4, 4, 4, 8]);
        let g = rm_generator_rows(2, 0).unwrap();
        assert_eq!(g.rows(), 1);
        assert_eq!(g.row_weights(), vec![4]);
    }

    #[test]
    fn small_codebooks() {
        let cb = enumerate_codebook(&build_rm_tree(1, 1).unwrap()).unwrap();
        assert_eq!(cb, vec![w("00"), w("11"), w("01"), w("10")]);
        let cb = enumerate_codebook(&build_rm_tree(2, 0).unwrap()).unwrap();
        assert_eq!(cb, vec![w("0000"), w("1111")]);
        let cb = enumerate_codebook(&build_rm_tree(3, 1).unwrap()).unwrap();
        let mut weights: Vec<_> = cb.iter().map(hamming_weight).collect();
        weights.sort_unstable();
        assert_eq!(weights, [vec![0], vec![4; 14], vec![8]].concat());
    }

    #[test]
    fn codebook_matches_generator_span_small() {
        for m in 1..=3 {
            for r in 0..=m {
                let tree: BTreeSet<_> = enumerate_codebook(&build_rm_tree(m, r).unwrap()).unwrap().into_iter().collect();
                let span: BTreeSet<_> = rm_generator_rows(m, r).unwrap().row_span().unwrap().into_iter().collect();
                assert_eq!(tree, span, "RM({m},{r})");
            }
        }
    }

    #[test]
    fn slices_partition_message() {
        for (m, r) in [(3, 1), (5, 2), (8, 2), (6, 3), (4, 4)] {
            let t = build_rm_tree(m, r).unwrap();
            let mut covered = vec![false; t.k];
            for leaf in t.message_leaves() {
                assert_eq!(leaf.msg.len(), leaf.kind.dimension());
                for i in leaf.msg {
                    assert!(!covered[i]);
                    covered[i] = true;
                }
            }
            assert!(covered.into_iter().all(|c| c));
        }
    }
}
