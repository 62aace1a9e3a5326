//! Polar codes: Bhattacharyya-parameter construction, frozen-leaf Plotkin
//! trees and matrix encoding.
//!
//! Message bit `j` sits at the `j`-th largest active position, so the
//! matrix encoder and the tree encoder agree on bit order.

use serde::{Deserialize, Serialize};

use super::rm::{CodeSpec, CodeVariant};
use super::tree::{LeafKind, PlotkinTree, Shape};
use crate::bits::{kronecker_generator, BitWord};
use crate::error::{check_len, Error, Result};

/// Active set of Polar(64, 7) as published for the neural-code comparison
/// (1-indexed). [`polar_spec`] with design value 0.5 reproduces it.
pub const POLAR_64_7_ACTIVE: [usize; 7] = [48, 56, 60, 61, 62, 63, 64];

/// Default Bhattacharyya design parameter.
pub const DEFAULT_DESIGN_Z0: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarSpec {
    pub n: usize,
    pub k: usize,
    /// Sorted, 1-indexed positions carrying message bits.
    pub active: Vec<usize>,
    /// Bhattacharyya parameters in natural bit-channel order; empty when the
    /// active set was supplied directly.
    pub reliabilities: Vec<f64>,
}

impl PolarSpec {
    /// Builds a spec from an explicit active set (1-indexed).
    pub fn from_active_set(n: usize, active: &[usize]) -> Result<Self> {
        log2_exact(n)?;
        let mut active = active.to_vec();
        active.sort_unstable();
        active.dedup();
        if active.iter().any(|&a| a == 0 || a > n) {
            return Err(Error::InvalidParameter(format!("active positions must lie in 1..={n}")));
        }
        Ok(Self { n, k: active.len(), active, reliabilities: Vec::new() })
    }

    pub fn m(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    pub fn frozen(&self) -> Vec<usize> {
        (1..=self.n).filter(|p| self.active.binary_search(p).is_err()).collect()
    }

    pub fn code_spec(&self) -> CodeSpec {
        CodeSpec {
            variant: CodeVariant::Polar,
            m: self.m(),
            r: None,
            n: self.n,
            k: self.k,
            rate: self.k as f64 / self.n as f64,
            min_distance: self.active.iter().map(|&p| 1usize << (p - 1).count_ones()).min(),
        }
    }

    /// 0-based active positions, largest first: message bit j goes to entry j.
    fn positions_by_message(&self) -> Vec<usize> {
        self.active.iter().rev().map(|&p| p - 1).collect()
    }
}

fn log2_exact(n: usize) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("block length {n} is not a power of two ≥ 2")));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Bhattacharyya parameters of the n synthetic bit-channels, starting from a
/// channel with parameter `z0`. Each step maps z to (2z − z², z²); the first
/// step decides the most significant bit of the channel index.
pub fn polar_reliabilities(n: usize, z0: f64) -> Result<Vec<f64>> {
    let m = log2_exact(n)?;
    if !(z0 > 0.0 && z0 < 1.0) {
        return Err(Error::InvalidParameter(format!("design parameter z0 = {z0} outside (0, 1)")));
    }
    let mut z = vec![z0];
    for _ in 0..m {
        z = z.iter().flat_map(|&p| [2.0 * p - p * p, p * p]).collect();
    }
    Ok(z)
}

/// The k most reliable positions (smallest z; ties go to the larger index).
pub fn polar_spec(n: usize, k: usize, z0: f64) -> Result<PolarSpec> {
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let z = polar_reliabilities(n, z0)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(b.cmp(&a)));
    let mut active: Vec<usize> = order[..k].iter().map(|&i| i + 1).collect();
    active.sort_unstable();
    Ok(PolarSpec { n, k, active, reliabilities: z })
}

/// Plotkin tree of a Polar code.
///
/// The complete binary tree over the n positions is simplified bottom-up:
/// an all-frozen subtree becomes one frozen leaf, and a subtree whose only
/// active position is its last one becomes a repetition leaf (the last row
/// of the Kronecker power is all ones). Everything else stays expanded down
/// to single-position RM(0,0) leaves.
pub fn build_polar_tree(spec: &PolarSpec) -> Result<PlotkinTree> {
    let m = log2_exact(spec.n)?;
    let mut is_active = vec![false; spec.n];
    for &a in &spec.active {
        is_active[a - 1] = true;
    }
    fn shape(active: &[bool], lo: usize, m: usize) -> Shape {
        let len = 1usize << m;
        let span = &active[lo..lo + len];
        let count = span.iter().filter(|&&a| a).count();
        if count == 0 {
            Shape::Leaf(LeafKind::Frozen { m })
        } else if count == 1 && span[len - 1] {
            Shape::Leaf(LeafKind::Repetition { m })
        } else {
            let half = len / 2;
            Shape::Internal(Box::new(shape(active, lo, m - 1)), Box::new(shape(active, lo + half, m - 1)))
        }
    }
    PlotkinTree::from_shape(format!("Polar({},{})", spec.n, spec.k), shape(&is_active, 0, m))
}

/// Places the message on the active positions, zeros elsewhere, and
/// multiplies by the Kronecker generator over GF(2).
pub fn polar_encode(spec: &PolarSpec, msg: &BitWord) -> Result<BitWord> {
    check_len(spec.k, msg.len())?;
    let g = kronecker_generator(spec.m())?;
    let mut input = vec![0u8; spec.n];
    for (&pos, &bit) in spec.positions_by_message().iter().zip(msg.bits()) {
        input[pos] = bit;
    }
    g.left_multiply(&BitWord::from_raw(input))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::tree::Node;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn min_distance_matches_brute_force() {
        for (n, k) in [(8, 4), (16, 5), (32, 6), (64, 7), (16, 11)] {
            let spec = polar_spec(n, k, DEFAULT_DESIGN_Z0).unwrap();
            let tree = build_polar_tree(&spec).unwrap();
            let d = tree.codebook().unwrap().iter().map(crate::bits::hamming_weight).filter(|&w| w > 0).min();
            assert_eq!(spec.code_spec().min_distance, d, "Polar({n},{k})");
        }
    }

    #[test]
    fn reliability_recursion() {
        assert_eq!(polar_reliabilities(2, 0.5).unwrap(), vec![0.75, 0.25]);
        assert_eq!(polar_reliabilities(4, 0.5).unwrap(), vec![0.9375, 0.5625, 0.4375, 0.0625]);
        assert!(polar_reliabilities(4, 1.0).is_err());
        assert!(polar_reliabilities(6, 0.5).is_err());
    }

    #[test]
    fn polar_64_7_smallest_reliabilities() {
        let z = polar_reliabilities(64, 0.5).unwrap();
        let mut idx: Vec<usize> = (0..64).collect();
        idx.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
        let mut best: Vec<usize> = idx[..7].to_vec();
        best.sort_unstable();
        assert_eq!(best, vec![47, 55, 59, 60, 61, 62, 63]);
        // no ties at the boundary
        assert!(z[idx[6]] < z[idx[7]]);
    }

    #[test]
    fn active_sets() {
        assert_eq!(polar_spec(64, 7, 0.5).unwrap().active, POLAR_64_7_ACTIVE.to_vec());
        assert_eq!(polar_spec(2, 1, 0.5).unwrap().active, vec![2]);
        assert_eq!(polar_spec(4, 4, 0.3).unwrap().active, vec![1, 2, 3, 4]);
        assert!(polar_spec(4, 5, 0.5).is_err());
    }

    #[test]
    fn polar_64_7_tree_matches_published_shape() {
        let t = build_polar_tree(&polar_spec(64, 7, 0.5).unwrap()).unwrap();
        assert_eq!(t.internal_count(), 7);
        let labels: Vec<_> = t.leaves().iter().map(|l| l.kind.label()).collect();
        assert_eq!(
            labels,
            ["Frozen(32)", "RM(4,0)", "RM(3,0)", "RM(2,0)", "RM(0,0)", "RM(0,0)", "RM(0,0)", "RM(0,0)"]
        );
        assert_eq!(t.message_leaves().len(), 7);
        // m7 feeds RM(4,0), m1 the last RM(0,0)
        let leaves = t.leaves();
        assert_eq!(leaves[1].msg, 6..7);
        assert_eq!(leaves[7].msg, 0..1);
    }

    #[test]
    fn degenerate_trees() {
        let t = build_polar_tree(&polar_spec(2, 2, 0.5).unwrap()).unwrap();
        assert_eq!(t.internal_count(), 1);
        assert!(t.leaves().iter().all(|l| l.kind == LeafKind::Repetition { m: 0 }));

        // only the last position active: the whole block is a repetition code
        let t = build_polar_tree(&PolarSpec::from_active_set(4, &[4]).unwrap()).unwrap();
        assert!(matches!(t.root, Node::Leaf { leaf: LeafKind::Repetition { m: 2 }, .. }));

        let t = build_polar_tree(&PolarSpec::from_active_set(4, &[3]).unwrap()).unwrap();
        let labels: Vec<_> = t.leaves().iter().map(|l| l.kind.label()).collect();
        assert_eq!(labels, ["Frozen(2)", "RM(0,0)", "Frozen(1)"]);
    }

    #[test]
    fn matrix_encoding_examples() {
        let spec = polar_spec(2, 1, 0.5).unwrap();
        assert_eq!(polar_encode(&spec, &"1".parse().unwrap()).unwrap(), "11".parse().unwrap());
        let spec = polar_spec(64, 7, 0.5).unwrap();
        assert_eq!(polar_encode(&spec, &BitWord::zeros(7)).unwrap(), BitWord::zeros(64));
        assert!(polar_encode(&spec, &BitWord::zeros(6)).is_err());
    }

    #[test]
    fn matrix_and_tree_encoders_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, k) in [(64, 7), (16, 8), (32, 11), (8, 8)] {
            let spec = polar_spec(n, k, 0.5).unwrap();
            let tree = build_polar_tree(&spec).unwrap();
            for _ in 0..100 {
                let msg = BitWord::from_raw((0..k).map(|_| rng.random_range(0..2u8)).collect());
                assert_eq!(polar_encode(&spec, &msg).unwrap(), tree.encode(&msg).unwrap(), "Polar({n},{k})");
            }
        }
    }
}
