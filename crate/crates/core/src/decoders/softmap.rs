//! Soft-MAP: per-bit max-log LLRs over a (sub)codebook,
//! `l_inf(i) = max_{c: m_i = 0} ⟨l, x(c)⟩ − max_{c: m_i = 1} ⟨l, x(c)⟩`
//! with `x(c)` the BPSK image (or, for neural codebooks, the real codeword).
//!
//! Besides the LLRs every evaluation reports, per bit, the winning codeword
//! on each side. The LLR is linear in `l` once the winners are fixed, so
//! `∂ l_inf(i) / ∂ l = x(c⁰_i) − x(c¹_i)`.

use crate::bits::{bpsk, BitWord};
use crate::decoders::fht::fht_in_place;
use crate::error::{check_len, Error, Result};
use crate::eval::opcount::Ops;
use crate::codes::LeafKind;

/// Largest full-rate leaf (m = 3, 256 codewords) decoded by enumeration.
pub const MAX_FULL_RATE_M: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct SoftMapOutput {
    pub llrs: Vec<f64>,
    /// `[c⁰_i, c¹_i]` as message indices (bit j of the index is m_j).
    pub winners: Vec<[usize; 2]>,
}

pub fn soft_map_llrs(leaf: LeafKind, l: &[f64]) -> Result<Vec<f64>> {
    Ok(soft_map(leaf, l)?.llrs)
}

pub fn soft_map(leaf: LeafKind, l: &[f64]) -> Result<SoftMapOutput> {
    soft_map_counted(leaf, l, &mut ())
}

pub(crate) fn soft_map_counted(leaf: LeafKind, l: &[f64], ops: &mut impl Ops) -> Result<SoftMapOutput> {
    check_len(leaf.len(), l.len())?;
    match leaf {
        LeafKind::Repetition { .. } => {
            ops.add(l.len() - 1);
            ops.mul(1);
            let s: f64 = l.iter().sum();
            Ok(SoftMapOutput { llrs: vec![2.0 * s], winners: vec![[0, 1]] })
        }
        LeafKind::FirstOrder { m } => Ok(first_order(l, m, ops)),
        LeafKind::FullRate { m } if m <= MAX_FULL_RATE_M => {
            let k = leaf.dimension();
            let book: Vec<Vec<f64>> = (0..1u64 << k)
                .map(|i| bpsk(&leaf.encode(&BitWord::from_index(i, k)).expect("dimension")))
                .collect();
            ops.add(book.len() * (l.len() - 1));
            Ok(codebook_counted(&book, k, l, ops))
        }
        _ => Err(Error::UnsupportedLeaf { op: "soft_map", leaf: leaf.label() }),
    }
}

// FHT path: the codeword with sign bit a0 and Hadamard row r scores (−1)^{a0}·WH[r].
fn first_order(l: &[f64], m: usize, ops: &mut impl Ops) -> SoftMapOutput {
    let n = l.len();
    let mut wh = l.to_vec();
    fht_in_place(&mut wh, ops);
    let index = |row: usize, flip: bool| usize::from(flip) | (row << 1);

    let mut llrs = Vec::with_capacity(m + 1);
    let mut winners = Vec::with_capacity(m + 1);

    // a0: best positive row against best negative row
    ops.cmp(2 * n);
    ops.add(1);
    let (mut r0, mut r1) = (0, 0);
    for r in 1..n {
        if wh[r] > wh[r0] {
            r0 = r;
        }
        if -wh[r] > -wh[r1] {
            r1 = r;
        }
    }
    llrs.push(wh[r0] + wh[r1]);
    winners.push([index(r0, false), index(r1, true)]);

    // a_{b+1}: rows with bit b clear against rows with bit b set, sign free
    ops.cmp(n);
    let mag: Vec<f64> = wh.iter().map(|v| v.abs()).collect();
    for b in 0..m {
        let mut best = [None::<usize>; 2];
        for r in 0..n {
            let side = (r >> b) & 1;
            match best[side] {
                Some(cur) if mag[r] <= mag[cur] => {}
                _ => best[side] = Some(r),
            }
        }
        ops.cmp(n);
        ops.add(1);
        let (c0, c1) = (best[0].expect("n ≥ 2"), best[1].expect("n ≥ 2"));
        llrs.push(mag[c0] - mag[c1]);
        winners.push([index(c0, wh[c0] < 0.0), index(c1, wh[c1] < 0.0)]);
    }
    SoftMapOutput { llrs, winners }
}

/// Soft-MAP over an explicit real codebook indexed by message integer.
pub fn soft_map_codebook(codebook: &[Vec<f64>], k: usize, l: &[f64]) -> Result<SoftMapOutput> {
    if codebook.len() != 1 << k {
        return Err(Error::InvalidParameter(format!(
            "codebook has {} words, expected 2^{k}",
            codebook.len()
        )));
    }
    for c in codebook {
        check_len(l.len(), c.len())?;
    }
    Ok(codebook_counted(codebook, k, l, &mut ()))
}

fn codebook_counted(codebook: &[Vec<f64>], k: usize, l: &[f64], ops: &mut impl Ops) -> SoftMapOutput {
    ops.mul(codebook.len() * l.len());
    let scores: Vec<f64> = codebook
        .iter()
        .map(|c| c.iter().zip(l).map(|(a, b)| a * b).sum())
        .collect();
    ops.cmp(scores.len() * k);
    ops.add(k);
    let mut llrs = Vec::with_capacity(k);
    let mut winners = Vec::with_capacity(k);
    for i in 0..k {
        let mut best = [None::<usize>; 2];
        for (idx, &s) in scores.iter().enumerate() {
            let side = (idx >> i) & 1;
            match best[side] {
                Some(cur) if s <= scores[cur] => {}
                _ => best[side] = Some(idx),
            }
        }
        let (c0, c1) = (best[0].expect("k ≥ 1"), best[1].expect("k ≥ 1"));
        llrs.push(scores[c0] - scores[c1]);
        winners.push([c0, c1]);
    }
    SoftMapOutput { llrs, winners }
}

/// Sign-domain codeword of a leaf message index.
pub fn leaf_codeword_signs(leaf: LeafKind, index: usize) -> Vec<f64> {
    let k = leaf.dimension();
    bpsk(&leaf.encode(&BitWord::from_index(index as u64, k)).expect("dimension"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn book(leaf: LeafKind) -> Vec<Vec<f64>> {
        (0..1usize << leaf.dimension()).map(|i| leaf_codeword_signs(leaf, i)).collect()
    }

    #[test]
    fn repetition_is_twice_the_sum() {
        let leaf = LeafKind::Repetition { m: 2 };
        let out = soft_map(leaf, &[1.0, -0.5, 2.0, 0.25]).unwrap();
        assert_eq!(out.llrs, vec![5.5]);
        let via_book = soft_map_codebook(&book(leaf), 1, &[1.0, -0.5, 2.0, 0.25]).unwrap();
        assert_eq!(via_book.llrs, vec![5.5]);
    }

    #[test]
    fn full_rate_strong_zero() {
        let out = soft_map_llrs(LeafKind::FullRate { m: 2 }, &[10.0; 4]).unwrap();
        assert!(out.iter().all(|&v| v >= 20.0));
    }

    #[test]
    fn rejects_frozen_and_large_full_rate() {
        assert!(soft_map(LeafKind::Frozen { m: 2 }, &[0.0; 4]).is_err());
        assert!(soft_map(LeafKind::FullRate { m: 4 }, &[0.0; 16]).is_err());
        assert!(soft_map(LeafKind::Repetition { m: 2 }, &[0.0; 3]).is_err());
    }

    #[test]
    fn fht_path_matches_enumeration() {
        let mut rng = crate::rng::stream_rng(3, 0);
        for m in 1..=5 {
            let leaf = LeafKind::FirstOrder { m };
            let b = book(leaf);
            for _ in 0..100 {
                let l: Vec<f64> = (0..1 << m).map(|_| rng.sample(StandardNormal)).collect();
                let fast = soft_map(leaf, &l).unwrap();
                let slow = soft_map_codebook(&b, m + 1, &l).unwrap();
                for (a, s) in fast.llrs.iter().zip(&slow.llrs) {
                    assert!((a - s).abs() < 1e-9);
                }
                assert_eq!(fast.winners, slow.winners);
            }
        }
    }

    #[test]
    fn winners_give_the_gradient() {
        let leaf = LeafKind::FirstOrder { m: 3 };
        let mut rng = crate::rng::stream_rng(4, 0);
        let l: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
        let out = soft_map(leaf, &l).unwrap();
        for (i, [c0, c1]) in out.winners.iter().enumerate() {
            let g: Vec<f64> = leaf_codeword_signs(leaf, *c0)
                .iter()
                .zip(leaf_codeword_signs(leaf, *c1))
                .map(|(a, b)| a - b)
                .collect();
            let lin: f64 = g.iter().zip(&l).map(|(a, b)| a * b).sum();
            assert!((lin - out.llrs[i]).abs() < 1e-9);
        }
    }
}
