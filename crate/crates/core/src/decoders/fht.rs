//! Fast Walsh–Hadamard transform and FHT-based MAP decoding of first-order
//! RM codes.
//!
//! Row `i` of the Sylvester Hadamard matrix is `h_i(j) = (−1)^{popcount(i & j)}`.
//! The RM(m,1) codeword for message `(a0, a1, …, am)` is
//! `c(j) = a0 ⊕ Σ_b a_{b+1} j_b`, whose BPSK image is `(−1)^{a0} h_a` with
//! `a = Σ_b a_{b+1} 2^b`.

use crate::bits::BitWord;
use crate::error::{Error, Result};
use crate::eval::opcount::Ops;

/// Unnormalized Walsh–Hadamard transform in Sylvester order, n·log2(n) adds.
pub fn fht(l: &[f64]) -> Result<Vec<f64>> {
    if l.is_empty() || !l.len().is_power_of_two() {
        return Err(Error::InvalidParameter(format!("FHT length {} is not a power of two", l.len())));
    }
    let mut out = l.to_vec();
    fht_in_place(&mut out, &mut ());
    Ok(out)
}

pub(crate) fn fht_in_place(x: &mut [f64], ops: &mut impl Ops) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        ops.add(n);
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// Index of the largest |x_i|, lowest index on ties.
pub(crate) fn argmax_abs(x: &[f64], ops: &mut impl Ops) -> usize {
    ops.cmp(2 * x.len());
    let mut best = 0;
    for (i, v) in x.iter().enumerate().skip(1) {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    best
}

/// RM(m,1) message `(a0, bits of row)` for a Hadamard row and sign bit.
pub(crate) fn rm1_message(row: usize, flip: u8, m: usize) -> BitWord {
    let mut bits = Vec::with_capacity(m + 1);
    bits.push(flip);
    bits.extend((0..m).map(|b| ((row >> b) & 1) as u8));
    BitWord::from_raw(bits)
}

/// MAP decoding of RM(m,1) from LLRs through one FHT: returns (codeword, message).
pub fn fht_map_decode_rm1(l: &[f64], m: usize) -> Result<(BitWord, BitWord)> {
    if l.len() != 1 << m {
        return Err(Error::LengthMismatch { expected: 1 << m, actual: l.len() });
    }
    Ok(fht_map_counted(l, m, &mut ()))
}

pub(crate) fn fht_map_counted(l: &[f64], m: usize, ops: &mut impl Ops) -> (BitWord, BitWord) {
    let mut wh = l.to_vec();
    fht_in_place(&mut wh, ops);
    let row = argmax_abs(&wh, ops);
    ops.cmp(1);
    let flip = u8::from(wh[row] < 0.0);
    let codeword = (0..l.len())
        .map(|j| flip ^ ((row & j).count_ones() % 2) as u8)
        .collect();
    (BitWord::from_raw(codeword), rm1_message(row, flip, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::LeafKind;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn hadamard_sign(i: usize, j: usize) -> f64 {
        if (i & j).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn naive(l: &[f64]) -> Vec<f64> {
        let n = l.len();
        (0..n).map(|i| (0..n).map(|j| hadamard_sign(i, j) * l[j]).sum()).collect()
    }

    #[test]
    fn small_transforms() {
        assert_eq!(fht(&[3.0, 1.0]).unwrap(), vec![4.0, 2.0]);
        assert_eq!(fht(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![1.0; 4]);
        assert!(fht(&[1.0, 2.0, 3.0]).is_err());
        assert!(fht(&[]).is_err());
    }

    #[test]
    fn matches_dense_hadamard_and_inverts() {
        let mut rng = crate::rng::stream_rng(11, 0);
        let l: Vec<f64> = (0..256).map(|_| rng.sample(StandardNormal)).collect();
        let fast = fht(&l).unwrap();
        for (a, b) in fast.iter().zip(naive(&l)) {
            assert!((a - b).abs() < 1e-9);
        }
        let back = fht(&fast).unwrap();
        for (a, b) in back.iter().zip(&l) {
            assert!((a / 256.0 - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn hadamard_rows_are_rm1_codewords() {
        let kind = LeafKind::FirstOrder { m: 3 };
        for row in 0..8 {
            for flip in 0..2u8 {
                let msg = rm1_message(row, flip, 3);
                let cw = kind.encode(&msg).unwrap();
                for j in 0..8 {
                    let expected = if flip == 1 { -hadamard_sign(row, j) } else { hadamard_sign(row, j) };
                    assert_eq!(1.0 - 2.0 * f64::from(cw.bits()[j]), expected);
                }
            }
        }
    }

    #[test]
    fn noiseless_and_complement() {
        let kind = LeafKind::FirstOrder { m: 3 };
        for i in 0..16u64 {
            let msg = BitWord::from_index(i, 4);
            let cw = kind.encode(&msg).unwrap();
            let l: Vec<f64> = cw.bits().iter().map(|&b| 50.0 * (1.0 - 2.0 * f64::from(b))).collect();
            let (c, m) = fht_map_decode_rm1(&l, 3).unwrap();
            assert_eq!((c.clone(), m), (cw.clone(), msg));
            let neg: Vec<f64> = l.iter().map(|v| -v).collect();
            let (cn, _) = fht_map_decode_rm1(&neg, 3).unwrap();
            let complement: Vec<u8> = cw.bits().iter().map(|b| 1 - b).collect();
            assert_eq!(cn.bits(), complement.as_slice());
        }
    }
}
