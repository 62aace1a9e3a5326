//! Brute-force MAP decoding over an enumerated codebook.

use crate::bits::BitWord;
use crate::codes::ENUMERATION_LIMIT;
use crate::error::{check_len, Error, Result};

/// ⟨l, 1 − 2c⟩, the log-likelihood score of codeword `c` up to a constant.
pub fn codeword_score(l: &[f64], c: &BitWord) -> f64 {
    l.iter()
        .zip(c.bits())
        .map(|(&v, &b)| if b == 0 { v } else { -v })
        .sum()
}

/// Index of the codeword maximizing ⟨l, 1 − 2c⟩, lowest index on ties.
///
/// With a codebook from [`crate::codes::PlotkinTree::codebook`] the index is
/// the message integer.
pub fn map_decode(codebook: &[BitWord], l: &[f64]) -> Result<usize> {
    if codebook.is_empty() {
        return Err(Error::InvalidParameter("empty codebook".into()));
    }
    if codebook.len() > 1 << ENUMERATION_LIMIT {
        return Err(Error::CodebookTooLarge {
            k: codebook.len().ilog2() as usize,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, c) in codebook.iter().enumerate() {
        check_len(l.len(), c.len())?;
        let s = codeword_score(l, c);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    Ok(best)
}
