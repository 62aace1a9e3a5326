//! Binary words over GF(2), the Plotkin map, Kronecker generator matrices
//! and BPSK mapping.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Largest Kronecker exponent accepted by [`kronecker_generator`].
pub const MAX_KRONECKER_M: usize = 12;

/// A word over {0,1}, one byte per bit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BitWord(Vec<u8>);

impl BitWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Builds a word from the low `len` bits of `value`, least significant bit first.
    pub fn from_index(value: u64, len: usize) -> Self {
        Self((0..len).map(|i| ((value >> i) & 1) as u8).collect())
    }

    /// Inverse of [`BitWord::from_index`]; only meaningful for words of length ≤ 64.
    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    pub(crate) fn from_raw(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self(bits)
    }

    pub fn concat(&self, other: &BitWord) -> BitWord {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Self(out)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> BitWord {
        Self(self.0[range].to_vec())
    }
}

impl TryFrom<Vec<u8>> for BitWord {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<BitWord> for Vec<u8> {
    fn from(w: BitWord) -> Self {
        w.0
    }
}

impl std::str::FromStr for BitWord {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; whitespace and commas are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self(bits))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

/// Dense binary matrix, row-major, one byte per entry.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn from_rows(rows: Vec<BitWord>) -> Result<Self> {
        let cols = rows.first().map_or(0, BitWord::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            check_len(cols, r.len())?;
            data.extend_from_slice(r.bits());
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> BitWord {
        BitWord::from_raw(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().map(|&b| b as usize).sum())
            .collect()
    }

    /// Row vector times matrix over GF(2).
    pub fn left_multiply(&self, w: &BitWord) -> Result<BitWord> {
        check_len(self.rows, w.len())?;
        let mut out = vec![0u8; self.cols];
        for (r, &bit) in w.bits().iter().enumerate() {
            if bit == 1 {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                out.iter_mut().zip(row).for_each(|(o, &x)| *o ^= x);
            }
        }
        Ok(BitWord::from_raw(out))
    }

    /// All 2^rows GF(2) combinations of the rows, indexed by the coefficient word.
    pub fn row_span(&self) -> Result<Vec<BitWord>> {
        if self.rows > 20 {
            return Err(Error::CodebookTooLarge { k: self.rows, limit: 20 });
        }
        (0..1u64 << self.rows)
            .map(|i| self.left_multiply(&BitWord::from_index(i, self.rows)))
            .collect()
    }
}

pub fn xor_words(u: &BitWord, v: &BitWord) -> Result<BitWord> {
    check_len(u.len(), v.len())?;
    Ok(BitWord::from_raw(u.0.iter().zip(&v.0).map(|(a, b)| a ^ b).collect()))
}

/// `Plotkin(u, v) = (u, u ⊕ v)`.
pub fn plotkin_map(u: &BitWord, v: &BitWord) -> Result<BitWord> {
    let sum = xor_words(u, v)?;
    Ok(u.concat(&sum))
}

/// The 2×2 kernel `[[0,1],[1,1]]` used for both RM and Polar generator matrices.
pub const KERNEL: [[u8; 2]; 2] = [[0, 1], [1, 1]];

/// m-fold Kronecker power of [`KERNEL`]. Entry (i, j) is the product over bit
/// positions b of `KERNEL[i_b][j_b]`, with the most significant bit taken
/// from the outermost factor.
pub fn kronecker_generator(m: usize) -> Result<BinaryMatrix> {
    if m == 0 || m > MAX_KRONECKER_M {
        return Err(Error::InvalidParameter(format!(
            "kronecker exponent m = {m} outside 1..={MAX_KRONECKER_M}"
        )));
    }
    let n = 1usize << m;
    let mut data = vec![0u8; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = (0..m).fold(1u8, |acc, b| acc & KERNEL[(i >> b) & 1][(j >> b) & 1]);
        }
    }
    Ok(BinaryMatrix { rows: n, cols: n, data })
}

pub fn hamming_weight(w: &BitWord) -> usize {
    w.0.iter().map(|&b| b as usize).sum()
}

/// BPSK: bit b ↦ 1 − 2b.
pub fn bpsk(w: &BitWord) -> Vec<f64> {
    w.0.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}
