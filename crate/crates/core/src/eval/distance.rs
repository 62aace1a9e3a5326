//! Pairwise codeword distances and the Gaussian codebook baseline.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitWord;
use crate::channel::RealCodeword;
use crate::error::{Error, Result};
use crate::eval::scheme::{Encoder, MAX_CODEBOOK_K};

pub const DEFAULT_BINS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Every unordered pair of distinct messages.
    Exhaustive,
    /// The given number of uniformly drawn pairs of distinct messages.
    RandomPairs(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceHistogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub mode: DistanceMode,
    pub pairs: u64,
    pub mean: f64,
}

pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,count,normalized";

impl DistanceHistogram {
    fn empty(lo: f64, hi: f64, bins: usize, mode: DistanceMode) -> Self {
        Self { lo, hi, counts: vec![0; bins], mode, pairs: 0, mean: 0.0 }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.counts.len()).map(|i| self.lo + i as f64 * self.width()).collect()
    }

    /// Bin of `d`; the upper edge belongs to the last bin.
    pub fn bin_of(&self, d: f64) -> usize {
        let b = ((d - self.lo) / self.width()).floor();
        (b.max(0.0) as usize).min(self.counts.len() - 1)
    }

    fn push(&mut self, d: f64, sum: &mut f64) {
        let b = self.bin_of(d);
        self.counts[b] += 1;
        self.pairs += 1;
        *sum += d;
    }

    fn merge(mut self, other: (Self, f64), sum: &mut f64) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.0.counts) {
            *a += b;
        }
        self.pairs += other.0.pairs;
        *sum += other.1;
        self
    }

    /// CSV with fractions of pairs in the `normalized` column.
    pub fn csv(&self) -> String {
        let mut s = format!("{HISTOGRAM_HEADER}\n");
        let e = self.edges();
        for (i, &c) in self.counts.iter().enumerate() {
            let frac = if self.pairs == 0 { 0.0 } else { c as f64 / self.pairs as f64 };
            s.push_str(&format!("{},{},{},{:e}\n", e[i], e[i + 1], c, frac));
        }
        s
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// All C(N,2) pairwise distances of a codebook, pair (i, j) with i < j in
/// lexicographic order.
pub fn pairwise_distances(book: &[Vec<f64>]) -> Vec<f64> {
    (0..book.len())
        .flat_map(|i| (i + 1..book.len()).map(move |j| (i, j)))
        .map(|(i, j)| euclidean(&book[i], &book[j]))
        .collect()
}

/// Histogram of Euclidean distances between encoded messages over
/// `bins` uniform bins on [0, 2√n].
pub fn pairwise_distance_histogram<R: Rng + ?Sized>(
    encoder: &Encoder,
    mode: DistanceMode,
    bins: usize,
    rng: &mut R,
) -> Result<DistanceHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("at least one bin is required".into()));
    }
    let n = encoder.n();
    let k = encoder.k();
    let hi = 2.0 * (n as f64).sqrt();
    let empty = DistanceHistogram::empty(0.0, hi, bins, mode);
    let (mut hist, sum) = match mode {
        DistanceMode::Exhaustive => {
            if k > MAX_CODEBOOK_K {
                return Err(Error::CodebookTooLarge { k, limit: MAX_CODEBOOK_K });
            }
            let book = encoder.enumerate()?;
            let parts: Vec<(DistanceHistogram, f64)> = (0..book.len())
                .into_par_iter()
                .map(|i| {
                    let mut h = empty.clone();
                    let mut sum = 0.0;
                    for j in i + 1..book.len() {
                        h.push(euclidean(&book[i], &book[j]), &mut sum);
                    }
                    (h, sum)
                })
                .collect();
            let mut sum = 0.0;
            let h = parts.into_iter().fold(empty.clone(), |acc, p| acc.merge(p, &mut sum));
            (h, sum)
        }
        DistanceMode::RandomPairs(count) => {
            if k == 0 {
                return Err(Error::InvalidParameter("a code of dimension 0 has no pairs".into()));
            }
            let mut h = empty.clone();
            let mut sum = 0.0;
            let batch = 4096;
            let mut left = count;
            while left > 0 {
                let b = left.min(batch) as usize;
                let mut msgs = Vec::with_capacity(2 * b);
                for _ in 0..b {
                    let a = BitWord::from_raw((0..k).map(|_| rng.random_range(0..2u8)).collect());
                    let mut c = a.clone();
                    while c == a {
                        c = BitWord::from_raw((0..k).map(|_| rng.random_range(0..2u8)).collect());
                    }
                    msgs.push(a);
                    msgs.push(c);
                }
                let x = encoder.encode_batch(&msgs)?;
                for pair in x.chunks_exact(2) {
                    h.push(euclidean(&pair[0], &pair[1]), &mut sum);
                }
                left -= b as u64;
            }
            (h, sum)
        }
    };
    hist.mean = if hist.pairs == 0 { 0.0 } else { sum / hist.pairs as f64 };
    Ok(hist)
}

/// 2^k i.i.d. standard normal words of length n, each rescaled to energy n.
pub fn gaussian_codebook<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<RealCodeword>> {
    if k > MAX_CODEBOOK_K {
        return Err(Error::CodebookTooLarge { k, limit: MAX_CODEBOOK_K });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("codeword length must be positive".into()));
    }
    (0..1usize << k)
        .map(|_| {
            let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            RealCodeword::normalize(&w)
        })
        .collect()
}

/// Gaussian codebook wrapped as an encoder.
pub fn gaussian_encoder<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Encoder> {
    Ok(Encoder::Codebook { label: format!("Gaussian({n},{k})"), k, words: gaussian_codebook(n, k, rng)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_rm_tree;
    use crate::eval::{DecoderKind, Scheme};
    use crate::rng::stream_rng;

    #[test]
    fn rm_histogram_counts() {
        let enc = Encoder::Bpsk(build_rm_tree(3, 1).unwrap());
        let h = pairwise_distance_histogram(&enc, DistanceMode::Exhaustive, DEFAULT_BINS, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(h.pairs, 120);
        assert_eq!(h.counts.iter().sum::<u64>(), 120);
        assert_eq!(h.counts[h.bin_of(4.0)], 112);
        assert_eq!(h.counts[DEFAULT_BINS - 1], 8);
        assert_eq!(h.csv().lines().count(), DEFAULT_BINS + 1);
    }

    #[test]
    fn random_pairs_are_distinct_messages() {
        let enc = Encoder::Bpsk(build_rm_tree(3, 1).unwrap());
        let h = pairwise_distance_histogram(&enc, DistanceMode::RandomPairs(5000), 10, &mut stream_rng(1, 0)).unwrap();
        assert_eq!(h.pairs, 5000);
        // a zero distance would mean a message paired with itself
        assert_eq!(h.counts[0], 0);
        let big = Encoder::Bpsk(build_rm_tree(8, 2).unwrap());
        assert!(pairwise_distance_histogram(&big, DistanceMode::Exhaustive, 10, &mut stream_rng(1, 0)).is_err());
    }

    #[test]
    fn gaussian_codebook_energy_and_decoding() {
        let mut rng = stream_rng(2, 0);
        let book = gaussian_codebook(16, 3, &mut rng).unwrap();
        assert_eq!(book.len(), 8);
        for w in &book {
            assert!((w.energy() - 16.0).abs() < 1e-9);
        }
        let enc = gaussian_encoder(8, 1, &mut rng).unwrap();
        let s = Scheme::new(enc, DecoderKind::Map).unwrap();
        for i in 0..2 {
            let msg = BitWord::from_index(i, 1);
            let x = s.encoder.encode_batch(std::slice::from_ref(&msg)).unwrap();
            assert_eq!(s.decode_batch(&x, 1.0, &mut rng).unwrap()[0].message, msg);
        }
        assert!(gaussian_codebook(4, 17, &mut rng).is_err());
    }
}
