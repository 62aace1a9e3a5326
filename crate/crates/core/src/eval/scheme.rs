//! Encoder/decoder pairings evaluated by the simulators.

use rand::Rng;

use crate::autodiff::Tensor;
use crate::bits::{bpsk, BitWord};
use crate::channel::RealCodeword;
use crate::codes::PlotkinTree;
use crate::decoders::fht::fht_map_counted;
use crate::decoders::{dumer_decode, dumer_decode_counted, DecodeResult, LeafRule};
use crate::error::{check_len, Error, Result};
use crate::eval::opcount::{OpCounter, Ops};
use crate::ko::{count_ko_decode_ops, decode_result_from_llrs, ko_decode_batch, ko_encode_batch, KoModel};

/// Largest dimension for which a real codebook is enumerated.
pub const MAX_CODEBOOK_K: usize = 16;

#[derive(Clone, Debug)]
pub enum Encoder {
    /// BPSK image of a binary tree code.
    Bpsk(PlotkinTree),
    Ko(KoModel),
    /// KO encoder followed by symbol-wise sign binarization.
    KoBinarized(KoModel),
    /// Explicit real codebook indexed by message integer.
    Codebook { label: String, k: usize, words: Vec<RealCodeword> },
}

impl Encoder {
    pub fn n(&self) -> usize {
        match self {
            Encoder::Bpsk(t) => t.n,
            Encoder::Ko(m) | Encoder::KoBinarized(m) => m.n(),
            Encoder::Codebook { words, .. } => words.first().map_or(0, RealCodeword::len),
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Encoder::Bpsk(t) => t.k,
            Encoder::Ko(m) | Encoder::KoBinarized(m) => m.k(),
            Encoder::Codebook { k, .. } => *k,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Encoder::Bpsk(t) => t.label.clone(),
            Encoder::Ko(m) => m.label(),
            Encoder::KoBinarized(m) => format!("{}-b", m.label()),
            Encoder::Codebook { label, .. } => label.clone(),
        }
    }

    pub fn tree(&self) -> Option<&PlotkinTree> {
        match self {
            Encoder::Bpsk(t) => Some(t),
            Encoder::Ko(m) | Encoder::KoBinarized(m) => Some(&m.tree),
            Encoder::Codebook { .. } => None,
        }
    }

    pub fn encode(&self, msg: &BitWord) -> Result<RealCodeword> {
        let mut rows = self.encode_batch(std::slice::from_ref(msg))?;
        Ok(RealCodeword::from_normalized(rows.swap_remove(0)))
    }

    /// Channel inputs for a batch of messages, each with energy n.
    pub fn encode_batch(&self, msgs: &[BitWord]) -> Result<Vec<Vec<f64>>> {
        for m in msgs {
            check_len(self.k(), m.len())?;
        }
        match self {
            Encoder::Bpsk(t) => msgs.iter().map(|m| Ok(bpsk(&t.encode(m)?))).collect(),
            Encoder::Ko(model) => {
                let x = ko_encode_batch(model, msgs)?;
                Ok((0..x.rows()).map(|i| x.row(i).to_vec()).collect())
            }
            Encoder::KoBinarized(model) => {
                let x = ko_encode_batch(model, msgs)?;
                Ok((0..x.rows())
                    .map(|i| x.row(i).iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect())
                    .collect())
            }
            Encoder::Codebook { words, .. } => {
                Ok(msgs.iter().map(|m| words[m.to_index() as usize].symbols().to_vec()).collect())
            }
        }
    }

    /// All 2^k channel inputs, indexed by message integer.
    pub fn enumerate(&self) -> Result<Vec<Vec<f64>>> {
        let k = self.k();
        if k > MAX_CODEBOOK_K {
            return Err(Error::CodebookTooLarge { k, limit: MAX_CODEBOOK_K });
        }
        let msgs: Vec<BitWord> = (0..1u64 << k).map(|i| BitWord::from_index(i, k)).collect();
        self.encode_batch(&msgs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    /// Recursive Plotkin-tree decoding (successive cancellation for Polar).
    Dumer(LeafRule),
    /// FHT maximum-likelihood decoding of first-order RM codes.
    FhtMap,
    /// Exhaustive maximum-likelihood (nearest codeword) decoding.
    Map,
    Ko,
    /// Uniform random bits, a calibration control.
    RandomGuess,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Dumer(LeafRule::HardMap) => "dumer",
            DecoderKind::Dumer(LeafRule::SoftMap) => "dumer-softmap",
            DecoderKind::FhtMap => "fht-map",
            DecoderKind::Map => "map",
            DecoderKind::Ko => "ko",
            DecoderKind::RandomGuess => "random",
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dumer" | "sc" => DecoderKind::Dumer(LeafRule::HardMap),
            "dumer-softmap" => DecoderKind::Dumer(LeafRule::SoftMap),
            "fht-map" => DecoderKind::FhtMap,
            "map" => DecoderKind::Map,
            "ko" => DecoderKind::Ko,
            "random" => DecoderKind::RandomGuess,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown decoder '{s}' (dumer|sc|dumer-softmap|fht-map|map|ko|random)"
                )))
            }
        })
    }
}

/// A validated encoder/decoder pair.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub encoder: Encoder,
    pub decoder: DecoderKind,
    book: Option<Vec<Vec<f64>>>,
}

fn is_first_order_rm(tree: &PlotkinTree) -> bool {
    tree.label.starts_with("RM(") && tree.k == tree.m() + 1
}

impl Scheme {
    pub fn new(encoder: Encoder, decoder: DecoderKind) -> Result<Self> {
        let bad = |why: &str| {
            Err(Error::InvalidParameter(format!(
                "decoder {} cannot decode {}: {why}",
                decoder.name(),
                encoder.label()
            )))
        };
        let mut book = None;
        match (&encoder, decoder) {
            (Encoder::Bpsk(_), DecoderKind::Dumer(_)) => {}
            (_, DecoderKind::Dumer(_)) => return bad("needs a binary tree code"),
            (Encoder::Bpsk(t), DecoderKind::FhtMap) if is_first_order_rm(t) => {}
            (_, DecoderKind::FhtMap) => return bad("needs a first-order RM code"),
            (Encoder::Ko(_) | Encoder::KoBinarized(_), DecoderKind::Ko) => {}
            (_, DecoderKind::Ko) => return bad("needs a KO encoder"),
            (_, DecoderKind::Map) => book = Some(encoder.enumerate()?),
            (_, DecoderKind::RandomGuess) => {}
        }
        Ok(Self { encoder, decoder, book })
    }

    pub fn n(&self) -> usize {
        self.encoder.n()
    }

    pub fn k(&self) -> usize {
        self.encoder.k()
    }

    pub fn code_label(&self) -> String {
        self.encoder.label()
    }

    /// Decodes received words. Classical decoders see the channel LLRs
    /// 2y/σ²; the KO decoder sees y itself. Per-leaf records are filled for
    /// tree decoders (Dumer and KO) and left empty otherwise.
    pub fn decode_batch<R: Rng + ?Sized>(&self, ys: &[Vec<f64>], sigma: f64, rng: &mut R) -> Result<Vec<DecodeResult>> {
        self.decode_scaled(ys, 2.0 / (sigma * sigma), rng)
    }

    /// Decodes inputs that are already LLRs (classical decoders) or received
    /// symbols (KO decoder).
    pub fn decode_llrs<R: Rng + ?Sized>(&self, inputs: &[Vec<f64>], rng: &mut R) -> Result<Vec<DecodeResult>> {
        self.decode_scaled(inputs, 1.0, rng)
    }

    fn decode_scaled<R: Rng + ?Sized>(&self, ys: &[Vec<f64>], scale: f64, rng: &mut R) -> Result<Vec<DecodeResult>> {
        let n = self.n();
        for y in ys {
            check_len(n, y.len())?;
        }
        let plain = |message: BitWord| DecodeResult { message, llrs: None, leaves: Vec::new() };
        let llr = |y: &[f64]| -> Vec<f64> { y.iter().map(|v| scale * v).collect() };
        match (&self.encoder, self.decoder) {
            (Encoder::Bpsk(tree), DecoderKind::Dumer(rule)) => {
                ys.iter().map(|y| dumer_decode(tree, &llr(y), rule)).collect()
            }
            (Encoder::Bpsk(tree), DecoderKind::FhtMap) => ys
                .iter()
                .map(|y| {
                    let (cw, _) = fht_map_counted(&llr(y), tree.m(), &mut ());
                    // recover the tree message from the decided codeword
                    let hard: Vec<f64> = bpsk(&cw);
                    Ok(plain(dumer_decode(tree, &hard, LeafRule::HardMap)?.message))
                })
                .collect(),
            (Encoder::Ko(model) | Encoder::KoBinarized(model), DecoderKind::Ko) => {
                if ys.is_empty() {
                    return Ok(Vec::new());
                }
                let data = ys.iter().flatten().copied().collect();
                let l = ko_decode_batch(model, &Tensor::new(ys.len(), n, data)?)?;
                Ok((0..l.rows()).map(|i| decode_result_from_llrs(model, l.row(i))).collect())
            }
            (_, DecoderKind::Map) => {
                let book = self.book.as_ref().expect("codebook built for MAP");
                let k = self.k();
                Ok(ys
                    .iter()
                    .map(|y| plain(BitWord::from_index(nearest_codeword(book, y) as u64, k)))
                    .collect())
            }
            (_, DecoderKind::RandomGuess) => {
                let k = self.k();
                Ok(ys
                    .iter()
                    .map(|_| plain(BitWord::from_raw((0..k).map(|_| rng.random_range(0..2u8)).collect())))
                    .collect())
            }
            _ => unreachable!("validated in Scheme::new"),
        }
    }
}

/// Index maximizing ⟨y, x⟩, lowest on ties. For equal-energy codebooks this
/// is the nearest codeword in Euclidean distance.
pub fn nearest_codeword(book: &[Vec<f64>], y: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, x) in book.iter().enumerate() {
        let s: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Operation count of one decode of the received word `y`. Classical
/// decoders are charged from channel LLRs onward; the LLR scaling itself is
/// not counted.
pub fn count_decode_ops(scheme: &Scheme, y: &[f64], sigma: f64) -> Result<OpCounter> {
    check_len(scheme.n(), y.len())?;
    let mut ops = OpCounter::default();
    let l: Vec<f64> = y.iter().map(|v| 2.0 * v / (sigma * sigma)).collect();
    match (&scheme.encoder, scheme.decoder) {
        (Encoder::Bpsk(tree), DecoderKind::Dumer(rule)) => {
            dumer_decode_counted(tree, &l, rule, &mut ops)?;
        }
        (Encoder::Bpsk(tree), DecoderKind::FhtMap) => {
            fht_map_counted(&l, tree.m(), &mut ops);
        }
        (Encoder::Ko(model) | Encoder::KoBinarized(model), DecoderKind::Ko) => {
            count_ko_decode_ops(model, y, &mut ops)?;
        }
        (_, DecoderKind::Map) => {
            let words = 1usize << scheme.k();
            let n = scheme.n();
            ops.mul(words * n);
            ops.add(words * (n - 1));
            ops.cmp(words);
        }
        (_, DecoderKind::RandomGuess) => {}
        _ => unreachable!("validated in Scheme::new"),
    }
    Ok(ops)
}
