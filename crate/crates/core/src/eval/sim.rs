//! Monte-Carlo BER/BLER estimation and per-leaf BLER decomposition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::channel::{sigma_to_snr, ChannelKind, ChannelModel, DEFAULT_BURST_PROB, DEFAULT_BURST_SIGMA_MULT};
use crate::error::{Error, Result};
use crate::eval::scheme::Scheme;
use crate::rng::{stream_id, stream_rng};
use crate::training::sample_messages;

/// Blocks simulated per RNG stream.
pub const CHUNK_BLOCKS: u64 = 256;
/// Chunks per early-stopping round after the minimum budget.
const ROUND_CHUNKS: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub snr_db: Vec<f64>,
    pub channel: ChannelKind,
    pub burst_prob: f64,
    pub burst_sigma_mult: f64,
    pub min_blocks: u64,
    /// Keep simulating until this many block errors (0 disables).
    pub min_block_errors: u64,
    pub max_blocks: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0],
            channel: ChannelKind::Awgn,
            burst_prob: DEFAULT_BURST_PROB,
            burst_sigma_mult: DEFAULT_BURST_SIGMA_MULT,
            min_blocks: 10_000,
            min_block_errors: 100,
            max_blocks: 1_000_000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn fixed(snr_db: Vec<f64>, blocks: u64, seed: u64) -> Self {
        Self { snr_db, min_blocks: blocks, min_block_errors: 0, max_blocks: blocks, seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.min_blocks == 0 {
            return Err(Error::InvalidParameter("min_blocks must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::InvalidParameter("empty SNR grid".into()));
        }
        Ok(())
    }

    fn channel_at(&self, snr: f64) -> Result<ChannelModel> {
        ChannelModel::at_snr(self.channel, snr, self.burst_prob, self.burst_sigma_mult)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub snr_db: f64,
    pub blocks: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    pub ber_se: f64,
    pub bler_se: f64,
    pub code: String,
    pub decoder: String,
    pub channel: String,
    pub seed: u64,
}

pub const RESULTS_HEADER: &str = "snr_db,blocks,bit_errors,block_errors,ber,bler,ber_se,bler_se,code,decoder,channel,seed";

impl SimResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:e},{:e},{:e},{:e},{},{},{},{}",
            self.snr_db,
            self.blocks,
            self.bit_errors,
            self.block_errors,
            self.ber,
            self.bler,
            self.ber_se,
            self.bler_se,
            self.code,
            self.decoder,
            self.channel,
            self.seed
        )
    }
}

pub fn results_csv(results: &[SimResult]) -> String {
    let mut s = format!("{RESULTS_HEADER}\n");
    for r in results {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Binomial standard error sqrt(p(1−p)/trials).
pub fn standard_error(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        (p * (1.0 - p) / trials as f64).sqrt()
    }
}

/// Transmitted messages and decoder outputs of one chunk.
struct Chunk {
    truth: Vec<BitWord>,
    decoded: Vec<crate::decoders::DecodeResult>,
}

fn run_chunk(scheme: &Scheme, ch: &ChannelModel, seed: u64, point: u64, chunk: u64, blocks: u64) -> Result<Chunk> {
    let mut rng = stream_rng(seed, stream_id(&[point, chunk]));
    let truth = sample_messages(blocks as usize, scheme.k(), &mut rng);
    let mut ys = scheme.encoder.encode_batch(&truth)?;
    for y in &mut ys {
        ch.corrupt_in_place(y, &mut rng);
    }
    let decoded = scheme.decode_batch(&ys, ch.sigma(), &mut rng)?;
    Ok(Chunk { truth, decoded })
}

#[derive(Clone, Copy, Default)]
struct Tally {
    blocks: u64,
    bit_errors: u64,
    block_errors: u64,
}

impl Tally {
    fn add(&mut self, t: &Tally) {
        self.blocks += t.blocks;
        self.bit_errors += t.bit_errors;
        self.block_errors += t.block_errors;
    }

    fn sub(&mut self, t: &Tally) {
        self.blocks -= t.blocks;
        self.bit_errors -= t.bit_errors;
        self.block_errors -= t.block_errors;
    }
}

fn tally(c: &Chunk) -> Tally {
    let mut t = Tally { blocks: c.truth.len() as u64, ..Tally::default() };
    for (m, d) in c.truth.iter().zip(&c.decoded) {
        let errs = m.bits().iter().zip(d.message.bits()).filter(|(a, b)| a != b).count() as u64;
        t.bit_errors += errs;
        t.block_errors += u64::from(errs > 0);
    }
    t
}

/// Runs chunks `first..last` (block range `[first·C, limit)`) in parallel and
/// folds them in chunk order.
fn run_range<T: Send>(
    first: u64,
    last: u64,
    limit: u64,
    f: impl Fn(u64, u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (first..last)
        .into_par_iter()
        .map(|c| {
            let size = (limit - c * CHUNK_BLOCKS).min(CHUNK_BLOCKS);
            f(c, size)
        })
        .collect()
}

/// Estimates BER and BLER at every SNR of the grid. Each point simulates
/// `min_blocks`, then continues in fixed rounds until `min_block_errors` is
/// reached or `max_blocks` is exhausted. Chunk streams depend only on
/// (seed, SNR index, chunk index), so results do not depend on the thread
/// count.
pub fn simulate_error_rates(scheme: &Scheme, cfg: &SimConfig) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    let max_blocks = cfg.max_blocks.max(cfg.min_blocks);
    let k = scheme.k() as u64;
    cfg.snr_db
        .iter()
        .enumerate()
        .map(|(point, &snr)| {
            let ch = cfg.channel_at(snr)?;
            let mut total = Tally::default();
            let mut limit = cfg.min_blocks;
            let mut done_chunks = 0;
            loop {
                let last = limit.div_ceil(CHUNK_BLOCKS);
                let parts = run_range(done_chunks, last, limit, |c, size| {
                    Ok(tally(&run_chunk(scheme, &ch, cfg.seed, point as u64, c, size)?))
                })?;
                for t in &parts {
                    total.add(t);
                }
                done_chunks = last;
                if total.block_errors >= cfg.min_block_errors || limit >= max_blocks {
                    break;
                }
                // a trailing partial chunk is redrawn at full size
                if let Some(t) = parts.last().filter(|t| t.blocks < CHUNK_BLOCKS) {
                    total.sub(t);
                    done_chunks -= 1;
                }
                limit = (last * CHUNK_BLOCKS + ROUND_CHUNKS * CHUNK_BLOCKS).min(max_blocks);
            }
            let ber = if k == 0 { 0.0 } else { total.bit_errors as f64 / (total.blocks * k) as f64 };
            let bler = total.block_errors as f64 / total.blocks as f64;
            Ok(SimResult {
                snr_db: snr,
                blocks: total.blocks,
                bit_errors: total.bit_errors,
                block_errors: total.block_errors,
                ber,
                bler,
                ber_se: standard_error(ber, total.blocks * k),
                bler_se: standard_error(bler, total.blocks),
                code: scheme.code_label(),
                decoder: scheme.decoder.name().to_string(),
                channel: cfg.channel.name().to_string(),
                seed: cfg.seed,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafContribution {
    /// Leaf position in decoding order.
    pub index: usize,
    pub label: String,
    pub msg_start: usize,
    pub msg_end: usize,
    /// Blocks in which this leaf is the first erroneous leaf.
    pub first_errors: u64,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlerDecomposition {
    pub snr_db: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub leaves: Vec<LeafContribution>,
}

impl BlerDecomposition {
    pub fn csv(&self) -> String {
        let mut s = String::from("leaf,label,msg_start,msg_end,first_errors,share\n");
        for l in &self.leaves {
            s.push_str(&format!(
                "{},{},{},{},{},{:e}\n",
                l.index, l.label, l.msg_start, l.msg_end, l.first_errors, l.share
            ));
        }
        s
    }
}

/// Splits the block errors of a tree decoder by the first leaf (in decoding
/// order) whose decoded sub-message is wrong. The per-leaf counts partition
/// the erroneous blocks, so their shares sum to the BLER.
pub fn bler_decomposition(scheme: &Scheme, ch: &ChannelModel, blocks: u64, seed: u64) -> Result<BlerDecomposition> {
    if blocks == 0 {
        return Err(Error::InvalidParameter("blocks must be at least 1".into()));
    }
    let tree = scheme
        .encoder
        .tree()
        .filter(|_| matches!(scheme.decoder, crate::eval::DecoderKind::Dumer(_) | crate::eval::DecoderKind::Ko))
        .ok_or_else(|| Error::InvalidParameter("BLER decomposition needs a tree decoder".into()))?;
    let leaves = tree.message_leaves();
    let parts = run_range(0, blocks.div_ceil(CHUNK_BLOCKS), blocks, |c, size| {
        let chunk = run_chunk(scheme, ch, seed, 0, c, size)?;
        let mut first = vec![0u64; leaves.len()];
        let mut block_errors = 0u64;
        for (m, d) in chunk.truth.iter().zip(&chunk.decoded) {
            if m != &d.message {
                block_errors += 1;
            }
            if let Some(pos) = d.leaves.iter().position(|rec| m.slice(rec.msg.clone()) != rec.bits) {
                first[pos] += 1;
            }
        }
        Ok((first, block_errors))
    })?;
    let mut first = vec![0u64; leaves.len()];
    let mut block_errors = 0;
    for (f, e) in parts {
        for (a, b) in first.iter_mut().zip(f) {
            *a += b;
        }
        block_errors += e;
    }
    Ok(BlerDecomposition {
        snr_db: sigma_to_snr(ch.sigma()),
        blocks,
        block_errors,
        bler: block_errors as f64 / blocks as f64,
        leaves: leaves
            .iter()
            .zip(first)
            .map(|(info, count)| LeafContribution {
                index: info.index,
                label: info.kind.label(),
                msg_start: info.msg.start,
                msg_end: info.msg.end,
                first_errors: count,
                share: count as f64 / blocks as f64,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_rm_tree;
    use crate::decoders::LeafRule;
    use crate::eval::{DecoderKind, Encoder};

    fn rm31(decoder: DecoderKind) -> Scheme {
        Scheme::new(Encoder::Bpsk(build_rm_tree(3, 1).unwrap()), decoder).unwrap()
    }

    #[test]
    fn noiseless_point_is_error_free() {
        let s = rm31(DecoderKind::Dumer(LeafRule::HardMap));
        let r = simulate_error_rates(&s, &SimConfig::fixed(vec![40.0], 10_000, 1)).unwrap();
        assert_eq!((r[0].blocks, r[0].bit_errors, r[0].block_errors), (10_000, 0, 0));
    }

    #[test]
    fn random_guess_calibration() {
        let s = rm31(DecoderKind::RandomGuess);
        let r = &simulate_error_rates(&s, &SimConfig::fixed(vec![0.0], 5_000, 3)).unwrap()[0];
        assert!((r.ber - 0.5).abs() < 3.0 * r.ber_se, "{r:?}");
        assert!((r.bler - 15.0 / 16.0).abs() < 3.0 * r.bler_se);
    }

    #[test]
    fn early_stopping_and_reproducibility() {
        let s = rm31(DecoderKind::Dumer(LeafRule::HardMap));
        let cfg = SimConfig {
            snr_db: vec![4.0, -4.0],
            min_blocks: 300,
            min_block_errors: 200,
            max_blocks: 100_000,
            seed: 9,
            ..SimConfig::default()
        };
        let a = simulate_error_rates(&s, &cfg).unwrap();
        assert!(a[0].block_errors >= 200 || a[0].blocks == 100_000);
        assert!(a[0].blocks > 300);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_error_rates(&s, &cfg).unwrap());
        assert_eq!(a, b);
        assert!(simulate_error_rates(&s, &SimConfig { min_blocks: 0, ..cfg.clone() }).is_err());
        assert!(simulate_error_rates(&s, &SimConfig { snr_db: vec![], ..cfg }).is_err());
    }

    #[test]
    fn partial_first_round_reaches_the_cap() {
        let s = rm31(DecoderKind::Dumer(LeafRule::HardMap));
        let cfg = SimConfig {
            snr_db: vec![30.0],
            min_blocks: 2_000,
            min_block_errors: 1,
            max_blocks: 40_000,
            seed: 2,
            ..SimConfig::default()
        };
        assert_eq!(simulate_error_rates(&s, &cfg).unwrap()[0].blocks, 40_000);
    }

    #[test]
    fn decomposition_partitions_block_errors() {
        let s = Scheme::new(Encoder::Bpsk(build_rm_tree(5, 2).unwrap()), DecoderKind::Dumer(LeafRule::HardMap)).unwrap();
        let at = |snr| ChannelModel::awgn(crate::channel::snr_to_sigma(snr)).unwrap();
        let d = bler_decomposition(&s, &at(-2.0), 2_000, 5).unwrap();
        assert!((d.snr_db + 2.0).abs() < 1e-12);
        assert!(d.block_errors > 0);
        assert_eq!(d.leaves.iter().map(|l| l.first_errors).sum::<u64>(), d.block_errors);
        let quiet = bler_decomposition(&s, &at(40.0), 500, 5).unwrap();
        assert!(quiet.leaves.iter().all(|l| l.first_errors == 0));
        assert!(bler_decomposition(&rm31(DecoderKind::Map), &at(0.0), 10, 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = rm31(DecoderKind::Dumer(LeafRule::HardMap));
        let r = simulate_error_rates(&s, &SimConfig::fixed(vec![0.0, 2.0], 256, 1)).unwrap();
        let csv = results_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], RESULTS_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,256,"));
        assert!(lines[1].ends_with(",RM(3,1),dumer,awgn,1"));
    }
}
