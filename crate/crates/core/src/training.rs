//! Alternating encoder/decoder training and encoder-only training against a
//! fixed Soft-MAP decoder.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{AdamState, Tape, Tensor, Var};
use crate::bits::BitWord;
use crate::channel::{ChannelKind, ChannelModel, DEFAULT_BURST_PROB, DEFAULT_BURST_SIGMA_MULT};
use crate::error::{check_len, Error, Result};
use crate::ko::KoModel;
use crate::rng::{stream_id, stream_rng, SimRng};

/// Largest dimension for encoder-only training, which enumerates the codebook.
pub const MAX_SOFTMAP_TRAIN_K: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    Alternating,
    EncoderOnlySoftMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub dec_steps: usize,
    pub enc_steps: usize,
    pub snr_dec: f64,
    pub snr_enc: f64,
    pub lr_dec: f64,
    pub lr_enc: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub mode: TrainMode,
    pub channel: ChannelKind,
    /// Optional global-norm gradient clip.
    pub grad_clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::full_scale()
    }
}

impl TrainConfig {
    /// Full-scale schedule used for KO(8,2).
    pub fn full_scale() -> Self {
        Self {
            epochs: 2000,
            dec_steps: 500,
            enc_steps: 50,
            snr_dec: -5.0,
            snr_enc: -3.0,
            lr_dec: 1e-4,
            lr_enc: 1e-5,
            batch_size: 50_000,
            seed: 0,
            mode: TrainMode::Alternating,
            channel: ChannelKind::Awgn,
            grad_clip: None,
        }
    }

    /// Desk-scale schedule for small codes.
    pub fn smoke() -> Self {
        Self {
            epochs: 20,
            dec_steps: 50,
            enc_steps: 10,
            snr_dec: 0.0,
            snr_enc: 0.0,
            lr_dec: 1e-3,
            lr_enc: 1e-3,
            batch_size: 500,
            seed: 7,
            ..Self::full_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        if !(self.lr_dec > 0.0 && self.lr_enc > 0.0) {
            return Err(Error::InvalidParameter("learning rates must be positive".into()));
        }
        if !(self.snr_dec.is_finite() && self.snr_enc.is_finite()) {
            return Err(Error::InvalidParameter("training SNRs must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Decoder,
    Encoder,
}

impl Phase {
    fn tag(self) -> u64 {
        match self {
            Phase::Decoder => 0,
            Phase::Encoder => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub epoch: usize,
    pub phase: Phase,
    pub step: usize,
    pub loss: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TrainLog {
    pub records: Vec<StepRecord>,
    pub wall_clock_secs: f64,
    pub checkpoint: Option<String>,
}

impl TrainLog {
    /// CSV with header `epoch,phase,step,loss,grad_norm`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,phase,step,loss,grad_norm\n");
        for r in &self.records {
            let phase = match r.phase {
                Phase::Decoder => "decoder",
                Phase::Encoder => "encoder",
            };
            s.push_str(&format!("{},{phase},{},{:e},{:e}\n", r.epoch, r.step, r.loss, r.grad_norm));
        }
        s
    }
}

/// `b` i.i.d. uniform `k`-bit messages.
pub fn sample_messages<R: Rng + ?Sized>(b: usize, k: usize, rng: &mut R) -> Vec<BitWord> {
    (0..b)
        .map(|_| BitWord::new((0..k).map(|_| rng.random_range(0..2u8)).collect()).expect("bits"))
        .collect()
}

/// Targets tensor (B × k) of message bits.
pub fn message_targets(msgs: &[BitWord]) -> Tensor {
    let k = msgs.first().map_or(0, BitWord::len);
    let data = msgs.iter().flat_map(|m| m.bits().iter().map(|&b| f64::from(b))).collect();
    Tensor::new(msgs.len(), k, data).expect("equal lengths")
}

/// Mean binary cross-entropy of message LLRs against the true bits.
pub fn bce_loss(llrs: &Tensor, msgs: &[BitWord]) -> Result<f64> {
    check_len(llrs.rows(), msgs.len())?;
    let mut tape = Tape::new();
    let l = tape.leaf(llrs.clone());
    let loss = tape.bce(l, message_targets(msgs))?;
    Ok(tape.value(loss).data()[0])
}

fn step_rng(seed: u64, epoch: usize, phase: Phase, step: usize) -> SimRng {
    stream_rng(seed, stream_id(&[epoch as u64, phase.tag(), step as u64]))
}

/// Applies the channel to a taped B × n codeword batch with fresh draws.
pub(crate) fn channel_taped(tape: &mut Tape, x: Var, channel: &ChannelModel, rng: &mut SimRng) -> Result<Var> {
    let (rows, cols) = tape.value(x).shape();
    let mut gains = Vec::with_capacity(rows * cols);
    let mut noise = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let (a, w) = channel.draw_symbol(rng);
        gains.push(a);
        noise.push(w);
    }
    let faded = if gains.iter().all(|&a| a == 1.0) {
        x
    } else {
        let g = tape.leaf(Tensor::new(rows, cols, gains)?);
        tape.mul(x, g)?
    };
    let w = tape.leaf(Tensor::new(rows, cols, noise)?);
    tape.add(faded, w)
}

fn channel_at(cfg: &TrainConfig, snr: f64) -> Result<ChannelModel> {
    ChannelModel::at_snr(cfg.channel, snr, DEFAULT_BURST_PROB, DEFAULT_BURST_SIGMA_MULT)
}

/// Loss and gradients of one alternating-training step.
pub fn alternating_step(
    model: &KoModel,
    msgs: &[BitWord],
    channel: &ChannelModel,
    rng: &mut SimRng,
    phase: Phase,
) -> Result<(f64, Vec<Tensor>)> {
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape);
    let x = model.encode_taped(&mut tape, &bound, msgs)?;
    let y = channel_taped(&mut tape, x, channel, rng)?;
    let l = model.decode_taped(&mut tape, &bound, y)?;
    let loss = tape.bce(l, message_targets(msgs))?;
    let grads = tape.backward(loss)?;
    let vars = match phase {
        Phase::Decoder => bound.decoder_vars(),
        Phase::Encoder => bound.encoder_vars(),
    };
    Ok((tape.value(loss).data()[0], vars.iter().map(|&v| grads.wrt(v)).collect()))
}

/// Loss and encoder gradients of one step against the fixed Soft-MAP
/// decoder over the whole KO codebook, with channel LLRs 2y/σ².
pub fn encoder_softmap_step(
    model: &KoModel,
    msgs: &[BitWord],
    channel: &ChannelModel,
    rng: &mut SimRng,
) -> Result<(f64, Vec<Tensor>)> {
    let k = model.k();
    if k > MAX_SOFTMAP_TRAIN_K {
        return Err(Error::CodebookTooLarge { k, limit: MAX_SOFTMAP_TRAIN_K });
    }
    let all: Vec<BitWord> = (0..1u64 << k).map(|i| BitWord::from_index(i, k)).collect();
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape);
    let book = model.encode_taped(&mut tape, &bound, &all)?;
    let idx: Vec<usize> = msgs.iter().map(|m| m.to_index() as usize).collect();
    let x = tape.gather_rows(book, &idx)?;
    let y = channel_taped(&mut tape, x, channel, rng)?;
    let sigma = channel.sigma();
    let l = tape.scale(y, 2.0 / (sigma * sigma));
    let llr = tape.codebook_max_log(book, l, k)?;
    let loss = tape.bce(llr, message_targets(msgs))?;
    let grads = tape.backward(loss)?;
    let vars = bound.encoder_vars();
    Ok((tape.value(loss).data()[0], vars.iter().map(|&v| grads.wrt(v)).collect()))
}

fn global_norm(grads: &[Tensor]) -> f64 {
    grads.iter().map(Tensor::norm_sq).sum::<f64>().sqrt()
}

fn clip(grads: &mut [Tensor], max_norm: Option<f64>, norm: f64) {
    if let Some(c) = max_norm {
        if norm > c && norm > 0.0 {
            let s = c / norm;
            for g in grads.iter_mut() {
                for v in g.data_mut() {
                    *v *= s;
                }
            }
        }
    }
}

fn shapes(ts: &[&Tensor]) -> Vec<(usize, usize)> {
    ts.iter().map(|t| t.shape()).collect()
}

/// Alternating training: each epoch runs `dec_steps` decoder-only Adam
/// steps at `snr_dec`, then `enc_steps` encoder-only steps at `snr_enc`.
/// Every step draws fresh messages and noise from a stream keyed by
/// (seed, epoch, phase, step).
pub fn train(model: &KoModel, cfg: &TrainConfig) -> Result<(KoModel, TrainLog)> {
    cfg.validate()?;
    if cfg.mode == TrainMode::EncoderOnlySoftMap {
        return train_encoder_only_softmap(model, cfg);
    }
    let start = Instant::now();
    let mut model = model.clone();
    let mut log = TrainLog::default();
    let mut adam_dec = AdamState::new(cfg.lr_dec, &shapes(&model.decoder_params()));
    let mut adam_enc = AdamState::new(cfg.lr_enc, &shapes(&model.encoder_params()));
    let ch_dec = channel_at(cfg, cfg.snr_dec)?;
    let ch_enc = channel_at(cfg, cfg.snr_enc)?;
    for epoch in 0..cfg.epochs {
        for (phase, steps, ch) in [(Phase::Decoder, cfg.dec_steps, &ch_dec), (Phase::Encoder, cfg.enc_steps, &ch_enc)] {
            for step in 0..steps {
                let mut rng = step_rng(cfg.seed, epoch, phase, step);
                let msgs = sample_messages(cfg.batch_size, model.k(), &mut rng);
                let (loss, mut grads) = alternating_step(&model, &msgs, ch, &mut rng, phase)?;
                let norm = global_norm(&grads);
                if !loss.is_finite() || !norm.is_finite() {
                    return Err(Error::NonFiniteLoss { phase: format!("{phase:?}"), step });
                }
                clip(&mut grads, cfg.grad_clip, norm);
                match phase {
                    Phase::Decoder => adam_dec.step(&mut model.decoder_params_mut(), &grads)?,
                    Phase::Encoder => adam_enc.step(&mut model.encoder_params_mut(), &grads)?,
                }
                log.records.push(StepRecord { epoch, phase, step, loss, grad_norm: norm });
            }
        }
    }
    model.lineage.push(format!(
        "alternating seed={} epochs={} dec_steps={} enc_steps={} batch={}",
        cfg.seed, cfg.epochs, cfg.dec_steps, cfg.enc_steps, cfg.batch_size
    ));
    log.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok((model, log))
}

/// Trains only the encoder against the differentiable Soft-MAP decoder of
/// the whole code, for `epochs · enc_steps` steps at `snr_enc`.
pub fn train_encoder_only_softmap(model: &KoModel, cfg: &TrainConfig) -> Result<(KoModel, TrainLog)> {
    cfg.validate()?;
    if model.k() > MAX_SOFTMAP_TRAIN_K {
        return Err(Error::CodebookTooLarge { k: model.k(), limit: MAX_SOFTMAP_TRAIN_K });
    }
    let start = Instant::now();
    let mut model = model.clone();
    let mut log = TrainLog::default();
    let mut adam = AdamState::new(cfg.lr_enc, &shapes(&model.encoder_params()));
    let ch = channel_at(cfg, cfg.snr_enc)?;
    for epoch in 0..cfg.epochs {
        for step in 0..cfg.enc_steps {
            let mut rng = step_rng(cfg.seed, epoch, Phase::Encoder, step);
            let msgs = sample_messages(cfg.batch_size, model.k(), &mut rng);
            let (loss, mut grads) = encoder_softmap_step(&model, &msgs, &ch, &mut rng)?;
            let norm = global_norm(&grads);
            if !loss.is_finite() || !norm.is_finite() {
                return Err(Error::NonFiniteLoss { phase: "Encoder".into(), step });
            }
            clip(&mut grads, cfg.grad_clip, norm);
            adam.step(&mut model.encoder_params_mut(), &grads)?;
            log.records.push(StepRecord { epoch, phase: Phase::Encoder, step, loss, grad_norm: norm });
        }
    }
    model.lineage.push(format!(
        "encoder_only_softmap seed={} epochs={} enc_steps={} batch={}",
        cfg.seed, cfg.epochs, cfg.enc_steps, cfg.batch_size
    ));
    log.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ko::{Init, Profile};

    #[test]
    fn message_sampling() {
        let mut rng = stream_rng(1, 0);
        let msgs = sample_messages(100_000, 1, &mut rng);
        let mean = msgs.iter().map(|m| f64::from(m.bits()[0])).sum::<f64>() / 1e5;
        assert!((0.497..=0.503).contains(&mean), "{mean}");
        assert_eq!(sample_messages(5, 3, &mut stream_rng(2, 0)), sample_messages(5, 3, &mut stream_rng(2, 0)));
        assert_eq!(sample_messages(1, 1, &mut rng)[0].len(), 1);
    }

    #[test]
    fn bce_examples() {
        let msgs = vec![BitWord::new(vec![0, 1]).unwrap()];
        let l = Tensor::row_vector(vec![0.0, 0.0]);
        assert!((bce_loss(&l, &msgs).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let l = Tensor::row_vector(vec![2.0, -2.0]);
        assert!((bce_loss(&l, &msgs).unwrap() - 0.126_928_011_042_972_6).abs() < 1e-12);
    }

    #[test]
    fn zero_epochs_leave_model_unchanged() {
        let model = KoModel::rm(3, 1, Profile::Tiny, Init::Random(1)).unwrap();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::smoke() };
        let (out, log) = train(&model, &cfg).unwrap();
        assert_eq!(out.blocks, model.blocks);
        assert!(log.records.is_empty());
    }

    #[test]
    fn phases_touch_only_their_parameters() {
        let model = KoModel::rm(3, 1, Profile::Tiny, Init::Random(1)).unwrap();
        let dec_only = TrainConfig { epochs: 1, dec_steps: 2, enc_steps: 0, batch_size: 16, ..TrainConfig::smoke() };
        let (out, _) = train(&model, &dec_only).unwrap();
        assert_eq!(out.encoder_params(), model.encoder_params());
        assert_ne!(out.decoder_params(), model.decoder_params());
        let enc_only = TrainConfig { epochs: 1, dec_steps: 0, enc_steps: 2, batch_size: 16, ..TrainConfig::smoke() };
        let (out, _) = train(&model, &enc_only).unwrap();
        assert_eq!(out.decoder_params(), model.decoder_params());
        assert_ne!(out.encoder_params(), model.encoder_params());
    }

    #[test]
    fn encoder_only_mode() {
        let model = KoModel::rm(3, 1, Profile::Tiny, Init::Random(2)).unwrap();
        let ch = ChannelModel::awgn(1.0).unwrap();
        let mut rng = stream_rng(4, 0);
        let msgs = sample_messages(32, 4, &mut rng);
        let (_, grads) = encoder_softmap_step(&model, &msgs, &ch, &mut rng).unwrap();
        // two internal nodes, each block with 4 tensors
        assert_eq!(grads.len(), 8);
        for node in grads.chunks(4) {
            assert!(global_norm(node) > 0.0);
        }
        let big = KoModel::rm(6, 2, Profile::Tiny, Init::Zeros).unwrap();
        assert!(encoder_softmap_step(&big, &msgs, &ch, &mut rng).is_err());
        assert!(KoModel::rm(6, 1, Profile::Tiny, Init::Zeros).is_ok());
    }
}
