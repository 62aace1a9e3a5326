use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use kocodes::channel::{ChannelKind, ChannelModel, DEFAULT_BURST_PROB, DEFAULT_BURST_SIGMA_MULT};
use kocodes::codes::{build_polar_tree, build_rm_tree, polar_spec, rm_spec, CodeSpec};
use kocodes::decoders::LeafRule;
use kocodes::eval::{
    bler_decomposition, count_decode_ops, gaussian_encoder, pairwise_distance_histogram, results_csv,
    simulate_error_rates, DecoderKind, DistanceMode, Encoder, OpCounter, Scheme, SimConfig,
};
use kocodes::ko::{checkpoint_to_string, load_checkpoint, Init, KoCode, KoModel, Profile};
use kocodes::rng::stream_rng;
use kocodes::training::{sample_messages, train, TrainConfig, TrainMode};

use crate::args::*;
use crate::files::{parse_snr_grid, read_blocks, read_messages, write_atomic, write_blocks, write_text};
use crate::{usage, Usage};

/// Stream reserved for drawing Gaussian codebooks.
const GAUSSIAN_STREAM: u64 = 0x6761_7573;
/// Stream for the received word of `analyze opcount`.
const OPCOUNT_STREAM: u64 = 0x6f70_6373;

pub fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Codes(CodesCommand::Info(a)) => codes_info(a, seed, cli.json),
        Command::Encode(a) => encode(a, seed),
        Command::Decode(a) => decode(a, seed),
        Command::Simulate(a) => simulate(a, cli.seed, cli.json),
        Command::Train(a) => train_cmd(a, cli.seed, cli.json),
        Command::Analyze(AnalyzeCommand::PairwiseDistances(a)) => distances(a, seed, cli.json),
        Command::Analyze(AnalyzeCommand::BlerDecomposition(a)) => bler(a, seed, cli.json),
        Command::Analyze(AnalyzeCommand::Opcount(a)) => opcount(a, seed, cli.json),
    }
}

/// Library errors caused by flag values are usage errors; the rest are
/// runtime failures.
fn lib(e: kocodes::Error) -> anyhow::Error {
    use kocodes::Error as E;
    match e {
        E::InvalidParameter(_) | E::CodebookTooLarge { .. } | E::UnsupportedLeaf { .. } | E::LengthMismatch { .. } => {
            anyhow::Error::new(Usage(e.to_string()))
        }
        other => anyhow::Error::new(other),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, what: &str) -> Result<T> {
    match v {
        Some(v) => Ok(v),
        None => usage!("--{flag} is required for {what}"),
    }
}

fn profile(p: ProfileArg) -> Profile {
    match p {
        ProfileArg::Standard => Profile::Standard,
        ProfileArg::Tiny => Profile::Tiny,
    }
}

fn family(a: &CodeArgs) -> Result<Family> {
    if a.checkpoint.is_some() {
        if matches!(a.code, Some(f) if f != Family::Ko) {
            usage!("--checkpoint holds a KO model; drop --code or use --code ko");
        }
        return Ok(Family::Ko);
    }
    match a.code {
        Some(f) => Ok(f),
        None => usage!("--code is required (rm|polar|ko|gaussian)"),
    }
}

fn ko_skeleton(m: Option<usize>, r: Option<usize>, polar: Option<&Vec<usize>>, z0: f64) -> Result<KoCode> {
    match (polar, m, r) {
        (Some(p), None, None) => {
            let spec = polar_spec(p[0], p[1], z0).map_err(lib)?;
            Ok(KoCode::Polar { n: spec.n, active: spec.active })
        }
        (None, Some(m), Some(r)) => Ok(KoCode::Rm { m, r }),
        (Some(_), _, _) => usage!("use either --polar N K or --m/--r for a KO code"),
        _ => usage!("a KO code needs --m and --r, or --polar N K"),
    }
}

fn ko_model(a: &CodeArgs, seed: u64) -> Result<KoModel> {
    if let Some(path) = &a.checkpoint {
        return load_checkpoint(path).with_context(|| format!("loading {}", path.display()));
    }
    let code = ko_skeleton(a.m, a.r, a.polar.as_ref(), a.z0)?;
    let init = match a.init {
        InitArg::Random => Init::Random(seed),
        InitArg::Zeros => Init::Zeros,
    };
    let neuralize = code.default_neuralize();
    KoModel::new(code, profile(a.profile), neuralize, init).map_err(lib)
}

pub fn build_encoder(a: &CodeArgs, seed: u64) -> Result<Encoder> {
    let fam = family(a)?;
    if a.binarize && fam != Family::Ko {
        usage!("--binarize applies to KO codes only");
    }
    Ok(match fam {
        Family::Rm => {
            let m = need(a.m, "m", "RM codes")?;
            let r = need(a.r, "r", "RM codes")?;
            Encoder::Bpsk(build_rm_tree(m, r).map_err(lib)?)
        }
        Family::Polar => {
            let n = need(a.n, "n", "Polar codes")?;
            let k = need(a.k, "k", "Polar codes")?;
            Encoder::Bpsk(build_polar_tree(&polar_spec(n, k, a.z0).map_err(lib)?).map_err(lib)?)
        }
        Family::Ko => {
            let model = ko_model(a, seed)?;
            if a.binarize {
                Encoder::KoBinarized(model)
            } else {
                Encoder::Ko(model)
            }
        }
        Family::Gaussian => {
            let n = need(a.n, "n", "Gaussian codebooks")?;
            let k = need(a.k, "k", "Gaussian codebooks")?;
            gaussian_encoder(n, k, &mut stream_rng(seed, GAUSSIAN_STREAM)).map_err(lib)?
        }
    })
}

fn default_decoder(a: &CodeArgs) -> Result<DecoderKind> {
    Ok(match family(a)? {
        Family::Rm | Family::Polar => DecoderKind::Dumer(LeafRule::HardMap),
        Family::Ko => DecoderKind::Ko,
        Family::Gaussian => DecoderKind::Map,
    })
}

fn build_scheme(a: &CodeArgs, decoder: Option<&str>, seed: u64) -> Result<Scheme> {
    let kind = match decoder {
        Some(d) => d.parse().map_err(lib)?,
        None => default_decoder(a)?,
    };
    Scheme::new(build_encoder(a, seed)?, kind).map_err(lib)
}

fn channel_kind(s: Option<&str>) -> Result<ChannelKind> {
    match s {
        Some(s) => s.parse().map_err(lib),
        None => Ok(ChannelKind::Awgn),
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn spec_of(enc: &Encoder, a: &CodeArgs) -> Result<Option<CodeSpec>> {
    Ok(match enc {
        Encoder::Bpsk(_) => match family(a)? {
            Family::Rm => Some(rm_spec(a.m.unwrap_or(0), a.r.unwrap_or(0)).map_err(lib)?),
            _ => Some(polar_spec(a.n.unwrap_or(0), a.k.unwrap_or(0), a.z0).map_err(lib)?.code_spec()),
        },
        Encoder::Ko(m) | Encoder::KoBinarized(m) => Some(m.code.spec().map_err(lib)?),
        Encoder::Codebook { .. } => None,
    })
}

fn codes_info(a: &CodeArgs, seed: u64, as_json: bool) -> Result<()> {
    let enc = build_encoder(a, seed)?;
    let spec = spec_of(&enc, a)?;
    let (n, k) = (enc.n(), enc.k());
    let d = match &enc {
        // nonlinear codes have no single minimum distance
        Encoder::Bpsk(_) => spec.as_ref().and_then(|s| s.min_distance),
        _ => None,
    };
    let tree = enc.tree();
    let params = match &enc {
        Encoder::Ko(m) | Encoder::KoBinarized(m) => Some(m.param_count()),
        _ => None,
    };
    if as_json {
        let tree_json = match tree {
            Some(t) => serde_json::from_str(&t.to_json().map_err(lib)?)?,
            None => serde_json::Value::Null,
        };
        print_json(&json!({
            "code": enc.label(),
            "n": n,
            "k": k,
            "rate": k as f64 / n as f64,
            "min_distance": d,
            "parameters": params,
            "tree_hash": tree.map(|t| t.structure_hash()),
            "tree": tree_json,
        }));
        return Ok(());
    }
    println!("code  {}", enc.label());
    println!("n     {n}");
    println!("k     {k}");
    println!("rate  {k}/{n} = {:.6}", k as f64 / n as f64);
    match d {
        Some(d) => println!("d     {d}"),
        None => println!("d     n/a"),
    }
    if let Some(p) = params {
        println!("neural parameters  {p}");
    }
    if let Some(t) = tree {
        println!("Plotkin tree ({} leaves, decoding order):", t.leaves().len());
        print!("{}", t.render());
    }
    Ok(())
}

fn encode(a: &EncodeArgs, seed: u64) -> Result<()> {
    let enc = build_encoder(&a.code, seed)?;
    let msgs = read_messages(&a.input, enc.k())?;
    let rows = enc.encode_batch(&msgs).map_err(lib)?;
    write_blocks(&a.out, &rows, a.format)
}

fn decode(a: &DecodeArgs, seed: u64) -> Result<()> {
    let scheme = build_scheme(&a.code, a.decoder.as_deref(), seed)?;
    let inputs = read_blocks(&a.input, scheme.n(), a.format)?;
    let out = scheme.decode_llrs(&inputs, &mut stream_rng(seed, 0)).map_err(lib)?;
    let mut body = String::new();
    for d in out {
        body.push_str(&d.message.to_string());
        body.push('\n');
    }
    write_text(&a.out, &body)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow::Error::new(Usage(format!("{}: {e}", path.display()))))
}

fn simulate(a: &SimulateArgs, seed: Option<u64>, as_json: bool) -> Result<()> {
    let mut cfg: SimConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = &a.snr {
        cfg.snr_db = parse_snr_grid(s).map_err(Usage)?;
    } else if a.config.is_none() {
        usage!("--snr is required (lo:step:hi or a single value)");
    }
    if let Some(c) = &a.channel.channel {
        cfg.channel = c.parse().map_err(lib)?;
    }
    if let Some(p) = a.channel.burst_prob {
        cfg.burst_prob = p;
    }
    if let Some(m) = a.channel.burst_sigma_mult {
        cfg.burst_sigma_mult = m;
    }
    if let Some(b) = a.blocks {
        cfg.min_blocks = b;
        cfg.max_blocks = cfg.max_blocks.max(b);
    }
    if let Some(e) = a.min_block_errors {
        cfg.min_block_errors = e;
    }
    if let Some(m) = a.max_blocks {
        cfg.max_blocks = m;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let scheme = build_scheme(&a.code, a.decoder.as_deref(), cfg.seed)?;
    let results = simulate_error_rates(&scheme, &cfg).map_err(lib)?;
    if let Some(out) = &a.out {
        write_text(out, &results_csv(&results))?;
    }
    if as_json {
        print_json(&serde_json::to_value(&results)?);
    } else {
        println!("{} / {} over {}, seed {}", scheme.code_label(), scheme.decoder.name(), cfg.channel.name(), cfg.seed);
        println!("{:>8} {:>9} {:>12} {:>12} {:>10} {:>10}", "snr_db", "blocks", "ber", "bler", "ber_se", "bler_se");
        for r in &results {
            println!(
                "{:>8} {:>9} {:>12.4e} {:>12.4e} {:>10.2e} {:>10.2e}",
                r.snr_db, r.blocks, r.ber, r.bler, r.ber_se, r.bler_se
            );
        }
    }
    Ok(())
}

fn train_cmd(a: &TrainArgs, seed: Option<u64>, as_json: bool) -> Result<()> {
    if a.resume.is_none() && a.code != Some(Family::Ko) {
        usage!("train needs --code ko (or --resume CHECKPOINT)");
    }
    let mut cfg: TrainConfig = match &a.config {
        Some(p) => read_json(p)?,
        None if a.full_scale => TrainConfig::full_scale(),
        None => TrainConfig::smoke(),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = a.$field { cfg.$field = v; })*};
    }
    set!(epochs, dec_steps, enc_steps, snr_dec, snr_enc, lr_dec, lr_enc, batch_size);
    if a.grad_clip.is_some() {
        cfg.grad_clip = a.grad_clip;
    }
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::Alternating => TrainMode::Alternating,
            ModeArg::EncoderOnlySoftmap => TrainMode::EncoderOnlySoftMap,
        };
    }
    if a.channel.is_some() {
        cfg.channel = channel_kind(a.channel.as_deref())?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(lib)?;
    let model = match &a.resume {
        Some(p) => load_checkpoint(p).with_context(|| format!("loading {}", p.display()))?,
        None => {
            let code = ko_skeleton(a.m, a.r, a.polar.as_ref(), a.z0)?;
            let neuralize = code.default_neuralize();
            KoModel::new(code, profile(a.profile), neuralize, Init::Random(cfg.seed)).map_err(lib)?
        }
    };
    let (trained, log) = train(&model, &cfg).map_err(lib)?;
    if let Some(p) = &a.checkpoint {
        write_atomic(p, checkpoint_to_string(&trained).map_err(lib)?.as_bytes())?;
    }
    if let Some(p) = &a.log {
        write_text(p, &log.to_csv())?;
    }
    let last = |phase| log.records.iter().rev().find(|r| r.phase == phase).map(|r| r.loss);
    use kocodes::training::Phase;
    if as_json {
        print_json(&json!({
            "code": trained.label(),
            "parameters": trained.param_count(),
            "steps": log.records.len(),
            "final_decoder_loss": last(Phase::Decoder),
            "final_encoder_loss": last(Phase::Encoder),
            "wall_clock_secs": log.wall_clock_secs,
            "config": cfg,
        }));
    } else {
        println!("{} ({} parameters): {} steps in {:.1} s", trained.label(), trained.param_count(), log.records.len(), log.wall_clock_secs);
        if let Some(l) = last(Phase::Decoder) {
            println!("final decoder-phase loss {l:.6}");
        }
        if let Some(l) = last(Phase::Encoder) {
            println!("final encoder-phase loss {l:.6}");
        }
    }
    Ok(())
}

fn distances(a: &DistanceArgs, seed: u64, as_json: bool) -> Result<()> {
    let enc = build_encoder(&a.code, seed)?;
    let mode = match a.mode {
        DistanceModeArg::Exhaustive => DistanceMode::Exhaustive,
        DistanceModeArg::Random => DistanceMode::RandomPairs(a.pairs),
    };
    let h = pairwise_distance_histogram(&enc, mode, a.bins, &mut stream_rng(seed, 0)).map_err(lib)?;
    if let Some(out) = &a.out {
        write_text(out, &h.csv())?;
    }
    if as_json {
        print_json(&serde_json::to_value(&h)?);
    } else {
        println!("{}: {} pairs, mean distance {:.6} (√(2n) = {:.6})", enc.label(), h.pairs, h.mean, (2.0 * enc.n() as f64).sqrt());
        let edges = h.edges();
        for (i, &c) in h.counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            println!("[{:>9.4}, {:>9.4})  {c}", edges[i], edges[i + 1]);
        }
    }
    Ok(())
}

fn channel_model(c: &ChannelArgs, snr: f64) -> Result<ChannelModel> {
    ChannelModel::at_snr(
        channel_kind(c.channel.as_deref())?,
        snr,
        c.burst_prob.unwrap_or(DEFAULT_BURST_PROB),
        c.burst_sigma_mult.unwrap_or(DEFAULT_BURST_SIGMA_MULT),
    )
    .map_err(lib)
}

fn bler(a: &BlerArgs, seed: u64, as_json: bool) -> Result<()> {
    let scheme = build_scheme(&a.code, a.decoder.as_deref(), seed)?;
    let ch = channel_model(&a.channel, a.snr)?;
    let d = bler_decomposition(&scheme, &ch, a.blocks, seed).map_err(lib)?;
    if let Some(out) = &a.out {
        write_text(out, &d.csv())?;
    }
    if as_json {
        print_json(&serde_json::to_value(&d)?);
    } else {
        println!("{} / {} at {} dB: {} blocks, BLER {:.6}", scheme.code_label(), scheme.decoder.name(), a.snr, d.blocks, d.bler);
        println!("{:>5} {:<14} {:>9} {:>12} {:>10}", "leaf", "code", "bits", "first errs", "share");
        for l in &d.leaves {
            println!(
                "{:>5} {:<14} {:>9} {:>12} {:>10.6}",
                l.index,
                l.label,
                format!("{}..{}", l.msg_start, l.msg_end),
                l.first_errors,
                l.share
            );
        }
        let total: u64 = d.leaves.iter().map(|l| l.first_errors).sum();
        println!("sum of shares {:.6} ({total} of {} erroneous blocks)", total as f64 / d.blocks as f64, d.block_errors);
    }
    Ok(())
}

fn opcount(a: &OpcountArgs, seed: u64, as_json: bool) -> Result<()> {
    let scheme = build_scheme(&a.code, a.decoder.as_deref(), seed)?;
    let ch = ChannelModel::awgn(kocodes::channel::snr_to_sigma(a.snr)).map_err(lib)?;
    let mut rng = stream_rng(seed, OPCOUNT_STREAM);
    let msg = sample_messages(1, scheme.k(), &mut rng).remove(0);
    let mut y = scheme.encoder.encode_batch(std::slice::from_ref(&msg)).map_err(lib)?.remove(0);
    ch.corrupt_in_place(&mut y, &mut rng);
    let ops = count_decode_ops(&scheme, &y, ch.sigma()).map_err(lib)?;
    let mut rows = vec![(format!("{} / {}", scheme.code_label(), scheme.decoder.name()), ops)];
    // KO codes are compared against the classical decoder of their skeleton
    if let Encoder::Ko(m) | Encoder::KoBinarized(m) = &scheme.encoder {
        let base = Scheme::new(Encoder::Bpsk(m.tree.clone()), DecoderKind::Dumer(LeafRule::HardMap)).map_err(lib)?;
        let base_ops = count_decode_ops(&base, &y, ch.sigma()).map_err(lib)?;
        rows.push((format!("{} / dumer", m.tree.label), base_ops));
    }
    let ratio = (rows.len() == 2).then(|| rows[0].1.total() as f64 / rows[1].1.total() as f64);
    if as_json {
        let entries: Vec<_> = rows
            .iter()
            .map(|(name, o)| json!({"decoder": name, "counts": o, "total": o.total()}))
            .collect();
        print_json(&json!({"counts": entries, "ratio": ratio}));
    } else {
        println!("{:<28} {:>10} {:>10} {:>10} {:>10} {:>11}", "decoder", "add", "mul", "cmp", "exp/log", "total");
        for (name, o) in &rows {
            let o: &OpCounter = o;
            println!("{name:<28} {:>10} {:>10} {:>10} {:>10} {:>11}", o.add, o.mul, o.cmp, o.exp_log, o.total());
        }
        if let Some(r) = ratio {
            println!("ratio {r:.2}");
        }
    }
    Ok(())
}
