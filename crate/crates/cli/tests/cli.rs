use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn kocodes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kocodes")).args(args).output().expect("spawn kocodes")
}

fn ok(args: &[&str]) -> String {
    let out = kocodes(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut v = vec!["--json"];
    v.extend_from_slice(args);
    serde_json::from_str(&ok(&v)).unwrap()
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(kocodes(&["--help"]).status.code(), Some(0));
    assert_eq!(kocodes(&["--version"]).status.code(), Some(0));
    assert_eq!(kocodes(&["codes", "info", "--bogus"]).status.code(), Some(2));
    assert_eq!(kocodes(&["codes", "info"]).status.code(), Some(2));
    assert_eq!(kocodes(&["codes", "info", "--code", "rm", "--m", "3"]).status.code(), Some(2));
    assert_eq!(kocodes(&["codes", "info", "--code", "rm", "--m", "3", "--r", "9"]).status.code(), Some(2));
    assert_eq!(kocodes(&["codes", "info", "--code", "polar", "--n", "12", "--k", "3"]).status.code(), Some(2));
    assert_eq!(kocodes(&["simulate", "--code", "rm", "--m", "3", "--r", "1", "--snr", "1:0:2"]).status.code(), Some(2));
    let missing = kocodes(&["encode", "--code", "rm", "--m", "3", "--r", "1", "--in", "/nonexistent/msgs", "--out", "/tmp/x"]);
    assert_eq!(missing.status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    let bad = kocodes(&["codes", "info", "--checkpoint", &p(&dir, "bad.json")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn rm_8_2_info() {
    let text = ok(&["codes", "info", "--code", "rm", "--m", "8", "--r", "2"]);
    for needle in ["n     256", "k     37", "rate  37/256", "d     64", "RM(7,1)"] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
    let v = json(&["codes", "info", "--code", "rm", "--m", "8", "--r", "2"]);
    assert_eq!((v["n"].as_u64(), v["k"].as_u64(), v["min_distance"].as_u64()), (Some(256), Some(37), Some(64)));
    let polar = json(&["codes", "info", "--code", "polar", "--n", "64", "--k", "7"]);
    assert_eq!(polar["min_distance"].as_u64(), Some(16));
    let ko = json(&["codes", "info", "--code", "ko", "--m", "8", "--r", "2"]);
    assert_eq!(ko["k"].as_u64(), Some(37));
    assert!(ko["min_distance"].is_null());
    assert!(ko["parameters"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_grid_writes_one_row_per_snr() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "r.csv");
    ok(&[
        "simulate", "--code", "rm", "--m", "3", "--r", "1", "--decoder", "dumer", "--channel", "awgn", "--snr",
        "0:2:6", "--blocks", "10000", "--seed", "7", "--out", &out,
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# kocodes "));
    let lines = data_lines(Path::new(&out));
    assert_eq!(lines.len(), 5, "{text}");
    assert!(lines[0].starts_with("snr_db,"));
    let snrs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(snrs, vec![0.0, 2.0, 4.0, 6.0]);
}

#[test]
fn outputs_are_reproducible_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, threads: &str| {
        let out = p(&dir, name);
        ok(&[
            "simulate", "--code", "rm", "--m", "5", "--r", "2", "--snr", "-2:1:0", "--blocks", "3000",
            "--max-blocks", "3000", "--seed", "11", "--threads", threads, "--out", &out,
        ]);
        data_lines(Path::new(&out))
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn encode_then_decode_recovers_messages() {
    let dir = TempDir::new().unwrap();
    let msgs = "# messages\n010110\n111111\n000000\n\n100001\n";
    std::fs::write(dir.path().join("m.txt"), msgs).unwrap();
    let code = ["--code", "rm", "--m", "5", "--r", "1"];
    let (msgs, short) = (p(&dir, "m.txt"), p(&dir, "short.txt"));
    for (format, decoder) in [("csv", "dumer"), ("f64le", "fht-map"), ("csv", "map"), ("csv", "dumer-softmap")] {
        let sym = p(&dir, &format!("c.{format}"));
        let dec = p(&dir, "d.txt");
        let mut enc = vec!["encode", "--in", &msgs, "--out", &sym, "--format", format];
        enc.extend_from_slice(&code);
        ok(&enc);
        let mut d = vec!["decode", "--decoder", decoder, "--in", &sym, "--out", &dec, "--format", format];
        d.extend_from_slice(&code);
        ok(&d);
        assert_eq!(data_lines(Path::new(&dec)), vec!["010110", "111111", "000000", "100001"], "{decoder}");
    }
    // wrong message length is a runtime input error
    std::fs::write(dir.path().join("short.txt"), "0101\n").unwrap();
    let mut enc = vec!["encode", "--in", &short];
    let out = p(&dir, "never.csv");
    enc.extend_from_slice(&["--out", &out]);
    enc.extend_from_slice(&code);
    assert_eq!(kocodes(&enc).status.code(), Some(1));
    assert!(!Path::new(&out).exists());
}

#[test]
fn usage_errors_leave_no_output() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "r.csv");
    let bad = kocodes(&["simulate", "--code", "rm", "--m", "3", "--r", "1", "--snr", "zero", "--out", &out]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = kocodes(&["simulate", "--code", "rm", "--m", "3", "--r", "1", "--decoder", "ko", "--snr", "0", "--out", &out]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!Path::new(&out).exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn train_writes_checkpoint_and_log() {
    let dir = TempDir::new().unwrap();
    let (ckpt, log) = (p(&dir, "ko.json"), p(&dir, "log.csv"));
    let train = [
        "train", "--code", "ko", "--m", "3", "--r", "1", "--profile", "tiny", "--epochs", "2", "--dec-steps",
        "3", "--enc-steps", "1", "--batch-size", "32", "--seed", "5", "--checkpoint", &ckpt, "--log", &log,
    ];
    let summary = ok(&train);
    assert!(summary.contains("steps"), "{summary}");
    let rows = data_lines(Path::new(&log));
    assert_eq!(rows[0], "epoch,phase,step,loss,grad_norm");
    assert_eq!(rows.len(), 1 + 2 * (3 + 1));
    let first = std::fs::read(&ckpt).unwrap();
    ok(&train);
    assert_eq!(std::fs::read(&ckpt).unwrap(), first, "checkpoint must be byte-identical across runs");

    let info = json(&["codes", "info", "--checkpoint", &ckpt]);
    assert_eq!((info["n"].as_u64(), info["k"].as_u64()), (Some(8), Some(4)));
    let sim = json(&["simulate", "--checkpoint", &ckpt, "--snr", "0", "--blocks", "500", "--max-blocks", "500"]);
    assert_eq!(sim[0]["blocks"].as_u64(), Some(500));
    let resumed = kocodes(&["train", "--resume", &ckpt, "--epochs", "1", "--dec-steps", "1", "--enc-steps", "1"]);
    assert!(resumed.status.success());

    assert_eq!(kocodes(&["train", "--code", "rm", "--m", "3", "--r", "1"]).status.code(), Some(2));
    assert_eq!(kocodes(&["train", "--code", "ko", "--m", "3", "--r", "1", "--lr-dec", "-1"]).status.code(), Some(2));
}

#[test]
fn analyze_commands() {
    let dir = TempDir::new().unwrap();
    let hist = p(&dir, "h.csv");
    let h = json(&["analyze", "pairwise-distances", "--code", "rm", "--m", "4", "--r", "1", "--bins", "10", "--out", &hist]);
    assert_eq!(h["pairs"].as_u64(), Some(32 * 31 / 2));
    let rows = data_lines(Path::new(&hist));
    assert_eq!(rows[0], "bin_lo,bin_hi,count,normalized");
    assert_eq!(rows.len(), 11);
    let g = json(&[
        "analyze", "pairwise-distances", "--code", "gaussian", "--n", "16", "--k", "8", "--mode", "random",
        "--pairs", "500",
    ]);
    assert_eq!(g["pairs"].as_u64(), Some(500));

    let d = json(&["analyze", "bler-decomposition", "--code", "rm", "--m", "8", "--r", "2", "--snr", "-5", "--blocks", "600"]);
    let leaves = d["leaves"].as_array().unwrap();
    assert_eq!(leaves.len(), 7);
    let shares: f64 = leaves.iter().map(|l| l["share"].as_f64().unwrap()).sum();
    assert!((shares - d["bler"].as_f64().unwrap()).abs() < 1e-12);
    let firsts: u64 = leaves.iter().map(|l| l["first_errors"].as_u64().unwrap()).sum();
    assert_eq!(firsts, d["block_errors"].as_u64().unwrap());

    let o = json(&["analyze", "opcount", "--code", "rm", "--m", "6", "--r", "2"]);
    assert!(o["counts"][0]["total"].as_u64().unwrap() > 0);
    assert!(o["ratio"].is_null());
    let ko = json(&["analyze", "opcount", "--code", "ko", "--m", "6", "--r", "2", "--profile", "tiny"]);
    assert_eq!(ko["counts"].as_array().unwrap().len(), 2);
    assert!(ko["ratio"].as_f64().unwrap() > 1.0);
}
