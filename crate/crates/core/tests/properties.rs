//! Cross-module invariants checked on random inputs.

use kocodes::autodiff::{AdamState, Tensor};
use kocodes::bits::BitWord;
use kocodes::channel::{channel_llr, modulate_normalize, ChannelInput, ChannelModel};
use kocodes::codes::{build_polar_tree, build_rm_tree, polar_encode, polar_spec, PlotkinTree};
use kocodes::decoders::{dumer_decode, fht, fht_map_decode_rm1, map_decode, LeafRule};
use kocodes::eval::standard_error;
use kocodes::ko::{ko_encode, Init, KoModel, Profile};
use kocodes::rng::stream_rng;
use kocodes::training::{bce_loss, sample_messages};
use proptest::prelude::*;

fn word(len: usize) -> impl Strategy<Value = BitWord> {
    proptest::collection::vec(0u8..=1, len).prop_map(|b| BitWord::new(b).unwrap())
}

fn bpsk(c: &BitWord) -> Vec<f64> {
    c.bits().iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}

fn tree(name: &str) -> PlotkinTree {
    match name {
        "polar" => build_polar_tree(&polar_spec(64, 7, 0.5).unwrap()).unwrap(),
        rm => {
            let (m, r) = (rm.as_bytes()[0] - b'0', rm.as_bytes()[1] - b'0');
            build_rm_tree(m as usize, r as usize).unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fht_is_self_inverse_up_to_n(l in proptest::collection::vec(-20.0f64..20.0, 32)) {
        let twice = fht(&fht(&l).unwrap()).unwrap();
        for (a, b) in twice.iter().zip(&l) {
            prop_assert!((a - 32.0 * b).abs() <= 1e-9 * (32.0 * b.abs()).max(1.0));
        }
    }

    #[test]
    fn fht_map_agrees_with_brute_force(m in 2usize..=6, seed in any::<u64>()) {
        let t = build_rm_tree(m, 1).unwrap();
        let book = t.codebook().unwrap();
        let mut rng = stream_rng(seed, 0);
        let l: Vec<f64> = (0..1 << m).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let (cw, _) = fht_map_decode_rm1(&l, m).unwrap();
        prop_assert_eq!(cw, book[map_decode(&book, &l).unwrap()].clone());
    }

    #[test]
    fn channel_llr_is_linear_and_odd(
        y in proptest::collection::vec(-5.0f64..5.0, 16),
        z in proptest::collection::vec(-5.0f64..5.0, 16),
        sigma in 0.1f64..3.0,
    ) {
        let sum: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a + b).collect();
        let neg: Vec<f64> = y.iter().map(|a| -a).collect();
        let (ly, lz) = (channel_llr(&y, sigma).unwrap(), channel_llr(&z, sigma).unwrap());
        let (ls, ln) = (channel_llr(&sum, sigma).unwrap(), channel_llr(&neg, sigma).unwrap());
        for i in 0..16 {
            prop_assert!((ls[i] - ly[i] - lz[i]).abs() <= 1e-9 * (1.0 + ls[i].abs()));
            prop_assert_eq!(ln[i], -ly[i]);
        }
    }

    #[test]
    fn normalized_codewords_meet_the_power_constraint(c in proptest::collection::vec(-4.0f64..4.0, 1..64)) {
        prop_assume!(c.iter().any(|v| v.abs() > 1e-6));
        let x = modulate_normalize(ChannelInput::Real(&c)).unwrap();
        let n = c.len() as f64;
        prop_assert!((x.energy() - n).abs() <= 1e-9 * n);
    }

    #[test]
    fn polar_matrix_and_tree_encoders_agree(msg in word(7)) {
        let spec = polar_spec(64, 7, 0.5).unwrap();
        prop_assert_eq!(polar_encode(&spec, &msg).unwrap(), build_polar_tree(&spec).unwrap().encode(&msg).unwrap());
    }

    #[test]
    fn noiseless_dumer_is_exact(
        code in prop::sample::select(vec!["31", "41", "42", "52", "63", "polar"]),
        seed in any::<u64>(),
    ) {
        let t = tree(code);
        let msg = sample_messages(1, t.k, &mut stream_rng(seed, 1)).remove(0);
        let l = bpsk(&t.encode(&msg).unwrap());
        for rule in [LeafRule::HardMap, LeafRule::SoftMap] {
            prop_assert_eq!(&dumer_decode(&t, &l, rule).unwrap().message, &msg);
        }
    }

    #[test]
    fn leaf_records_locate_every_block_error(seed in any::<u64>(), snr in -4.0f64..2.0) {
        let t = build_rm_tree(5, 2).unwrap();
        let mut rng = stream_rng(seed, 2);
        let msg = sample_messages(1, t.k, &mut rng).remove(0);
        let ch = ChannelModel::awgn(kocodes::channel::snr_to_sigma(snr)).unwrap();
        let mut y = bpsk(&t.encode(&msg).unwrap());
        ch.corrupt_in_place(&mut y, &mut rng);
        let l = channel_llr(&y, ch.sigma()).unwrap();
        let d = dumer_decode(&t, &l, LeafRule::HardMap).unwrap();
        let leaf_wrong = d.leaves.iter().any(|r| r.bits != msg.slice(r.msg.clone()));
        prop_assert_eq!(leaf_wrong, d.message != msg);
    }

    #[test]
    fn ko_codewords_have_unit_average_power(seed in any::<u64>(), msg in word(11)) {
        let model = KoModel::rm(4, 2, Profile::Tiny, Init::Random(seed)).unwrap();
        let x = ko_encode(&model, &msg).unwrap();
        prop_assert!((x.energy() - 16.0).abs() <= 1e-9 * 16.0);
    }

    #[test]
    fn init_is_a_pure_function_of_the_seed(seed in any::<u64>()) {
        let a = KoModel::rm(3, 1, Profile::Tiny, Init::Random(seed)).unwrap();
        let b = KoModel::rm(3, 1, Profile::Tiny, Init::Random(seed)).unwrap();
        prop_assert_eq!(a.encoder_params(), b.encoder_params());
        prop_assert_eq!(a.decoder_params(), b.decoder_params());
    }

    #[test]
    fn adam_with_zero_gradients_is_identity(vals in proptest::collection::vec(-3.0f64..3.0, 6), lr in 1e-5f64..1e-1) {
        let mut p = Tensor::new(2, 3, vals.clone()).unwrap();
        let mut adam = AdamState::new(lr, &[(2, 3)]);
        adam.step(&mut [&mut p], &[Tensor::zeros(2, 3)]).unwrap();
        prop_assert_eq!(p, Tensor::new(2, 3, vals).unwrap());
    }

    #[test]
    fn bce_is_nonnegative(llrs in proptest::collection::vec(-40.0f64..40.0, 12), msgs in proptest::collection::vec(word(4), 3)) {
        let t = Tensor::new(3, 4, llrs).unwrap();
        prop_assert!(bce_loss(&t, &msgs).unwrap() >= 0.0);
    }

    #[test]
    fn standard_error_formula(p in 0.0f64..=1.0, trials in 1u64..1_000_000) {
        let se = standard_error(p, trials);
        prop_assert!((se - (p * (1.0 - p) / trials as f64).sqrt()).abs() <= 1e-15);
    }
}

#[test]
fn bce_vanishes_only_with_confident_correct_llrs() {
    let msgs = vec![BitWord::new(vec![0, 1]).unwrap()];
    // positive LLR favours bit 0
    let confident = Tensor::new(1, 2, vec![60.0, -60.0]).unwrap();
    let unsure = Tensor::new(1, 2, vec![1.0, -1.0]).unwrap();
    assert!(bce_loss(&confident, &msgs).unwrap() < 1e-9);
    assert!(bce_loss(&unsure, &msgs).unwrap() > 0.1);
}
